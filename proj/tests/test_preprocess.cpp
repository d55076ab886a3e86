#include <catch_amalgamated.hpp>

#include <set>

#include "helpers.hpp"

using namespace psmilu;

namespace {

CRS<double> from_dense(std::initializer_list<std::initializer_list<double>> rows) {
  Index n = static_cast<Index>(rows.size());
  DenseMatrix<double> d(n, static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) d(i, j++) = v;
    ++i;
  }
  return to_crs(d);
}

CRS<double> grid_laplacian(Index side) {
  TripletList<double> t(side * side, side * side);
  auto id = [side](Index x, Index y) { return y * side + x; };
  for (Index y = 0; y < side; ++y)
    for (Index x = 0; x < side; ++x) {
      t.add(id(x, y), id(x, y), 4);
      if (x > 0) t.add(id(x, y), id(x - 1, y), -1);
      if (x + 1 < side) t.add(id(x, y), id(x + 1, y), -1);
      if (y > 0) t.add(id(x, y), id(x, y - 1), -1);
      if (y + 1 < side) t.add(id(x, y), id(x, y + 1), -1);
    }
  return crs_from_triplets(t);
}

// Fill of symbolic Cholesky on the pattern permuted by `perm` (new -> old).
Index symbolic_fill(const CRS<double>& a, const std::vector<Index>& perm) {
  Index n = a.n_rows;
  auto inv = invert_permutation(perm);
  std::vector<std::set<Index>> adj(n);
  for (Index i = 0; i < n; ++i)
    for (Index p = a.row_start[i]; p < a.row_start[i + 1]; ++p)
      if (a.col_ind[p] != i) adj[inv[i]].insert(inv[a.col_ind[p]]);
  Index fill = 0;
  for (Index k = 0; k < n; ++k) {
    std::vector<Index> higher;
    for (Index j : adj[k])
      if (j > k) higher.push_back(j);
    for (std::size_t x = 0; x < higher.size(); ++x)
      for (std::size_t y = x + 1; y < higher.size(); ++y)
        if (adj[higher[x]].insert(higher[y]).second) {
          adj[higher[y]].insert(higher[x]);
          ++fill;
        }
  }
  return fill;
}

Index bandwidth(const CRS<char>& g, const std::vector<Index>& perm) {
  auto inv = invert_permutation(perm);
  Index bw = 0;
  for (Index i = 0; i < g.n_rows; ++i)
    for (Index p = g.row_start[i]; p < g.row_start[i + 1]; ++p)
      bw = std::max(bw, std::abs(inv[i] - inv[g.col_ind[p]]));
  return bw;
}

}  // namespace

TEST_CASE("equilibrate diagonal examples", "[preprocess]") {
  auto sc = equilibrate(from_dense({{4, 0}, {0, 9}}), true);
  CHECK(sc.s[0] == Catch::Approx(0.5));
  CHECK(sc.s[1] == Catch::Approx(1.0 / 3));
  CHECK(sc.s == sc.t);

  auto id = equilibrate(from_dense({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), false);
  CHECK(id.s == std::vector<double>{1, 1, 1});
  CHECK(id.t == std::vector<double>{1, 1, 1});
}

TEST_CASE("equilibrated rows and columns have max magnitude in [1/2, 1]", "[preprocess][property]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (bool sym : {false, true}) {
      auto kind = sym ? RandomKind::symmetric_indefinite : RandomKind::nonsymmetric;
      auto a = random_test_matrix(30, 0.15, kind, seed);
      // spread the magnitudes over many orders
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> e(-6, 6);
      std::vector<double> r(30);
      for (auto& v : r) v = std::pow(10.0, e(rng));
      a = sym ? scale(a, std::span<const double>(r), std::span<const double>(r))
              : scale(a, std::span<const double>(r), std::span<const double>(std::vector<double>(30, 1.0)));
      auto sc = equilibrate(a, sym);
      auto b = scale(a, std::span<const double>(sc.s), std::span<const double>(sc.t));
      std::vector<double> rmax(30, 0), cmax(30, 0);
      for (Index i = 0; i < 30; ++i)
        for (Index p = b.row_start[i]; p < b.row_start[i + 1]; ++p) {
          rmax[i] = std::max(rmax[i], std::abs(b.val[p]));
          cmax[b.col_ind[p]] = std::max(cmax[b.col_ind[p]], std::abs(b.val[p]));
        }
      for (Index i = 0; i < 30; ++i) {
        CHECK(rmax[i] <= 1 + 1e-14);
        CHECK(rmax[i] >= 0.5);
        CHECK(cmax[i] <= 1 + 1e-14);
        CHECK(cmax[i] >= 0.5);
      }
      if (sym) CHECK(sc.s == sc.t);
    }
  }
}

TEST_CASE("equilibrate rejects empty rows", "[preprocess]") {
  CHECK_THROWS_AS(equilibrate(from_dense({{1, 0}, {0, 0}}), false), StructuralError);
}

TEST_CASE("greedy matching", "[preprocess]") {
  SECTION("anti-diagonal") {
    auto m = greedy_diag_match(from_dense({{0, 1}, {1, 0}}));
    CHECK(m.q == std::vector<Index>{1, 0});
    CHECK(m.unmatched.empty());
  }
  SECTION("identity stays put when dominant") {
    auto m = greedy_diag_match(from_dense({{3, 1, 0}, {1, 3, 1}, {0, 1, 3}}));
    CHECK(m.q == std::vector<Index>{0, 1, 2});
  }
  SECTION("random permutation matrices are inverted") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<Index> perm(12);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      TripletList<double> t(12, 12);
      for (Index i = 0; i < 12; ++i) t.add(i, perm[i], 1.0 + static_cast<double>(i));
      auto m = greedy_diag_match(crs_from_triplets(t));
      CHECK(m.q == perm);
    }
  }
  SECTION("repair step finds the full transversal") {
    // row 0 grabs column 0 greedily; row 1 only has column 0
    auto m = greedy_diag_match(from_dense({{5, 1}, {1, 0}}));
    CHECK(m.q == std::vector<Index>{1, 0});
    CHECK(m.unmatched.empty());
  }
}

TEST_CASE("rcm ordering", "[preprocess]") {
  SECTION("diagonal matrix keeps a valid permutation") {
    TripletList<double> t(5, 5);
    for (Index i = 0; i < 5; ++i) t.add(i, i, 1);
    auto perm = symmetric_reorder(crs_from_triplets(t));
    CHECK(psmilu::is_permutation(std::span<const Index>(perm)));
  }
  SECTION("scrambled path graph gets bandwidth one") {
    Index n = 20;
    std::vector<Index> lab(n);
    std::iota(lab.begin(), lab.end(), 0);
    std::mt19937_64 rng(2);
    std::shuffle(lab.begin(), lab.end(), rng);
    TripletList<double> t(n, n);
    for (Index i = 0; i < n; ++i) {
      t.add(lab[i], lab[i], 2);
      if (i + 1 < n) {
        t.add(lab[i], lab[i + 1], -1);
        t.add(lab[i + 1], lab[i], -1);
      }
    }
    auto a = crs_from_triplets(t);
    auto perm = symmetric_reorder(a);
    CHECK(bandwidth(symmetrized_pattern(a), perm) == 1);
  }
  SECTION("8x8 grid fill does not exceed natural order") {
    auto a = grid_laplacian(8);
    std::vector<Index> natural(64);
    std::iota(natural.begin(), natural.end(), 0);
    auto perm = symmetric_reorder(a);
    REQUIRE(psmilu::is_permutation(std::span<const Index>(perm)));
    CHECK(symbolic_fill(a, perm) <= symbolic_fill(a, natural));
  }
  SECTION("disconnected components are all visited") {
    auto a = from_dense({{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}, {0, 0, 1, 1}});
    auto perm = symmetric_reorder(a);
    CHECK(psmilu::is_permutation(std::span<const Index>(perm)));
    CHECK(bandwidth(symmetrized_pattern(a), perm) == 1);
  }
}

TEST_CASE("deferral of dense and weak rows", "[preprocess]") {
  SECTION("arrow matrix moves the dense row last") {
    Index n = 40;
    TripletList<double> t(n, n);
    for (Index i = 0; i < n; ++i) {
      t.add(i, i, 1);
      if (i != 3) {
        t.add(3, i, 0.1);
        t.add(i, 3, 0.1);
      }
    }
    PreprocessOptions o;
    o.dense_row_factor = 5;
    auto r = defer_special_rows(crs_from_triplets(t), n, o);
    CHECK(r.n_dense == 1);
    CHECK(r.order.back() == 3);
    CHECK(r.m == n - 1);
  }
  SECTION("two zero diagonals are deferred behind the leading block") {
    auto a = from_dense({{0, 1, 0, 0}, {1, 2, 1, 0}, {0, 1, 0, 1}, {0, 0, 1, 2}});
    auto r = defer_special_rows(a, 4);
    CHECK(r.m == 2);
    CHECK(r.n_weak == 2);
    CHECK(r.order == std::vector<Index>{1, 3, 0, 2});
  }
}

TEST_CASE("preprocess invariants", "[preprocess][property]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SECTION("symmetric path seed " + std::to_string(seed)) {
      auto a = random_test_matrix(25, 0.2, RandomKind::symmetric_indefinite, seed);
      Index m0 = 20;
      auto r = preprocess(a, m0);
      REQUIRE(psmilu::is_permutation(std::span<const Index>(r.p)));
      REQUIRE(psmilu::is_permutation(std::span<const Index>(r.q)));
      CHECK(r.symmetric);
      CHECK(r.p == r.q);
      CHECK(r.m <= m0);
      for (Index i = 0; i < m0; ++i) CHECK(r.s[i] == r.t[i]);
      // the leading positions come from the leading block only
      for (Index i = 0; i < r.m; ++i) CHECK(r.p[i] < m0);
      // the scaled positional leading block is exactly symmetric
      auto scaled = scale(a, std::span<const double>(r.s), std::span<const double>(r.t));
      auto pos = testing::positional(scaled, r.p, r.q);
      for (Index i = 0; i < r.m; ++i)
        for (Index j = 0; j < r.m; ++j) CHECK(pos(i, j) == pos(j, i));
    }
    SECTION("nonsymmetric path seed " + std::to_string(seed)) {
      auto a = random_test_matrix(25, 0.2, RandomKind::nonsymmetric, seed);
      auto r = preprocess(a, 0);
      REQUIRE(psmilu::is_permutation(std::span<const Index>(r.p)));
      REQUIRE(psmilu::is_permutation(std::span<const Index>(r.q)));
      CHECK_FALSE(r.symmetric);
      // scaling commutes with permutation: diag(s[p]) A[p,q] diag(t[q]) both ways
      auto scaled = scale(a, std::span<const double>(r.s), std::span<const double>(r.t));
      auto lhs = testing::positional(scaled, r.p, r.q);
      auto pa = testing::positional(a, r.p, r.q);
      for (Index i = 0; i < 25; ++i)
        for (Index j = 0; j < 25; ++j)
          CHECK(lhs(i, j) == Catch::Approx(r.s[r.p[i]] * pa(i, j) * r.t[r.q[j]]).margin(1e-15));
    }
  }
}

TEST_CASE("preprocess rejects bad leading sizes", "[preprocess]") {
  auto a = from_dense({{1, 0}, {0, 1}});
  CHECK_THROWS_AS(preprocess(a, 3), Error);
  CHECK_THROWS_AS(preprocess(a, -1), Error);
}
