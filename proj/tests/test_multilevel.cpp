#include <catch_amalgamated.hpp>

#include <sstream>

#include "helpers.hpp"

using namespace psmilu;
using testing::max_abs_diff;
namespace ref = psmilu::reference;

namespace {

std::vector<Index> iota_vec(Index n) {
  std::vector<Index> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

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

std::vector<double> random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Factor pieces of one level in dense, positional form.
struct DenseLevel {
  DenseMatrix<double> b, c, e, f, l_b, u_b, l_e, u_f;
  std::vector<double> d;
};

DenseLevel dense_level(const CRS<double>& a_pos, const CroutResult<double>& r) {
  DenseLevel out;
  auto full = to_dense(a_pos);
  Index n = r.n, m = r.m;
  out.b = ref::block(full, 0, m, 0, m);
  out.f = ref::block(full, 0, m, m, n);
  out.e = ref::block(full, m, n, 0, m);
  out.c = ref::block(full, m, n, m, n);
  out.l_b = to_dense(r.L_B);
  out.u_b = to_dense(r.U_B);
  for (Index i = 0; i < m; ++i) out.l_b(i, i) = out.u_b(i, i) = 1;
  out.l_e = to_dense(r.L_E);
  out.u_f = to_dense(r.U_F);
  out.d = r.d_B;
  return out;
}

}  // namespace

TEST_CASE("identity gives one level with an empty Schur block", "[multilevel]") {
  TripletList<double> t(10, 10);
  for (Index i = 0; i < 10; ++i) t.add(i, i, 1);
  auto prec = psmilu_factor(crs_from_triplets(t), 10);
  REQUIRE(prec.levels.size() == 1);
  CHECK(prec.levels[0].m == 10);
  CHECK(prec.dense_size() == 0);
  CHECK(prec.fill_ratio() == 1.0);
  auto b = random_vector(10, 1);
  CHECK(psmilu_solve(prec, std::span<const double>(b)) == b);
}

TEST_CASE("2x2 zero diagonal goes entirely to the dense level", "[multilevel]") {
  auto a = from_dense({{0, 1}, {1, 0}});
  auto prec = psmilu_factor(a, 2);
  REQUIRE(prec.levels.size() == 1);
  CHECK(prec.levels[0].m == 0);
  CHECK(prec.dense_size() == 2);
  std::vector<double> b{1, 2};
  auto y = psmilu_solve(prec, std::span<const double>(b));
  CHECK(y[0] == Catch::Approx(2));
  CHECK(y[1] == Catch::Approx(1));
}

TEST_CASE("solve rejects a wrong length", "[multilevel]") {
  auto prec = psmilu_factor(from_dense({{2, 0}, {0, 3}}), 2);
  std::vector<double> b{1, 2, 3};
  CHECK_THROWS_AS(psmilu_solve(prec, std::span<const double>(b)), Error);
}

TEST_CASE("FDM 32x32 fill ratio", "[multilevel]") {
  auto sys = fdm_poisson_2d(32, 32);
  auto prec = psmilu_factor(sys.a, sys.m);
  CHECK(prec.levels.size() >= 1);
  CHECK(prec.fill_ratio() >= 1.5);
  CHECK(prec.fill_ratio() <= 6.0);
  CHECK(prec.levels[0].stats.symmetric);
}

TEST_CASE("S-version Schur examples", "[schur]") {
  SECTION("2x2 hand example") {
    auto a = from_dense({{4, 1}, {1, 3}});
    auto r = iludp_factor(a, iota_vec(2), iota_vec(2), 1, true, Options::no_dropping());
    REQUIRE(r.m == 1);
    auto c = extract_block(a, std::span<const Index>(r.p), std::span<const Index>(invert_permutation(r.q)), 1, 2, 1, 2);
    auto s = compute_schur_s(c, r.L_E, std::span<const double>(r.d_B), r.U_F);
    CHECK(s.at(0, 0) == Catch::Approx(2.75));
  }
  SECTION("tridiagonal n = 3, m = 2") {
    auto a = from_dense({{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}});
    auto r = iludp_factor(a, iota_vec(3), iota_vec(3), 2, true, Options::no_dropping());
    REQUIRE(r.m == 2);
    auto c = from_dense({{2}});
    auto s = compute_schur_s(c, r.L_E, std::span<const double>(r.d_B), r.U_F);
    CHECK(s.at(0, 0) == Catch::Approx(4.0 / 3));
    CHECK(s.at(0, 0) == Catch::Approx(ref::exact_schur(to_dense(a), 2)(0, 0)));
  }
  SECTION("zero L_E leaves C") {
    auto c = from_dense({{1, 2}, {3, 4}});
    CCS<double> le = crs_to_ccs(CRS<double>(2, 1));
    auto uf = from_dense({{5, 6}});
    std::vector<double> d{2};
    auto s = compute_schur_s(c, le, std::span<const double>(d), uf);
    CHECK(max_abs_diff(to_dense(s), to_dense(c)) == 0);
  }
}

TEST_CASE("H-version agrees with S in the exact limit and with C for empty couplings", "[schur]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Index n = 12, m = 9;
    auto a = random_test_matrix(n, 0.3, RandomKind::nonsymmetric, seed);
    auto r = iludp_factor(a, iota_vec(n), iota_vec(n), m, false, Options::no_dropping());
    REQUIRE(r.m == m);
    auto qi = invert_permutation(r.q);
    std::span<const Index> p(r.p), q(qi);
    auto b = extract_block(a, p, q, 0, m, 0, m);
    auto c = extract_block(a, p, q, m, n, m, n);
    SchurBlocks<double> blk{&b, &c, &r.L_B, &r.L_E, &r.d_B, &r.U_B, &r.U_F};
    auto s = to_dense(compute_schur_s(blk));
    auto exact = ref::exact_schur(testing::positional(a, r.p, r.q), m);
    CHECK(max_abs_diff(s, exact) < 1e-12);
    CHECK(max_abs_diff(compute_schur_h(blk, HybridForm::formula), s) < 1e-12);
    // dense T-version oracle coincides too
    auto dl = dense_level(permute(a, p, std::span<const Index>(r.q)), r);
    auto t = ref::dense_schur_t_version(dl.b, dl.e, dl.f, dl.c, dl.l_b, dl.u_b, dl.l_e, dl.u_f);
    CHECK(max_abs_diff(t, exact) < 1e-12);
  }
  SECTION("empty couplings") {
    auto b = from_dense({{2, 1}, {1, 2}});
    auto c = from_dense({{7}});
    auto lb = crs_to_ccs(from_dense({{0, 0}, {0.5, 0}}));
    CCS<double> le = crs_to_ccs(CRS<double>(1, 2));
    auto ub = from_dense({{0, 0.5}, {0, 0}});
    auto uf = from_dense({{1}, {1}});
    std::vector<double> d{2, 1.5};
    SchurBlocks<double> blk{&b, &c, &lb, &le, &d, &ub, &uf};
    CHECK(compute_schur_h(blk)(0, 0) == 7);
  }
}

TEST_CASE("dense LU examples", "[dense]") {
  SECTION("identity") {
    auto f = dense_lu_pivot(DenseMatrix<double>::identity(3));
    CHECK(f.piv == std::vector<Index>{0, 1, 2});
  }
  SECTION("anti-diagonal needs one swap") {
    DenseMatrix<double> a(2, 2);
    a(0, 1) = a(1, 0) = 1;
    auto f = dense_lu_pivot(a);
    CHECK(f.piv[0] == 1);
    std::vector<double> b{1, 2};
    CHECK(f.solve(std::span<const double>(b)) == std::vector<double>{2, 1});
  }
  SECTION("random residual") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 10; ++rep) {
      auto a = testing::random_dense_sparse(8, 8, 1.0, rng);
      auto f = dense_lu_pivot(a);
      DenseMatrix<double> l = DenseMatrix<double>::identity(8), u(8, 8);
      for (Index i = 0; i < 8; ++i)
        for (Index j = 0; j < 8; ++j) (j < i ? l(i, j) : u(i, j)) = f.lu(i, j);
      DenseMatrix<double> pa = a;
      for (Index k = 0; k < 8; ++k)
        for (Index j = 0; j < 8; ++j) std::swap(pa(k, j), pa(f.piv[k], j));
      CHECK(ref::frobenius_distance(pa, ref::matmul(l, u)) <= 1e-13 * a.frobenius_norm());
    }
  }
  SECTION("singular names the level") {
    DenseMatrix<double> a(2, 2);
    a(0, 0) = 1;
    try {
      dense_lu_pivot(a, 3);
      FAIL("expected singular error");
    } catch (const SingularError& e) {
      CHECK(e.level() == 3);
    }
  }
}

TEST_CASE("exact-limit multilevel solve reproduces the dense solve", "[multilevel][property]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Index n = 10 + static_cast<Index>(seed % 3) * 10;
    bool sym = seed % 2 == 0;
    auto a = random_test_matrix(n, 0.2, sym ? RandomKind::symmetric_indefinite : RandomKind::nonsymmetric,
                                seed);
    Options o = Options::no_dropping();
    o.c_d = 0;  // keep recursing until the Schur complement fills in
    o.rho = 0.5;
    Index m0 = sym ? n : 0;
    if (seed % 4 == 0) m0 = n / 2;
    auto prec = psmilu_factor(a, m0, o);
    auto b = random_vector(n, seed + 100);
    auto y = psmilu_solve(prec, std::span<const double>(b));
    auto x = ref::solve(to_dense(a), b);
    CHECK(testing::rel_diff(y, x) <= 1e-10);
  }
}

TEST_CASE("preconditioner application is linear", "[multilevel]") {
  auto sys = fdm_poisson_2d(20, 20);
  auto prec = psmilu_factor(sys.a, sys.m);
  Index n = sys.a.n_rows;
  auto x = random_vector(n, 1), z = random_vector(n, 2);
  std::vector<double> comb(n);
  for (Index i = 0; i < n; ++i) comb[i] = 2 * x[i] - 3 * z[i];
  auto yx = psmilu_solve(prec, std::span<const double>(x));
  auto yz = psmilu_solve(prec, std::span<const double>(z));
  auto yc = psmilu_solve(prec, std::span<const double>(comb));
  std::vector<double> want(n);
  for (Index i = 0; i < n; ++i) want[i] = 2 * yx[i] - 3 * yz[i];
  CHECK(testing::rel_diff(yc, want) < 1e-12);
}

TEST_CASE("multilevel recursion telescopes", "[multilevel]") {
  // forcing several sparse levels, the fill total is the sum over levels
  auto sys = fdm_poisson_2d(24, 24);
  Options o;
  o.tau_kappa = 3;  // frequent deferrals
  o.c_d = 0;
  auto prec = psmilu_factor(sys.a, sys.m, o);
  REQUIRE(prec.levels.size() >= 2);
  Index total = 0;
  for (const auto& lv : prec.levels) total += lv.nnz();
  CHECK(total == prec.nnz());
  for (std::size_t l = 0; l + 1 < prec.levels.size(); ++l) {
    CHECK(prec.levels[l + 1].n == prec.levels[l].n - prec.levels[l].m);
    CHECK_FALSE(prec.levels[l].dense.has_value());
  }
  CHECK(prec.levels.back().dense.has_value());
  auto b = random_vector(sys.a.n_rows, 3);
  auto y = psmilu_solve(prec, std::span<const double>(b));
  for (double v : y) CHECK(std::isfinite(v));
}

TEST_CASE("serialization round trip is exact", "[serialize]") {
  auto sys = fdm_poisson_2d(16, 16);
  Options o;
  o.c_d = 0;
  o.tau_kappa = 3;
  auto prec = psmilu_factor(sys.a, sys.m, o);
  std::stringstream ss;
  write_preconditioner(ss, prec);
  auto back = read_preconditioner(ss);
  REQUIRE(back.levels.size() == prec.levels.size());
  CHECK(back.nnz() == prec.nnz());
  CHECK(back.nnz_input == prec.nnz_input);
  auto b = random_vector(sys.a.n_rows, 8);
  CHECK(psmilu_solve(back, std::span<const double>(b)) == psmilu_solve(prec, std::span<const double>(b)));

  std::stringstream bad("NOTAPREC");
  CHECK_THROWS_AS(read_preconditioner(bad), Error);
  std::string s = ss.str();
  std::stringstream truncated(s.substr(0, s.size() / 2));
  CHECK_THROWS_AS(read_preconditioner(truncated), Error);
}
