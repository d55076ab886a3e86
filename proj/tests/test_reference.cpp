#include <catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace psmilu;
namespace ref = psmilu::reference;

TEST_CASE("triangular inverse norms", "[reference]") {
  CHECK(ref::dense_inf_norm_inverse(DenseMatrix<double>::identity(4)) == 1);
  DenseMatrix<double> l = DenseMatrix<double>::identity(4);
  for (Index i = 1; i < 4; ++i) l(i, i - 1) = -1;
  CHECK(ref::dense_inf_norm_inverse(l) == 4);
  DenseMatrix<double> two = DenseMatrix<double>::identity(3);
  for (Index i = 0; i < 3; ++i) two(i, i) = 2;
  CHECK(ref::dense_inf_norm_inverse(two) == 0.5);
  DenseMatrix<double> sing(2, 2);
  sing(0, 0) = 1;
  CHECK_THROWS_AS(ref::dense_inf_norm_inverse(sing), SingularError);
}

TEST_CASE("dense LDU reference", "[reference]") {
  SECTION("identity") {
    auto r = ref::dense_ldu_reference(DenseMatrix<double>::identity(3), 3, true, 10.0, 100.0);
    CHECK(r.m_final == 3);
    CHECK(r.d == std::vector<double>{1, 1, 1});
    CHECK(r.pivots == 0);
  }
  SECTION("2x2 zero diagonal") {
    DenseMatrix<double> a(2, 2);
    a(0, 1) = a(1, 0) = 1;
    CHECK(ref::dense_ldu_reference(a, 2, true, 10.0, 100.0).m_final == 0);
  }
  SECTION("residual of the reference itself") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto a = to_dense(random_test_matrix(20, 0.25, RandomKind::nonsymmetric, seed));
      auto r = ref::dense_ldu_reference(a, 20, false, 1e30, 1e30);
      REQUIRE(r.m_final == 20);
      DenseMatrix<double> pa(20, 20);
      for (Index i = 0; i < 20; ++i)
        for (Index j = 0; j < 20; ++j) pa(i, j) = a(r.perm[i], r.perm[j]);
      auto ldu = ref::matmul(r.L, ref::matmul(ref::diag(r.d), r.U));
      CHECK(ref::frobenius_distance(ldu, pa) <= 1e-13 * pa.frobenius_norm());
    }
  }
}

TEST_CASE("Schur oracles agree in the exact limit", "[reference]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Index n = 12, m = 9;
    auto a = to_dense(random_test_matrix(n, 0.3, RandomKind::nonsymmetric, seed));
    auto r = ref::dense_ldu_reference(a, m, false, 1e30, 1e30);
    REQUIRE(r.m_final == m);
    auto l_b = ref::block(r.L, 0, m, 0, m), l_e = ref::block(r.L, m, n, 0, m);
    auto u_b = ref::block(r.U, 0, m, 0, m), u_f = ref::block(r.U, 0, m, m, n);
    auto exact = ref::exact_schur(a, m);
    auto s = ref::dense_schur_s_version(ref::block(a, m, n, m, n), l_e, r.d, u_f);
    auto t = ref::dense_schur_t_version(ref::block(a, 0, m, 0, m), ref::block(a, m, n, 0, m),
                                        ref::block(a, 0, m, m, n), ref::block(a, m, n, m, n), l_b, u_b,
                                        l_e, u_f);
    CHECK(testing::max_abs_diff(s, exact) < 1e-12);
    CHECK(testing::max_abs_diff(t, exact) < 1e-12);
  }
  SECTION("zero couplings give C") {
    auto c = DenseMatrix<double>::identity(2);
    DenseMatrix<double> zero_e(2, 2), zero_f(2, 2);
    auto id = DenseMatrix<double>::identity(2);
    auto t = ref::dense_schur_t_version(id, zero_e, zero_f, c, id, id, zero_e, zero_f);
    CHECK(testing::max_abs_diff(t, c) == 0);
  }
}
