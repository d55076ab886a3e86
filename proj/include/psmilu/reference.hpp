#pragma once

#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "psmilu/common.hpp"
#include "psmilu/dense.hpp"
#include "psmilu/sparse.hpp"

/// Brute-force dense implementations used to check the sparse code.
namespace psmilu::reference {

template <class T>
DenseMatrix<T> matmul(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  DenseMatrix<T> c(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index k = 0; k < a.cols(); ++k) {
      T v = a(i, k);
      if (v == T(0)) continue;
      for (Index j = 0; j < b.cols(); ++j) c(i, j) += v * b(k, j);
    }
  return c;
}

template <class T>
DenseMatrix<T> subtract(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  DenseMatrix<T> c = a;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
  return c;
}

template <class T>
DenseMatrix<T> add(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  DenseMatrix<T> c = a;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) c(i, j) += b(i, j);
  return c;
}

template <class T>
DenseMatrix<T> block(const DenseMatrix<T>& a, Index r0, Index r1, Index c0, Index c1) {
  DenseMatrix<T> b(r1 - r0, c1 - c0);
  for (Index i = r0; i < r1; ++i)
    for (Index j = c0; j < c1; ++j) b(i - r0, j - c0) = a(i, j);
  return b;
}

template <class T>
DenseMatrix<T> diag(const std::vector<T>& d) {
  DenseMatrix<T> a(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) a(i, i) = d[i];
  return a;
}

/// Inverse by Gauss-Jordan with partial pivoting.
template <class T>
DenseMatrix<T> inverse(const DenseMatrix<T>& a) {
  Index n = a.rows();
  DenseLU<T> f = dense_lu_pivot(a);
  DenseMatrix<T> inv(n, n);
  std::vector<T> e(n);
  for (Index j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), T(0));
    e[j] = 1;
    f.solve_in_place(e);
    for (Index i = 0; i < n; ++i) inv(i, j) = e[i];
  }
  return inv;
}

template <class T>
std::vector<T> solve(const DenseMatrix<T>& a, const std::vector<T>& b) {
  return dense_lu_pivot(a).solve(b);
}

/// Exact ||T^{-1}||_inf of a triangular matrix via its explicit inverse.
template <class T>
T dense_inf_norm_inverse(const DenseMatrix<T>& t) {
  Index n = t.rows();
  bool lower = true;
  for (Index i = 0; i < n && lower; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (t(i, j) != T(0)) {
        lower = false;
        break;
      }
  for (Index i = 0; i < n; ++i)
    if (t(i, i) == T(0)) throw SingularError("zero diagonal in triangular matrix");
  DenseMatrix<T> inv(n, n);
  for (Index c = 0; c < n; ++c) {
    if (lower) {
      for (Index i = 0; i < n; ++i) {
        T s = i == c ? T(1) : T(0);
        for (Index j = 0; j < i; ++j) s -= t(i, j) * inv(j, c);
        inv(i, c) = s / t(i, i);
      }
    } else {
      for (Index i = n - 1; i >= 0; --i) {
        T s = i == c ? T(1) : T(0);
        for (Index j = i + 1; j < n; ++j) s -= t(i, j) * inv(j, c);
        inv(i, c) = s / t(i, i);
      }
    }
  }
  T best = 0;
  for (Index i = 0; i < n; ++i) {
    T s = 0;
    for (Index j = 0; j < n; ++j) s += std::abs(inv(i, j));
    best = std::max(best, s);
  }
  return best;
}

template <class T>
struct DenseLdu {
  DenseMatrix<T> L;  // n x m_final, unit diagonal stored explicitly in rows < m_final
  std::vector<T> d;  // m_final
  DenseMatrix<T> U;  // m_final x n, unit diagonal stored explicitly
  std::vector<Index> perm;  // new position -> input position (rows and columns alike)
  Index m_final = 0;
  std::vector<T> kappa_L;
  std::vector<T> kappa_U;
  Index pivots = 0;
};

/// Dense Crout LDU of the leading block with the same deferral rules as the
/// sparse factorization and no dropping. `a` is already scaled and ordered.
template <class T>
DenseLdu<T> dense_ldu_reference(const DenseMatrix<T>& a, Index m, bool sym, T tau_d, T tau_kappa) {
  Index n = a.rows();
  DenseMatrix<T> w = a;
  DenseMatrix<T> l(n, n), u(n, n);
  std::vector<T> d(n), xl(n), xu(n);
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (Index i = 0; i < n; ++i) d[i] = w(i, i);
  DenseLdu<T> out;
  auto bad = [&](T v) { return v == T(0) || std::abs(T(1) / v) > tau_d; };
  auto swap_pos = [&](Index k, Index i) {
    for (Index j = 0; j < n; ++j) std::swap(w(k, j), w(i, j));
    for (Index j = 0; j < n; ++j) std::swap(w(j, k), w(j, i));
    for (Index j = 0; j < k; ++j) {
      std::swap(l(k, j), l(i, j));
      std::swap(u(j, k), u(j, i));
    }
    std::swap(d[k], d[i]);
    std::swap(perm[k], perm[i]);
  };
  auto greedy = [](T s) { return (s > 0 ? T(-1) : T(1)) - s; };

  Index k = 0;
  while (k < m) {
    bool pivot = false;
    bool stop = false;
    for (;;) {
      if (pivot) {
        while (m - 1 > k && bad(d[m - 1])) --m;
        ++out.pivots;
        if (m - 1 <= k) {
          m = k;
          stop = true;
          break;
        }
        swap_pos(k, m - 1);
        --m;
      }
      if (bad(d[k])) {
        pivot = true;
        continue;
      }
      T sl = 0, su = 0;
      for (Index j = 0; j < k; ++j) sl += l(k, j) * xl[j];
      for (Index j = 0; j < k; ++j) su += u(j, k) * xu[j];
      if (sym) su = sl;
      T kl = std::abs(greedy(sl)), ku = std::abs(greedy(su));
      if (kl > tau_kappa || ku > tau_kappa) {
        pivot = true;
        continue;
      }
      T dk = d[k];
      std::vector<T> lh(n, T(0)), uh(n, T(0));
      for (Index i = k + 1; i < n; ++i) {
        T s = w(i, k), t = w(k, i);
        for (Index j = 0; j < k; ++j) {
          s -= l(i, j) * d[j] * u(j, k);
          t -= l(k, j) * d[j] * u(j, i);
        }
        lh[i] = s;
        uh[i] = t;
      }
      for (Index i = k + 1; i < m; ++i) d[i] -= lh[i] * uh[i] / dk;
      for (Index i = k + 1; i < n; ++i) {
        l(i, k) = lh[i] / dk;
        u(k, i) = uh[i] / dk;
      }
      l(k, k) = 1;
      u(k, k) = 1;
      xl[k] = greedy(sl);
      xu[k] = greedy(su);
      out.kappa_L.push_back(kl);
      out.kappa_U.push_back(ku);
      ++k;
      break;
    }
    if (stop) break;
  }
  out.m_final = k;
  out.L = block(l, 0, n, 0, k);
  out.U = block(u, 0, k, 0, n);
  out.d.assign(d.begin(), d.begin() + k);
  out.perm = std::move(perm);
  return out;
}

/// Exact Schur complement C - E B^{-1} F of the leading m x m block.
template <class T>
DenseMatrix<T> exact_schur(const DenseMatrix<T>& a, Index m) {
  Index n = a.rows();
  DenseMatrix<T> b = block(a, 0, m, 0, m);
  DenseMatrix<T> e = block(a, m, n, 0, m);
  DenseMatrix<T> f = block(a, 0, m, m, n);
  DenseMatrix<T> c = block(a, m, n, m, n);
  if (m == 0) return c;
  return subtract(c, matmul(e, matmul(inverse(b), f)));
}

/// S = C - L_E D U_F.
template <class T>
DenseMatrix<T> dense_schur_s_version(const DenseMatrix<T>& c, const DenseMatrix<T>& l_e,
                                     const std::vector<T>& d, const DenseMatrix<T>& u_f) {
  return subtract(c, matmul(l_e, matmul(diag(d), u_f)));
}

/// T = L_E L_B^{-1} B U_B^{-1} U_F - E U_B^{-1} U_F - L_E L_B^{-1} F + C, with
/// unit diagonals stored explicitly in L_B and U_B.
template <class T>
DenseMatrix<T> dense_schur_t_version(const DenseMatrix<T>& b, const DenseMatrix<T>& e,
                                     const DenseMatrix<T>& f, const DenseMatrix<T>& c,
                                     const DenseMatrix<T>& l_b, const DenseMatrix<T>& u_b,
                                     const DenseMatrix<T>& l_e, const DenseMatrix<T>& u_f) {
  if (b.rows() == 0) return c;
  DenseMatrix<T> ge = matmul(l_e, inverse(l_b));
  DenseMatrix<T> gf = matmul(inverse(u_b), u_f);
  DenseMatrix<T> t = matmul(ge, matmul(b, gf));
  t = subtract(t, matmul(e, gf));
  t = subtract(t, matmul(ge, f));
  return add(t, c);
}

template <class T>
T frobenius_distance(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  return subtract(a, b).frobenius_norm();
}

}  // namespace psmilu::reference
