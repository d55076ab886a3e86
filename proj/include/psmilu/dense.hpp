#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "psmilu/common.hpp"
#include "psmilu/sparse.hpp"

namespace psmilu {

/// P A = L U with row partial pivoting, stored in place (unit L below the
/// diagonal, U on and above). piv[k] is the row exchanged with k at step k.
template <class T>
struct DenseLU {
  DenseMatrix<T> lu;
  std::vector<Index> piv;

  Index size() const noexcept { return lu.rows(); }

  void solve_in_place(std::span<T> x) const {
    Index n = lu.rows();
    for (Index k = 0; k < n; ++k)
      if (piv[k] != k) std::swap(x[k], x[piv[k]]);
    for (Index i = 0; i < n; ++i) {
      T s = x[i];
      for (Index j = 0; j < i; ++j) s -= lu(i, j) * x[j];
      x[i] = s;
    }
    for (Index i = n - 1; i >= 0; --i) {
      T s = x[i];
      for (Index j = i + 1; j < n; ++j) s -= lu(i, j) * x[j];
      x[i] = s / lu(i, i);
    }
  }

  std::vector<T> solve(std::span<const T> b) const {
    std::vector<T> x(b.begin(), b.end());
    solve_in_place(x);
    return x;
  }
};

template <class T>
DenseLU<T> dense_lu_pivot(DenseMatrix<T> a, int level = 0) {
  if (a.rows() != a.cols()) throw Error("dense LU needs a square matrix");
  Index n = a.rows();
  DenseLU<T> f;
  f.piv.resize(n);
  for (Index k = 0; k < n; ++k) {
    Index r = k;
    T best = std::abs(a(k, k));
    for (Index i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        r = i;
      }
    }
    if (best == T(0))
      throw SingularError("zero pivot column " + std::to_string(k) + " in dense factorization",
                          level);
    f.piv[k] = r;
    if (r != k)
      for (Index j = 0; j < n; ++j) std::swap(a(k, j), a(r, j));
    T inv = T(1) / a(k, k);
    for (Index i = k + 1; i < n; ++i) {
      T l = a(i, k) * inv;
      a(i, k) = l;
      if (l == T(0)) continue;
      for (Index j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
    }
  }
  f.lu = std::move(a);
  return f;
}

}  // namespace psmilu
