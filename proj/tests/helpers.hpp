#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <type_traits>
#include <vector>

#include "psmilu/psmilu.hpp"
#include "psmilu/reference.hpp"

namespace testing {

using psmilu::CRS;
using psmilu::DenseMatrix;
using psmilu::Index;
using psmilu::AugCCS;
using psmilu::AugCRS;

inline double max_abs_diff(const DenseMatrix<double>& a, const DenseMatrix<double>& b) {
  double m = 0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

inline double max_abs(const DenseMatrix<double>& a) {
  double m = 0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

/// Random sparse n x n matrix with given density, values in [-1, 1].
inline DenseMatrix<double> random_dense_sparse(Index rows, Index cols, double density,
                                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::bernoulli_distribution hit(density);
  DenseMatrix<double> a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (hit(rng)) a(i, j) = u(rng);
  return a;
}

/// Positional scaled-and-permuted matrix diag(s[p]) A[p, q] diag(t[q]) as dense.
inline DenseMatrix<double> positional(const CRS<double>& scaled, const std::vector<Index>& p,
                                      const std::vector<Index>& q) {
  return psmilu::to_dense(psmilu::permute(scaled, std::span<const Index>(p), std::span<const Index>(q)));
}

/// Unit lower / upper dense factors with the identity on the diagonal.
inline DenseMatrix<double> unit_lower(const psmilu::CCS<double>& l) {
  DenseMatrix<double> d = psmilu::to_dense(l);
  for (Index i = 0; i < std::min(d.rows(), d.cols()); ++i) d(i, i) = 1;
  return d;
}

inline DenseMatrix<double> unit_upper(const CRS<double>& u) {
  DenseMatrix<double> d = psmilu::to_dense(u);
  for (Index i = 0; i < std::min(d.rows(), d.cols()); ++i) d(i, i) = 1;
  return d;
}

inline std::vector<double> dense_matvec(const DenseMatrix<double>& a, const std::vector<double>& x) {
  std::vector<double> y(a.rows(), 0.0);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

// Random append/swap sequences checked against a dense matrix with the same
// operations applied. Returns true on exact agreement.
template <class Store>
bool aug_sequence_matches(std::uint64_t seed, Index n, bool lower_roles, Index& work,
                          Index& bound) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::bernoulli_distribution hit(0.35);
  Store f(n);
  DenseMatrix<double> oracle(n, n);  // rows = minor, cols = major
  Index steps = std::uniform_int_distribution<Index>(1, n - 1)(rng);
  for (Index k = 0; k < steps; ++k) {
    // a few swaps of minor indices >= k before appending major k
    int swaps = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int s = 0; s < swaps; ++s) {
      Index i = std::uniform_int_distribution<Index>(k, n - 1)(rng);
      if (i == k) continue;
      Index before = f.counters().swap_work;
      Index touched = 0;
      for (Index j = 0; j < k; ++j) {
        bool has = oracle(k, j) != 0 || oracle(i, j) != 0;
        if (has) touched += f.major_end(j) - f.major_begin(j);
      }
      if constexpr (std::is_same_v<Store, AugCCS<double>>)
        f.swap_rows(k, i);
      else
        f.swap_cols(k, i);
      work += f.counters().swap_work - before;
      bound += touched;
      for (Index j = 0; j < n; ++j) std::swap(oracle(k, j), oracle(i, j));
    }
    std::vector<Index> idx;
    std::vector<double> val;
    for (Index r = lower_roles ? k + 1 : 0; r < n; ++r) {
      if (hit(rng)) {
        double v = u(rng);
        if (v == 0) v = 0.5;
        idx.push_back(r);
        val.push_back(v);
        oracle(r, k) = v;
      }
    }
    if constexpr (std::is_same_v<Store, AugCCS<double>>)
      f.append_column(idx, val);
    else
      f.append_row(idx, val);
    if (!f.check_invariants()) return false;
  }
  DenseMatrix<double> got = f.densify();
  if constexpr (std::is_same_v<Store, AugCRS<double>>) {
    // densify of AugCRS returns major as rows; compare against the transpose
    DenseMatrix<double> t(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) t(i, j) = i < got.rows() && j < got.cols() ? got(i, j) : 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (t(j, i) != oracle(i, j)) return false;
    // column traversal agrees with rows
    for (Index c = 0; c < n; ++c)
      for (auto [r, v] : f.col(c))
        if (oracle(c, r) != v) return false;
  } else {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        double g = j < got.cols() ? got(i, j) : 0;
        if (g != oracle(i, j)) return false;
      }
    for (Index r = 0; r < n; ++r)
      for (auto [c, v] : f.row(r))
        if (oracle(r, c) != v) return false;
  }
  return true;
}

}  // namespace testing
