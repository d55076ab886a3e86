#pragma once

#include <cmath>
#include <vector>

#include "psmilu/common.hpp"

namespace psmilu {

/// Incremental greedy estimate of the infinity norm of a unit-triangular
/// inverse. For lower L, x = L^{-1} c is built one entry per step with the
/// sign c_k in {+1, -1} chosen to maximize |x_k|; the estimate at step k is
/// |x_k|. The upper-factor version works on U^T and is the same recurrence.
template <class T>
class CondEstimator {
 public:
  void reset(Index n) {
    x_.assign(n, T(0));
    c_.assign(n, T(0));
  }

  /// Candidate for step k given s = sum_j T(k, j) x_j over the already
  /// finalized entries of row k. Does not commit.
  static T candidate(T s) {
    T c = s > 0 ? T(-1) : T(1);
    return c - s;
  }

  static T estimate(T s) { return std::abs(candidate(s)); }

  /// Accumulates sum_j coeff_j * x_j; call with the finalized row k entries.
  T dot(Index j, T coeff) const { return coeff * x_[j]; }

  void commit(Index k, T s) {
    T x = candidate(s);
    x_[k] = x;
    c_[k] = x + s;
  }

  T x(Index k) const { return x_[k]; }
  T sign(Index k) const { return c_[k]; }

  /// Swaps bookkeeping for positions that have not been committed yet.
  void swap(Index a, Index b) {
    std::swap(x_[a], x_[b]);
    std::swap(c_[a], c_[b]);
  }

 private:
  std::vector<T> x_;
  std::vector<T> c_;
};

}  // namespace psmilu
