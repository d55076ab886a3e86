#pragma once

#include <algorithm>
#include <vector>

#include "psmilu/common.hpp"

namespace psmilu {

/// Dense scatter array plus the list of touched indices. Reset costs
/// O(number of touched indices).
template <class T>
class SparseAccumulator {
 public:
  SparseAccumulator() = default;
  explicit SparseAccumulator(Index n) : values_(n, T(0)), occupied_(n, 0) {}

  void resize(Index n) {
    values_.assign(n, T(0));
    occupied_.assign(n, 0);
    indices_.clear();
  }

  Index capacity() const noexcept { return static_cast<Index>(values_.size()); }
  Index size() const noexcept { return static_cast<Index>(indices_.size()); }
  bool empty() const noexcept { return indices_.empty(); }

  void add(Index i, T v) {
    if (!occupied_[i]) {
      occupied_[i] = 1;
      indices_.push_back(i);
      values_[i] = v;
    } else {
      values_[i] += v;
    }
  }

  bool contains(Index i) const { return occupied_[i] != 0; }
  T operator[](Index i) const { return values_[i]; }
  T& value_ref(Index i) { return values_[i]; }

  const std::vector<Index>& indices() const noexcept { return indices_; }

  void sort_indices() { std::sort(indices_.begin(), indices_.end()); }

  void clear() {
    for (Index i : indices_) {
      occupied_[i] = 0;
      values_[i] = T(0);
    }
    indices_.clear();
  }

 private:
  std::vector<T> values_;
  std::vector<char> occupied_;
  std::vector<Index> indices_;
};

}  // namespace psmilu
