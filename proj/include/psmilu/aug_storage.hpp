#pragma once

#include <algorithm>
#include <cassert>
#include <span>
#include <utility>
#include <vector>

#include "psmilu/common.hpp"
#include "psmilu/sparse.hpp"

namespace psmilu {

/// Compressed storage along one "major" direction (columns for L, rows for U)
/// augmented with singly-linked lists along the other "minor" direction.
///
/// Majors are appended in order; the minor indices of each major segment stay
/// sorted. Two minor indices k < i can be interchanged at any time after all
/// majors < k have been appended and no major >= k exists yet.
template <class T>
class AugmentedStorage {
 public:
  struct Counters {
    Index swaps = 0;
    Index swap_work = 0;    // nodes visited + slots shifted + slots scanned inside swaps
    Index front_moves = 0;  // lazy front pointer advances
  };

  AugmentedStorage() = default;
  explicit AugmentedStorage(Index n_minor, Index reserve_nnz = 0) { reset(n_minor, reserve_nnz); }

  void reset(Index n_minor, Index reserve_nnz = 0) {
    n_minor_ = n_minor;
    major_start_.assign(1, 0);
    front_.clear();
    inner_.clear();
    val_.clear();
    node_of_slot_.clear();
    outer_.clear();
    minor_next_.clear();
    val_pos_.clear();
    minor_start_.assign(n_minor, nil_index);
    minor_end_.assign(n_minor, nil_index);
    counters_ = {};
    reserve(reserve_nnz);
  }

  void reserve(Index nnz) {
    if (nnz <= 0) return;
    auto cap = static_cast<std::size_t>(nnz);
    inner_.reserve(cap);
    val_.reserve(cap);
    node_of_slot_.reserve(cap);
    outer_.reserve(cap);
    minor_next_.reserve(cap);
    val_pos_.reserve(cap);
  }

  Index n_minor() const noexcept { return n_minor_; }
  Index n_major() const noexcept { return static_cast<Index>(major_start_.size()) - 1; }
  Index nnz() const noexcept { return static_cast<Index>(inner_.size()); }
  const Counters& counters() const noexcept { return counters_; }

  /// Appends the next major with entries sorted by minor index.
  void append_major(std::span<const Index> idx, std::span<const T> v) {
    assert(idx.size() == v.size());
    Index j = n_major();
    front_.push_back(nnz());
    for (std::size_t e = 0; e < idx.size(); ++e) {
      Index r = idx[e];
      assert(r >= 0 && r < n_minor_);
      assert(e == 0 || idx[e - 1] < r);
      Index slot = nnz();
      inner_.push_back(r);
      val_.push_back(v[e]);
      node_of_slot_.push_back(slot);
      outer_.push_back(j);
      minor_next_.push_back(nil_index);
      val_pos_.push_back(slot);
      if (minor_end_[r] == nil_index)
        minor_start_[r] = slot;
      else
        minor_next_[minor_end_[r]] = slot;
      minor_end_[r] = slot;
    }
    major_start_.push_back(nnz());
  }

  /// Major segment j: minor indices and values in ascending minor order.
  std::span<const Index> major_indices(Index j) const {
    return {inner_.data() + major_start_[j],
            static_cast<std::size_t>(major_start_[j + 1] - major_start_[j])};
  }
  std::span<const T> major_values(Index j) const {
    return {val_.data() + major_start_[j],
            static_cast<std::size_t>(major_start_[j + 1] - major_start_[j])};
  }

  /// Calls f(major, value) for each nonzero with the given minor index, in
  /// ascending major order.
  template <class F>
  void for_each_in_minor(Index r, F&& f) const {
    for (Index node = minor_start_[r]; node != nil_index; node = minor_next_[node])
      f(outer_[node], val_[val_pos_[node]]);
  }

  Index minor_count(Index r) const {
    Index c = 0;
    for (Index node = minor_start_[r]; node != nil_index; node = minor_next_[node]) ++c;
    return c;
  }

  /// First slot of major j whose minor index is >= k. k must be monotone
  /// nondecreasing across calls for a given j for the amortized bound to hold.
  Index front(Index j, Index k) {
    Index& f = front_[j];
    Index end = major_start_[j + 1];
    while (f < end && inner_[f] < k) {
      ++f;
      ++counters_.front_moves;
    }
    return f;
  }

  Index major_begin(Index j) const { return major_start_[j]; }
  Index major_end(Index j) const { return major_start_[j + 1]; }
  Index inner_at(Index slot) const { return inner_[slot]; }
  const T& value_at(Index slot) const { return val_[slot]; }

  /// Interchanges minor indices k < i. Only majors < k may exist.
  void swap_minor(Index k, Index i) {
    assert(k < i && i < n_minor_);
    assert(n_major() <= k);
    ++counters_.swaps;
    // list k: its nodes will be relabelled i
    for (Index node = minor_start_[k]; node != nil_index; node = minor_next_[node]) {
      ++counters_.swap_work;
      Index j = outer_[node];
      Index slot = val_pos_[node];
      Index end = major_start_[j + 1];
      Index s = slot + 1;
      while (s < end && inner_[s] < i) {
        ++s;
        ++counters_.swap_work;
      }
      if (s < end && inner_[s] == i) {
        // both present: exchange values, keep indices
        Index other = node_of_slot_[s];
        std::swap(val_[slot], val_[s]);
        std::swap(node_of_slot_[slot], node_of_slot_[s]);
        val_pos_[node] = s;
        val_pos_[other] = slot;
        continue;
      }
      // move the slot right to position s-1 and relabel it i
      T v = val_[slot];
      for (Index t = slot; t + 1 < s; ++t) {
        inner_[t] = inner_[t + 1];
        val_[t] = val_[t + 1];
        node_of_slot_[t] = node_of_slot_[t + 1];
        val_pos_[node_of_slot_[t]] = t;
        ++counters_.swap_work;
      }
      inner_[s - 1] = i;
      val_[s - 1] = v;
      node_of_slot_[s - 1] = node;
      val_pos_[node] = s - 1;
    }
    // list i: nodes whose major lacks minor k get relabelled k
    for (Index node = minor_start_[i]; node != nil_index; node = minor_next_[node]) {
      ++counters_.swap_work;
      Index slot = val_pos_[node];
      if (inner_[slot] == k) continue;  // major held both; values already exchanged
      Index f = front(outer_[node], k);
      T v = val_[slot];
      for (Index t = slot; t > f; --t) {
        inner_[t] = inner_[t - 1];
        val_[t] = val_[t - 1];
        node_of_slot_[t] = node_of_slot_[t - 1];
        val_pos_[node_of_slot_[t]] = t;
        ++counters_.swap_work;
      }
      inner_[f] = k;
      val_[f] = v;
      node_of_slot_[f] = node;
      val_pos_[node] = f;
    }
    std::swap(minor_start_[k], minor_start_[i]);
    std::swap(minor_end_[k], minor_end_[i]);
  }

  /// Dense materialization, major along columns (n_minor x n_major).
  DenseMatrix<T> densify_major_as_columns() const {
    DenseMatrix<T> d(n_minor_, n_major());
    for (Index j = 0; j < n_major(); ++j)
      for (Index s = major_start_[j]; s < major_start_[j + 1]; ++s) d(inner_[s], j) = val_[s];
    return d;
  }

  /// Compressed arrays of the sub-range [lo, hi) of minor indices, shifted by lo.
  void extract_range(Index lo, Index hi, std::vector<Index>& start, std::vector<Index>& idx,
                     std::vector<T>& v) const {
    start.assign(1, 0);
    idx.clear();
    v.clear();
    for (Index j = 0; j < n_major(); ++j) {
      auto ind = major_indices(j);
      auto it = std::lower_bound(ind.begin(), ind.end(), lo);
      for (Index s = major_start_[j] + (it - ind.begin());
           s < major_start_[j + 1] && inner_[s] < hi; ++s) {
        idx.push_back(inner_[s] - lo);
        v.push_back(val_[s]);
      }
      start.push_back(static_cast<Index>(idx.size()));
    }
  }

  /// Checks sortedness and the consistency of the linked minor lists.
  bool check_invariants() const {
    for (Index j = 0; j < n_major(); ++j)
      for (Index s = major_start_[j] + 1; s < major_start_[j + 1]; ++s)
        if (inner_[s - 1] >= inner_[s]) return false;
    Index seen = 0;
    for (Index r = 0; r < n_minor_; ++r) {
      Index last_major = -1;
      Index last = nil_index;
      for (Index node = minor_start_[r]; node != nil_index; node = minor_next_[node]) {
        Index s = val_pos_[node];
        if (inner_[s] != r || node_of_slot_[s] != node) return false;
        if (s < major_start_[outer_[node]] || s >= major_start_[outer_[node] + 1]) return false;
        if (outer_[node] <= last_major) return false;
        last_major = outer_[node];
        last = node;
        ++seen;
      }
      if (last != minor_end_[r]) return false;
    }
    return seen == nnz();
  }

 private:
  Index n_minor_ = 0;
  std::vector<Index> major_start_{0};
  std::vector<Index> front_;
  std::vector<Index> inner_;
  std::vector<T> val_;
  std::vector<Index> node_of_slot_;
  // per node (node ids are creation order)
  std::vector<Index> outer_;
  std::vector<Index> minor_next_;
  std::vector<Index> val_pos_;
  // per minor index
  std::vector<Index> minor_start_;
  std::vector<Index> minor_end_;
  Counters counters_;
};

/// Unit-lower factor stored by columns with linked row traversal.
template <class T>
class AugCCS : public AugmentedStorage<T> {
  using Base = AugmentedStorage<T>;

 public:
  using Base::Base;

  Index n_rows() const noexcept { return this->n_minor(); }
  Index n_cols() const noexcept { return this->n_major(); }

  void append_column(std::span<const Index> rows, std::span<const T> v) { this->append_major(rows, v); }
  void swap_rows(Index k, Index i) { this->swap_minor(k, i); }

  /// Calls f(col, value) for each nonzero of row i.
  template <class F>
  void for_each_in_row(Index i, F&& f) const {
    this->for_each_in_minor(i, std::forward<F>(f));
  }

  std::vector<std::pair<Index, T>> row(Index i) const {
    std::vector<std::pair<Index, T>> out;
    for_each_in_row(i, [&](Index j, T v) { out.emplace_back(j, v); });
    return out;
  }

  DenseMatrix<T> densify() const { return this->densify_major_as_columns(); }

  /// Rows [lo, hi) as a CCS with row indices shifted by lo.
  CCS<T> to_ccs(Index lo, Index hi) const {
    CCS<T> c;
    c.n_rows = hi - lo;
    c.n_cols = n_cols();
    this->extract_range(lo, hi, c.col_start, c.row_ind, c.val);
    return c;
  }
};

/// Unit-upper factor stored by rows with linked column traversal.
template <class T>
class AugCRS : public AugmentedStorage<T> {
  using Base = AugmentedStorage<T>;

 public:
  using Base::Base;

  Index n_rows() const noexcept { return this->n_major(); }
  Index n_cols() const noexcept { return this->n_minor(); }

  void append_row(std::span<const Index> cols, std::span<const T> v) { this->append_major(cols, v); }
  void swap_cols(Index k, Index i) { this->swap_minor(k, i); }

  /// Calls f(row, value) for each nonzero of column j.
  template <class F>
  void for_each_in_col(Index j, F&& f) const {
    this->for_each_in_minor(j, std::forward<F>(f));
  }

  std::vector<std::pair<Index, T>> col(Index j) const {
    std::vector<std::pair<Index, T>> out;
    for_each_in_col(j, [&](Index i, T v) { out.emplace_back(i, v); });
    return out;
  }

  DenseMatrix<T> densify() const {
    DenseMatrix<T> t = this->densify_major_as_columns();
    DenseMatrix<T> d(t.cols(), t.rows());
    for (Index i = 0; i < t.rows(); ++i)
      for (Index j = 0; j < t.cols(); ++j) d(j, i) = t(i, j);
    return d;
  }

  /// Columns [lo, hi) as a CRS with column indices shifted by lo.
  CRS<T> to_crs(Index lo, Index hi) const {
    CRS<T> c;
    c.n_rows = n_rows();
    c.n_cols = hi - lo;
    this->extract_range(lo, hi, c.row_start, c.col_ind, c.val);
    return c;
  }
};

}  // namespace psmilu
