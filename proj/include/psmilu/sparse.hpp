#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "psmilu/common.hpp"

namespace psmilu {

template <class T>
struct Triplet {
  Index row;
  Index col;
  T value;
};

/// Coordinate-format ingestion buffer. Duplicates are allowed and are summed
/// when converted to compressed storage.
template <class T>
struct TripletList {
  Index n_rows = 0;
  Index n_cols = 0;
  std::vector<Triplet<T>> entries;

  TripletList() = default;
  TripletList(Index rows, Index cols) : n_rows(rows), n_cols(cols) {}

  void add(Index row, Index col, T value) { entries.push_back({row, col, value}); }
  std::size_t size() const noexcept { return entries.size(); }
};

/// Compressed row storage with strictly ascending column indices per row.
template <class T>
struct CRS {
  Index n_rows = 0;
  Index n_cols = 0;
  std::vector<Index> row_start{0};
  std::vector<Index> col_ind;
  std::vector<T> val;

  CRS() = default;
  CRS(Index rows, Index cols) : n_rows(rows), n_cols(cols), row_start(rows + 1, 0) {}

  Index nnz() const noexcept { return static_cast<Index>(col_ind.size()); }
  Index row_nnz(Index i) const { return row_start[i + 1] - row_start[i]; }

  std::span<const Index> row_indices(Index i) const {
    return {col_ind.data() + row_start[i], static_cast<std::size_t>(row_nnz(i))};
  }
  std::span<const T> row_values(Index i) const {
    return {val.data() + row_start[i], static_cast<std::size_t>(row_nnz(i))};
  }

  /// Value at (i, j), zero if not stored. Binary search within the row.
  T at(Index i, Index j) const {
    auto idx = row_indices(i);
    auto it = std::lower_bound(idx.begin(), idx.end(), j);
    if (it == idx.end() || *it != j) return T(0);
    return val[row_start[i] + (it - idx.begin())];
  }

  /// Appends a row whose indices are already ascending.
  void push_row(std::span<const Index> idx, std::span<const T> v) {
    col_ind.insert(col_ind.end(), idx.begin(), idx.end());
    val.insert(val.end(), v.begin(), v.end());
    row_start.push_back(static_cast<Index>(col_ind.size()));
  }
};

/// Compressed column storage with strictly ascending row indices per column.
template <class T>
struct CCS {
  Index n_rows = 0;
  Index n_cols = 0;
  std::vector<Index> col_start{0};
  std::vector<Index> row_ind;
  std::vector<T> val;

  CCS() = default;
  CCS(Index rows, Index cols) : n_rows(rows), n_cols(cols), col_start(cols + 1, 0) {}

  Index nnz() const noexcept { return static_cast<Index>(row_ind.size()); }
  Index col_nnz(Index j) const { return col_start[j + 1] - col_start[j]; }

  std::span<const Index> col_indices(Index j) const {
    return {row_ind.data() + col_start[j], static_cast<std::size_t>(col_nnz(j))};
  }
  std::span<const T> col_values(Index j) const {
    return {val.data() + col_start[j], static_cast<std::size_t>(col_nnz(j))};
  }
};

/// Row-major dense matrix.
template <class T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(Index rows, Index cols, T init = T(0))
      : n_rows_(rows), n_cols_(cols), values_(static_cast<std::size_t>(rows * cols), init) {}

  static DenseMatrix identity(Index n) {
    DenseMatrix m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  Index rows() const noexcept { return n_rows_; }
  Index cols() const noexcept { return n_cols_; }

  T& operator()(Index i, Index j) { return values_[static_cast<std::size_t>(i * n_cols_ + j)]; }
  const T& operator()(Index i, Index j) const {
    return values_[static_cast<std::size_t>(i * n_cols_ + j)];
  }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  T frobenius_norm() const {
    T s = 0;
    for (T v : values_) s += v * v;
    return std::sqrt(s);
  }

 private:
  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<T> values_;
};

/// Converts coordinate entries to CRS, summing duplicates. Entries whose summed
/// value is exactly zero are dropped unless `keep_explicit_zeros` is set.
template <class T>
CRS<T> crs_from_triplets(const TripletList<T>& t, bool keep_explicit_zeros = false) {
  if (t.n_rows < 0 || t.n_cols < 0) throw StructuralError("negative matrix dimension");
  for (const auto& e : t.entries) {
    if (e.row < 0 || e.row >= t.n_rows || e.col < 0 || e.col >= t.n_cols) {
      throw StructuralError("entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                            ") out of range for " + std::to_string(t.n_rows) + "x" +
                            std::to_string(t.n_cols) + " matrix");
    }
  }
  // bucket by row, then sort and merge within each row
  std::vector<Index> count(t.n_rows + 1, 0);
  for (const auto& e : t.entries) ++count[e.row + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::pair<Index, T>> bucket(t.entries.size());
  {
    std::vector<Index> next(count.begin(), count.end() - 1);
    for (const auto& e : t.entries) bucket[next[e.row]++] = {e.col, e.value};
  }

  CRS<T> a;
  a.n_rows = t.n_rows;
  a.n_cols = t.n_cols;
  a.row_start.assign(1, 0);
  a.row_start.reserve(t.n_rows + 1);
  a.col_ind.reserve(bucket.size());
  a.val.reserve(bucket.size());
  for (Index i = 0; i < t.n_rows; ++i) {
    auto first = bucket.begin() + count[i];
    auto last = bucket.begin() + count[i + 1];
    std::stable_sort(first, last, [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto it = first; it != last;) {
      Index col = it->first;
      T sum = 0;
      for (; it != last && it->first == col; ++it) sum += it->second;
      if (sum != T(0) || keep_explicit_zeros) {
        a.col_ind.push_back(col);
        a.val.push_back(sum);
      }
    }
    a.row_start.push_back(static_cast<Index>(a.col_ind.size()));
  }
  return a;
}

template <class T>
TripletList<T> to_triplets(const CRS<T>& a) {
  TripletList<T> t(a.n_rows, a.n_cols);
  t.entries.reserve(a.col_ind.size());
  for (Index i = 0; i < a.n_rows; ++i)
    for (Index p = a.row_start[i]; p < a.row_start[i + 1]; ++p) t.add(i, a.col_ind[p], a.val[p]);
  return t;
}

namespace detail {

// Counting-sort transpose of compressed arrays; output indices come out sorted.
template <class T>
void transpose_compressed(Index n_major, Index n_minor, const std::vector<Index>& start,
                          const std::vector<Index>& idx, const std::vector<T>& val,
                          std::vector<Index>& out_start, std::vector<Index>& out_idx,
                          std::vector<T>& out_val) {
  out_start.assign(n_minor + 1, 0);
  for (Index p = 0; p < static_cast<Index>(idx.size()); ++p) ++out_start[idx[p] + 1];
  std::partial_sum(out_start.begin(), out_start.end(), out_start.begin());
  out_idx.resize(idx.size());
  out_val.resize(val.size());
  std::vector<Index> next(out_start.begin(), out_start.end() - 1);
  for (Index j = 0; j < n_major; ++j) {
    for (Index p = start[j]; p < start[j + 1]; ++p) {
      Index dst = next[idx[p]]++;
      out_idx[dst] = j;
      out_val[dst] = val[p];
    }
  }
}

}  // namespace detail

template <class T>
CCS<T> crs_to_ccs(const CRS<T>& a) {
  CCS<T> c;
  c.n_rows = a.n_rows;
  c.n_cols = a.n_cols;
  detail::transpose_compressed(a.n_rows, a.n_cols, a.row_start, a.col_ind, a.val, c.col_start,
                               c.row_ind, c.val);
  return c;
}

template <class T>
CRS<T> ccs_to_crs(const CCS<T>& c) {
  CRS<T> a;
  a.n_rows = c.n_rows;
  a.n_cols = c.n_cols;
  detail::transpose_compressed(c.n_cols, c.n_rows, c.col_start, c.row_ind, c.val, a.row_start,
                               a.col_ind, a.val);
  return a;
}

template <class T>
CRS<T> transpose(const CRS<T>& a) {
  CRS<T> r;
  r.n_rows = a.n_cols;
  r.n_cols = a.n_rows;
  detail::transpose_compressed(a.n_rows, a.n_cols, a.row_start, a.col_ind, a.val, r.row_start,
                               r.col_ind, r.val);
  return r;
}

/// y = A x
template <class T>
void multiply(const CRS<T>& a, std::span<const T> x, std::span<T> y) {
  assert(static_cast<Index>(x.size()) == a.n_cols && static_cast<Index>(y.size()) == a.n_rows);
  for (Index i = 0; i < a.n_rows; ++i) {
    T s = 0;
    for (Index p = a.row_start[i]; p < a.row_start[i + 1]; ++p) s += a.val[p] * x[a.col_ind[p]];
    y[i] = s;
  }
}

template <class T>
std::vector<T> multiply(const CRS<T>& a, std::span<const T> x) {
  std::vector<T> y(a.n_rows);
  multiply(a, x, std::span<T>(y));
  return y;
}

template <class T>
DenseMatrix<T> to_dense(const CRS<T>& a) {
  DenseMatrix<T> d(a.n_rows, a.n_cols);
  for (Index i = 0; i < a.n_rows; ++i)
    for (Index p = a.row_start[i]; p < a.row_start[i + 1]; ++p) d(i, a.col_ind[p]) += a.val[p];
  return d;
}

template <class T>
DenseMatrix<T> to_dense(const CCS<T>& a) {
  DenseMatrix<T> d(a.n_rows, a.n_cols);
  for (Index j = 0; j < a.n_cols; ++j)
    for (Index p = a.col_start[j]; p < a.col_start[j + 1]; ++p) d(a.row_ind[p], j) += a.val[p];
  return d;
}

/// Sparse pattern of a dense matrix (exact zeros are omitted).
template <class T>
CRS<T> to_crs(const DenseMatrix<T>& d) {
  CRS<T> a;
  a.n_rows = d.rows();
  a.n_cols = d.cols();
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.cols(); ++j) {
      if (d(i, j) != T(0)) {
        a.col_ind.push_back(j);
        a.val.push_back(d(i, j));
      }
    }
    a.row_start.push_back(a.nnz());
  }
  return a;
}

/// diag(s) * A * diag(t), same pattern.
template <class T>
CRS<T> scale(const CRS<T>& a, std::span<const T> s, std::span<const T> t) {
  CRS<T> r = a;
  for (Index i = 0; i < a.n_rows; ++i)
    for (Index p = a.row_start[i]; p < a.row_start[i + 1]; ++p)
      r.val[p] = a.val[p] * (s[i] * t[a.col_ind[p]]);  // s_i t_j == t_j s_i keeps symmetric input symmetric
  return r;
}

/// Inverse of a permutation given as new-position -> old-index.
inline std::vector<Index> invert_permutation(std::span<const Index> perm) {
  std::vector<Index> inv(perm.size(), nil_index);
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<Index>(i);
  return inv;
}

inline bool is_permutation(std::span<const Index> perm) {
  std::vector<char> seen(perm.size(), 0);
  for (Index v : perm) {
    if (v < 0 || v >= static_cast<Index>(perm.size()) || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

/// Extracts the block A[p[r0:r1], q[c0:c1]] with positional (shifted) indices.
/// `q_inv` is the inverse of `q`.
template <class T>
CRS<T> extract_block(const CRS<T>& a, std::span<const Index> p, std::span<const Index> q_inv,
                     Index r0, Index r1, Index c0, Index c1) {
  CRS<T> b;
  b.n_rows = r1 - r0;
  b.n_cols = c1 - c0;
  b.row_start.reserve(b.n_rows + 1);
  std::vector<std::pair<Index, T>> row;
  for (Index i = r0; i < r1; ++i) {
    row.clear();
    Index orig = p[i];
    for (Index k = a.row_start[orig]; k < a.row_start[orig + 1]; ++k) {
      Index pos = q_inv[a.col_ind[k]];
      if (pos >= c0 && pos < c1) row.emplace_back(pos - c0, a.val[k]);
    }
    std::sort(row.begin(), row.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [j, v] : row) {
      b.col_ind.push_back(j);
      b.val.push_back(v);
    }
    b.row_start.push_back(b.nnz());
  }
  return b;
}

/// A[p, q] with both permutations given as new -> old.
template <class T>
CRS<T> permute(const CRS<T>& a, std::span<const Index> p, std::span<const Index> q) {
  auto q_inv = invert_permutation(q);
  return extract_block(a, p, q_inv, 0, a.n_rows, 0, a.n_cols);
}

/// True when A equals its transpose exactly (pattern and values).
template <class T>
bool is_symmetric(const CRS<T>& a) {
  if (a.n_rows != a.n_cols) return false;
  CRS<T> at = transpose(a);
  return at.row_start == a.row_start && at.col_ind == a.col_ind && at.val == a.val;
}

template <class T>
T norm2(std::span<const T> x) {
  T s = 0;
  for (T v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace psmilu
