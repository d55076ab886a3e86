#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "psmilu/common.hpp"
#include "psmilu/sparse.hpp"

namespace psmilu {

enum class Reordering { rcm, natural };

struct PreprocessOptions {
  int equilibrate_sweeps = 10;
  double dense_row_factor = 10.0;  // rows/columns with more than this many times the mean nnz are deferred
  double diag_defer_tol = 1e-2;    // leading-block diagonals below this after scaling are deferred
  Reordering reordering = Reordering::rcm;
};

template <class T>
struct Scaling {
  std::vector<T> s;
  std::vector<T> t;
};

template <class T>
struct PreprocessResult {
  std::vector<Index> p;  // position -> original row
  std::vector<Index> q;  // position -> original column
  std::vector<T> s;
  std::vector<T> t;
  Index m = 0;
  Index n_dense = 0;   // trailing positions holding deferred dense rows/columns
  Index n_weak = 0;    // positions deferred for small diagonals
  bool symmetric = false;
  std::vector<Index> unmatched_rows;  // rows without a transversal entry (nonsymmetric path)
};

namespace detail {

template <class T>
void check_no_empty_lines(const CRS<T>& a) {
  if (a.n_rows != a.n_cols) throw StructuralError("matrix must be square");
  std::vector<char> col_hit(a.n_cols, 0);
  for (Index i = 0; i < a.n_rows; ++i) {
    bool any = false;
    for (Index p = a.row_start[i]; p < a.row_start[i + 1]; ++p) {
      if (a.val[p] != T(0)) {
        any = true;
        col_hit[a.col_ind[p]] = 1;
      }
    }
    if (!any) throw StructuralError("row " + std::to_string(i) + " is empty");
  }
  for (Index j = 0; j < a.n_cols; ++j)
    if (!col_hit[j]) throw StructuralError("column " + std::to_string(j) + " is empty");
}

template <class T>
void line_maxima(const CRS<T>& a, const std::vector<T>& s, const std::vector<T>& t,
                 std::vector<T>& r, std::vector<T>& c) {
  r.assign(a.n_rows, T(0));
  c.assign(a.n_cols, T(0));
  for (Index i = 0; i < a.n_rows; ++i) {
    for (Index p = a.row_start[i]; p < a.row_start[i + 1]; ++p) {
      Index j = a.col_ind[p];
      T v = std::abs(s[i] * a.val[p] * t[j]);
      r[i] = std::max(r[i], v);
      c[j] = std::max(c[j], v);
    }
  }
}

}  // namespace detail

/// Iterative max-magnitude equilibration. Positions below `sym_size` share one
/// factor for their row and column (s_i == t_i); the rest are scaled freely.
/// On return every row and column of diag(s) A diag(t) has max magnitude <= 1.
template <class T>
Scaling<T> equilibrate_partial(const CRS<T>& a, Index sym_size, int max_sweeps) {
  detail::check_no_empty_lines(a);
  Index n = a.n_rows;
  Scaling<T> sc{std::vector<T>(n, T(1)), std::vector<T>(n, T(1))};
  auto& s = sc.s;
  auto& t = sc.t;
  std::vector<T> r, c;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    detail::line_maxima(a, s, t, r, c);
    T dev = 0;
    for (Index i = 0; i < n; ++i) dev = std::max({dev, std::abs(1 - r[i]), std::abs(1 - c[i])});
    if (dev < T(1e-3)) break;
    for (Index i = 0; i < n; ++i) {
      if (i < sym_size) {
        T f = std::sqrt(std::max(r[i], c[i]));
        s[i] /= f;
        t[i] = s[i];
      } else {
        s[i] /= std::sqrt(r[i]);
        t[i] /= std::sqrt(c[i]);
      }
    }
  }
  // final pass guarantees the upper bound exactly
  detail::line_maxima(a, s, t, r, c);
  for (Index i = 0; i < sym_size; ++i) {
    s[i] /= std::max(T(1), std::max(r[i], c[i]));
    t[i] = s[i];
  }
  for (Index i = sym_size; i < n; ++i) s[i] /= std::max(T(1), r[i]);
  detail::line_maxima(a, s, t, r, c);
  for (Index j = sym_size; j < n; ++j) t[j] /= std::max(T(1), c[j]);
  return sc;
}

template <class T>
Scaling<T> equilibrate(const CRS<T>& a, bool symmetric, int max_sweeps = 10) {
  return equilibrate_partial(a, symmetric ? a.n_rows : 0, max_sweeps);
}

struct MatchResult {
  std::vector<Index> q;          // q[row] = matched column
  std::vector<Index> unmatched;  // rows without a structural match (given leftover columns)
};

/// Greedy maximum-magnitude transversal with single-step augmenting repair.
template <class T>
MatchResult greedy_diag_match(const CRS<T>& a) {
  Index n = a.n_rows;
  std::vector<Index> row_of(n, nil_index);
  std::vector<Index> q(n, nil_index);
  std::vector<Index> pending;
  for (Index i = 0; i < n; ++i) {
    Index best = nil_index;
    T best_v = 0;
    for (Index p = a.row_start[i]; p < a.row_start[i + 1]; ++p) {
      Index j = a.col_ind[p];
      T v = std::abs(a.val[p]);
      if (row_of[j] == nil_index && v > best_v) {
        best = j;
        best_v = v;
      }
    }
    if (best == nil_index) {
      pending.push_back(i);
    } else {
      q[i] = best;
      row_of[best] = i;
    }
  }
  MatchResult res;
  for (Index i : pending) {
    bool done = false;
    for (Index p = a.row_start[i]; p < a.row_start[i + 1] && !done; ++p) {
      if (a.val[p] == T(0)) continue;
      Index j = a.col_ind[p];
      Index owner = row_of[j];
      if (owner == nil_index) {
        q[i] = j;
        row_of[j] = i;
        done = true;
        break;
      }
      Index alt = nil_index;
      T alt_v = 0;
      for (Index p2 = a.row_start[owner]; p2 < a.row_start[owner + 1]; ++p2) {
        Index j2 = a.col_ind[p2];
        T v = std::abs(a.val[p2]);
        if (row_of[j2] == nil_index && v > alt_v) {
          alt = j2;
          alt_v = v;
        }
      }
      if (alt != nil_index) {
        q[owner] = alt;
        row_of[alt] = owner;
        q[i] = j;
        row_of[j] = i;
        done = true;
      }
    }
    if (!done) res.unmatched.push_back(i);
  }
  Index next_free = 0;
  for (Index i : res.unmatched) {
    while (row_of[next_free] != nil_index) ++next_free;
    q[i] = next_free;
    row_of[next_free] = i;
  }
  res.q = std::move(q);
  return res;
}

/// Symmetric adjacency (pattern of B + B^T without the diagonal) as CRS.
template <class T>
CRS<char> symmetrized_pattern(const CRS<T>& b) {
  TripletList<char> tl(b.n_rows, b.n_cols);
  for (Index i = 0; i < b.n_rows; ++i) {
    for (Index p = b.row_start[i]; p < b.row_start[i + 1]; ++p) {
      Index j = b.col_ind[p];
      if (j == i) continue;
      tl.add(i, j, 1);
      tl.add(j, i, 1);
    }
  }
  // values are irrelevant; keep every structural entry
  return crs_from_triplets(tl, true);
}

namespace detail {

// BFS from root restricted to unvisited nodes; returns levels flattened and level starts.
inline void bfs_levels(const CRS<char>& g, Index root, const std::vector<char>& blocked,
                       std::vector<Index>& order, std::vector<Index>& level_start,
                       std::vector<Index>& mark, Index stamp) {
  order.assign(1, root);
  level_start.assign(1, 0);
  mark[root] = stamp;
  Index head = 0;
  while (head < static_cast<Index>(order.size())) {
    Index level_end = static_cast<Index>(order.size());
    level_start.push_back(level_end);
    for (; head < level_end; ++head) {
      Index u = order[head];
      for (Index p = g.row_start[u]; p < g.row_start[u + 1]; ++p) {
        Index v = g.col_ind[p];
        if (!blocked[v] && mark[v] != stamp) {
          mark[v] = stamp;
          order.push_back(v);
        }
      }
    }
  }
  if (level_start.size() >= 2 && level_start[level_start.size() - 1] ==
                                     level_start[level_start.size() - 2])
    level_start.pop_back();
}

}  // namespace detail

/// Reverse Cuthill-McKee on a symmetric adjacency pattern. Each connected
/// component is numbered contiguously and reversed on its own. Returns
/// position -> node.
inline std::vector<Index> rcm_order(const CRS<char>& g) {
  Index n = g.n_rows;
  std::vector<Index> degree(n);
  for (Index i = 0; i < n; ++i) degree[i] = g.row_nnz(i);
  std::vector<char> visited(n, 0);
  std::vector<Index> mark(n, -1);
  Index stamp = 0;
  std::vector<Index> perm;
  perm.reserve(n);
  std::vector<Index> order, levels, nbrs;
  for (Index seed = 0; seed < n; ++seed) {
    if (visited[seed]) continue;
    // pseudo-peripheral node: George-Liu iteration from the seed
    Index root = seed;
    detail::bfs_levels(g, root, visited, order, levels, mark, ++stamp);
    Index ecc = static_cast<Index>(levels.size()) - 1;
    for (;;) {
      Index best = nil_index;
      for (Index k = levels[levels.size() - 2]; k < levels.back(); ++k) {
        Index v = order[k];
        if (best == nil_index || degree[v] < degree[best] ||
            (degree[v] == degree[best] && v < best))
          best = v;
      }
      std::vector<Index> o2, l2;
      detail::bfs_levels(g, best, visited, o2, l2, mark, ++stamp);
      Index ecc2 = static_cast<Index>(l2.size()) - 1;
      if (ecc2 <= ecc) break;
      root = best;
      ecc = ecc2;
      order.swap(o2);
      levels.swap(l2);
    }
    // Cuthill-McKee from root, neighbours by increasing degree then index
    Index first = static_cast<Index>(perm.size());
    perm.push_back(root);
    visited[root] = 1;
    for (Index head = first; head < static_cast<Index>(perm.size()); ++head) {
      Index u = perm[head];
      nbrs.clear();
      for (Index p = g.row_start[u]; p < g.row_start[u + 1]; ++p)
        if (!visited[g.col_ind[p]]) nbrs.push_back(g.col_ind[p]);
      std::sort(nbrs.begin(), nbrs.end(), [&](Index x, Index y) {
        return degree[x] != degree[y] ? degree[x] < degree[y] : x < y;
      });
      for (Index v : nbrs) {
        visited[v] = 1;
        perm.push_back(v);
      }
    }
    std::reverse(perm.begin() + first, perm.end());
  }
  return perm;
}

/// Symmetric fill-reducing order of a square pattern (symmetrized internally).
template <class T>
std::vector<Index> symmetric_reorder(const CRS<T>& pattern, Reordering how = Reordering::rcm) {
  if (how == Reordering::natural) {
    std::vector<Index> id(pattern.n_rows);
    std::iota(id.begin(), id.end(), 0);
    return id;
  }
  return rcm_order(symmetrized_pattern(pattern));
}

struct DeferResult {
  std::vector<Index> order;  // new position -> old position
  Index m = 0;
  Index n_weak = 0;
  Index n_dense = 0;
};

/// Moves dense rows/columns to the very end and weak leading diagonals to just
/// past the new leading block. `a_pos` is the scaled matrix in positional order.
template <class T>
DeferResult defer_special_rows(const CRS<T>& a_pos, Index m, const PreprocessOptions& opts = {}) {
  Index n = a_pos.n_rows;
  DeferResult res;
  std::vector<Index> col_nnz(n, 0);
  for (Index j : a_pos.col_ind) ++col_nnz[j];
  double avg = n > 0 ? static_cast<double>(a_pos.nnz()) / static_cast<double>(n) : 0.0;
  double limit = opts.dense_row_factor * avg;
  std::vector<char> dense(n, 0);
  for (Index i = 0; i < n; ++i)
    dense[i] = static_cast<double>(a_pos.row_nnz(i)) > limit ||
               static_cast<double>(col_nnz[i]) > limit;
  std::vector<Index> kept, weak, rest, tail;
  for (Index i = 0; i < n; ++i) {
    if (dense[i]) {
      tail.push_back(i);
    } else if (i < m) {
      if (std::abs(a_pos.at(i, i)) < opts.diag_defer_tol)
        weak.push_back(i);
      else
        kept.push_back(i);
    } else {
      rest.push_back(i);
    }
  }
  res.m = static_cast<Index>(kept.size());
  res.n_weak = static_cast<Index>(weak.size());
  res.n_dense = static_cast<Index>(tail.size());
  res.order = kept;
  res.order.insert(res.order.end(), weak.begin(), weak.end());
  res.order.insert(res.order.end(), rest.begin(), rest.end());
  res.order.insert(res.order.end(), tail.begin(), tail.end());
  return res;
}

/// Full preprocessing of one level. With m0 > 0 the leading m0 x m0 block is
/// treated as symmetric (p == q, s == t there); with m0 == 0 the whole matrix
/// goes through the nonsymmetric path (transversal + scaling).
template <class T>
PreprocessResult<T> preprocess(const CRS<T>& a, Index m0, const PreprocessOptions& opts = {}) {
  Index n = a.n_rows;
  if (m0 < 0 || m0 > n) throw Error("leading block size out of range");
  PreprocessResult<T> res;
  res.symmetric = m0 > 0;
  Scaling<T> sc = equilibrate_partial(a, m0, opts.equilibrate_sweeps);
  res.s = std::move(sc.s);
  res.t = std::move(sc.t);
  CRS<T> scaled = scale(a, std::span<const T>(res.s), std::span<const T>(res.t));

  std::vector<Index> row0(n), col0(n);
  Index m = n;
  if (res.symmetric) {
    std::iota(row0.begin(), row0.end(), 0);
    col0 = row0;
    m = m0;
  } else {
    MatchResult match = greedy_diag_match(scaled);
    std::iota(row0.begin(), row0.end(), 0);
    col0 = match.q;
    res.unmatched_rows = std::move(match.unmatched);
  }

  CRS<T> a_pos = permute(scaled, std::span<const Index>(row0), std::span<const Index>(col0));
  DeferResult dr = defer_special_rows(a_pos, m, opts);
  res.m = dr.m;
  res.n_weak = dr.n_weak;
  res.n_dense = dr.n_dense;

  // reorder the kept leading block
  std::vector<Index> kept(dr.order.begin(), dr.order.begin() + dr.m);
  std::vector<Index> kept_inv(n, nil_index);
  for (Index i = 0; i < dr.m; ++i) kept_inv[kept[i]] = i;
  std::vector<Index> ident(n);
  std::iota(ident.begin(), ident.end(), 0);
  CRS<T> block = extract_block(a_pos, std::span<const Index>(kept), std::span<const Index>(kept_inv),
                               0, dr.m, 0, dr.m);
  std::vector<Index> ro = symmetric_reorder(block, opts.reordering);

  res.p.resize(n);
  res.q.resize(n);
  for (Index pos = 0; pos < n; ++pos) {
    Index old = pos < dr.m ? kept[ro[pos]] : dr.order[pos];
    res.p[pos] = row0[old];
    res.q[pos] = col0[old];
  }
  return res;
}

}  // namespace psmilu
