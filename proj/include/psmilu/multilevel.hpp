#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "psmilu/common.hpp"
#include "psmilu/crout.hpp"
#include "psmilu/dense.hpp"
#include "psmilu/options.hpp"
#include "psmilu/preprocess.hpp"
#include "psmilu/schur.hpp"
#include "psmilu/sparse.hpp"

namespace psmilu {

/// Bookkeeping collected while factorizing one level.
struct LevelStats {
  bool symmetric = false;
  Index pivots = 0;
  Index tail_deferrals = 0;
  Index deferred_weak = 0;
  Index deferred_dense = 0;
  Index schur_nnz = 0;
  bool hybrid_schur = false;
  CroutCounters counters;
};

template <class T>
struct PrecLevel {
  Index m = 0;
  Index n = 0;
  CCS<T> L_B;
  std::vector<T> d_B;
  CRS<T> U_B;
  CRS<T> E;  // (n - m) x m
  CRS<T> F;  // m x (n - m)
  std::vector<T> s;
  std::vector<T> t;
  std::vector<Index> p;
  std::vector<Index> q_inv;
  std::optional<DenseLU<T>> dense;  // present on the final level only
  LevelStats stats;

  Index nnz() const {
    Index k = L_B.nnz() + U_B.nnz() + m + E.nnz() + F.nnz();
    if (dense) k += dense->size() * dense->size();
    return k;
  }

  /// y = B~^{-1} x in place: L_B^{-1}, then diag(d_B)^{-1}, then U_B^{-1}.
  void apply_b_inverse(std::span<T> x) const {
    for (Index j = 0; j < m; ++j) {
      T xj = x[j];
      if (xj == T(0)) continue;
      for (Index p = L_B.col_start[j]; p < L_B.col_start[j + 1]; ++p)
        x[L_B.row_ind[p]] -= L_B.val[p] * xj;
    }
    for (Index j = 0; j < m; ++j) x[j] /= d_B[j];
    for (Index i = m - 1; i >= 0; --i) {
      T s = x[i];
      for (Index p = U_B.row_start[i]; p < U_B.row_start[i + 1]; ++p)
        s -= U_B.val[p] * x[U_B.col_ind[p]];
      x[i] = s;
    }
  }
};

template <class T>
struct MultilevelPrec {
  std::vector<PrecLevel<T>> levels;
  Index nnz_input = 0;

  Index size() const { return levels.empty() ? 0 : levels.front().n; }

  Index nnz() const {
    Index k = 0;
    for (const auto& l : levels) k += l.nnz();
    return k;
  }

  double fill_ratio() const {
    return nnz_input > 0 ? static_cast<double>(nnz()) / static_cast<double>(nnz_input) : 0.0;
  }

  Index total_pivots() const {
    Index k = 0;
    for (const auto& l : levels) k += l.stats.pivots;
    return k;
  }

  Index dense_size() const {
    return !levels.empty() && levels.back().dense ? levels.back().dense->size() : 0;
  }
};

namespace detail {

template <class T>
void solve_level(const MultilevelPrec<T>& prec, std::size_t li, std::span<const T> b,
                 std::span<T> out) {
  const PrecLevel<T>& lv = prec.levels[li];
  Index n = lv.n, m = lv.m, nc = n - m;
  std::vector<T> bh(n);
  for (Index i = 0; i < n; ++i) bh[i] = lv.s[lv.p[i]] * b[lv.p[i]];

  std::vector<T> t1(bh.begin(), bh.begin() + m);
  lv.apply_b_inverse(t1);

  std::vector<T> y(n);
  if (nc > 0) {
    std::vector<T> r2(bh.begin() + m, bh.end());
    for (Index i = 0; i < nc; ++i)
      for (Index p = lv.E.row_start[i]; p < lv.E.row_start[i + 1]; ++p)
        r2[i] -= lv.E.val[p] * t1[lv.E.col_ind[p]];
    std::span<T> y2(y.data() + m, static_cast<std::size_t>(nc));
    if (lv.dense) {
      std::copy(r2.begin(), r2.end(), y2.begin());
      lv.dense->solve_in_place(y2);
    } else {
      solve_level(prec, li + 1, std::span<const T>(r2), y2);
    }
    for (Index i = 0; i < m; ++i) {
      T s = bh[i];
      for (Index p = lv.F.row_start[i]; p < lv.F.row_start[i + 1]; ++p)
        s -= lv.F.val[p] * y2[lv.F.col_ind[p]];
      y[i] = s;
    }
    lv.apply_b_inverse(std::span<T>(y.data(), static_cast<std::size_t>(m)));
  } else {
    std::copy(t1.begin(), t1.end(), y.begin());
  }
  for (Index j = 0; j < n; ++j) out[j] = lv.t[j] * y[lv.q_inv[j]];
}

}  // namespace detail

/// y = M^{-1} b for the multilevel preconditioner.
template <class T>
void psmilu_solve(const MultilevelPrec<T>& prec, std::span<const T> b, std::span<T> y) {
  if (static_cast<Index>(b.size()) != prec.size() || static_cast<Index>(y.size()) != prec.size())
    throw Error("right-hand side length " + std::to_string(b.size()) + " does not match size " +
                std::to_string(prec.size()));
  if (prec.levels.empty()) return;
  detail::solve_level(prec, 0, b, y);
}

template <class T>
std::vector<T> psmilu_solve(const MultilevelPrec<T>& prec, std::span<const T> b) {
  std::vector<T> y(b.size());
  psmilu_solve(prec, b, std::span<T>(y));
  return y;
}

/// Multilevel factorization. The leading m0 x m0 block of `a` is taken as
/// symmetric when m0 > 0; deeper levels always use m0 = 0.
template <class T>
MultilevelPrec<T> psmilu_factor(const CRS<T>& a, Index m0, const Options& opts_in = {}) {
  if (a.n_rows != a.n_cols) throw StructuralError("matrix must be square");
  Options opts = opts_in;
  if (opts.N <= 0) opts.N = a.n_rows;
  const double small_size = opts.c_d * std::cbrt(static_cast<double>(opts.N));

  MultilevelPrec<T> prec;
  prec.nnz_input = a.nnz();
  CRS<T> cur = a;
  Index lead = m0;
  for (int level = 1;; ++level) {
    if (level > opts.max_levels)
      throw Error("exceeded " + std::to_string(opts.max_levels) + " levels");
    Index n = cur.n_rows;
    PrecLevel<T> lv;
    lv.n = n;
    if (n == 0) {
      lv.dense = DenseLU<T>{};
      prec.levels.push_back(std::move(lv));
      break;
    }
    PreprocessResult<T> pre = preprocess(cur, lead, opts.preprocess);
    CRS<T> scaled = scale(cur, std::span<const T>(pre.s), std::span<const T>(pre.t));
    bool sym = pre.symmetric && opts.symmetric_crout;
    CroutResult<T> cr = iludp_factor(scaled, pre.p, pre.q, pre.m, sym, opts);

    Index m = cr.m;
    Index nc = n - m;
    auto q_inv = invert_permutation(cr.q);
    std::span<const Index> p(cr.p);
    std::span<const Index> qi(q_inv);
    CRS<T> b_blk = extract_block(scaled, p, qi, 0, m, 0, m);
    CRS<T> c_blk = extract_block(scaled, p, qi, m, n, m, n);
    lv.m = m;
    lv.E = extract_block(scaled, p, qi, m, n, 0, m);
    lv.F = extract_block(scaled, p, qi, 0, m, m, n);
    lv.L_B = std::move(cr.L_B);
    lv.U_B = std::move(cr.U_B);
    lv.d_B = std::move(cr.d_B);
    lv.s = std::move(pre.s);
    lv.t = std::move(pre.t);
    lv.p = cr.p;
    lv.q_inv = q_inv;
    lv.stats.symmetric = sym;
    lv.stats.pivots = cr.counters.pivots;
    lv.stats.tail_deferrals = cr.counters.tail_deferrals;
    lv.stats.deferred_weak = pre.n_weak;
    lv.stats.deferred_dense = pre.n_dense;
    lv.stats.counters = cr.counters;

    if (nc == 0) {
      lv.dense = DenseLU<T>{};
      prec.levels.push_back(std::move(lv));
      break;
    }
    SchurBlocks<T> blk{&b_blk, &c_blk, &lv.L_B, &cr.L_E, &lv.d_B, &lv.U_B, &cr.U_F};
    CRS<T> s_c = compute_schur_s(blk);
    lv.stats.schur_nnz = s_c.nnz();
    bool go_dense = m == 0 ||
                    static_cast<double>(s_c.nnz()) >=
                        opts.rho * static_cast<double>(nc) * static_cast<double>(nc) ||
                    static_cast<double>(nc) <= small_size;
    if (go_dense) {
      DenseMatrix<T> dm;
      if (opts.use_hybrid && m > 0 && static_cast<double>(nc) < opts.c_h) {
        dm = compute_schur_h(blk, opts.hybrid);
        lv.stats.hybrid_schur = true;
      } else {
        dm = to_dense(s_c);
      }
      lv.dense = dense_lu_pivot(std::move(dm), level);
      prec.levels.push_back(std::move(lv));
      break;
    }
    prec.levels.push_back(std::move(lv));
    cur = std::move(s_c);
    lead = 0;
  }
  return prec;
}

}  // namespace psmilu
