#pragma once

#include <span>
#include <vector>

#include "psmilu/common.hpp"
#include "psmilu/options.hpp"
#include "psmilu/sparse.hpp"
#include "psmilu/sparse_accumulator.hpp"

namespace psmilu {

/// Inputs of the Schur complement of one level, all in positional numbering.
template <class T>
struct SchurBlocks {
  const CRS<T>* B = nullptr;    // m x m scaled leading block
  const CRS<T>* C = nullptr;    // (n-m) x (n-m) trailing block
  const CCS<T>* L_B = nullptr;  // strictly lower, unit diagonal implied
  const CCS<T>* L_E = nullptr;
  const std::vector<T>* d = nullptr;
  const CRS<T>* U_B = nullptr;  // strictly upper, unit diagonal implied
  const CRS<T>* U_F = nullptr;
};

/// S = C - L_E diag(d) U_F, no dropping.
template <class T>
CRS<T> compute_schur_s(const CRS<T>& c, const CCS<T>& l_e, std::span<const T> d,
                       const CRS<T>& u_f) {
  CRS<T> le = ccs_to_crs(l_e);
  Index nc = c.n_rows;
  CRS<T> s;
  s.n_rows = nc;
  s.n_cols = c.n_cols;
  SparseAccumulator<T> acc(c.n_cols);
  for (Index i = 0; i < nc; ++i) {
    for (Index p = c.row_start[i]; p < c.row_start[i + 1]; ++p) acc.add(c.col_ind[p], c.val[p]);
    for (Index p = le.row_start[i]; p < le.row_start[i + 1]; ++p) {
      Index j = le.col_ind[p];
      T coeff = le.val[p] * d[j];
      for (Index e = u_f.row_start[j]; e < u_f.row_start[j + 1]; ++e)
        acc.add(u_f.col_ind[e], -coeff * u_f.val[e]);
    }
    acc.sort_indices();
    for (Index j : acc.indices()) {
      s.col_ind.push_back(j);
      s.val.push_back(acc[j]);
    }
    s.row_start.push_back(s.nnz());
    acc.clear();
  }
  return s;
}

template <class T>
CRS<T> compute_schur_s(const SchurBlocks<T>& blk) {
  return compute_schur_s(*blk.C, *blk.L_E, std::span<const T>(*blk.d), *blk.U_F);
}

namespace detail {

// Rows of L_E L_B^{-1}, each as a dense vector of length m.
template <class T>
std::vector<std::vector<T>> left_solve_rows(const CCS<T>& l_b, const CCS<T>& l_e) {
  Index m = l_b.n_cols;
  CRS<T> le = ccs_to_crs(l_e);
  std::vector<std::vector<T>> g(le.n_rows, std::vector<T>(m, T(0)));
  for (Index i = 0; i < le.n_rows; ++i) {
    auto& x = g[i];
    for (Index p = le.row_start[i]; p < le.row_start[i + 1]; ++p) x[le.col_ind[p]] = le.val[p];
    // x L_B = e: x_j = e_j - sum_{r > j} x_r L_B(r, j)
    for (Index j = m - 1; j >= 0; --j) {
      T s = x[j];
      for (Index p = l_b.col_start[j]; p < l_b.col_start[j + 1]; ++p)
        s -= x[l_b.row_ind[p]] * l_b.val[p];
      x[j] = s;
    }
  }
  return g;
}

// Columns of U_B^{-1} U_F, each as a dense vector of length m.
template <class T>
std::vector<std::vector<T>> right_solve_cols(const CRS<T>& u_b, const CRS<T>& u_f) {
  Index m = u_b.n_rows;
  CCS<T> uf = crs_to_ccs(u_f);
  std::vector<std::vector<T>> g(uf.n_cols, std::vector<T>(m, T(0)));
  for (Index j = 0; j < uf.n_cols; ++j) {
    auto& x = g[j];
    for (Index p = uf.col_start[j]; p < uf.col_start[j + 1]; ++p) x[uf.row_ind[p]] = uf.val[p];
    for (Index i = m - 1; i >= 0; --i) {
      T s = x[i];
      for (Index p = u_b.row_start[i]; p < u_b.row_start[i + 1]; ++p)
        s -= u_b.val[p] * x[u_b.col_ind[p]];
      x[i] = s;
    }
  }
  return g;
}

}  // namespace detail

/// Hybrid Schur complement, dense. With HybridForm::formula:
///   H = C - 2 L_E D U_F + G_E B G_F,  G_E = L_E L_B^{-1},  G_F = U_B^{-1} U_F.
/// With HybridForm::listing the correction uses (B - D) in place of B:
///   H = C - L_E D U_F + G_E (B - D) G_F.
template <class T>
DenseMatrix<T> compute_schur_h(const SchurBlocks<T>& blk, HybridForm form = HybridForm::formula) {
  const CRS<T> s = compute_schur_s(blk);
  Index nc = s.n_rows;
  Index m = blk.B->n_rows;
  const auto& d = *blk.d;
  DenseMatrix<T> h = to_dense(s);
  if (m == 0 || nc == 0) return h;

  if (form == HybridForm::formula) {
    // second copy of -L_E D U_F: H = S - L_E D U_F + G_E B G_F
    CRS<T> le = ccs_to_crs(*blk.L_E);
    for (Index i = 0; i < nc; ++i)
      for (Index p = le.row_start[i]; p < le.row_start[i + 1]; ++p) {
        Index j = le.col_ind[p];
        T coeff = le.val[p] * d[j];
        for (Index e = blk.U_F->row_start[j]; e < blk.U_F->row_start[j + 1]; ++e)
          h(i, blk.U_F->col_ind[e]) -= coeff * blk.U_F->val[e];
      }
  }

  auto ge = detail::left_solve_rows(*blk.L_B, *blk.L_E);
  auto gf = detail::right_solve_cols(*blk.U_B, *blk.U_F);
  const CRS<T>& b = *blk.B;
  std::vector<T> w(m);
  for (Index i = 0; i < nc; ++i) {
    std::fill(w.begin(), w.end(), T(0));
    const auto& g = ge[i];
    for (Index r = 0; r < m; ++r) {
      if (g[r] == T(0)) continue;
      for (Index p = b.row_start[r]; p < b.row_start[r + 1]; ++p)
        w[b.col_ind[p]] += g[r] * b.val[p];
      if (form == HybridForm::listing) w[r] -= g[r] * d[r];
    }
    for (Index j = 0; j < nc; ++j) {
      const auto& f = gf[j];
      T acc = 0;
      for (Index r = 0; r < m; ++r) acc += w[r] * f[r];
      h(i, j) += acc;
    }
  }
  return h;
}

}  // namespace psmilu
