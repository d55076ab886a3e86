#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "psmilu/aug_storage.hpp"
#include "psmilu/common.hpp"
#include "psmilu/condest.hpp"
#include "psmilu/dropping.hpp"
#include "psmilu/options.hpp"
#include "psmilu/sparse.hpp"
#include "psmilu/sparse_accumulator.hpp"

namespace psmilu {

/// Floating point operation counts of the Crout factorization. A multiply-add
/// counts as 2.
struct CroutCounters {
  Index update_l = 0;           // column updates of L
  Index update_u_leading = 0;   // row updates of U inside the leading block
  Index update_u_trailing = 0;  // row updates of U in the trailing (F) columns
  Index update_d = 0;           // diagonal pre-update
  Index estimator = 0;
  Index pivots = 0;
  Index tail_deferrals = 0;  // bad trailing diagonals skipped by the walk-down
  Index swap_work = 0;

  Index update_total() const { return update_l + update_u_leading + update_u_trailing; }
};

template <class T>
struct StepRecord {
  T d;
  T kappa_L;
  T kappa_U;
  Index nnz_l;
  Index nnz_u;
  Index cap_l;
  Index cap_u;
};

template <class T>
struct CroutResult {
  Index n = 0;
  Index m = 0;
  CCS<T> L_B;  // m x m strictly lower part
  CCS<T> L_E;  // (n - m) x m
  std::vector<T> d_B;
  CRS<T> U_B;  // m x m strictly upper part
  CRS<T> U_F;  // m x (n - m)
  std::vector<Index> p;
  std::vector<Index> q;
  CroutCounters counters;
  std::vector<StepRecord<T>> steps;
};

/// One level of incomplete LDU (LDL^T on a symmetric leading block) with
/// diagonal pivoting. `a` is the scaled matrix in original numbering; p and q
/// give its positional order. Only the leading m positions are eligible.
template <class T>
class IludpFactorizer {
 public:
  IludpFactorizer(const CRS<T>& a, std::vector<Index> p, std::vector<Index> q, Index m, bool sym,
                  const Options& opts)
      : a_(a), ac_(crs_to_ccs(a)), n_(a.n_rows), m_(m), sym_(sym), opts_(opts),
        p_(std::move(p)), q_(std::move(q)) {
    if (a.n_rows != a.n_cols) throw StructuralError("matrix must be square");
    if (m_ < 0 || m_ > n_) throw Error("leading block size out of range");
    p_inv_ = invert_permutation(p_);
    q_inv_ = invert_permutation(q_);
    d_.resize(n_);
    for (Index i = 0; i < n_; ++i) d_[i] = a_.at(p_[i], q_[i]);
    Index nnz_a = a.nnz();
    L_.reset(n_, reserve_size(opts.alpha_L, nnz_a));
    U_.reset(n_, reserve_size(opts.alpha_U, nnz_a));
    est_L_.reset(n_);
    est_U_.reset(n_);
    l_acc_.resize(n_);
    u_acc_.resize(n_);
  }

  Index n() const noexcept { return n_; }
  Index m() const noexcept { return m_; }
  Index k() const noexcept { return k_; }
  bool done() const noexcept { return k_ >= m_; }
  bool symmetric() const noexcept { return sym_; }
  const std::vector<T>& d() const noexcept { return d_; }
  const std::vector<Index>& p() const noexcept { return p_; }
  const std::vector<Index>& q() const noexcept { return q_; }
  const AugCCS<T>& L() const noexcept { return L_; }
  const AugCRS<T>& U() const noexcept { return U_; }
  const CroutCounters& counters() const noexcept { return counters_; }
  const std::vector<StepRecord<T>>& steps() const noexcept { return steps_; }

  bool bad_diagonal(T d) const { return d == T(0) || std::abs(T(1) / d) > opts_.tau_d; }

  /// kappa estimates for the current step from the finalized prefix.
  std::pair<T, T> estimate() {
    T s_l = row_dot_L(k_);
    T s_u = sym_ ? s_l : col_dot_U(k_);
    return {CondEstimator<T>::estimate(s_l), CondEstimator<T>::estimate(s_u)};
  }

  /// Interchanges positions k and i (both >= current step).
  void swap_positions(Index k, Index i) {
    if (k == i) return;
    if (k > i) std::swap(k, i);
    auto before = L_.counters().swap_work + U_.counters().swap_work;
    L_.swap_rows(k, i);
    U_.swap_cols(k, i);
    counters_.swap_work += L_.counters().swap_work + U_.counters().swap_work - before;
    std::swap(p_[k], p_[i]);
    std::swap(q_[k], q_[i]);
    p_inv_[p_[k]] = k;
    p_inv_[p_[i]] = i;
    q_inv_[q_[k]] = k;
    q_inv_[q_[i]] = i;
    std::swap(d_[k], d_[i]);
  }

  /// Raw column k of the Schur update below the diagonal (positions > k).
  /// The result stays in the internal accumulator.
  const SparseAccumulator<T>& update_column() {
    l_acc_.clear();
    Index k = k_;
    for (Index e = ac_.col_start[q_[k]]; e < ac_.col_start[q_[k] + 1]; ++e) {
      Index pos = p_inv_[ac_.row_ind[e]];
      if (pos > k) l_acc_.add(pos, ac_.val[e]);
    }
    U_.for_each_in_col(k, [&](Index j, T u) {
      T coeff = d_[j] * u;
      Index end = L_.major_end(j);
      for (Index s = L_.front(j, k + 1); s < end; ++s) {
        l_acc_.add(L_.inner_at(s), -coeff * L_.value_at(s));
        counters_.update_l += 2;
      }
    });
    return l_acc_;
  }

  /// Raw row k of the Schur update right of the diagonal. In symmetric mode
  /// the leading part is copied from the column update, which must be current.
  const SparseAccumulator<T>& update_row() {
    u_acc_.clear();
    Index k = k_;
    if (!sym_) {
      for (Index e = a_.row_start[p_[k]]; e < a_.row_start[p_[k] + 1]; ++e) {
        Index pos = q_inv_[a_.col_ind[e]];
        if (pos > k) u_acc_.add(pos, a_.val[e]);
      }
      L_.for_each_in_row(k, [&](Index j, T l) {
        T coeff = l * d_[j];
        Index end = U_.major_end(j);
        for (Index s = U_.front(j, k + 1); s < end; ++s) {
          Index c = U_.inner_at(s);
          u_acc_.add(c, -coeff * U_.value_at(s));
          if (c < m_)
            counters_.update_u_leading += 2;
          else
            counters_.update_u_trailing += 2;
        }
      });
      return u_acc_;
    }
    for (Index i : l_acc_.indices())
      if (i < m_) u_acc_.add(i, l_acc_[i]);
    for (Index e = a_.row_start[p_[k]]; e < a_.row_start[p_[k] + 1]; ++e) {
      Index pos = q_inv_[a_.col_ind[e]];
      if (pos >= m_) u_acc_.add(pos, a_.val[e]);
    }
    L_.for_each_in_row(k, [&](Index j, T l) {
      T coeff = l * d_[j];
      Index begin = U_.major_begin(j);
      for (Index s = U_.major_end(j) - 1; s >= begin && U_.inner_at(s) >= m_; --s) {
        u_acc_.add(U_.inner_at(s), -coeff * U_.value_at(s));
        counters_.update_u_trailing += 2;
      }
    });
    return u_acc_;
  }

  /// Runs step k to completion: pivots until an acceptable diagonal is found
  /// (or the leading block is exhausted), then computes, drops and appends.
  void step() {
    if (done()) return;
    bool pivot = false;
    for (;;) {
      if (pivot) {
        while (m_ - 1 > k_ && bad_diagonal(d_[m_ - 1])) {
          --m_;
          ++counters_.tail_deferrals;
        }
        if (m_ - 1 <= k_) {
          m_ = k_;
          ++counters_.pivots;
          return;
        }
        swap_positions(k_, m_ - 1);
        --m_;
        ++counters_.pivots;
      }
      if (bad_diagonal(d_[k_])) {
        pivot = true;
        continue;
      }
      s_l_ = row_dot_L(k_);
      s_u_ = sym_ ? s_l_ : col_dot_U(k_);
      T kl = CondEstimator<T>::estimate(s_l_);
      T ku = CondEstimator<T>::estimate(s_u_);
      if (kl > opts_.tau_kappa || ku > opts_.tau_kappa) {
        pivot = true;
        continue;
      }
      accept(kl, ku);
      return;
    }
  }

  void run() {
    while (!done()) step();
  }

  CroutResult<T> finish() const {
    CroutResult<T> r;
    r.n = n_;
    r.m = k_;
    Index m = k_;
    r.L_B = L_.to_ccs(0, m);
    r.L_E = L_.to_ccs(m, n_);
    r.U_B = U_.to_crs(0, m);
    r.U_F = U_.to_crs(m, n_);
    r.d_B.assign(d_.begin(), d_.begin() + m);
    r.p = p_;
    r.q = q_;
    r.counters = counters_;
    r.steps = steps_;
    return r;
  }

 private:
  static Index reserve_size(double alpha, Index nnz) {
    double f = std::isfinite(alpha) ? alpha + 1 : 2;
    return static_cast<Index>(f * static_cast<double>(nnz));
  }

  T row_dot_L(Index k) {
    T s = 0;
    L_.for_each_in_row(k, [&](Index j, T l) {
      s += l * est_L_.x(j);
      counters_.estimator += 2;
    });
    return s;
  }

  T col_dot_U(Index k) {
    T s = 0;
    U_.for_each_in_col(k, [&](Index j, T u) {
      s += u * est_U_.x(j);
      counters_.estimator += 2;
    });
    return s;
  }

  void accept(T kl, T ku) {
    Index k = k_;
    T dk = d_[k];
    update_column();
    update_row();

    // diagonal pre-update before any dropping
    for (Index i : l_acc_.indices()) {
      if (i >= m_ || !u_acc_.contains(i)) continue;
      T ui = u_acc_[i];
      if (ui == T(0)) continue;
      d_[i] -= l_acc_[i] * ui / dk;
      counters_.update_d += 2;
    }

    Index cap_l = fill_cap(opts_.alpha_L, ac_.col_nnz(q_[k]));
    Index cap_u = fill_cap(opts_.alpha_U, a_.row_nnz(p_[k]));

    l_list_.clear();
    for (Index i : l_acc_.indices()) l_list_.emplace_back(i, l_acc_[i] / dk);
    apply_dropping(l_list_, kl, static_cast<T>(opts_.tau_L), cap_l);

    u_list_.clear();
    if (!sym_) {
      for (Index i : u_acc_.indices()) u_list_.emplace_back(i, u_acc_[i] / dk);
      apply_dropping(u_list_, ku, static_cast<T>(opts_.tau_U), cap_u);
    } else {
      // the leading part of u mirrors l exactly; trim both if it alone exceeds the U cap
      Index b_count = 0;
      for (const auto& e : l_list_)
        if (e.first < m_) ++b_count;
      if (b_count > cap_u) {
        std::vector<std::pair<Index, T>> b_part, e_part;
        for (const auto& e : l_list_) (e.first < m_ ? b_part : e_part).push_back(e);
        apply_dropping(b_part, T(1), T(-1), cap_u);
        l_list_ = std::move(b_part);
        l_list_.insert(l_list_.end(), e_part.begin(), e_part.end());
        std::sort(l_list_.begin(), l_list_.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        b_count = cap_u;
      }
      std::vector<std::pair<Index, T>> f_part;
      for (Index i : u_acc_.indices())
        if (i >= m_) f_part.emplace_back(i, u_acc_[i] / dk);
      apply_dropping(f_part, ku, static_cast<T>(opts_.tau_U), cap_u - b_count);
      for (const auto& e : l_list_)
        if (e.first < m_) u_list_.push_back(e);
      u_list_.insert(u_list_.end(), f_part.begin(), f_part.end());
    }

    split(l_list_, idx_buf_, val_buf_);
    L_.append_column(idx_buf_, val_buf_);
    split(u_list_, idx_buf_, val_buf_);
    U_.append_row(idx_buf_, val_buf_);

    est_L_.commit(k, s_l_);
    est_U_.commit(k, s_u_);
    steps_.push_back({dk, kl, ku, static_cast<Index>(l_list_.size()),
                      static_cast<Index>(u_list_.size()), cap_l, cap_u});
    ++k_;
  }

  static void split(const std::vector<std::pair<Index, T>>& in, std::vector<Index>& idx,
                    std::vector<T>& val) {
    idx.resize(in.size());
    val.resize(in.size());
    for (std::size_t e = 0; e < in.size(); ++e) {
      idx[e] = in[e].first;
      val[e] = in[e].second;
    }
  }

  const CRS<T>& a_;
  CCS<T> ac_;
  Index n_;
  Index m_;
  bool sym_;
  Options opts_;
  Index k_ = 0;
  std::vector<Index> p_, q_, p_inv_, q_inv_;
  std::vector<T> d_;
  AugCCS<T> L_;
  AugCRS<T> U_;
  CondEstimator<T> est_L_, est_U_;
  T s_l_ = 0, s_u_ = 0;
  SparseAccumulator<T> l_acc_, u_acc_;
  std::vector<std::pair<Index, T>> l_list_, u_list_;
  std::vector<Index> idx_buf_;
  std::vector<T> val_buf_;
  CroutCounters counters_;
  std::vector<StepRecord<T>> steps_;
};

/// Factorizes the leading block of a(p, q); see IludpFactorizer.
template <class T>
CroutResult<T> iludp_factor(const CRS<T>& a, std::vector<Index> p, std::vector<Index> q, Index m,
                            bool sym, const Options& opts) {
  IludpFactorizer<T> f(a, std::move(p), std::move(q), m, sym, opts);
  f.run();
  return f.finish();
}

}  // namespace psmilu
