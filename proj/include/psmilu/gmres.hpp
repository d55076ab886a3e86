#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "psmilu/common.hpp"
#include "psmilu/sparse.hpp"

namespace psmilu {

template <class T>
struct SolveReport {
  std::vector<T> x;
  Index iterations = 0;
  Index restarts = 0;
  std::vector<T> residual_history;  // relative residual after each inner iteration
  bool converged = false;
  bool breakdown = false;
  T final_relres = 0;

  /// First iteration whose recorded residual reached `tol`, or -1.
  Index iterations_to(T tol) const {
    for (std::size_t i = 0; i < residual_history.size(); ++i)
      if (residual_history[i] <= tol) return static_cast<Index>(i) + 1;
    return -1;
  }
};

struct GmresOptions {
  Index restart = 30;
  double rtol = 1e-12;
  Index maxit = 2000;
};

template <class T>
using LinearOperator = std::function<void(std::span<const T>, std::span<T>)>;

/// Restarted GMRES with right preconditioning: solves A M^{-1} y = b and
/// returns x = M^{-1} y. Convergence is confirmed on the true residual.
template <class T>
SolveReport<T> gmres_right(const LinearOperator<T>& apply_a, std::span<const T> b,
                           const LinearOperator<T>& apply_m_inv, const GmresOptions& opt = {}) {
  const Index n = static_cast<Index>(b.size());
  const Index restart = std::max<Index>(1, opt.restart);
  SolveReport<T> rep;
  rep.x.assign(n, T(0));
  const T bnorm = norm2(b);
  if (bnorm == T(0)) {
    rep.converged = true;
    return rep;
  }
  const T rtol = static_cast<T>(opt.rtol);
  const T breakdown_tol = T(1e-14) * bnorm;

  std::vector<std::vector<T>> v(restart + 1, std::vector<T>(n));
  std::vector<T> h((restart + 1) * restart), cs(restart), sn(restart), g(restart + 1), y(restart);
  std::vector<T> r(n), w(n), z(n);
  auto H = [&](Index i, Index j) -> T& { return h[i * restart + j]; };

  auto true_residual = [&]() {
    apply_a(rep.x, r);
    for (Index i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return norm2(std::span<const T>(r));
  };

  T beta = true_residual();
  rep.final_relres = beta / bnorm;
  while (rep.final_relres > rtol && rep.iterations < opt.maxit && !rep.breakdown) {
    for (Index i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), T(0));
    g[0] = beta;
    Index j = 0;
    for (; j < restart && rep.iterations < opt.maxit; ++j) {
      apply_m_inv(v[j], z);
      apply_a(z, w);
      for (Index i = 0; i <= j; ++i) {
        T dot = 0;
        for (Index e = 0; e < n; ++e) dot += w[e] * v[i][e];
        H(i, j) = dot;
        for (Index e = 0; e < n; ++e) w[e] -= dot * v[i][e];
      }
      T hn = norm2(std::span<const T>(w));
      H(j + 1, j) = hn;
      if (hn > breakdown_tol)
        for (Index e = 0; e < n; ++e) v[j + 1][e] = w[e] / hn;
      for (Index i = 0; i < j; ++i) {
        T tmp = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = tmp;
      }
      T denom = std::hypot(H(j, j), H(j + 1, j));
      if (denom == T(0)) {
        cs[j] = 1;
        sn[j] = 0;
      } else {
        cs[j] = H(j, j) / denom;
        sn[j] = H(j + 1, j) / denom;
      }
      H(j, j) = cs[j] * H(j, j) + sn[j] * H(j + 1, j);
      H(j + 1, j) = 0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++rep.iterations;
      T est = std::abs(g[j + 1]) / bnorm;
      rep.residual_history.push_back(est);
      if (hn <= breakdown_tol) {
        ++j;
        if (est > rtol) rep.breakdown = true;
        break;
      }
      if (est <= rtol) {
        ++j;
        break;
      }
    }
    // least squares update x += M^{-1} V y
    for (Index i = j - 1; i >= 0; --i) {
      T s = g[i];
      for (Index c = i + 1; c < j; ++c) s -= H(i, c) * y[c];
      y[i] = H(i, i) != T(0) ? s / H(i, i) : T(0);
    }
    std::fill(w.begin(), w.end(), T(0));
    for (Index i = 0; i < j; ++i)
      for (Index e = 0; e < n; ++e) w[e] += y[i] * v[i][e];
    apply_m_inv(w, z);
    for (Index e = 0; e < n; ++e) rep.x[e] += z[e];
    beta = true_residual();
    rep.final_relres = beta / bnorm;
    if (!rep.residual_history.empty()) rep.residual_history.back() = rep.final_relres;
    if (rep.final_relres > rtol && rep.iterations < opt.maxit && !rep.breakdown) ++rep.restarts;
  }
  rep.converged = rep.final_relres <= rtol;
  return rep;
}

/// Convenience overload for a CRS matrix.
template <class T>
SolveReport<T> gmres_right(const CRS<T>& a, std::span<const T> b,
                           const LinearOperator<T>& apply_m_inv, const GmresOptions& opt = {}) {
  LinearOperator<T> op = [&a](std::span<const T> x, std::span<T> y) { multiply(a, x, y); };
  return gmres_right(op, b, apply_m_inv, opt);
}

template <class T>
LinearOperator<T> identity_operator() {
  return [](std::span<const T> x, std::span<T> y) { std::copy(x.begin(), x.end(), y.begin()); };
}

}  // namespace psmilu
