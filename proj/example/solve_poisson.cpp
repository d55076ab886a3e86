// Solve the 2D Poisson test problem with GMRES(30) preconditioned by the
// multilevel factorization and report the error against the analytic solution.
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "psmilu/psmilu.hpp"

int main(int argc, char** argv) {
  psmilu::Index side = argc > 1 ? std::atol(argv[1]) : 65;
  auto sys = psmilu::fdm_poisson_2d(side, side);

  psmilu::Options opts;  // defaults
  auto prec = psmilu::psmilu_factor(sys.a, sys.m, opts);
  std::printf("n = %lld, levels = %zu, fill ratio = %.2f, pivots = %lld\n",
              static_cast<long long>(sys.a.n_rows), prec.levels.size(), prec.fill_ratio(),
              static_cast<long long>(prec.total_pivots()));

  psmilu::LinearOperator<double> m_inv = [&](std::span<const double> x, std::span<double> y) {
    psmilu::psmilu_solve(prec, x, y);
  };
  psmilu::GmresOptions gopt;
  gopt.rtol = 1e-10;
  auto rep = psmilu::gmres_right(sys.a, std::span<const double>(sys.b), m_inv, gopt);

  double err = 0;
  for (std::size_t i = 0; i < rep.x.size(); ++i) err = std::max(err, std::abs(rep.x[i] - sys.exact[i]));
  std::printf("GMRES: %s in %lld iterations, relative residual %.2e, max error %.2e\n",
              rep.converged ? "converged" : "stopped", static_cast<long long>(rep.iterations),
              rep.final_relres, err);
  return rep.converged ? 0 : 1;
}
