#pragma once

#include <limits>

#include "psmilu/common.hpp"
#include "psmilu/preprocess.hpp"

namespace psmilu {

/// How the hybrid Schur complement is evaluated near the dense switch.
enum class HybridForm {
  formula,  // C - 2 L_E D U_F + G_E B G_F
  listing,  // C - L_E D U_F + G_E (B - D) G_F
};

struct Options {
  double tau_L = 0.01;
  double tau_U = 0.01;
  double tau_d = 10.0;
  double tau_kappa = 100.0;
  double alpha_L = 4.0;  // +inf disables the cap
  double alpha_U = 4.0;
  double rho = 0.25;
  double c_d = 1.0;
  double c_h = 10.0;
  Index N = 0;  // reference size; 0 means the size of the input matrix

  PreprocessOptions preprocess;
  HybridForm hybrid = HybridForm::formula;
  bool use_hybrid = true;          // false always uses the plain Schur complement
  bool symmetric_crout = true;     // false runs the level-1 leading block through the general update
  int max_levels = 64;

  static Options no_dropping() {
    Options o;
    o.tau_L = 0;
    o.tau_U = 0;
    o.alpha_L = std::numeric_limits<double>::infinity();
    o.alpha_U = std::numeric_limits<double>::infinity();
    return o;
  }
};

}  // namespace psmilu
