#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "psmilu/common.hpp"

namespace psmilu {

/// Fill cap alpha * base, with alpha = +inf meaning unbounded.
inline Index fill_cap(double alpha, Index base) {
  if (!std::isfinite(alpha)) return std::numeric_limits<Index>::max();
  double v = std::floor(alpha * static_cast<double>(base));
  if (v >= static_cast<double>(std::numeric_limits<Index>::max())) return std::numeric_limits<Index>::max();
  return static_cast<Index>(v);
}

/// Removes entries with |v| * kappa <= tau, then keeps the n_keep largest
/// magnitudes (equal magnitudes prefer the smaller index). The result is
/// sorted by index.
template <class T>
void apply_dropping(std::vector<std::pair<Index, T>>& entries, T kappa, T tau, Index n_keep) {
  std::erase_if(entries, [&](const auto& e) { return std::abs(e.second) * kappa <= tau; });
  if (n_keep < 0) n_keep = 0;
  if (static_cast<Index>(entries.size()) > n_keep) {
    auto larger = [](const auto& x, const auto& y) {
      T ax = std::abs(x.second), ay = std::abs(y.second);
      return ax != ay ? ax > ay : x.first < y.first;
    };
    std::nth_element(entries.begin(), entries.begin() + n_keep, entries.end(), larger);
    entries.resize(static_cast<std::size_t>(n_keep));
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
}

}  // namespace psmilu
