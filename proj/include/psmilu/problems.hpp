#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "psmilu/common.hpp"
#include "psmilu/sparse.hpp"

namespace psmilu {

enum class BoundaryMode {
  neumann_top,    // Neumann on the top edge/face, Dirichlet elsewhere
  all_dirichlet,
};

template <class T>
struct PoissonSystem {
  CRS<T> a;
  std::vector<T> b;
  Index m = 0;  // interior unknowns, ordered first
  std::vector<T> exact;
  std::vector<Index> dims;
  std::vector<T> h;
};

namespace detail {

// Node classification shared by the 2D and 3D generators.
enum class NodeKind { interior, neumann, dirichlet };

template <class T>
PoissonSystem<T> fdm_poisson(const std::vector<Index>& dims, BoundaryMode mode) {
  const std::size_t dim = dims.size();
  for (Index s : dims)
    if (s < 3) throw Error("every grid side must have at least 3 nodes");
  Index total = 1;
  for (Index s : dims) total *= s;
  std::vector<T> h(dim);
  for (std::size_t a = 0; a < dim; ++a) h[a] = T(1) / static_cast<T>(dims[a] - 1);

  auto coords = [&](Index node, std::vector<Index>& c) {
    for (std::size_t a = 0; a < dim; ++a) {
      c[a] = node % dims[a];
      node /= dims[a];
    }
  };
  auto node_of = [&](const std::vector<Index>& c) {
    Index node = 0;
    for (std::size_t a = dim; a-- > 0;) node = node * dims[a] + c[a];
    return node;
  };
  const std::size_t top = dim - 1;
  auto kind = [&](const std::vector<Index>& c) {
    bool side = false;
    for (std::size_t a = 0; a < dim; ++a)
      if (a != top && (c[a] == 0 || c[a] == dims[a] - 1)) side = true;
    if (side || c[top] == 0) return NodeKind::dirichlet;
    if (c[top] == dims[top] - 1)
      return mode == BoundaryMode::neumann_top ? NodeKind::neumann : NodeKind::dirichlet;
    return NodeKind::interior;
  };

  // numbering: interior, then Neumann, then Dirichlet; lexicographic within each
  std::vector<Index> number(total);
  std::vector<Index> c(dim);
  Index next = 0;
  for (NodeKind want : {NodeKind::interior, NodeKind::neumann, NodeKind::dirichlet}) {
    for (Index node = 0; node < total; ++node) {
      coords(node, c);
      if (kind(c) == want) number[node] = next++;
    }
  }

  PoissonSystem<T> sys;
  sys.dims = dims;
  sys.h = h;
  sys.b.assign(total, T(0));
  sys.exact.assign(total, T(0));
  TripletList<T> tl(total, total);
  std::vector<T> inv_h2(dim);
  T center = 0;
  for (std::size_t a = 0; a < dim; ++a) {
    inv_h2[a] = T(1) / (h[a] * h[a]);
    center += 2 * inv_h2[a];
  }
  const T dimf = static_cast<T>(dim);
  for (Index node = 0; node < total; ++node) {
    coords(node, c);
    T xsum = 0;
    for (std::size_t a = 0; a < dim; ++a) xsum += static_cast<T>(c[a]) * h[a];
    Index row = number[node];
    T u = std::exp(xsum);
    sys.exact[row] = u;
    switch (kind(c)) {
      case NodeKind::interior: {
        ++sys.m;
        tl.add(row, row, center);
        for (std::size_t a = 0; a < dim; ++a) {
          for (int dir : {-1, 1}) {
            auto nb = c;
            nb[a] += dir;
            tl.add(row, number[node_of(nb)], -inv_h2[a]);
          }
        }
        sys.b[row] = -dimf * u;
        break;
      }
      case NodeKind::neumann: {
        // second-order one-sided difference for du/dn on the top boundary
        T inv2h = T(1) / (2 * h[top]);
        auto nb = c;
        tl.add(row, row, 3 * inv2h);
        nb[top] = c[top] - 1;
        tl.add(row, number[node_of(nb)], -4 * inv2h);
        nb[top] = c[top] - 2;
        tl.add(row, number[node_of(nb)], inv2h);
        sys.b[row] = u;
        break;
      }
      case NodeKind::dirichlet:
        tl.add(row, row, T(1));
        sys.b[row] = u;
        break;
    }
  }
  sys.a = crs_from_triplets(tl);
  return sys;
}

}  // namespace detail

/// 5-point Laplacian on the unit square, exact solution e^{x+y}.
template <class T = double>
PoissonSystem<T> fdm_poisson_2d(Index nx, Index ny, BoundaryMode mode = BoundaryMode::neumann_top) {
  return detail::fdm_poisson<T>({nx, ny}, mode);
}

/// 7-point Laplacian on the unit cube, exact solution e^{x+y+z}.
template <class T = double>
PoissonSystem<T> fdm_poisson_3d(Index nx, Index ny, Index nz,
                                BoundaryMode mode = BoundaryMode::neumann_top) {
  return detail::fdm_poisson<T>({nx, ny, nz}, mode);
}

enum class RandomKind { spd, symmetric_indefinite, nonsymmetric, zero_diag_sym };

inline RandomKind parse_random_kind(const std::string& s) {
  if (s == "spd") return RandomKind::spd;
  if (s == "symmetric-indefinite" || s == "symmetric_indefinite") return RandomKind::symmetric_indefinite;
  if (s == "nonsymmetric") return RandomKind::nonsymmetric;
  if (s == "zero-diag-sym" || s == "zero_diag_sym") return RandomKind::zero_diag_sym;
  throw Error("unknown random matrix kind '" + s + "'");
}

/// Seeded random test matrices.
///  spd: M^T M + n I with M sparse.
///  symmetric_indefinite: symmetric, diagonal +-(1 + row sum), random signs.
///  nonsymmetric: row diagonally dominant with random diagonal signs.
///  zero_diag_sym: symmetric, every row has an off-diagonal, at least one zero diagonal.
template <class T = double>
CRS<T> random_test_matrix(Index n, double density, RandomKind kind, std::uint64_t seed) {
  if (n <= 0) throw Error("matrix size must be positive");
  if (!(density > 0 && density <= 1)) throw Error("density must lie in (0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::bernoulli_distribution hit(density);
  std::bernoulli_distribution coin(0.5);

  if (kind == RandomKind::spd) {
    DenseMatrix<T> mm(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (hit(rng)) mm(i, j) = static_cast<T>(unit(rng));
    DenseMatrix<T> a(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        T s = 0;
        for (Index k = 0; k < n; ++k) s += mm(k, i) * mm(k, j);
        a(i, j) = s;
      }
    for (Index i = 0; i < n; ++i) a(i, i) += static_cast<T>(n);
    return to_crs(a);
  }

  DenseMatrix<T> a(n, n);
  const bool symmetric = kind != RandomKind::nonsymmetric;
  for (Index i = 0; i < n; ++i) {
    for (Index j = symmetric ? i + 1 : 0; j < n; ++j) {
      if (i == j || !hit(rng)) continue;
      T v = static_cast<T>(unit(rng));
      a(i, j) = v;
      if (symmetric) a(j, i) = v;
    }
  }
  if (kind == RandomKind::zero_diag_sym && n > 1) {
    for (Index i = 0; i < n; ++i) {
      bool any = false;
      for (Index j = 0; j < n; ++j) any = any || (j != i && a(i, j) != T(0));
      if (!any) {
        Index j = (i + 1) % n;
        T v = static_cast<T>(0.5 + 0.5 * std::abs(unit(rng)));
        a(i, j) = v;
        a(j, i) = v;
      }
    }
  }
  std::vector<char> zero(n, 0);
  if (kind == RandomKind::zero_diag_sym) {
    std::bernoulli_distribution pick(0.3);
    for (Index i = 0; i < n; ++i) zero[i] = pick(rng);
    zero[std::uniform_int_distribution<Index>(0, n - 1)(rng)] = 1;
    if (n == 1) zero[0] = 0;
  }
  for (Index i = 0; i < n; ++i) {
    if (zero[i]) continue;
    T rowsum = 0;
    for (Index j = 0; j < n; ++j)
      if (j != i) rowsum += std::abs(a(i, j));
    T sign = coin(rng) ? T(1) : T(-1);
    if (kind == RandomKind::spd) sign = 1;
    a(i, i) = sign * (1 + rowsum);
  }
  return to_crs(a);
}

}  // namespace psmilu
