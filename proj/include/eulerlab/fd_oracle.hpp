#pragma once

#include <vector>

#include "eulerlab/density.hpp"

namespace eulerlab {

/// Discretization of the advection term b . grad R.
enum class AdvectionScheme {
  upwind,
  central,
  /// Central where the cell Peclet number |b_i| h / (2 eps) is <= 1, upwind elsewhere.
  hybrid,
};

/// Nodal solution on a uniform (n x n) grid covering the closed box,
/// boundary nodes included. values[i * n + j] sits at (x_i, y_j).
struct FdSolution {
  int n = 0;
  std::vector<double> half_widths;
  std::vector<double> values;

  double x(int i) const;
  double y(int j) const;
  double at_node(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
  /// Bilinear interpolation at a point of the closed box.
  double at(std::span<const double> z) const;
};

/// Solves b . grad R + eps Laplacian R = 0 in a 2D box with R = f on the
/// boundary: the backward equation of dz = b dt + sqrt(2 eps) dW, so it is
/// the oracle for estimate_density with the same drift. The equation
/// v . grad R - eps Laplacian R = 0 is the case b = -v. Throws Unsupported unless the domain is a 2D box, and
/// NumericalFailure if the sparse factorization fails.
FdSolution fd_oracle(const ZDrift& drift, double epsilon, const DomainSpec& domain,
                     const BoundaryFunction& boundary, int grid_points_per_axis,
                     AdvectionScheme scheme = AdvectionScheme::central);

}  // namespace eulerlab
