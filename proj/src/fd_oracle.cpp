#include "eulerlab/fd_oracle.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>

#include "eulerlab/errors.hpp"

namespace eulerlab {

double FdSolution::x(int i) const { return half_widths[0] * (-1.0 + 2.0 * i / double(n - 1)); }
double FdSolution::y(int j) const { return half_widths[1] * (-1.0 + 2.0 * j / double(n - 1)); }

double FdSolution::at(std::span<const double> z) const {
  if (z.size() != 2) throw InvalidArgument("FdSolution::at expects a 2D point");
  auto locate = [&](double v, double r, int& cell, double& frac) {
    const double s = std::clamp((v + r) / (2.0 * r) * (n - 1), 0.0, double(n - 1));
    cell = std::min(static_cast<int>(s), n - 2);
    frac = s - cell;
  };
  int i, j;
  double fx, fy;
  locate(z[0], half_widths[0], i, fx);
  locate(z[1], half_widths[1], j, fy);
  return (1 - fx) * (1 - fy) * at_node(i, j) + fx * (1 - fy) * at_node(i + 1, j) +
         (1 - fx) * fy * at_node(i, j + 1) + fx * fy * at_node(i + 1, j + 1);
}

FdSolution fd_oracle(const ZDrift& drift, double epsilon, const DomainSpec& domain,
                     const BoundaryFunction& boundary, int n, AdvectionScheme scheme) {
  if (domain.dimension() != 2 || domain.shape() != DomainSpec::Shape::box) {
    throw Unsupported("fd_oracle: only two-dimensional box domains are supported");
  }
  if (!(epsilon > 0.0)) throw InvalidArgument("fd_oracle: epsilon must be > 0");
  if (n < 3) throw InvalidArgument("fd_oracle: need at least 3 grid points per axis");

  FdSolution sol;
  sol.n = n;
  sol.half_widths = domain.half_widths();
  sol.values.assign(static_cast<std::size_t>(n) * n, 0.0);
  const std::array<double, 2> h{2.0 * sol.half_widths[0] / (n - 1), 2.0 * sol.half_widths[1] / (n - 1)};

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == 0 || j == 0 || i == n - 1 || j == n - 1) {
        const std::array<double, 2> p{sol.x(i), sol.y(j)};
        sol.values[static_cast<std::size_t>(i) * n + j] = boundary(p);
      }
    }
  }

  const int m = n - 2;
  auto unknown = [m](int i, int j) { return (i - 1) * m + (j - 1); };
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(m) * m * 5);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m) * m);

  std::array<double, 2> b{};
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= m; ++j) {
      const std::array<double, 2> p{sol.x(i), sol.y(j)};
      drift(p, b);
      // Assembled as -eps Laplacian R + v . grad R with v = -b.
      b[0] = -b[0];
      b[1] = -b[1];
      const int row = unknown(i, j);
      double diag = 0.0;
      // Coefficients of the lower (-) and upper (+) neighbour along each axis.
      std::array<double, 2> lower{}, upper{};
      for (int a = 0; a < 2; ++a) {
        const double diff = epsilon / (h[a] * h[a]);
        lower[a] = -diff;
        upper[a] = -diff;
        diag += 2.0 * diff;
        const bool central = scheme == AdvectionScheme::central ||
                             (scheme == AdvectionScheme::hybrid && std::abs(b[a]) * h[a] <= 2.0 * epsilon);
        if (central) {
          lower[a] -= b[a] / (2.0 * h[a]);
          upper[a] += b[a] / (2.0 * h[a]);
        } else if (b[a] > 0.0) {
          lower[a] -= b[a] / h[a];
          diag += b[a] / h[a];
        } else {
          upper[a] += b[a] / h[a];
          diag -= b[a] / h[a];
        }
      }
      triplets.emplace_back(row, row, diag);
      const std::array<std::array<int, 2>, 4> nb{{{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}}};
      const std::array<double, 4> coef{lower[0], upper[0], lower[1], upper[1]};
      for (int t = 0; t < 4; ++t) {
        const int ni = nb[t][0], nj = nb[t][1];
        if (ni == 0 || nj == 0 || ni == n - 1 || nj == n - 1) {
          rhs[row] -= coef[t] * sol.values[static_cast<std::size_t>(ni) * n + nj];
        } else {
          triplets.emplace_back(row, unknown(ni, nj), coef[t]);
        }
      }
    }
  }

  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(m) * m, static_cast<Eigen::Index>(m) * m);
  A.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) throw NumericalFailure("fd_oracle: sparse LU factorization failed");
  const Eigen::VectorXd u = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !u.allFinite()) throw NumericalFailure("fd_oracle: linear solve failed");

  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= m; ++j) sol.values[static_cast<std::size_t>(i) * n + j] = u[unknown(i, j)];
  }
  return sol;
}

}  // namespace eulerlab
