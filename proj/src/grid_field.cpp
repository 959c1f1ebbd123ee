#include "eulerlab/grid_field.hpp"

#include <cmath>
#include <string>

#include "eulerlab/errors.hpp"

namespace eulerlab {

GridField::GridField(int n, double fill) : n_(n) {
  if (n < 1) throw InvalidArgument("GridField: n must be >= 1");
  values_.assign(static_cast<std::size_t>(n) * n, fill);
}

GridField::GridField(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {
  if (n < 1) throw InvalidArgument("GridField: n must be >= 1");
  if (values_.size() != static_cast<std::size_t>(n) * n) {
    throw InvalidArgument("GridField: expected " + std::to_string(n * n) + " values, got " +
                          std::to_string(values_.size()));
  }
}

double GridField::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridField::norm2() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

bool GridField::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void GridField::remove_mean() {
  const double m = mean();
  for (double& v : values_) v -= m;
}

double dot(const GridField& a, const GridField& b) {
  if (a.n() != b.n()) throw InvalidArgument("dot: grid size mismatch");
  const auto av = a.values();
  const auto bv = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return s;
}

}  // namespace eulerlab
