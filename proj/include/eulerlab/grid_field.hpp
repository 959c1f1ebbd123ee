#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace eulerlab {

/// Real field on a uniform n x n grid of the unit torus. Row-major; the value
/// at (i, j) samples the point x = (i / n, j / n).
class GridField {
 public:
  GridField() = default;
  explicit GridField(int n, double fill = 0.0);
  GridField(int n, std::vector<double> values);

  int n() const { return n_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[idx(i, j)]; }
  double operator()(int i, int j) const { return values_[idx(i, j)]; }

  /// Periodic access, any integer indices.
  double wrap(int i, int j) const { return values_[idx(mod(i), mod(j))]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double sum() const;
  double mean() const { return values_.empty() ? 0.0 : sum() / double(values_.size()); }
  double max_abs() const;
  double norm2() const;  // Euclidean norm of the value vector
  bool all_finite() const;

  /// Subtract the mean so that the values sum to zero.
  void remove_mean();

  friend bool operator==(const GridField&, const GridField&) = default;

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }
  int mod(int a) const { return ((a % n_) + n_) % n_; }

  int n_ = 0;
  std::vector<double> values_;
};

double dot(const GridField& a, const GridField& b);

}  // namespace eulerlab
