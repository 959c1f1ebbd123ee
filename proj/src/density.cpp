#include "eulerlab/density.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>

#include "eulerlab/errors.hpp"
#include "eulerlab/parallel.hpp"
#include "eulerlab/rng.hpp"
#include "eulerlab/sde.hpp"

namespace eulerlab {

ZDrift zero_drift() {
  return [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
}

ZDrift negated(ZDrift b) {
  return [b = std::move(b)](std::span<const double> z, std::span<double> out) {
    b(z, out);
    for (double& v : out) v = -v;
  };
}

// ---------------------------------------------------------------- domain

DomainSpec DomainSpec::box(std::vector<double> half_widths) {
  if (half_widths.empty()) throw InvalidArgument("box domain needs at least one coordinate");
  for (double r : half_widths) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("box half-widths must be finite and > 0");
  }
  DomainSpec d;
  d.shape_ = Shape::box;
  d.dim_ = half_widths.size();
  d.half_widths_ = std::move(half_widths);
  return d;
}

DomainSpec DomainSpec::ball(double radius, std::size_t dimension) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball radius must be finite and > 0");
  if (dimension == 0) throw InvalidArgument("ball domain needs at least one coordinate");
  DomainSpec d;
  d.shape_ = Shape::ball;
  d.dim_ = dimension;
  d.radius_ = radius;
  return d;
}

bool DomainSpec::contains(std::span<const double> z) const {
  if (z.size() != dim_) throw InvalidArgument("point dimension does not match the domain");
  if (shape_ == Shape::box) {
    for (std::size_t i = 0; i < dim_; ++i) {
      if (!(std::abs(z[i]) < half_widths_[i])) return false;
    }
    return true;
  }
  double r2 = 0.0;
  for (double v : z) r2 += v * v;
  return r2 < radius_ * radius_;
}

std::vector<double> DomainSpec::crossing(std::span<const double> p, std::span<const double> q) const {
  std::vector<double> x(dim_);
  if (shape_ == Shape::box) {
    double t = 1.0;
    std::size_t face = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      if (std::abs(q[i]) >= half_widths_[i]) {
        const double target = std::copysign(half_widths_[i], q[i]);
        const double ti = (target - p[i]) / (q[i] - p[i]);
        if (ti <= t) {
          t = ti;
          face = i;
        }
      }
    }
    t = std::clamp(t, 0.0, 1.0);
    for (std::size_t i = 0; i < dim_; ++i) {
      x[i] = std::clamp(p[i] + t * (q[i] - p[i]), -half_widths_[i], half_widths_[i]);
    }
    x[face] = std::copysign(half_widths_[face], q[face]);
    return x;
  }
  double a = 0.0, b = 0.0, c = -radius_ * radius_;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double d = q[i] - p[i];
    a += d * d;
    b += 2.0 * p[i] * d;
    c += p[i] * p[i];
  }
  const double t = a > 0.0 ? std::clamp((-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a), 0.0, 1.0) : 1.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    x[i] = p[i] + t * (q[i] - p[i]);
    norm += x[i] * x[i];
  }
  norm = std::sqrt(norm);
  for (double& v : x) v *= radius_ / norm;
  return x;
}

std::vector<std::vector<double>> DomainSpec::boundary_samples(std::size_t per_face) const {
  per_face = std::max<std::size_t>(per_face, 2);
  std::vector<std::vector<double>> pts;
  if (shape_ == Shape::ball) {
    if (dim_ == 1) return {{-radius_}, {radius_}};
    if (dim_ == 2) {
      const std::size_t n = 4 * per_face;
      for (std::size_t i = 0; i < n; ++i) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        pts.push_back({radius_ * std::cos(th), radius_ * std::sin(th)});
      }
      return pts;
    }
    const NoiseStream rng(0x5eed, 0);
    for (std::size_t s = 0; s < 2 * dim_ * per_face; ++s) {
      std::vector<double> x(dim_);
      double norm = 0.0;
      for (std::size_t i = 0; i < dim_; i += 2) {
        const auto [g1, g2] = rng.normal_pair(s, static_cast<std::uint32_t>(i / 2));
        x[i] = g1;
        if (i + 1 < dim_) x[i + 1] = g2;
      }
      for (double v : x) norm += v * v;
      for (double& v : x) v *= radius_ / std::sqrt(norm);
      pts.push_back(std::move(x));
    }
    return pts;
  }
  // Box: a tensor grid on every face.
  const std::size_t other = dim_ - 1;
  std::size_t m = per_face;
  if (other > 1) m = std::max<std::size_t>(2, static_cast<std::size_t>(std::pow(double(per_face), 1.0 / other)));
  std::size_t cells = 1;
  for (std::size_t i = 0; i < other; ++i) cells *= m;
  for (std::size_t face = 0; face < dim_; ++face) {
    for (double side : {-1.0, 1.0}) {
      for (std::size_t c = 0; c < cells; ++c) {
        std::vector<double> x(dim_);
        std::size_t rem = c;
        for (std::size_t i = 0; i < dim_; ++i) {
          if (i == face) {
            x[i] = side * half_widths_[i];
            continue;
          }
          const std::size_t j = rem % m;
          rem /= m;
          x[i] = half_widths_[i] * (-1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(m - 1));
        }
        pts.push_back(std::move(x));
      }
    }
  }
  return pts;
}

// ---------------------------------------------------------------- boundary data

BoundaryFunction BoundaryFunction::constant(double c) {
  if (!std::isfinite(c)) throw InvalidArgument("constant boundary value must be finite");
  BoundaryFunction f;
  f.kind_ = Kind::constant;
  f.fn_ = [c](std::span<const double>) { return c; };
  return f;
}

BoundaryFunction BoundaryFunction::coordinate(std::size_t index) {
  BoundaryFunction f;
  f.kind_ = Kind::coordinate;
  f.fn_ = [index](std::span<const double> z) {
    if (index >= z.size()) throw InvalidArgument("coordinate boundary index out of range");
    return z[index];
  };
  return f;
}

BoundaryFunction BoundaryFunction::enstrophy_gaussian(std::function<SpectralState(std::span<const double>)> embed) {
  BoundaryFunction f;
  f.kind_ = Kind::enstrophy_gaussian;
  f.fn_ = [embed = std::move(embed)](std::span<const double> z) {
    const SpectralState phi = from_z_coordinates(embed(z));
    double acc = 0.0;
    const auto& modes = *phi.mode_set();
    for (std::size_t k = 0; k < phi.size(); ++k) {
      const double k2 = modes[k].norm2();
      acc += k2 * k2 * std::norm(phi[k]);
    }
    return std::exp(-0.5 * acc);
  };
  return f;
}

BoundaryFunction BoundaryFunction::custom(Fn fn) {
  if (!fn) throw InvalidArgument("custom boundary function is empty");
  BoundaryFunction f;
  f.kind_ = Kind::custom;
  f.fn_ = std::move(fn);
  return f;
}

// ---------------------------------------------------------------- reductions

ReducedSystem::ReducedSystem(ModeSetPtr modes, SpectralState background_z, std::vector<FreeCoordinate> free)
    : modes_(std::move(modes)), background_(std::move(background_z)) {
  if (!background_.mode_set() || !same_modes(*background_.mode_set(), *modes_)) {
    throw InvalidArgument("reduction background state uses a different mode set");
  }
  if (free.empty()) throw InvalidArgument("reduction needs at least one free coordinate");
  for (const auto& f : free) {
    const auto idx = modes_->index_of(f.mode);
    if (!idx) throw InvalidArgument("free coordinate refers to a mode outside the truncation");
    const std::size_t pos = 2 * *idx + (f.imaginary ? 1 : 0);
    if (std::find(free_index_.begin(), free_index_.end(), pos) != free_index_.end()) {
      throw InvalidArgument("free coordinates must be distinct");
    }
    free_index_.push_back(pos);
  }

  // Polarization of the quadratic field: b(0), b(+-e_j), b(e_j + e_k).
  const std::size_t d = dimension();
  std::vector<double> u(d, 0.0);
  c_ = drift_direct(u);
  l_.assign(d * d, 0.0);
  q_.assign(d * d * d, 0.0);
  std::vector<std::vector<double>> plus(d), minus(d);
  for (std::size_t j = 0; j < d; ++j) {
    u.assign(d, 0.0);
    u[j] = 1.0;
    plus[j] = drift_direct(u);
    u[j] = -1.0;
    minus[j] = drift_direct(u);
    for (std::size_t i = 0; i < d; ++i) {
      l_[i * d + j] = 0.5 * (plus[j][i] - minus[j][i]);
      q_[(i * d + j) * d + j] = 0.5 * (plus[j][i] + minus[j][i]) - c_[i];
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j + 1; k < d; ++k) {
      u.assign(d, 0.0);
      u[j] = u[k] = 1.0;
      const auto both = drift_direct(u);
      for (std::size_t i = 0; i < d; ++i) {
        const double v = 0.5 * (both[i] - c_[i] - l_[i * d + j] - l_[i * d + k] - q_[(i * d + j) * d + j] -
                                q_[(i * d + k) * d + k]);
        q_[(i * d + j) * d + k] = v;
        q_[(i * d + k) * d + j] = v;
      }
    }
  }
}

SpectralState ReducedSystem::embed(std::span<const double> z) const {
  if (z.size() != dimension()) throw InvalidArgument("reduced point has the wrong dimension");
  auto coords = to_real_coords(background_);
  for (std::size_t i = 0; i < z.size(); ++i) coords[free_index_[i]] = z[i];
  return from_real_coords(modes_, coords);
}

std::vector<double> ReducedSystem::drift_direct(std::span<const double> z) const {
  const auto full = to_real_coords(z_drift(embed(z)));
  std::vector<double> out(dimension());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = full[free_index_[i]];
  return out;
}

void ReducedSystem::drift(std::span<const double> z, std::span<double> out) const {
  const std::size_t d = dimension();
  for (std::size_t i = 0; i < d; ++i) {
    double acc = c_[i];
    for (std::size_t j = 0; j < d; ++j) {
      acc += l_[i * d + j] * z[j];
      const double* row = &q_[(i * d + j) * d];
      double inner = 0.0;
      for (std::size_t k = 0; k < d; ++k) inner += row[k] * z[k];
      acc += z[j] * inner;
    }
    out[i] = acc;
  }
}

ZDrift ReducedSystem::field() const {
  auto self = std::make_shared<const ReducedSystem>(*this);
  return [self](std::span<const double> z, std::span<double> out) { self->drift(z, out); };
}

BoundaryFunction ReducedSystem::enstrophy_boundary() const {
  auto self = std::make_shared<const ReducedSystem>(*this);
  return BoundaryFunction::enstrophy_gaussian([self](std::span<const double> z) { return self->embed(z); });
}

ReducedSystem two_mode_reduction(double spectator) {
  auto modes = build_mode_set(2);
  SpectralState phi(modes);
  phi.set({1, 1}, spectator);
  return ReducedSystem(modes, to_z_coordinates(phi), {{{1, 0}, false}, {{0, 1}, false}});
}

// ---------------------------------------------------------------- Monte Carlo

namespace {

struct PathResult {
  double value = 0.0;
  double exit_time = 0.0;
  bool exited = false;
};

constexpr std::uint32_t kUniformItemBase = 1u << 24;
// Crossing probabilities below exp(-40) are treated as zero; draws are
// addressed by counter, so skipping them leaves every other draw unchanged.
constexpr double kBridgeCutoff = 40.0;

// Bridge test between two inside points; returns the face-projected exit
// point when an excursion is drawn.
bool bridge_exit(const DomainSpec& domain, std::span<const double> p, std::span<double> q, double var,
                 const NoiseStream& rng, std::uint64_t step) {
  const std::size_t d = domain.dimension();
  if (domain.shape() == DomainSpec::Shape::ball) {
    double np = 0.0, nq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      np += p[i] * p[i];
      nq += q[i] * q[i];
    }
    const double r = domain.radius();
    const double d0 = r - std::sqrt(np), d1 = r - std::sqrt(nq);
    const double x = 2.0 * d0 * d1 / var;
    if (x > kBridgeCutoff) return false;
    if (rng.uniform4(step, kUniformItemBase)[0] < std::exp(-x)) {
      const double s = r / std::sqrt(nq);
      for (std::size_t i = 0; i < d; ++i) q[i] *= s;
      return true;
    }
    return false;
  }
  const auto& r = domain.half_widths();
  for (std::size_t f = 0; f < 2 * d; ++f) {
    const std::size_t i = f / 2;
    const double side = (f % 2 == 0) ? 1.0 : -1.0;
    const double d0 = r[i] - side * p[i], d1 = r[i] - side * q[i];
    const double x = 2.0 * d0 * d1 / var;
    if (x > kBridgeCutoff) continue;
    const auto u = rng.uniform4(step, kUniformItemBase + static_cast<std::uint32_t>(f / 4));
    if (u[f % 4] < std::exp(-x)) {
      q[i] = side * r[i];
      return true;
    }
  }
  return false;
}

PathResult run_path(const ZDrift& drift, double epsilon, const DomainSpec& domain, const BoundaryFunction& f,
                    std::span<const double> z0, double dt, const NoiseStream& rng, const EstimateOptions& opt) {
  const std::size_t d = z0.size();
  std::vector<double> z(z0.begin(), z0.end()), q(d), b(d), noise(d), b2;
  if (opt.scheme == PathScheme::heun) b2.resize(d);
  const double sd = std::sqrt(2.0 * epsilon * dt);
  const double var = sd * sd;
  for (std::uint64_t step = 0; step < opt.max_steps; ++step) {
    drift(z, b);
    for (std::size_t i = 0; i < d; i += 2) {
      const auto [g1, g2] = rng.normal_pair(step, static_cast<std::uint32_t>(i / 2));
      noise[i] = sd * g1;
      if (i + 1 < d) noise[i + 1] = sd * g2;
    }
    for (std::size_t i = 0; i < d; ++i) q[i] = z[i] + b[i] * dt + noise[i];
    if (opt.scheme == PathScheme::heun) {
      drift(q, b2);
      for (std::size_t i = 0; i < d; ++i) q[i] = z[i] + 0.5 * (b[i] + b2[i]) * dt + noise[i];
    }
    if (!domain.contains(q)) {
      const auto x = domain.crossing(z, q);
      return {f(x), static_cast<double>(step + 1) * dt, true};
    }
    if (opt.exit_rule == ExitRule::bridge && bridge_exit(domain, z, q, var, rng, step)) {
      return {f(q), static_cast<double>(step + 1) * dt, true};
    }
    z.swap(q);
  }
  return {};
}

}  // namespace

DensityEstimate estimate_density(const ZDrift& drift, double epsilon, const DomainSpec& domain,
                                 const BoundaryFunction& boundary, std::span<const double> z0,
                                 std::uint64_t paths, double dt, std::uint64_t seed,
                                 const EstimateOptions& options) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("estimate_density: epsilon must be > 0");
  if (paths == 0) throw InvalidArgument("estimate_density: paths must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("estimate_density: dt must be > 0");
  if (options.max_steps == 0) throw InvalidArgument("estimate_density: max_steps must be >= 1");
  if (!domain.contains(z0)) throw InvalidArgument("estimate_density: z0 must lie strictly inside the domain");
  if (paths > 0xffffffffull) throw InvalidArgument("estimate_density: at most 2^32 paths");

  std::vector<PathResult> results(paths);
  parallel_for(paths, resolve_workers(options.workers), [&](std::size_t p) {
    results[p] = run_path(drift, epsilon, domain, boundary, z0, dt,
                          NoiseStream(seed, static_cast<std::uint32_t>(p)), options);
  });

  DensityEstimate est;
  double sum = 0.0, time = 0.0;
  for (const auto& r : results) {
    if (!r.exited) {
      ++est.max_steps_hit;
      continue;
    }
    ++est.paths;
    sum += r.value;
    time += r.exit_time;
  }
  if (est.paths == 0) return est;
  est.value = sum / static_cast<double>(est.paths);
  est.mean_exit_time = time / static_cast<double>(est.paths);
  if (est.paths > 1) {
    double ss = 0.0;
    for (const auto& r : results) {
      if (r.exited) ss += (r.value - est.value) * (r.value - est.value);
    }
    const double n = static_cast<double>(est.paths);
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return est;
}

SweepResult epsilon_sweep(const ZDrift& drift, const DomainSpec& domain, const BoundaryFunction& boundary,
                          const std::vector<std::vector<double>>& points,
                          const std::vector<double>& epsilons, std::uint64_t paths, double dt0,
                          std::uint64_t seed, const EstimateOptions& options) {
  if (epsilons.empty()) throw InvalidArgument("epsilon_sweep: no epsilons given");
  if (points.empty()) throw InvalidArgument("epsilon_sweep: no query points given");
  for (std::size_t j = 0; j < epsilons.size(); ++j) {
    if (!(epsilons[j] > 0.0)) throw InvalidArgument("epsilon_sweep: epsilons must be > 0");
    if (j > 0 && !(epsilons[j] < epsilons[j - 1])) {
      throw InvalidArgument("epsilon_sweep: epsilons must be strictly decreasing");
    }
  }
  SweepResult out;
  for (double eps : epsilons) {
    const double dt = dt0 * std::min(1.0, eps / epsilons.front());
    for (const auto& z : points) {
      out.entries.push_back({eps, dt, z, estimate_density(drift, eps, domain, boundary, z, paths, dt, seed, options)});
    }
  }
  const std::size_t np = points.size();
  for (std::size_t j = 1; j < epsilons.size(); ++j) {
    for (std::size_t p = 0; p < np; ++p) {
      const auto& a = out.entries[(j - 1) * np + p];
      const auto& b = out.entries[j * np + p];
      out.differences.push_back({p, a.epsilon, b.epsilon, std::abs(b.estimate.value - a.estimate.value),
                                 std::hypot(a.estimate.std_error, b.estimate.std_error)});
    }
  }
  return out;
}

}  // namespace eulerlab
