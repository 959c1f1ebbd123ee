#include "eulerlab/grid_solver.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "eulerlab/errors.hpp"

namespace eulerlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBlowUpLimit = 1e8;

// FFTW planning is not thread-safe, execution of an existing plan on fresh
// arrays is. Plans are created once per n and reused through the new-array API.
struct PlanPair {
  fftw_plan forward = nullptr;   // r2c
  fftw_plan backward = nullptr;  // c2r
};

PlanPair plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const std::size_t cells = static_cast<std::size_t>(n) * n;
  const std::size_t half = static_cast<std::size_t>(n) * (n / 2 + 1);
  double* real = fftw_alloc_real(cells);
  fftw_complex* spec = fftw_alloc_complex(half);
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_2d(n, n, real, spec, FFTW_ESTIMATE);
  p.backward = fftw_plan_dft_c2r_2d(n, n, spec, real, FFTW_ESTIMATE);
  fftw_free(real);
  fftw_free(spec);
  if (!p.forward || !p.backward) throw NumericalFailure("FFTW planning failed for n=" + std::to_string(n));
  cache.emplace(n, p);
  return p;
}

struct FftBuffers {
  explicit FftBuffers(int n)
      : n(n),
        cols(n / 2 + 1),
        real(fftw_alloc_real(static_cast<std::size_t>(n) * n)),
        spec(fftw_alloc_complex(static_cast<std::size_t>(n) * cols)) {
    if (!real || !spec) throw std::bad_alloc();
  }
  ~FftBuffers() {
    fftw_free(real);
    fftw_free(spec);
  }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;

  void forward(const GridField& f) {
    std::copy(f.values().begin(), f.values().end(), real);
    fftw_execute_dft_r2c(plans_for(n).forward, real, spec);
  }
  /// Unnormalized inverse into a field.
  GridField backward() {
    fftw_execute_dft_c2r(plans_for(n).backward, spec, real);
    return GridField(n, std::vector<double>(real, real + static_cast<std::size_t>(n) * n));
  }
  std::complex<double>& at(int r, int c) {
    return reinterpret_cast<std::complex<double>&>(spec[static_cast<std::size_t>(r) * cols + c]);
  }

  int n;
  int cols;
  double* real;
  fftw_complex* spec;
};

void require_same_size(const GridField& a, const GridField& b, const char* what) {
  if (a.n() != b.n()) {
    throw InvalidArgument(std::string(what) + ": grid sizes differ (" + std::to_string(a.n()) + " vs " +
                          std::to_string(b.n()) + ")");
  }
}

// Periodic neighbour index tables.
struct Neighbours {
  explicit Neighbours(int n) : up(n), down(n) {
    for (int i = 0; i < n; ++i) {
      up[i] = (i + 1) % n;
      down[i] = (i + n - 1) % n;
    }
  }
  std::vector<int> up, down;
};

// y = x + c J(psi, x)
void apply_shifted(const GridField& psi, const GridField& x, double c, GridField& y) {
  y = advection_apply(psi, x);
  auto yv = y.values();
  auto xv = x.values();
  for (std::size_t k = 0; k < yv.size(); ++k) yv[k] = xv[k] + c * yv[k];
}

GridField cayley_frozen(const GridField& omega, const GridField& psi, double dt, CayleyStats* stats,
                        double tolerance) {
  const double c = 0.5 * dt;
  GridField rhs(omega.n());
  apply_shifted(psi, omega, -c, rhs);
  const double rhs_norm = rhs.norm2();
  if (rhs_norm == 0.0) {
    if (stats) *stats = {};
    return GridField(omega.n());
  }

  // CGLS on (I + cM) x = rhs; the transpose is I - cM since M is skew.
  GridField x = omega;
  GridField r(omega.n()), s(omega.n()), q(omega.n());
  apply_shifted(psi, x, c, q);
  {
    auto rv = r.values();
    for (std::size_t k = 0; k < rv.size(); ++k) rv[k] = rhs.values()[k] - q.values()[k];
  }
  constexpr int kMaxIterations = 500;
  int it = 0;
  double rnorm = r.norm2();
  if (rnorm > tolerance * rhs_norm) {
    apply_shifted(psi, r, -c, s);
    GridField p = s;
    double gamma = dot(s, s);
    for (it = 1; it <= kMaxIterations; ++it) {
      apply_shifted(psi, p, c, q);
      const double alpha = gamma / dot(q, q);
      auto xv = x.values();
      auto rv = r.values();
      for (std::size_t k = 0; k < xv.size(); ++k) {
        xv[k] += alpha * p.values()[k];
        rv[k] -= alpha * q.values()[k];
      }
      rnorm = r.norm2();
      if (rnorm <= tolerance * rhs_norm) break;
      apply_shifted(psi, r, -c, s);
      const double gamma_next = dot(s, s);
      const double beta = gamma_next / gamma;
      gamma = gamma_next;
      auto pv = p.values();
      for (std::size_t k = 0; k < pv.size(); ++k) pv[k] = s.values()[k] + beta * pv[k];
    }
    if (it > kMaxIterations || !std::isfinite(rnorm)) {
      std::ostringstream os;
      os << "cayley_step: CGLS did not reach relative residual " << tolerance << " in " << kMaxIterations
         << " iterations (dt=" << dt << ", reached " << rnorm / rhs_norm << ")";
      throw NumericalFailure(os.str());
    }
  }
  if (stats) {
    stats->iterations = it;
    stats->residual = rnorm / rhs_norm;
  }
  return x;
}

void check_finite_bounded(const GridField& psi, std::uint64_t step) {
  if (!psi.all_finite()) throw BlowUpError(step, "stream function is not finite");
  const double m = psi.max_abs();
  if (m > kBlowUpLimit) {
    std::ostringstream os;
    os << "max |psi| = " << m << " exceeds " << kBlowUpLimit;
    throw BlowUpError(step, os.str());
  }
}

}  // namespace

GridField laplacian_apply(const GridField& f) {
  const int n = f.n();
  const Neighbours nb(n);
  const double scale = double(n) * double(n);
  GridField out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out(i, j) = scale * (f(nb.up[i], j) + f(nb.down[i], j) + f(i, nb.up[j]) + f(i, nb.down[j]) - 4.0 * f(i, j));
    }
  }
  return out;
}

double laplacian_eigenvalue(int n, int k1, int k2) {
  const double nn = double(n) * double(n);
  return -nn * (4.0 - 2.0 * std::cos(kTwoPi * k1 / n) - 2.0 * std::cos(kTwoPi * k2 / n));
}

namespace {

// Drops the zero mode without checking it.
GridField poisson_solve(const GridField& omega) {
  const int n = omega.n();
  const double nn = double(n) * double(n);
  FftBuffers fft(n);
  fft.forward(omega);
  std::vector<double> lambda(n);
  for (int k = 0; k < n; ++k) lambda[k] = 2.0 - 2.0 * std::cos(kTwoPi * k / n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < fft.cols; ++c) {
      // Unnormalized c2r: divide by n^2 here as well.
      const double eig = -nn * (lambda[r] + lambda[c]);
      fft.at(r, c) = (r == 0 && c == 0) ? std::complex<double>{} : fft.at(r, c) / (eig * nn);
    }
  }
  GridField psi = fft.backward();
  psi.remove_mean();
  return psi;
}

}  // namespace

GridField poisson_invert(const GridField& omega) {
  const double nn = double(omega.n()) * double(omega.n());
  const double total = omega.sum();
  if (std::abs(total) > 1e-10 * nn) {
    std::ostringstream os;
    os << "poisson_invert: vorticity must have zero mean on the torus (sum = " << total << ")";
    throw InvalidArgument(os.str());
  }
  return poisson_solve(omega);
}

GridField advection_apply(const GridField& a, const GridField& b) {
  require_same_size(a, b, "advection_apply");
  const int n = a.n();
  const Neighbours nb(n);
  const double scale = double(n) * double(n) / 12.0;
  GridField out(n);
  for (int i = 0; i < n; ++i) {
    const int e = nb.up[i], w = nb.down[i];
    for (int j = 0; j < n; ++j) {
      const int no = nb.up[j], so = nb.down[j];
      const double aE = a(e, j), aW = a(w, j), aN = a(i, no), aS = a(i, so);
      const double bE = b(e, j), bW = b(w, j), bN = b(i, no), bS = b(i, so);
      const double aNE = a(e, no), aNW = a(w, no), aSE = a(e, so), aSW = a(w, so);
      const double bNE = b(e, no), bNW = b(w, no), bSE = b(e, so), bSW = b(w, so);
      const double jpp = (aE - aW) * (bN - bS) - (aN - aS) * (bE - bW);
      const double jpx = aE * (bNE - bSE) - aW * (bNW - bSW) - aN * (bNE - bNW) + aS * (bSE - bSW);
      const double jxp = bN * (aNE - aNW) - bS * (aSE - aSW) - bE * (aNE - aSE) + bW * (aNW - aSW);
      out(i, j) = scale * (jpp + jpx + jxp);
    }
  }
  return out;
}

GridField cayley_step(const GridField& omega, double dt, CayleyStats* stats, double tolerance) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("cayley_step: dt must be finite and > 0");
  return cayley_frozen(omega, poisson_invert(omega), dt, stats, tolerance);
}

GridField cayley_step_frozen(const GridField& omega, const GridField& psi_frozen, double dt, CayleyStats* stats,
                             double tolerance) {
  require_same_size(omega, psi_frozen, "cayley_step_frozen");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("cayley_step_frozen: dt must be finite and > 0");
  return cayley_frozen(omega, psi_frozen, dt, stats, tolerance);
}

GridField inject_noise(const GridField& omega, double epsilon, double dt, const NoiseStream& rng,
                       std::uint64_t step) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("inject_noise: epsilon must be >= 0");
  if (epsilon == 0.0) return omega;
  const double amp = std::sqrt(2.0 * epsilon * dt);
  GridField out = omega;
  auto v = out.values();
  for (std::size_t cell = 0; cell < v.size(); cell += 2) {
    const auto [g0, g1] = rng.normal_pair(step, static_cast<std::uint32_t>(cell / 2));
    v[cell] += amp * g0;
    if (cell + 1 < v.size()) v[cell + 1] += amp * g1;
  }
  out.remove_mean();
  return out;
}

GridConstraint GridConstraint::box(double psi_max) {
  if (!(psi_max > 0.0) || !std::isfinite(psi_max)) {
    throw InvalidArgument("GridConstraint::box: psi_max must be finite and > 0");
  }
  GridConstraint c;
  c.kind = Kind::box;
  c.psi_max = psi_max;
  return c;
}

GridConstraint GridConstraint::pinning(std::vector<int> rows, std::vector<int> columns) {
  GridConstraint c;
  c.kind = Kind::pinning;
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
  c.rows = std::move(rows);
  c.columns = std::move(columns);
  return c;
}

std::string GridConstraint::describe() const {
  std::ostringstream os;
  auto list = [&](const std::vector<int>& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ']';
  };
  switch (kind) {
    case Kind::none:
      os << "none";
      break;
    case Kind::box:
      {
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof buf, psi_max);
        os << "box(" << std::string_view(buf, r.ptr - buf) << ")";
      }
      break;
    case Kind::pinning:
      os << "pinning(rows=";
      list(rows);
      os << ",columns=";
      list(columns);
      os << ")";
      break;
  }
  return os.str();
}

namespace {

// Energy-orthogonal projection onto {psi = 0 on the pinned cells S}: the
// correction is Delta^+ applied to a vorticity sheet mu on S, with the
// capacitance system G_SS mu = psi_S, G = Delta^+ restricted to S.
struct PinningPlan {
  std::vector<std::size_t> cells;
  Eigen::LLT<Eigen::MatrixXd> factor;  // of -G_SS, which is positive definite
};

const PinningPlan& pinning_plan(int n, const GridConstraint& con) {
  using Key = std::tuple<int, std::vector<int>, std::vector<int>>;
  static std::mutex mutex;
  static std::map<Key, std::unique_ptr<PinningPlan>> cache;
  for (int r : con.rows) {
    if (r < 0 || r >= n) throw InvalidArgument("apply_constraint: pinned row " + std::to_string(r) + " out of range");
  }
  for (int c : con.columns) {
    if (c < 0 || c >= n) throw InvalidArgument("apply_constraint: pinned column " + std::to_string(c) + " out of range");
  }
  std::lock_guard<std::mutex> lock(mutex);
  Key key{n, con.rows, con.columns};
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  auto plan = std::make_unique<PinningPlan>();
  std::vector<char> pinned(static_cast<std::size_t>(n) * n, 0);
  for (int r : con.rows) {
    for (int j = 0; j < n; ++j) pinned[static_cast<std::size_t>(r) * n + j] = 1;
  }
  for (int c : con.columns) {
    for (int i = 0; i < n; ++i) pinned[static_cast<std::size_t>(i) * n + c] = 1;
  }
  for (std::size_t k = 0; k < pinned.size(); ++k) {
    if (pinned[k]) plan->cells.push_back(k);
  }
  const std::size_t m = plan->cells.size();
  if (m > 0 && m < pinned.size()) {
    GridField delta(n);
    delta(0, 0) = 1.0;
    delta.remove_mean();
    const GridField g = poisson_solve(delta);
    Eigen::MatrixXd neg(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < m; ++a) {
      const int ia = static_cast<int>(plan->cells[a] / n), ja = static_cast<int>(plan->cells[a] % n);
      for (std::size_t b = 0; b < m; ++b) {
        const int ib = static_cast<int>(plan->cells[b] / n), jb = static_cast<int>(plan->cells[b] % n);
        neg(a, b) = -g.wrap(ia - ib, ja - jb);
      }
    }
    plan->factor.compute(neg);
    if (plan->factor.info() != Eigen::Success) {
      throw NumericalFailure("apply_constraint: pinning capacitance matrix is not definite");
    }
  }
  return *cache.emplace(std::move(key), std::move(plan)).first->second;
}

}  // namespace

GridField apply_constraint(const GridField& psi, const GridConstraint& con) {
  const int n = psi.n();
  switch (con.kind) {
    case GridConstraint::Kind::none:
      return psi;

    case GridConstraint::Kind::box: {
      const double m = con.psi_max;
      if (!(m > 0.0)) throw InvalidArgument("apply_constraint: box needs psi_max > 0");
      const double nn = double(n) * double(n);
      if (psi.max_abs() <= m && std::abs(psi.sum()) <= 1e-12 * nn) return psi;
      auto shifted_sum = [&](double mu) {
        double s = 0.0;
        for (double v : psi.values()) s += std::clamp(v - mu, -m, m);
        return s;
      };
      // shifted_sum is continuous and non-increasing in mu.
      double lo = -psi.max_abs() - m, hi = psi.max_abs() + m;
      for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (shifted_sum(mid) > 0.0 ? lo : hi) = mid;
      }
      const double mu = 0.5 * (lo + hi);
      GridField out(n);
      auto ov = out.values();
      auto iv = psi.values();
      for (std::size_t k = 0; k < ov.size(); ++k) ov[k] = std::clamp(iv[k] - mu, -m, m);
      // Spread the bisection remainder over the interior cells.
      const double rest = out.sum();
      std::size_t free = 0;
      for (double v : ov) free += std::abs(v) < m;
      if (free > 0 && rest != 0.0) {
        const double shift = rest / double(free);
        for (double& v : ov) {
          if (std::abs(v) < m) v = std::clamp(v - shift, -m, m);
        }
      }
      return out;
    }

    case GridConstraint::Kind::pinning: {
      const auto& plan = pinning_plan(n, con);
      GridField out = psi;
      out.remove_mean();
      if (plan.cells.empty()) return out;
      if (plan.cells.size() == out.size()) return GridField(n);
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(plan.cells.size()));
      for (std::size_t a = 0; a < plan.cells.size(); ++a) rhs[a] = out.values()[plan.cells[a]];
      const Eigen::VectorXd mu = -plan.factor.solve(rhs);
      // Vortex sheet on the pinned cells, removed through the Poisson solve.
      GridField sheet(n);
      for (std::size_t a = 0; a < plan.cells.size(); ++a) sheet.values()[plan.cells[a]] = mu[a];
      sheet.remove_mean();
      const GridField correction = poisson_solve(sheet);
      auto v = out.values();
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= correction.values()[k];
      for (std::size_t c : plan.cells) v[c] = 0.0;
      return out;
    }
  }
  return psi;
}

bool satisfies(const GridField& psi, const GridConstraint& con, double slack) {
  const int n = psi.n();
  switch (con.kind) {
    case GridConstraint::Kind::none:
      return true;
    case GridConstraint::Kind::box:
      return psi.max_abs() <= con.psi_max + slack;
    case GridConstraint::Kind::pinning:
      for (int r : con.rows) {
        if (r < 0 || r >= n) return false;
        for (int j = 0; j < n; ++j) {
          if (psi(r, j) != 0.0) return false;
        }
      }
      for (int c : con.columns) {
        if (c < 0 || c >= n) return false;
        for (int i = 0; i < n; ++i) {
          if (psi(i, c) != 0.0) return false;
        }
      }
      return true;
  }
  return false;
}

SpectrumReport shell_spectrum(const GridField& psi) {
  const int n = psi.n();
  const double nn = double(n) * double(n);
  const int shells = static_cast<int>(std::floor(std::sqrt(2.0) * (n / 2))) + 1;
  SpectrumReport rep;
  rep.shell_lower.resize(shells);
  for (int s = 0; s < shells; ++s) rep.shell_lower[s] = s;
  rep.shell_energy.assign(shells, 0.0);

  FftBuffers fft(n);
  fft.forward(psi);
  for (int r = 0; r < n; ++r) {
    const int k1 = 2 * r < n ? r : r - n;
    for (int c = 0; c < fft.cols; ++c) {
      // Columns 0 < c < n/2 stand for both c and -c; c = n/2 (even n) is -n/2.
      const int k2 = (2 * c == n) ? -c : c;
      const double weight = (c == 0 || 2 * c == n) ? 1.0 : 2.0;
      const double k_sq = double(k1) * k1 + double(k2) * k2;
      if (k_sq == 0.0) continue;
      const double e = weight * k_sq * std::norm(fft.at(r, c) / nn);
      const int shell = std::min(static_cast<int>(std::floor(std::sqrt(k_sq))), shells - 1);
      rep.shell_energy[shell] += e;
    }
  }
  for (double e : rep.shell_energy) rep.total_energy += e;
  rep.lowest_shell_fraction = rep.total_energy > 0.0 ? rep.shell_energy[1] / rep.total_energy : 0.0;
  return rep;
}

double grid_enstrophy(const GridField& psi) {
  const GridField omega = laplacian_apply(psi);
  return 0.5 * dot(omega, omega) / double(omega.size());
}

GridSimResult run_grid_sim(const GridField& initial_psi, const GridSimConfig& cfg,
                           const std::function<void(const GridSnapshot&)>& on_snapshot) {
  if (cfg.n < 8) throw InvalidArgument("run_grid_sim: n must be >= 8");
  if (initial_psi.n() != cfg.n) {
    throw InvalidArgument("run_grid_sim: initial field has n=" + std::to_string(initial_psi.n()) +
                          ", config has n=" + std::to_string(cfg.n));
  }
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw InvalidArgument("run_grid_sim: dt must be finite and > 0");
  if (!(cfg.epsilon >= 0.0) || !std::isfinite(cfg.epsilon)) {
    throw InvalidArgument("run_grid_sim: epsilon must be finite and >= 0");
  }
  if (!initial_psi.all_finite()) throw InvalidArgument("run_grid_sim: initial field is not finite");
  const double nn = double(cfg.n) * double(cfg.n);
  if (std::abs(initial_psi.sum()) > 1e-10 * nn) {
    throw InvalidArgument("run_grid_sim: initial stream function must have zero mean");
  }

  GridSimResult result;
  const NoiseStream rng(derive_seed(cfg.seed, "grid_noise"), 0);
  GridField psi = initial_psi;
  psi.remove_mean();
  psi = apply_constraint(psi, cfg.constraint);

  auto record = [&](std::uint64_t step) {
    GridSnapshot snap{step, double(step) * cfg.dt, psi, shell_spectrum(psi), grid_enstrophy(psi)};
    if (on_snapshot) {
      on_snapshot(snap);
    } else {
      result.snapshots.push_back(std::move(snap));
    }
  };
  record(0);

  for (std::uint64_t step = 1; step <= cfg.steps; ++step) {
    GridField omega = laplacian_apply(psi);
    CayleyStats stats;
    try {
      GridField next = cayley_frozen(omega, psi, cfg.dt, &stats, 1e-12);
      if (cfg.stepper == GridStepper::midpoint) {
        const int first = stats.iterations;
        auto nv = next.values();
        for (std::size_t k = 0; k < nv.size(); ++k) nv[k] = 0.5 * (nv[k] + omega.values()[k]);
        next.remove_mean();
        next = cayley_frozen(omega, poisson_solve(next), cfg.dt, &stats, 1e-12);
        stats.iterations = std::max(stats.iterations, first);
      }
      omega = std::move(next);
    } catch (const BlowUpError&) {
      throw;
    } catch (const NumericalFailure& e) {
      // A runaway state makes the implicit system stiff before |psi| hits the limit.
      throw BlowUpError(step, e.what());
    }
    result.max_solver_iterations = std::max(result.max_solver_iterations, stats.iterations);
    omega.remove_mean();
    omega = inject_noise(omega, cfg.epsilon, cfg.dt, rng, step);
    if (!omega.all_finite()) throw BlowUpError(step, "vorticity is not finite");
    // omega is mean-free by construction; at very large amplitudes the
    // rounding of its sum can exceed the absolute solvability tolerance.
    psi = poisson_solve(omega);
    psi = apply_constraint(psi, cfg.constraint);
    check_finite_bounded(psi, step);
    if ((cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) || step == cfg.steps) record(step);
  }
  result.final_psi = std::move(psi);
  return result;
}

GridField plane_wave(int n, int k1, int k2, double amplitude) {
  GridField f(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) f(i, j) = amplitude * std::cos(kTwoPi * (double(k1) * i + double(k2) * j) / n);
  }
  return f;
}

GridField cellular_mode(int n, int k1, int k2, double amplitude) {
  GridField f(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) f(i, j) = amplitude * std::cos(kTwoPi * k1 * i / n) * std::cos(kTwoPi * k2 * j / n);
  }
  return f;
}

}  // namespace eulerlab
