#include "eulerlab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "eulerlab/errors.hpp"
#include "eulerlab/fd_oracle.hpp"
#include "eulerlab/io.hpp"
#include "eulerlab/measures.hpp"
#include "eulerlab/mode_set.hpp"
#include "eulerlab/parallel.hpp"
#include "eulerlab/rng.hpp"
#include "eulerlab/sde.hpp"

namespace eulerlab {

namespace fs = std::filesystem;

double RunSummary::metric(std::string_view name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  throw InvalidArgument("RunSummary: no metric \"" + std::string(name) + "\"");
}

std::string RunSummary::line() const {
  std::ostringstream os;
  os << command_name(command) << " seed=" << seed;
  for (const auto& [k, v] : metrics) os << ' ' << k << '=' << format_double(v);
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", wall_seconds);
  os << " wall=" << wall << 's';
  return os.str();
}

GridField initial_grid_field(const GridRunParams& p) {
  if (p.initial == "plane_wave") return plane_wave(p.n, p.mode[0], p.mode[1], p.amplitude);
  if (p.initial == "cellular") return cellular_mode(p.n, p.mode[0], p.mode[1], p.amplitude);
  throw InvalidArgument("unknown grid initial condition \"" + p.initial + "\"");
}

GridSimConfig grid_sim_config(const GridRunParams& p, std::uint64_t seed) {
  GridSimConfig c;
  c.n = p.n;
  c.dt = p.dt;
  c.steps = p.steps;
  c.epsilon = p.epsilon;
  c.constraint = p.constraint;
  c.seed = seed;
  c.snapshot_every = p.snapshot_every;
  c.stepper = p.stepper;
  return c;
}

DensitySetup make_density_setup(const DensityProblem& p) {
  DomainSpec domain = p.domain == "box" ? DomainSpec::box(p.half_widths)
                                        : DomainSpec::ball(p.radius, static_cast<std::size_t>(p.dimension));
  std::optional<ReducedSystem> reduced;
  ZDrift drift = zero_drift();
  if (p.problem == "reduction") {
    reduced.emplace(two_mode_reduction(p.rotation / (4.0 * std::numbers::pi * std::numbers::pi)));
    drift = negated(reduced->field());
  } else if (p.problem != "harmonic") {
    throw InvalidArgument("unknown density problem \"" + p.problem + "\"");
  }
  BoundaryFunction boundary = BoundaryFunction::constant(p.boundary_value);
  if (p.boundary == "coordinate") {
    boundary = BoundaryFunction::coordinate(static_cast<std::size_t>(p.boundary_index));
  } else if (p.boundary == "enstrophy") {
    if (!reduced) throw InvalidArgument("the enstrophy boundary needs the reduction problem");
    boundary = reduced->enstrophy_boundary();
  }
  return {std::move(drift), std::move(domain), std::move(boundary)};
}

EstimateOptions estimate_options(const DensityProblem& p, int workers) {
  EstimateOptions o;
  o.max_steps = p.max_steps;
  o.exit_rule = p.exit_rule;
  o.scheme = p.scheme;
  o.workers = workers;
  return o;
}

std::pair<double, double> boundary_range(const DensitySetup& s, std::size_t per_face) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& z : s.domain.boundary_samples(per_face)) {
    const double f = s.boundary(z);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  return {lo, hi};
}

std::vector<TrendCheck> sweep_trend(const SweepResult& sweep, std::size_t points) {
  if (points == 0 || sweep.entries.size() % points != 0) {
    throw InvalidArgument("sweep_trend: entries are not a full epsilon x point table");
  }
  const std::size_t levels = sweep.entries.size() / points;
  std::vector<TrendCheck> out;
  for (std::size_t p = 0; p < points; ++p) {
    auto at = [&](std::size_t e) -> const DensityEstimate& { return sweep.entries[e * points + p].estimate; };
    for (std::size_t j = 0; j + 2 < levels; ++j) {
      TrendCheck c;
      c.point = p;
      c.j = j;
      c.d_j = std::abs(at(j + 1).value - at(j).value);
      c.d_next = std::abs(at(j + 2).value - at(j + 1).value);
      const double s0 = at(j).std_error, s1 = at(j + 1).std_error, s2 = at(j + 2).std_error;
      c.allowance = 2.0 * std::sqrt(s0 * s0 + 4.0 * s1 * s1 + s2 * s2);
      c.ok = c.d_next <= c.d_j + c.allowance;
      out.push_back(c);
    }
  }
  return out;
}

BoundCheck sweep_bounds(const SweepResult& sweep, const std::pair<double, double>& range) {
  BoundCheck b;
  for (const auto& e : sweep.entries) {
    const double v = e.estimate.value, s = e.estimate.std_error;
    if (v < range.first - 3.0 * s || v > range.second + 3.0 * s) ++b.violations;
    if (range.first > 0.0 && !(v > 0.0)) ++b.non_positive;
  }
  return b;
}

CondensationResult condensation_experiment(const CondensationParams& p, std::uint64_t seed, int workers) {
  if (p.seeds == 0) throw InvalidArgument("condensation: needs at least one seed");
  CondensationResult res;
  res.runs.resize(p.seeds + 2);
  for (std::size_t i = 0; i < p.seeds; ++i) {
    res.runs[i].label = "free_" + std::to_string(i);
    res.runs[i].seed = derive_seed(seed, "condensation/" + std::to_string(i));
  }
  CondensationRun& box = res.runs[p.seeds];
  CondensationRun& pin = res.runs[p.seeds + 1];
  box.label = "box";
  box.constraint = GridConstraint::box(p.box_psi_max);
  pin.label = "pinning";
  pin.constraint = GridConstraint::pinning(p.pin_rows, p.pin_columns);
  box.seed = pin.seed = res.runs[0].seed;

  const GridField init = initial_grid_field(p.grid);
  parallel_for(res.runs.size(), resolve_workers(workers), [&](std::size_t i) {
    CondensationRun& run = res.runs[i];
    GridSimConfig cfg = grid_sim_config(p.grid, run.seed);
    cfg.constraint = run.constraint;
    run.snapshots = run_grid_sim(init, cfg).snapshots;
    for (const auto& s : run.snapshots) run.constraint_held = run.constraint_held && satisfies(s.psi, run.constraint);
    run.initial_fraction = run.snapshots.front().spectrum.lowest_shell_fraction;
    run.final_fraction = run.snapshots.back().spectrum.lowest_shell_fraction;
  });

  for (std::size_t i = 0; i < p.seeds; ++i) {
    if (res.runs[i].final_fraction > p.threshold) ++res.condensed;
  }
  res.box_difference = std::abs(res.runs[0].final_fraction - box.final_fraction);
  res.pinning_difference = std::abs(res.runs[0].final_fraction - pin.final_fraction);
  res.constraints_held = box.constraint_held && pin.constraint_held;
  res.passed = res.condensed >= p.min_condensed && res.constraints_held && res.box_difference > p.min_difference &&
               res.pinning_difference > p.min_difference;
  return res;
}

namespace {

double relative_drift(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double worst = 0.0;
  for (double x : xs) worst = std::max(worst, std::abs(x - xs.front()));
  return xs.front() != 0.0 ? worst / std::abs(xs.front()) : worst;
}

double norm_of(const SpectralState& s) {
  double sum = 0.0;
  for (const auto& a : s.amps()) sum += std::norm(a);
  return std::sqrt(sum);
}

std::string mode_label(ModeIndex k) { return std::to_string(k.k1) + "_" + std::to_string(k.k2); }

struct Context {
  const ExperimentConfig& cfg;
  fs::path dir;
  RunSummary& summary;
  int workers;

  void table(const TimeSeries& ts, const std::string& name) {
    write_timeseries(ts, dir / name);
    summary.files.push_back(dir / name);
  }
  void metric(std::string name, double v) { summary.metrics.emplace_back(std::move(name), v); }
};

void run_spectral(Context& cx, const SpectralRunParams& p) {
  const auto modes = build_mode_set(p.truncation);
  SpectralState init(modes);
  if (p.initial == "single_mode") {
    init.set({p.mode[0], p.mode[1]}, p.amplitude);
  } else {
    const auto kind = p.initial == "energy_sample" ? MeasureKind::energy_gaussian : MeasureKind::enstrophy_gaussian;
    init = sample_gaussian(make_measure(kind, modes), NoiseStream(derive_seed(cx.cfg.seed, "initial_state"), 0));
    init *= p.amplitude;
  }
  DriftKind drift = EulerOnly{};
  if (p.ou != "none") drift = EulerPlusOU{ou_family(p.ou, *modes)};
  const NoiseSpec noise = make_noise(p.epsilon, p.noise, *modes);

  SimConfig sc;
  sc.dt = p.dt;
  sc.steps = p.steps;
  sc.seed = derive_seed(cx.cfg.seed, "spectral_noise");
  sc.record_every = p.record_every;
  sc.scheme = p.scheme;
  const Trajectory traj = simulate(init, sc, drift, noise);

  TimeSeries ts;
  ts.columns = {"step", "t", "energy", "enstrophy"};
  for (const auto& k : modes->modes()) {
    ts.columns.push_back("re_" + mode_label(k));
    ts.columns.push_back("im_" + mode_label(k));
  }
  for (std::size_t r = 0; r < traj.states.size(); ++r) {
    std::vector<double> row{double(traj.steps[r]), traj.times[r], traj.energy[r], traj.enstrophy[r]};
    for (const auto& a : traj.states[r].amps()) {
      row.push_back(a.real());
      row.push_back(a.imag());
    }
    ts.add_row(std::move(row));
  }
  cx.table(ts, "trajectory.csv");
  cx.metric("final_energy", traj.energy.back());
  cx.metric("energy_drift", relative_drift(traj.energy));
  cx.metric("enstrophy_drift", relative_drift(traj.enstrophy));
}

void run_grid(Context& cx, const GridRunParams& p) {
  const GridSimConfig sc = grid_sim_config(p, derive_seed(cx.cfg.seed, "grid"));
  const std::string label = p.constraint.describe();
  std::vector<GridSnapshot> series;
  double final_fraction = 0.0;
  run_grid_sim(initial_grid_field(p), sc, [&](const GridSnapshot& s) {
    if (p.write_snapshots) {
      char name[48];
      std::snprintf(name, sizeof name, "step_%010llu", static_cast<unsigned long long>(s.step));
      const fs::path base = cx.dir / "snapshots" / name;
      write_snapshot(s.psi, {p.n, s.t, s.step, cx.cfg.seed, p.epsilon, label}, base);
      cx.summary.files.push_back(fs::path(base) += ".bin");
    }
    series.push_back({s.step, s.t, GridField(), s.spectrum, s.enstrophy});
    final_fraction = s.spectrum.lowest_shell_fraction;
  });
  cx.table(spectrum_series(series), "spectrum.csv");
  cx.metric("lowest_shell_fraction", final_fraction);
  std::vector<double> ens;
  for (const auto& s : series) ens.push_back(s.enstrophy);
  cx.metric("enstrophy_drift", relative_drift(ens));
}

void run_invariance(Context& cx, const InvarianceParams& p) {
  const auto modes = build_mode_set(p.truncation);
  const bool energy = p.measure == "energy";
  const auto measure = make_measure(energy ? MeasureKind::energy_gaussian : MeasureKind::enstrophy_gaussian, modes);
  const auto ou = ou_family(energy ? OUFamily::energy : OUFamily::enstrophy, *modes);
  const NoiseStream rng(derive_seed(cx.cfg.seed, "invariance_states"), 0);

  TimeSeries ts;
  ts.columns = {"state", "im6", "im6_relative", "sp4", "sp4_relative"};
  double worst_im6 = 0.0, worst_sp4 = 0.0;
  for (std::uint64_t i = 0; i < p.states; ++i) {
    SpectralState s(modes);
    for (std::size_t m = 0; m < s.size(); ++m) {
      const auto [a, b] = rng.normal_pair(i, static_cast<std::uint32_t>(m));
      s[m] = {p.state_scale * a, p.state_scale * b};
    }
    const double im6 = im6_residual(measure, euler_drift, s);
    const double sp4 = sp4_residual(measure, ou, s);
    const double im6_rel = std::abs(im6) / (1.0 + norm_of(euler_drift(s)));
    const double phi = norm_of(s);
    const double sp4_rel = std::abs(sp4) / (1.0 + phi * phi);
    worst_im6 = std::max(worst_im6, im6_rel);
    worst_sp4 = std::max(worst_sp4, sp4_rel);
    ts.add_row({double(i), im6, im6_rel, sp4, sp4_rel});
  }
  cx.table(ts, "residuals.csv");
  cx.metric("max_im6_relative", worst_im6);
  cx.metric("max_sp4_relative", worst_sp4);
}

std::vector<std::string> z_columns(std::size_t dim) {
  std::vector<std::string> c;
  for (std::size_t i = 0; i < dim; ++i) c.push_back("z" + std::to_string(i + 1));
  return c;
}

void run_density(Context& cx, const DensityParams& p) {
  const DensitySetup setup = make_density_setup(p.problem);
  const auto est = estimate_density(setup.drift, p.epsilon, setup.domain, setup.boundary, p.z0, p.problem.paths,
                                    p.problem.dt, derive_seed(cx.cfg.seed, "density_paths"),
                                    estimate_options(p.problem, cx.workers));
  TimeSeries ts;
  ts.columns = {"epsilon"};
  for (auto& c : z_columns(p.z0.size())) ts.columns.push_back(c);
  for (const char* c : {"value", "stderr", "paths", "mean_exit_time", "max_steps_hit", "flagged"}) {
    ts.columns.push_back(c);
  }
  std::vector<double> row{p.epsilon};
  row.insert(row.end(), p.z0.begin(), p.z0.end());
  row.insert(row.end(), {est.value, est.std_error, double(est.paths), est.mean_exit_time, double(est.max_steps_hit),
                         est.flagged() ? 1.0 : 0.0});
  if (p.fd_points > 0) {
    const double fd = fd_oracle(setup.drift, p.epsilon, setup.domain, setup.boundary, p.fd_points).at(p.z0);
    ts.columns.push_back("fd_value");
    ts.columns.push_back("fd_gap_in_stderr");
    row.push_back(fd);
    row.push_back(est.std_error > 0.0 ? std::abs(est.value - fd) / est.std_error : std::abs(est.value - fd));
  }
  ts.add_row(std::move(row));
  cx.table(ts, "density.csv");
  cx.metric("value", est.value);
  cx.metric("stderr", est.std_error);
  if (p.fd_points > 0) cx.metric("fd_value", ts.rows[0][ts.columns.size() - 2]);
}

void run_sweep(Context& cx, const SweepParams& p) {
  const DensitySetup setup = make_density_setup(p.problem);
  const SweepResult sweep =
      epsilon_sweep(setup.drift, setup.domain, setup.boundary, p.points, p.epsilons, p.problem.paths, p.problem.dt,
                    derive_seed(cx.cfg.seed, "sweep_paths"), estimate_options(p.problem, cx.workers));
  const std::size_t dim = p.points.front().size();

  TimeSeries table;
  table.columns = {"epsilon"};
  for (auto& c : z_columns(dim)) table.columns.push_back(c);
  for (const char* c : {"value", "stderr", "paths", "mean_exit_time", "flagged"}) table.columns.push_back(c);
  for (const auto& e : sweep.entries) {
    std::vector<double> row{e.epsilon};
    row.insert(row.end(), e.z.begin(), e.z.end());
    row.insert(row.end(), {e.estimate.value, e.estimate.std_error, double(e.estimate.paths),
                           e.estimate.mean_exit_time, e.estimate.flagged() ? 1.0 : 0.0});
    table.add_row(std::move(row));
  }
  cx.table(table, "sweep.csv");

  TimeSeries diffs;
  diffs.columns = {"point", "epsilon_from", "epsilon_to", "difference", "stderr"};
  for (const auto& d : sweep.differences) {
    diffs.add_row({double(d.point), d.epsilon_from, d.epsilon_to, d.difference, d.std_error});
  }
  cx.table(diffs, "differences.csv");

  std::size_t trend_failures = 0;
  for (const auto& c : sweep_trend(sweep, p.points.size())) trend_failures += c.ok ? 0 : 1;
  const BoundCheck bounds = sweep_bounds(sweep, boundary_range(setup));
  double max_diff = 0.0;
  for (const auto& d : sweep.differences) max_diff = std::max(max_diff, d.difference);
  cx.metric("trend_violations", double(trend_failures));
  cx.metric("bound_violations", double(bounds.violations + bounds.non_positive));
  cx.metric("max_difference", max_diff);
}

void run_condensation(Context& cx, const CondensationParams& p) {
  const CondensationResult res = condensation_experiment(p, cx.cfg.seed, cx.workers);
  TimeSeries ts;
  ts.columns = {"run", "constraint_kind", "initial_fraction", "final_fraction", "constraint_held"};
  for (std::size_t i = 0; i < res.runs.size(); ++i) {
    const auto& r = res.runs[i];
    ts.add_row({double(i), double(static_cast<int>(r.constraint.kind)), r.initial_fraction, r.final_fraction,
                r.constraint_held ? 1.0 : 0.0});
    cx.table(spectrum_series(r.snapshots), "spectrum_" + r.label + ".csv");
  }
  cx.table(ts, "condensation.csv");
  cx.metric("condensed_seeds", double(res.condensed));
  cx.metric("box_difference", res.box_difference);
  cx.metric("pinning_difference", res.pinning_difference);
  cx.metric("constraints_held", res.constraints_held ? 1.0 : 0.0);
  cx.metric("passed", res.passed ? 1.0 : 0.0);
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary summary;
  summary.command = cfg.command();
  summary.seed = cfg.seed;
  Context cx{cfg, fs::path(cfg.output), summary, resolve_workers(cfg.workers)};

  write_file_atomic(cx.dir / "config.json", serialize_config(cfg));
  summary.files.push_back(cx.dir / "config.json");

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SpectralRunParams>) run_spectral(cx, p);
        if constexpr (std::is_same_v<T, GridRunParams>) run_grid(cx, p);
        if constexpr (std::is_same_v<T, InvarianceParams>) run_invariance(cx, p);
        if constexpr (std::is_same_v<T, DensityParams>) run_density(cx, p);
        if constexpr (std::is_same_v<T, SweepParams>) run_sweep(cx, p);
        if constexpr (std::is_same_v<T, CondensationParams>) run_condensation(cx, p);
      },
      cfg.params);

  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

}  // namespace eulerlab
