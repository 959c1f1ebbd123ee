#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <string>

#include "eulerlab/errors.hpp"
#include "eulerlab/experiment.hpp"
#include "eulerlab/io.hpp"

using namespace eulerlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "eulerlab_test_experiment" / name;
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig config(const std::string& json, const fs::path& out) {
  auto cfg = parse_config(json);
  cfg.output = out.string();
  return cfg;
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return files;
}

SweepResult synthetic_sweep(const std::vector<double>& values, double stderr_each) {
  SweepResult s;
  for (double v : values) {
    SweepEntry e;
    e.estimate.value = v;
    e.estimate.std_error = stderr_each;
    s.entries.push_back(e);
  }
  return s;
}

}  // namespace

TEST_CASE("check-invariance summary") {
  const auto dir = scratch("inv");
  const auto s = run_experiment(config(R"({"command": "check-invariance", "invariance": {"truncation": 6, "states": 100}})", dir));
  CHECK(s.metrics.at(0).first == "max_im6_relative");
  CHECK(s.metric("max_im6_relative") < 1e-8);
  CHECK(s.metric("max_sp4_relative") < 1e-8);
  const auto ts = read_timeseries(dir / "residuals.csv");
  CHECK(ts.rows.size() == 100);
  CHECK(s.line().rfind("check-invariance seed=0 max_im6_relative=", 0) == 0);
  CHECK(s.line().find(" wall=") != std::string::npos);
  CHECK_THROWS_AS(s.metric("nothing"), InvalidArgument);
}

TEST_CASE("estimate-density with constant boundary data returns exactly 1") {
  const auto dir = scratch("dens");
  const auto s = run_experiment(config(
      R"({"command": "estimate-density", "density": {"boundary": "constant", "boundary_value": 1, "paths": 500}})", dir));
  CHECK(s.metric("value") == 1.0);
  CHECK(s.metric("stderr") == 0.0);
  const auto ts = read_timeseries(dir / "density.csv");
  REQUIRE(ts.rows.size() == 1);
  CHECK(ts.columns.front() == "epsilon");
}

TEST_CASE("estimate-density with a finite-difference cross-check") {
  const auto dir = scratch("dens_fd");
  const auto s = run_experiment(config(R"({"command": "estimate-density", "density": {
      "problem": "reduction", "domain": "box", "half_widths": [1.5, 1.5], "boundary": "enstrophy",
      "epsilon": 0.2, "z0": [0.3, -0.4], "paths": 4000, "fd_points": 81}})", dir));
  CHECK(std::abs(s.metric("value") - s.metric("fd_value")) < 4.0 * s.metric("stderr") + 1e-3);
  const auto ts = read_timeseries(dir / "density.csv");
  CHECK(ts.columns.back() == "fd_gap_in_stderr");
}

TEST_CASE("sweep-epsilon: constant boundary gives 1 everywhere and zero differences") {
  const auto dir = scratch("sweep");
  const auto s = run_experiment(config(R"({"command": "sweep-epsilon", "sweep": {
      "boundary": "constant", "paths": 200, "epsilons": [0.4, 0.2], "points": [[0.1, 0.2], [-0.3, 0.0]]}})", dir));
  const auto table = read_timeseries(dir / "sweep.csv");
  CHECK(table.columns ==
        std::vector<std::string>{"epsilon", "z1", "z2", "value", "stderr", "paths", "mean_exit_time", "flagged"});
  REQUIRE(table.rows.size() == 4);
  for (const auto& r : table.rows) CHECK(r[3] == 1.0);
  for (const auto& r : read_timeseries(dir / "differences.csv").rows) CHECK(r[3] == 0.0);
  CHECK(s.metric("max_difference") == 0.0);
  CHECK(s.metric("bound_violations") == 0.0);
}

TEST_CASE("sweep trend and bound checks") {
  // two points, three levels, epsilon-major
  auto sweep = synthetic_sweep({1.0, 2.0, 1.1, 2.2, 1.15, 2.5}, 0.0);
  auto checks = sweep_trend(sweep, 2);
  REQUIRE(checks.size() == 2);
  CHECK(checks[0].ok);  // 0.1 then 0.05
  CHECK(checks[0].d_j == doctest::Approx(0.1));
  CHECK_FALSE(checks[1].ok);  // 0.2 then 0.3
  sweep = synthetic_sweep({1.0, 2.0, 1.1, 2.2, 1.15, 2.5}, 0.1);
  checks = sweep_trend(sweep, 2);
  CHECK(checks[1].allowance == doctest::Approx(2.0 * std::sqrt(0.06)));
  CHECK(checks[1].ok);
  CHECK_THROWS_AS(sweep_trend(sweep, 4), InvalidArgument);

  const auto b = sweep_bounds(synthetic_sweep({0.5, 1.2, -0.1}, 0.01), {0.1, 1.0});
  CHECK(b.violations == 2);
  CHECK(b.non_positive == 1);
}

TEST_CASE("boundary range of the reduction") {
  DensityProblem p;
  p.problem = "reduction";
  p.domain = "box";
  p.half_widths = {1.0, 1.0};
  p.boundary = "enstrophy";
  const auto setup = make_density_setup(p);
  const auto [lo, hi] = boundary_range(setup, 64);
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(lo < hi);
}

TEST_CASE("simulate-spectral and simulate-grid outputs") {
  const auto dir = scratch("spec");
  auto s = run_experiment(config(R"({"command": "simulate-spectral", "spectral": {"truncation": 3, "steps": 500}})", dir));
  auto ts = read_timeseries(dir / "trajectory.csv");
  CHECK(ts.rows.size() == 6);
  CHECK(ts.columns.size() == 4 + 2 * 14);
  CHECK(s.metric("energy_drift") < 1e-12);

  const auto gdir = scratch("grid");
  s = run_experiment(config(R"({"command": "simulate-grid", "grid": {"n": 16, "steps": 50, "snapshot_every": 20,
      "epsilon": 1e-6, "mode": [2, 1], "constraint": {"kind": "box", "psi_max": 0.009}}})", gdir));
  ts = read_timeseries(gdir / "spectrum.csv");
  REQUIRE(ts.rows.size() == 4);
  CHECK(ts.rows.back()[0] == 50.0);
  const Snapshot snap = read_snapshot(gdir / "snapshots" / "step_0000000040");
  CHECK(snap.meta.step == 40);
  CHECK(snap.meta.constraint == "box(0.009)");
  CHECK(satisfies(snap.field, GridConstraint::box(0.009)));
}

TEST_CASE("re-runs are byte-identical and worker-count independent") {
  const std::string text = R"({"command": "sweep-epsilon", "seed": 5, "sweep": {
      "problem": "reduction", "domain": "box", "half_widths": [1.5, 1.5], "boundary": "enstrophy", "rotation": 4,
      "paths": 300, "epsilons": [0.4, 0.2], "points": [[0.3, -0.4]]}})";
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  auto ca = config(text, a);
  auto cb = config(text, b);
  ca.workers = 1;
  cb.workers = 3;
  run_experiment(ca);
  run_experiment(cb);
  auto fa = dir_contents(a);
  auto fb = dir_contents(b);
  // config.json records the output directory and worker count
  fa.erase("config.json");
  fb.erase("config.json");
  CHECK(fa.size() == 2);
  CHECK(fa == fb);

  const std::string grid = R"({"command": "simulate-grid", "seed": 2, "grid": {"n": 16, "steps": 30, "epsilon": 1e-5,
      "snapshot_every": 10}})";
  const auto g1 = scratch("rerun_g1");
  const auto g2 = scratch("rerun_g2");
  run_experiment(config(grid, g1));
  run_experiment(config(grid, g2));
  fa = dir_contents(g1);
  fb = dir_contents(g2);
  fa.erase("config.json");
  fb.erase("config.json");
  CHECK(fa.size() == 9);
  CHECK(fa == fb);
}

TEST_CASE("condensation experiment bookkeeping") {
  CondensationParams p;
  p.grid.n = 16;
  p.grid.mode = {2, 2};
  p.grid.steps = 200;
  p.grid.snapshot_every = 50;
  p.grid.epsilon = 1e-6;
  p.seeds = 3;
  p.min_condensed = 0;
  p.box_psi_max = 0.008;
  const auto r = condensation_experiment(p, 4, 2);
  REQUIRE(r.runs.size() == 5);
  CHECK(r.box_run().label == "box");
  CHECK(r.pinning_run().label == "pinning");
  CHECK(r.box_run().seed == r.free_run(0).seed);
  CHECK(r.free_run(1).seed != r.free_run(0).seed);
  CHECK(r.constraints_held);
  for (const auto& run : r.runs) {
    CHECK(run.snapshots.size() == 5);
    CHECK(run.final_fraction >= 0.0);
    CHECK(run.final_fraction <= 1.0);
  }
  CHECK(r.box_difference == doctest::Approx(std::abs(r.free_run(0).final_fraction - r.box_run().final_fraction)));

  const auto again = condensation_experiment(p, 4, 1);
  for (std::size_t i = 0; i < r.runs.size(); ++i) CHECK(again.runs[i].final_fraction == r.runs[i].final_fraction);

  const auto dir = scratch("cond");
  ExperimentConfig cfg = default_config(Command::condensation);
  cfg.output = dir.string();
  cfg.seed = 4;
  cfg.params = p;
  const auto s = run_experiment(cfg);
  CHECK(s.metric("box_difference") == r.box_difference);
  CHECK(read_timeseries(dir / "condensation.csv").rows.size() == 5);
  CHECK(fs::exists(dir / "spectrum_pinning.csv"));
}

TEST_CASE("numerical failures propagate") {
  const auto dir = scratch("blowup");
  auto cfg = config(R"({"command": "simulate-grid", "grid": {"n": 8, "steps": 20, "epsilon": 1e30, "mode": [1, 1]}})", dir);
  CHECK_THROWS_AS(run_experiment(cfg), BlowUpError);
  CHECK_FALSE(fs::exists(dir / "spectrum.csv"));
}
