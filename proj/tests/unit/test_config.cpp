#include <doctest.h>

#include <algorithm>
#include <string>

#include "eulerlab/config.hpp"
#include "eulerlab/errors.hpp"

using namespace eulerlab;

namespace {

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("command names") {
  for (Command c : {Command::simulate_spectral, Command::simulate_grid, Command::check_invariance,
                    Command::estimate_density, Command::sweep_epsilon, Command::condensation}) {
    CHECK(parse_command(command_name(c)) == c);
  }
  CHECK(command_name(Command::sweep_epsilon) == "sweep-epsilon");
  CHECK_THROWS_AS(parse_command("simulate"), InvalidArgument);
}

TEST_CASE("minimal config fills defaults") {
  const auto cfg = parse_config(R"({"command": "simulate-spectral"})");
  REQUIRE(cfg.command() == Command::simulate_spectral);
  const auto& p = std::get<SpectralRunParams>(cfg.params);
  CHECK(p.dt == 1e-3);
  CHECK(p.record_every == 100);
  CHECK(cfg.seed == 0);
  CHECK(cfg == default_config(Command::simulate_spectral));

  const auto c2 = parse_config(R"({"command": "condensation", "seed": 7, "condensation": {"seeds": 4, "min_condensed": 3}})");
  const auto& cp = std::get<CondensationParams>(c2.params);
  CHECK(cp.seeds == 4);
  CHECK(cp.grid.dt == 0.0025);
  CHECK(cp.grid.steps == 60000);
  CHECK(c2.seed == 7);
}

TEST_CASE("serialize / parse round-trip") {
  for (Command c : {Command::simulate_spectral, Command::simulate_grid, Command::check_invariance,
                    Command::estimate_density, Command::sweep_epsilon, Command::condensation}) {
    const auto cfg = default_config(c);
    CHECK(parse_config(serialize_config(cfg)) == cfg);
  }

  ExperimentConfig cfg = default_config(Command::simulate_grid);
  cfg.seed = 18446744073709551615ull;
  cfg.output = "runs/a b";
  cfg.workers = 3;
  auto& g = std::get<GridRunParams>(cfg.params);
  g.dt = 0.1 + 0.2;
  g.constraint = GridConstraint::pinning({16, 0}, {5});
  g.stepper = GridStepper::midpoint;
  g.initial = "plane_wave";
  g.mode = {-3, 2};
  const std::string text = serialize_config(cfg);
  CHECK(parse_config(text) == cfg);
  CHECK(serialize_config(parse_config(text)) == text);

  ExperimentConfig d = default_config(Command::sweep_epsilon);
  auto& s = std::get<SweepParams>(d.params);
  s.problem.problem = "reduction";
  s.problem.domain = "box";
  s.problem.half_widths = {1.5, 1.5};
  s.problem.boundary = "enstrophy";
  s.problem.rotation = 8.0;
  s.points = {{0.3, -0.4}, {1.0, 0.5}};
  s.problem.exit_rule = ExitRule::interpolate;
  CHECK(parse_config(serialize_config(d)) == d);

  ExperimentConfig b = default_config(Command::simulate_grid);
  std::get<GridRunParams>(b.params).constraint = GridConstraint::box(0.02);
  CHECK(parse_config(serialize_config(b)) == b);
}

TEST_CASE("validation names the offending field") {
  auto v = violations_of(R"({"command": "simulate-spectral", "spectral": {"dt": -1}})");
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("spectral.dt") == 0);

  v = violations_of(R"({"command": "simulate-grid", "grid": {"viscocity": 0.01}})");
  REQUIRE(v.size() == 1);
  CHECK(mentions(v, "viscocity"));
  CHECK(mentions(v, "unknown key"));

  v = violations_of(R"({"command": "simulate-grid", "grid": {"n": 4}})");
  CHECK(mentions(v, "grid.n"));
}

TEST_CASE("all violations are collected") {
  const auto v = violations_of(R"({
    "command": "simulate-grid", "seed": -3, "extra": 1,
    "grid": {"n": 4, "dt": 0, "steps": 1.5, "epsilon": -1, "stepper": "rk2",
             "constraint": {"kind": "box"}, "spectral": {}}
  })");
  for (const char* field : {"seed", "extra", "grid.n", "grid.dt", "grid.steps", "grid.epsilon", "grid.stepper",
                            "grid.constraint.psi_max", "grid.spectral"}) {
    CAPTURE(field);
    CHECK(mentions(v, std::string(field) + ":"));
  }
  CHECK(v.size() == 9);
}

TEST_CASE("cross-field rules") {
  CHECK(mentions(violations_of(R"({"command": "simulate-spectral", "spectral": {"epsilon": 0.1}})"), "spectral.scheme"));
  CHECK(mentions(violations_of(R"({"command": "simulate-spectral", "spectral": {"truncation": 2, "mode": [3, 0]}})"),
                 "spectral.mode"));
  CHECK(mentions(violations_of(R"({"command": "simulate-spectral", "spectral": {"mode": [-1, 0]}})"), "spectral.mode"));
  CHECK(mentions(violations_of(R"({"command": "simulate-grid", "grid": {"constraint": {"kind": "pinning", "rows": [40]}}})"),
                 "grid.constraint.rows"));
  CHECK(mentions(violations_of(R"({"command": "simulate-grid", "grid": {"constraint": {"kind": "pinning"}}})"),
                 "grid.constraint.kind"));
  CHECK(mentions(violations_of(R"({"command": "estimate-density", "density": {"z0": [1.5, 0]}})"), "density.z0"));
  CHECK(mentions(violations_of(R"({"command": "estimate-density", "density": {"z0": [0.1, 0, 0]}})"), "density.z0"));
  CHECK(mentions(violations_of(R"({"command": "estimate-density", "density": {"boundary": "enstrophy"}})"),
                 "density.boundary"));
  CHECK(mentions(violations_of(R"({"command": "estimate-density", "density": {"fd_points": 101}})"), "density.fd_points"));
  CHECK(mentions(violations_of(R"({"command": "sweep-epsilon", "sweep": {"epsilons": [0.1, 0]}})"), "sweep.epsilons"));
  CHECK(mentions(violations_of(R"({"command": "condensation", "condensation": {"min_condensed": 20}})"),
                 "condensation.min_condensed"));
  CHECK(mentions(violations_of(R"({"command": "simulate-grid", "density": {}})"), "density"));
  CHECK(mentions(violations_of(R"({"command": "simulate-fluid"})"), "command"));
  CHECK(mentions(violations_of(R"({"seed": 1})"), "command: required"));

  const auto ok = parse_config(
      R"({"command": "estimate-density", "density": {"domain": "box", "half_widths": [1.5, 1.5], "fd_points": 101, "z0": [1.0, 0.5]}})");
  CHECK(std::get<DensityParams>(ok.params).fd_points == 101);
}

TEST_CASE("syntax errors carry the byte offset") {
  try {
    parse_config("{\"command\": \"simulate-grid\",, }");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.byte_offset() == 29);
  }
  CHECK_THROWS_AS(parse_config("[1, 2]"), ValidationError);
  CHECK_THROWS_AS(parse_config(""), ParseError);
}
