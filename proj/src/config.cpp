#include "eulerlab/config.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "eulerlab/errors.hpp"
#include "eulerlab/mode_set.hpp"

namespace eulerlab {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<Command, std::string_view>, 6> kCommands{{
    {Command::simulate_spectral, "simulate-spectral"},
    {Command::simulate_grid, "simulate-grid"},
    {Command::check_invariance, "check-invariance"},
    {Command::estimate_density, "estimate-density"},
    {Command::sweep_epsilon, "sweep-epsilon"},
    {Command::condensation, "condensation"},
}};

constexpr std::array<std::string_view, 6> kBlocks{"spectral", "grid", "invariance", "density", "sweep", "condensation"};

template <class E>
using EnumNames = std::vector<std::pair<E, std::string_view>>;

const EnumNames<Scheme> kSchemes{{Scheme::rk4, "rk4"}, {Scheme::euler_maruyama, "euler_maruyama"}, {Scheme::strang, "strang"}};
const EnumNames<NoiseProfile> kProfiles{{NoiseProfile::uniform, "uniform"}, {NoiseProfile::inverse_k2, "inverse_k2"}};
const EnumNames<GridStepper> kSteppers{{GridStepper::frozen, "frozen"}, {GridStepper::midpoint, "midpoint"}};
const EnumNames<ExitRule> kExitRules{{ExitRule::interpolate, "interpolate"}, {ExitRule::bridge, "bridge"}};
const EnumNames<PathScheme> kPathSchemes{{PathScheme::euler_maruyama, "euler_maruyama"}, {PathScheme::heun, "heun"}};

template <class E>
std::string_view name_of(const EnumNames<E>& names, E value) {
  for (const auto& [v, n] : names) {
    if (v == value) return n;
  }
  return "?";
}

std::string describe(const json& v) {
  std::string s = v.dump();
  return s.size() > 40 ? s.substr(0, 37) + "..." : s;
}

// Reads one JSON object, records every problem under its dotted path and
// reports keys nobody asked for.
class Reader {
 public:
  Reader(const json* obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (obj_ && !obj_->is_object()) {
      fail("", "must be an object");
      obj_ = nullptr;
    }
  }

  std::string where(std::string_view key) const {
    if (path_.empty()) return std::string(key);
    return key.empty() ? path_ : path_ + "." + std::string(key);
  }
  void fail(std::string_view key, const std::string& msg) { errors_.push_back(where(key) + ": " + msg); }

  const json* find(std::string_view key) {
    known_.insert(std::string(key));
    if (!obj_) return nullptr;
    auto it = obj_->find(std::string(key));
    return it == obj_->end() ? nullptr : &*it;
  }

  void real(std::string_view key, double& out, const std::function<bool(double)>& ok = {}, const char* rule = "") {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number()) return fail(key, "expected a number, got " + describe(*v));
    const double x = v->get<double>();
    if (!std::isfinite(x)) return fail(key, "must be finite");
    if (ok && !ok(x)) return fail(key, std::string(rule) + " (got " + describe(*v) + ")");
    out = x;
  }

  template <class I>
  void integer(std::string_view key, I& out, long long lo, long long hi) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer()) return fail(key, "expected an integer, got " + describe(*v));
    if (v->is_number_unsigned() && v->get<unsigned long long>() > static_cast<unsigned long long>(hi)) {
      return fail(key, "must be <= " + std::to_string(hi) + " (got " + describe(*v) + ")");
    }
    const long long x = v->is_number_unsigned() ? static_cast<long long>(v->get<unsigned long long>()) : v->get<long long>();
    if (x < lo || x > hi) {
      return fail(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "] (got " + describe(*v) + ")");
    }
    out = static_cast<I>(x);
  }

  void seed(std::string_view key, std::uint64_t& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<long long>() < 0)) {
      return fail(key, "expected a non-negative integer, got " + describe(*v));
    }
    out = v->get<std::uint64_t>();
  }

  void boolean(std::string_view key, bool& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_boolean()) return fail(key, "expected true or false, got " + describe(*v));
    out = v->get<bool>();
  }

  void text(std::string_view key, std::string& out, const std::vector<std::string_view>& allowed = {}) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string()) return fail(key, "expected a string, got " + describe(*v));
    const auto s = v->get<std::string>();
    if (!allowed.empty()) {
      bool found = false;
      std::string list;
      for (auto a : allowed) {
        found = found || a == s;
        list += (list.empty() ? "" : ", ") + std::string(a);
      }
      if (!found) return fail(key, "unknown value \"" + s + "\" (expected one of " + list + ")");
    }
    out = s;
  }

  template <class E>
  void enumeration(std::string_view key, E& out, const EnumNames<E>& names) {
    const json* v = find(key);
    if (!v) return;
    std::string list;
    for (const auto& [e, n] : names) {
      if (v->is_string() && v->get<std::string>() == n) {
        out = e;
        return;
      }
      list += (list.empty() ? "" : ", ") + std::string(n);
    }
    fail(key, "unknown value " + describe(*v) + " (expected one of " + list + ")");
  }

  void reals(std::string_view key, std::vector<double>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) return fail(key, "expected an array of numbers");
    std::vector<double> xs;
    for (const auto& e : *v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) return fail(key, "expected finite numbers, got " + describe(e));
      xs.push_back(e.get<double>());
    }
    out = std::move(xs);
  }

  void integers(std::string_view key, std::vector<int>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) return fail(key, "expected an array of integers");
    std::vector<int> xs;
    for (const auto& e : *v) {
      if (!e.is_number_integer()) return fail(key, "expected integers, got " + describe(e));
      xs.push_back(e.get<int>());
    }
    out = std::move(xs);
  }

  void pair(std::string_view key, std::array<int, 2>& out) {
    std::vector<int> xs{out[0], out[1]};
    const std::size_t before = errors_.size();
    integers(key, xs);
    if (errors_.size() != before) return;
    if (xs.size() != 2) return fail(key, "expected two integers [k1, k2]");
    out = {xs[0], xs[1]};
  }

  void points(std::string_view key, std::vector<std::vector<double>>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) return fail(key, "expected an array of points");
    std::vector<std::vector<double>> ps;
    for (const auto& p : *v) {
      if (!p.is_array()) return fail(key, "each point must be an array of numbers");
      std::vector<double> z;
      for (const auto& e : p) {
        if (!e.is_number() || !std::isfinite(e.get<double>())) return fail(key, "expected finite numbers, got " + describe(e));
        z.push_back(e.get<double>());
      }
      ps.push_back(std::move(z));
    }
    out = std::move(ps);
  }

  /// Reader over a nested object (absent: every lookup misses), sharing the error list.
  Reader child(std::string_view key) {
    const json* v = find(key);
    return Reader(v, where(key), errors_);
  }
  bool present() const { return obj_ != nullptr; }
  std::size_t error_count() const { return errors_.size(); }

  void finish() {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!known_.count(it.key())) fail(it.key(), "unknown key");
    }
  }

 private:
  const json* obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

const auto positive = [](double x) { return x > 0.0; };
const auto nonnegative = [](double x) { return x >= 0.0; };


void read_constraint(Reader r, GridConstraint& out, const char* rows_key, const char* cols_key) {
  if (!r.present()) return;
  const std::size_t before = r.error_count();
  std::string kind = "none";
  double psi_max = 0.0;
  std::vector<int> rows, cols;
  r.text("kind", kind, {"none", "box", "pinning"});
  r.real("psi_max", psi_max);
  r.integers(rows_key, rows);
  r.integers(cols_key, cols);
  r.finish();
  if (r.error_count() != before) return;
  if (kind == "box") {
    if (!(psi_max > 0.0)) return r.fail("psi_max", "must be > 0 for a box constraint");
    if (!rows.empty() || !cols.empty()) return r.fail("kind", "a box constraint takes no rows or columns");
    out = GridConstraint::box(psi_max);
  } else if (kind == "pinning") {
    if (psi_max != 0.0) return r.fail("psi_max", "only used by box constraints");
    if (rows.empty() && cols.empty()) return r.fail("kind", "pinning needs at least one row or column");
    out = GridConstraint::pinning(rows, cols);
  } else {
    if (psi_max != 0.0 || !rows.empty() || !cols.empty()) return r.fail("kind", "\"none\" takes no parameters");
    out = GridConstraint::none();
  }
}

void check_pinned(Reader& r, const char* key, const std::vector<int>& lines, int n) {
  for (int x : lines) {
    if (x < 0 || x >= n) r.fail(key, "index " + std::to_string(x) + " outside [0, " + std::to_string(n) + ")");
  }
}

void read_grid(Reader& r, GridRunParams& g) {
  r.integer("n", g.n, 8, 4096);
  r.real("dt", g.dt, positive, "must be > 0");
  r.integer("steps", g.steps, 0, 1'000'000'000'000LL);
  r.real("epsilon", g.epsilon, nonnegative, "must be >= 0");
  r.integer("snapshot_every", g.snapshot_every, 1, 1'000'000'000'000LL);
  read_constraint(r.child("constraint"), g.constraint, "rows", "columns");
  r.enumeration("stepper", g.stepper, kSteppers);
  r.text("initial", g.initial, {"cellular", "plane_wave"});
  r.pair("mode", g.mode);
  r.real("amplitude", g.amplitude);
  r.boolean("write_snapshots", g.write_snapshots);
  if (g.constraint.kind == GridConstraint::Kind::pinning) {
    Reader c = r.child("constraint");
    check_pinned(c, "rows", g.constraint.rows, g.n);
    check_pinned(c, "columns", g.constraint.columns, g.n);
  }
  if (g.mode[0] % g.n == 0 && g.mode[1] % g.n == 0) r.fail("mode", "must not be the zero mode modulo n");
}

void read_spectral(Reader& r, SpectralRunParams& p) {
  r.integer("truncation", p.truncation, 1, 64);
  r.real("dt", p.dt, positive, "must be > 0");
  r.integer("steps", p.steps, 0, 1'000'000'000'000LL);
  r.integer("record_every", p.record_every, 1, 1'000'000'000'000LL);
  r.enumeration("scheme", p.scheme, kSchemes);
  r.text("initial", p.initial, {"single_mode", "enstrophy_sample", "energy_sample"});
  r.pair("mode", p.mode);
  r.real("amplitude", p.amplitude);
  r.real("epsilon", p.epsilon, nonnegative, "must be >= 0");
  r.enumeration("noise", p.noise, kProfiles);
  r.text("ou", p.ou, {"none", "enstrophy", "energy"});
  if (p.initial == "single_mode") {
    const ModeIndex k{p.mode[0], p.mode[1]};
    if (!k.in_half_lattice() || k.norm2() > p.truncation * p.truncation) {
      r.fail("mode", "must be a half-lattice mode (k1 > 0, or k1 = 0 and k2 > 0) with |k| <= truncation");
    }
  }
  if (p.scheme == Scheme::rk4 && p.epsilon > 0.0) {
    r.fail("scheme", "rk4 is deterministic; use euler_maruyama or strang when epsilon > 0");
  }
}

void read_invariance(Reader& r, InvarianceParams& p) {
  r.integer("truncation", p.truncation, 1, 32);
  r.integer("states", p.states, 1, 100'000'000);
  r.text("measure", p.measure, {"enstrophy", "energy"});
  r.real("state_scale", p.state_scale, positive, "must be > 0");
}

int problem_dimension(const DensityProblem& p) {
  return p.domain == "box" ? static_cast<int>(p.half_widths.size()) : p.dimension;
}

bool inside(const DensityProblem& p, const std::vector<double>& z) {
  if (p.domain == "box") {
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!(std::abs(z[i]) < p.half_widths[i])) return false;
    }
    return true;
  }
  double r2 = 0.0;
  for (double x : z) r2 += x * x;
  return r2 < p.radius * p.radius;
}

void read_problem(Reader& r, DensityProblem& p) {
  r.text("problem", p.problem, {"harmonic", "reduction"});
  r.real("rotation", p.rotation);
  r.text("domain", p.domain, {"box", "ball"});
  r.reals("half_widths", p.half_widths);
  r.real("radius", p.radius, positive, "must be > 0");
  r.integer("dimension", p.dimension, 1, 64);
  r.text("boundary", p.boundary, {"constant", "coordinate", "enstrophy"});
  r.real("boundary_value", p.boundary_value);
  r.integer("boundary_index", p.boundary_index, 0, 63);
  r.integer("paths", p.paths, 1, 1'000'000'000'000LL);
  r.real("dt", p.dt, positive, "must be > 0");
  r.enumeration("exit_rule", p.exit_rule, kExitRules);
  r.enumeration("scheme", p.scheme, kPathSchemes);
  r.integer("max_steps", p.max_steps, 1, 1'000'000'000'000LL);
  if (p.domain == "box") {
    if (p.half_widths.empty()) r.fail("half_widths", "a box needs at least one half width");
    for (double h : p.half_widths) {
      if (!(h > 0.0)) r.fail("half_widths", "every half width must be > 0");
    }
  }
  const int dim = problem_dimension(p);
  if (p.problem == "reduction" && dim != 2) r.fail("problem", "the reduction lives in two dimensions");
  if (p.boundary == "coordinate" && p.boundary_index >= dim) {
    r.fail("boundary_index", "must be < the domain dimension " + std::to_string(dim));
  }
  if (p.boundary == "enstrophy" && p.problem != "reduction") {
    r.fail("boundary", "the enstrophy boundary needs problem = \"reduction\"");
  }
}

void check_point(Reader& r, const char* key, const DensityProblem& p, const std::vector<double>& z) {
  const int dim = problem_dimension(p);
  if (static_cast<int>(z.size()) != dim) {
    r.fail(key, "point has " + std::to_string(z.size()) + " coordinates, domain has " + std::to_string(dim));
  } else if (!inside(p, z)) {
    r.fail(key, "point must lie strictly inside the domain");
  }
}

void read_density(Reader& r, DensityParams& p) {
  read_problem(r, p.problem);
  r.real("epsilon", p.epsilon, positive, "must be > 0");
  r.reals("z0", p.z0);
  r.integer("fd_points", p.fd_points, 0, 4001);
  check_point(r, "z0", p.problem, p.z0);
  if (p.fd_points != 0) {
    if (p.fd_points < 3) r.fail("fd_points", "needs at least 3 grid points per axis (0 disables the check)");
    if (p.problem.domain != "box" || problem_dimension(p.problem) != 2) {
      r.fail("fd_points", "the finite-difference check needs a two-dimensional box");
    }
  }
}

void read_sweep(Reader& r, SweepParams& p) {
  read_problem(r, p.problem);
  r.reals("epsilons", p.epsilons);
  r.points("points", p.points);
  if (p.epsilons.empty()) r.fail("epsilons", "needs at least one value");
  for (double e : p.epsilons) {
    if (!(e > 0.0)) r.fail("epsilons", "every epsilon must be > 0");
  }
  if (p.points.empty()) r.fail("points", "needs at least one point");
  for (const auto& z : p.points) check_point(r, "points", p.problem, z);
}

void read_condensation(Reader& r, CondensationParams& p) {
  Reader g = r.child("grid");
  read_grid(g, p.grid);
  g.finish();
  r.integer("seeds", p.seeds, 1, 100000);
  r.real("box_psi_max", p.box_psi_max, positive, "must be > 0");
  r.integers("pin_rows", p.pin_rows);
  r.integers("pin_columns", p.pin_columns);
  r.real("threshold", p.threshold, [](double x) { return x > 0.0 && x < 1.0; }, "must be in (0, 1)");
  r.integer("min_condensed", p.min_condensed, 0, 100000);
  r.real("min_difference", p.min_difference, nonnegative, "must be >= 0");
  check_pinned(r, "pin_rows", p.pin_rows, p.grid.n);
  check_pinned(r, "pin_columns", p.pin_columns, p.grid.n);
  if (p.pin_rows.empty() && p.pin_columns.empty()) r.fail("pin_rows", "pin at least one row or column");
  if (p.min_condensed > p.seeds) r.fail("min_condensed", "cannot exceed seeds");
  if (p.grid.constraint.kind != GridConstraint::Kind::none) {
    r.fail("grid.constraint", "the condensation experiment sets the constraints itself; leave it \"none\"");
  }
}

// ---- serialization ----

ojson constraint_json(const GridConstraint& c) {
  ojson j;
  switch (c.kind) {
    case GridConstraint::Kind::none:
      j["kind"] = "none";
      break;
    case GridConstraint::Kind::box:
      j["kind"] = "box";
      j["psi_max"] = c.psi_max;
      break;
    case GridConstraint::Kind::pinning:
      j["kind"] = "pinning";
      j["rows"] = c.rows;
      j["columns"] = c.columns;
      break;
  }
  return j;
}

ojson to_json(const GridRunParams& g) {
  ojson j;
  j["n"] = g.n;
  j["dt"] = g.dt;
  j["steps"] = g.steps;
  j["epsilon"] = g.epsilon;
  j["snapshot_every"] = g.snapshot_every;
  j["constraint"] = constraint_json(g.constraint);
  j["stepper"] = name_of(kSteppers, g.stepper);
  j["initial"] = g.initial;
  j["mode"] = g.mode;
  j["amplitude"] = g.amplitude;
  j["write_snapshots"] = g.write_snapshots;
  return j;
}

ojson to_json(const SpectralRunParams& p) {
  ojson j;
  j["truncation"] = p.truncation;
  j["dt"] = p.dt;
  j["steps"] = p.steps;
  j["record_every"] = p.record_every;
  j["scheme"] = name_of(kSchemes, p.scheme);
  j["initial"] = p.initial;
  j["mode"] = p.mode;
  j["amplitude"] = p.amplitude;
  j["epsilon"] = p.epsilon;
  j["noise"] = name_of(kProfiles, p.noise);
  j["ou"] = p.ou;
  return j;
}

ojson to_json(const InvarianceParams& p) {
  ojson j;
  j["truncation"] = p.truncation;
  j["states"] = p.states;
  j["measure"] = p.measure;
  j["state_scale"] = p.state_scale;
  return j;
}

void put_problem(ojson& j, const DensityProblem& p) {
  j["problem"] = p.problem;
  j["rotation"] = p.rotation;
  j["domain"] = p.domain;
  j["half_widths"] = p.half_widths;
  j["radius"] = p.radius;
  j["dimension"] = p.dimension;
  j["boundary"] = p.boundary;
  j["boundary_value"] = p.boundary_value;
  j["boundary_index"] = p.boundary_index;
  j["paths"] = p.paths;
  j["dt"] = p.dt;
  j["exit_rule"] = name_of(kExitRules, p.exit_rule);
  j["scheme"] = name_of(kPathSchemes, p.scheme);
  j["max_steps"] = p.max_steps;
}

ojson to_json(const DensityParams& p) {
  ojson j;
  put_problem(j, p.problem);
  j["epsilon"] = p.epsilon;
  j["z0"] = p.z0;
  j["fd_points"] = p.fd_points;
  return j;
}

ojson to_json(const SweepParams& p) {
  ojson j;
  put_problem(j, p.problem);
  j["epsilons"] = p.epsilons;
  j["points"] = p.points;
  return j;
}

ojson to_json(const CondensationParams& p) {
  ojson j;
  j["grid"] = to_json(p.grid);
  j["seeds"] = p.seeds;
  j["box_psi_max"] = p.box_psi_max;
  j["pin_rows"] = p.pin_rows;
  j["pin_columns"] = p.pin_columns;
  j["threshold"] = p.threshold;
  j["min_condensed"] = p.min_condensed;
  j["min_difference"] = p.min_difference;
  return j;
}

CommandParams default_params(Command c) {
  switch (c) {
    case Command::simulate_spectral:
      return SpectralRunParams{};
    case Command::simulate_grid:
      return GridRunParams{};
    case Command::check_invariance:
      return InvarianceParams{};
    case Command::estimate_density:
      return DensityParams{};
    case Command::sweep_epsilon:
      return SweepParams{};
    case Command::condensation:
      return CondensationParams{};
  }
  return SpectralRunParams{};
}

}  // namespace

std::string_view command_name(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name;
  }
  return "?";
}

Command parse_command(std::string_view name) {
  for (const auto& [cmd, n] : kCommands) {
    if (n == name) return cmd;
  }
  throw InvalidArgument("unknown command \"" + std::string(name) + "\"");
}

ExperimentConfig default_config(Command command) {
  ExperimentConfig c;
  c.params = default_params(command);
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  std::vector<std::string> errors;
  if (!doc.is_object()) throw ValidationError({"document: must be a JSON object"});

  Reader top(&doc, "", errors);
  std::string command;
  top.text("command", command);
  ExperimentConfig cfg;
  std::optional<Command> cmd;
  if (command.empty()) {
    if (!doc.contains("command")) errors.push_back("command: required");
  } else {
    try {
      cmd = parse_command(command);
    } catch (const InvalidArgument&) {
      std::string list;
      for (const auto& [c, n] : kCommands) list += (list.empty() ? "" : ", ") + std::string(n);
      errors.push_back("command: unknown value \"" + command + "\" (expected one of " + list + ")");
    }
  }
  top.seed("seed", cfg.seed);
  top.text("output", cfg.output);
  if (cfg.output.empty()) top.fail("output", "must not be empty");
  top.integer("workers", cfg.workers, 0, 4096);

  for (std::size_t b = 0; b < kBlocks.size(); ++b) {
    const bool active = cmd && static_cast<std::size_t>(*cmd) == b;
    Reader block = top.child(kBlocks[b]);
    if (!active) {
      if (block.present()) {
        block.fail("", cmd ? "block not used by command \"" + command + "\"" : "block given without a valid command");
      }
      continue;
    }
    cfg.params = default_params(*cmd);
    std::visit(
        [&](auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, SpectralRunParams>) read_spectral(block, p);
          if constexpr (std::is_same_v<T, GridRunParams>) read_grid(block, p);
          if constexpr (std::is_same_v<T, InvarianceParams>) read_invariance(block, p);
          if constexpr (std::is_same_v<T, DensityParams>) read_density(block, p);
          if constexpr (std::is_same_v<T, SweepParams>) read_sweep(block, p);
          if constexpr (std::is_same_v<T, CondensationParams>) read_condensation(block, p);
        },
        cfg.params);
    block.finish();
  }
  top.finish();
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  ojson j;
  j["command"] = command_name(cfg.command());
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  j["workers"] = cfg.workers;
  std::visit([&](const auto& p) { j[std::string(kBlocks[cfg.params.index()])] = to_json(p); }, cfg.params);
  return j.dump(2) + "\n";
}

}  // namespace eulerlab
