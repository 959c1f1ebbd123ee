#include "eulerlab/sde.hpp"

#include <cmath>
#include <string>

#include "eulerlab/errors.hpp"
#include "eulerlab/parallel.hpp"

namespace eulerlab {

namespace {

void check_finite_state(const SpectralState& s, std::uint64_t step) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double a = std::abs(s[i]);
    if (!std::isfinite(a)) throw BlowUpError(step, "non-finite amplitude at mode " + std::to_string(i));
    if (a > kBlowUpAmplitude) {
      throw BlowUpError(step, "|phi| exceeds 1e8 at mode " + std::to_string(i));
    }
  }
}

void add_noise(SpectralState& out, const NoiseSpec& noise, double dt, const NoiseStream& rng,
               std::uint64_t step) {
  if (noise.epsilon == 0.0) return;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto [g1, g2] = rng.normal_pair(step, static_cast<std::uint32_t>(k));
    // sqrt(2 eps sigma dt) * (g1 + i g2) / sqrt(2)
    const double amp = std::sqrt(noise.epsilon * noise.sigma[k] * dt);
    out[k] += Complex(amp * g1, amp * g2);
  }
}

void require_noise(const NoiseSpec& noise, const SpectralState& s) {
  if (noise.epsilon < 0.0 || !std::isfinite(noise.epsilon)) {
    throw InvalidArgument("noise epsilon must be finite and >= 0");
  }
  if (noise.epsilon > 0.0 && noise.sigma.size() != s.size()) {
    throw InvalidArgument("noise sigma has " + std::to_string(noise.sigma.size()) +
                          " entries for " + std::to_string(s.size()) + " modes");
  }
}

}  // namespace

NoiseSpec make_noise(double epsilon, NoiseProfile profile, const ModeSet& modes,
                     std::vector<double> custom_sigma) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("make_noise: epsilon must be finite and >= 0");
  }
  NoiseSpec spec;
  spec.epsilon = epsilon;
  switch (profile) {
    case NoiseProfile::uniform: spec.sigma.assign(modes.size(), 1.0); break;
    case NoiseProfile::inverse_k2:
      spec.sigma.resize(modes.size());
      for (std::size_t i = 0; i < modes.size(); ++i) spec.sigma[i] = 1.0 / modes[i].norm2();
      break;
    case NoiseProfile::custom:
      if (custom_sigma.size() != modes.size()) {
        throw InvalidArgument("make_noise: custom sigma needs one entry per mode");
      }
      spec.sigma = std::move(custom_sigma);
      break;
  }
  for (double s : spec.sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("make_noise: sigma_k must be > 0");
  }
  return spec;
}

SpectralState rk4_step(const SpectralState& state, double dt, const Drift& drift) {
  const SpectralState k1 = drift(state);
  const SpectralState k2 = drift(state + (0.5 * dt) * k1);
  const SpectralState k3 = drift(state + (0.5 * dt) * k2);
  const SpectralState k4 = drift(state + dt * k3);
  SpectralState out = state;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

SpectralState euler_step(const SpectralState& state, double dt, const Drift& drift) {
  const SpectralState b = drift(state);
  SpectralState out = state;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += dt * b[i];
  return out;
}

Drift make_drift(const DriftKind& drift, double epsilon) {
  if (std::holds_alternative<EulerOnly>(drift) || epsilon == 0.0) {
    return [](const SpectralState& s) { return euler_drift(s); };
  }
  const OUSpec ou = std::get<EulerPlusOU>(drift).ou;
  return [ou, epsilon](const SpectralState& s) {
    SpectralState b = euler_drift(s);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= (epsilon * ou.alpha[i]) * s[i];
    return b;
  };
}

SpectralState em_step(const SpectralState& state, const DriftKind& drift, const NoiseSpec& noise,
                      double dt, const NoiseStream& rng, std::uint64_t step) {
  require_noise(noise, state);
  SpectralState b = euler_drift(state);
  if (const auto* ou = std::get_if<EulerPlusOU>(&drift); ou && noise.epsilon != 0.0) {
    if (ou->ou.alpha.size() != state.size()) throw InvalidArgument("em_step: OU spec size mismatch");
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= (noise.epsilon * ou->ou.alpha[i]) * state[i];
  }
  SpectralState out = state;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += dt * b[i];
  add_noise(out, noise, dt, rng, step);
  return out;
}

SpectralState em_step(const SpectralState& state, const Drift& drift, const NoiseSpec& noise,
                      double dt, const NoiseStream& rng, std::uint64_t step) {
  require_noise(noise, state);
  SpectralState out = euler_step(state, dt, drift);
  add_noise(out, noise, dt, rng, step);
  return out;
}

SpectralState strang_step(const SpectralState& state, const DriftKind& drift, const NoiseSpec& noise,
                          double dt, const NoiseStream& rng, std::uint64_t step) {
  require_noise(noise, state);
  const auto* ou = std::get_if<EulerPlusOU>(&drift);
  if (!ou || noise.epsilon == 0.0) {
    SpectralState out = rk4_step(state, dt);
    add_noise(out, noise, dt, rng, step);
    return out;
  }
  if (ou->ou.alpha.size() != state.size()) throw InvalidArgument("strang_step: OU spec size mismatch");
  const double eps = noise.epsilon;
  // Exact OU flow over dt/2: decay exp(-eps alpha dt/2), per-coordinate
  // variance eps sigma (1 - exp(-eps alpha dt)) / (2 eps alpha).
  auto half = [&](SpectralState& s, std::uint32_t offset) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double rate = eps * ou->ou.alpha[k];
      const auto [g1, g2] = rng.normal_pair(step, offset + static_cast<std::uint32_t>(k));
      double decay = 1.0, sd = std::sqrt(0.5 * eps * noise.sigma[k] * dt);
      if (rate > 0.0) {
        decay = std::exp(-0.5 * rate * dt);
        sd = std::sqrt(eps * noise.sigma[k] * -std::expm1(-rate * dt) / (2.0 * rate));
      }
      s[k] = decay * s[k] + Complex(sd * g1, sd * g2);
    }
  };
  const auto n = static_cast<std::uint32_t>(state.size());
  SpectralState out = state;
  half(out, 0);
  out = rk4_step(out, dt);
  half(out, n);
  return out;
}

Trajectory simulate(const SpectralState& initial, const SimConfig& config, const DriftKind& drift,
                    const NoiseSpec& noise) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) throw InvalidArgument("simulate: dt must be > 0");
  if (config.steps == 0) throw InvalidArgument("simulate: steps must be positive");
  if (config.record_every == 0 || config.record_every > config.steps) {
    throw InvalidArgument("simulate: record_every must be in [1, steps]");
  }
  require_noise(noise, initial);
  if (config.scheme == Scheme::rk4 && noise.epsilon > 0.0) {
    throw InvalidArgument("simulate: rk4 is deterministic; use euler_maruyama when epsilon > 0");
  }

  Trajectory traj;
  auto record = [&](std::uint64_t step, const SpectralState& s) {
    traj.steps.push_back(step);
    traj.times.push_back(static_cast<double>(step) * config.dt);
    traj.states.push_back(s);
    traj.energy.push_back(energy(s));
    traj.enstrophy.push_back(enstrophy(s));
  };

  const NoiseStream rng(config.seed, config.stream);
  const Drift deterministic = make_drift(drift, noise.epsilon);
  SpectralState s = initial;
  record(0, s);
  for (std::uint64_t step = 1; step <= config.steps; ++step) {
    switch (config.scheme) {
      case Scheme::rk4: s = rk4_step(s, config.dt, deterministic); break;
      case Scheme::euler_maruyama: s = em_step(s, drift, noise, config.dt, rng, step - 1); break;
      case Scheme::strang: s = strang_step(s, drift, noise, config.dt, rng, step - 1); break;
    }
    check_finite_state(s, step);
    if (step % config.record_every == 0 || step == config.steps) record(step, s);
  }
  return traj;
}

std::vector<SpectralState> evolve_ensemble(const std::vector<SpectralState>& initials,
                                           const SimConfig& config, const DriftKind& drift,
                                           const NoiseSpec& noise, int workers) {
  std::vector<SpectralState> finals(initials.size());
  parallel_for(initials.size(), workers, [&](std::size_t i) {
    SimConfig member = config;
    member.stream = static_cast<std::uint32_t>(i);
    member.record_every = member.steps;
    finals[i] = simulate(initials[i], member, drift, noise).states.back();
  });
  return finals;
}

SpectralState to_z_coordinates(const SpectralState& phi) {
  SpectralState z = phi;
  const auto& norms = phi.mode_set()->norms();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] *= norms[i];
  return z;
}

SpectralState from_z_coordinates(const SpectralState& z) {
  SpectralState phi = z;
  const auto& norms = z.mode_set()->norms();
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] /= norms[i];
  return phi;
}

SpectralState z_drift(const SpectralState& z) {
  SpectralState b = euler_drift(from_z_coordinates(z));
  const auto& norms = z.mode_set()->norms();
  for (std::size_t i = 0; i < b.size(); ++i) b[i] *= norms[i];
  return b;
}

SpectralState sample_gaussian(const MeasureSpec& measure, const NoiseStream& rng,
                              std::uint64_t sample) {
  if (!measure.is_gaussian()) throw InvalidArgument("sample_gaussian: measure is not gaussian");
  const auto& w = measure.weights();
  SpectralState out(measure.mode_set());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!(w[k] > 0.0)) {
      throw InvalidArgument("sample_gaussian: weight of mode " + std::to_string(k) + " is zero");
    }
    const auto [g1, g2] = rng.normal_pair(sample, static_cast<std::uint32_t>(k));
    const double sd = 1.0 / std::sqrt(2.0 * w[k]);
    out[k] = {sd * g1, sd * g2};
  }
  return out;
}

}  // namespace eulerlab
