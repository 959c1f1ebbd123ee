#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "eulerlab/errors.hpp"
#include "eulerlab/grid_solver.hpp"

using namespace eulerlab;

namespace {

GridField random_field(int n, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  GridField f(n);
  for (double& v : f.values()) v = normal(gen);
  f.remove_mean();
  return f;
}

// Smooth random stream function: a few low Fourier modes with random phases.
GridField smooth_field(int n, std::mt19937_64& gen, int kmax, double amp) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> normal(0.0, 1.0);
  GridField f(n);
  for (int k1 = 0; k1 <= kmax; ++k1) {
    for (int k2 = -kmax; k2 <= kmax; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      const double a = amp * normal(gen) / (k1 * k1 + k2 * k2), ph = phase(gen);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) f(i, j) += a * std::cos(2.0 * std::numbers::pi * (k1 * i + k2 * j) / n + ph);
      }
    }
  }
  f.remove_mean();
  return f;
}

double max_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

}  // namespace

TEST_CASE("laplacian on constants and discrete modes") {
  const int n = 16;
  CHECK(laplacian_apply(GridField(n, 3.0)).max_abs() == doctest::Approx(0.0));
  CHECK(laplacian_apply(GridField(n)).max_abs() == 0.0);

  const auto u = plane_wave(n, 1, 0, 1.0);
  const double lam = -double(n * n) * (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi / n));
  CHECK(laplacian_eigenvalue(n, 1, 0) == doctest::Approx(lam).epsilon(1e-14));
  const auto lu = laplacian_apply(u);
  for (std::size_t k = 0; k < u.size(); ++k) CHECK(lu.values()[k] == doctest::Approx(lam * u.values()[k]).epsilon(1e-10).scale(1.0));

  const auto c = cellular_mode(n, 3, 2, 0.7);
  const auto lc = laplacian_apply(c);
  const double lam32 = laplacian_eigenvalue(n, 3, 2);
  CHECK(max_diff(lc, GridField(n, [&] {
          std::vector<double> v(c.values().begin(), c.values().end());
          for (double& x : v) x *= lam32;
          return v;
        }())) < 1e-10 * std::abs(lam32));
}

TEST_CASE("poisson inversion") {
  std::mt19937_64 gen(3);
  for (int n : {8, 17, 32}) {
    const auto omega = random_field(n, gen);
    const auto psi = poisson_invert(omega);
    CHECK(std::abs(psi.sum()) < 1e-12 * n * n);
    const auto back = laplacian_apply(psi);
    CHECK(max_diff(back, omega) < 1e-10 * omega.max_abs());
  }
  const int n = 16;
  const auto mode = plane_wave(n, 2, 5, 1.0);
  const auto psi = poisson_invert(mode);
  const double lam = laplacian_eigenvalue(n, 2, 5);
  for (std::size_t k = 0; k < mode.size(); ++k) CHECK(psi.values()[k] == doctest::Approx(mode.values()[k] / lam).scale(1e-3));
  CHECK_THROWS_AS(poisson_invert(GridField(n, 1.0)), InvalidArgument);
}

TEST_CASE("Arakawa advection") {
  std::mt19937_64 gen(5);
  const int n = 64;
  const auto psi = random_field(n, gen), u = random_field(n, gen), v = random_field(n, gen);

  SUBCASE("skew-symmetric in the advected field") {
    const double a = dot(u, advection_apply(psi, v)), b = dot(advection_apply(psi, u), v);
    const double scale = u.norm2() * v.norm2() * psi.max_abs() * n * n;
    CHECK(std::abs(a + b) < 1e-10 * scale);
    CHECK(std::abs(dot(u, advection_apply(psi, u))) < 1e-10 * scale);
  }
  SUBCASE("vanishes on omega = psi and on eigenmodes") {
    CHECK(advection_apply(psi, psi).max_abs() < 1e-12 * psi.max_abs() * psi.max_abs() * n * n);
    const auto mode = cellular_mode(n, 3, 1, 0.2);
    const auto omega = laplacian_apply(mode);
    CHECK(advection_apply(mode, omega).max_abs() < 1e-12 * omega.max_abs() * n * n);
    const auto wave = plane_wave(n, 4, 7, 0.2);
    CHECK(advection_apply(wave, laplacian_apply(wave)).max_abs() < 1e-12 * n * n * n * n);
  }
  SUBCASE("output has zero sum") {
    CHECK(std::abs(advection_apply(psi, v).sum()) < 1e-10 * n * n);
  }
  SUBCASE("approximates the continuous Jacobian for smooth fields") {
    // psi = sin(2 pi x) sin(2 pi y), omega = cos(2 pi x): J = d1 psi d2 omega - d2 psi d1 omega.
    auto jmax = [](int m) {
      GridField p(m), w(m), exact(m);
      const double tp = 2.0 * std::numbers::pi;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          const double x = double(i) / m, y = double(j) / m;
          p(i, j) = std::sin(tp * x) * std::sin(tp * y);
          w(i, j) = std::cos(tp * x);
          exact(i, j) = -(tp * std::sin(tp * x) * std::cos(tp * y)) * (-tp * std::sin(tp * x));
        }
      }
      return max_diff(advection_apply(p, w), exact);
    };
    const double e1 = jmax(32), e2 = jmax(64);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  }
  CHECK_THROWS_AS(advection_apply(GridField(8), GridField(16)), InvalidArgument);
}

TEST_CASE("Cayley step") {
  std::mt19937_64 gen(8);
  const int n = 32;
  CHECK(cayley_step(GridField(n), 0.1).max_abs() == 0.0);

  const auto mode = laplacian_apply(plane_wave(n, 3, 1, 0.5));
  CHECK(max_diff(cayley_step(mode, 0.5), mode) < 1e-12 * mode.max_abs());

  for (double dt : {1e-3, 1e-2, 5e-2}) {
    const auto omega = laplacian_apply(smooth_field(n, gen, 5, 0.05));
    CayleyStats stats;
    const auto next = cayley_step(omega, dt, &stats);
    CHECK(stats.residual <= 1e-12);
    CHECK(std::abs(next.norm2() - omega.norm2()) < 1e-10 * omega.norm2());
    CHECK(max_diff(next, omega) > 0.0);
  }
  CHECK_THROWS_AS(cayley_step(GridField(n), 0.0), InvalidArgument);

  SUBCASE("agrees with the explicit Euler step to second order") {
    const auto omega = laplacian_apply(smooth_field(n, gen, 4, 0.05));
    const auto rate = advection_apply(poisson_invert(omega), omega);
    auto gap = [&](double dt) {
      auto euler = omega;
      for (std::size_t k = 0; k < euler.size(); ++k) euler.values()[k] -= dt * rate.values()[k];
      return max_diff(cayley_step(omega, dt), euler);
    };
    CHECK(gap(1e-3) / gap(5e-4) == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("noise injection") {
  const int n = 16;
  const NoiseStream rng(42, 0);
  std::mt19937_64 gen(1);
  const auto omega = random_field(n, gen);
  CHECK(inject_noise(omega, 0.0, 0.1, rng, 1) == omega);

  const double eps = 0.3, dt = 0.01;
  double s2 = 0.0;
  std::size_t count = 0;
  for (std::uint64_t step = 0; count < 100000; ++step) {
    const auto out = inject_noise(GridField(n), eps, dt, rng, step);
    CHECK(std::abs(out.sum()) < 1e-12 * n * n);
    for (double v : out.values()) {
      s2 += v * v;
      ++count;
    }
  }
  const double expected = 2.0 * eps * dt * (1.0 - 1.0 / (n * n));
  CHECK(s2 / double(count) == doctest::Approx(expected).epsilon(0.05));

  // Addressable draws: the same step reproduces, another step differs.
  CHECK(inject_noise(omega, eps, dt, rng, 7) == inject_noise(omega, eps, dt, rng, 7));
  CHECK_FALSE(inject_noise(omega, eps, dt, rng, 7) == inject_noise(omega, eps, dt, rng, 8));
  CHECK_THROWS_AS(inject_noise(omega, -1.0, dt, rng, 0), InvalidArgument);
}

TEST_CASE("constraints") {
  std::mt19937_64 gen(11);
  const int n = 16;
  const auto psi = random_field(n, gen, 0.2);

  CHECK(apply_constraint(psi, GridConstraint::none()) == psi);

  SUBCASE("box") {
    auto big = psi;
    big(3, 4) = 0.5;
    big.remove_mean();
    const auto con = GridConstraint::box(0.1);
    const auto out = apply_constraint(big, con);
    CHECK(out.max_abs() <= 0.1);
    CHECK(satisfies(out, con));
    CHECK(std::abs(out.sum()) < 1e-12 * n * n);
    CHECK(apply_constraint(out, con) == out);
    // A field already inside the box is untouched.
    auto small = psi;
    for (double& v : small.values()) v *= 0.01;
    CHECK(apply_constraint(small, GridConstraint::box(1.0)) == small);
    CHECK_THROWS_AS(GridConstraint::box(0.0), InvalidArgument);
    CHECK_THROWS_AS(GridConstraint::box(std::nan("")), InvalidArgument);
  }
  SUBCASE("box projection beats plain clipping") {
    // Exact Euclidean projection: no feasible point is closer.
    const auto con = GridConstraint::box(0.15);
    const auto out = apply_constraint(psi, con);
    auto clipped = psi;
    for (double& v : clipped.values()) v = std::clamp(v, -0.15, 0.15);
    clipped.remove_mean();
    for (double& v : clipped.values()) v = std::clamp(v, -0.15, 0.15);
    GridField d1 = out, d2 = clipped;
    for (std::size_t k = 0; k < psi.size(); ++k) {
      d1.values()[k] -= psi.values()[k];
      d2.values()[k] -= psi.values()[k];
    }
    CHECK(d1.norm2() <= d2.norm2() + 1e-12);
  }
  SUBCASE("pinning") {
    const auto con = GridConstraint::pinning({0, n / 2});
    const auto out = apply_constraint(psi, con);
    for (int j = 0; j < n; ++j) {
      CHECK(out(0, j) == 0.0);
      CHECK(out(n / 2, j) == 0.0);
    }
    CHECK(satisfies(out, con));
    CHECK(std::abs(out.sum()) < 1e-12 * n * n);
    const auto twice = apply_constraint(out, con);
    CHECK(max_diff(twice, out) < 1e-15);
    const auto cols = GridConstraint::pinning({}, {3, 3, 9});
    CHECK(cols.columns == std::vector<int>{3, 9});
    const auto outc = apply_constraint(psi, cols);
    for (int i = 0; i < n; ++i) CHECK(outc(i, 9) == 0.0);
    CHECK_THROWS_AS(apply_constraint(psi, GridConstraint::pinning({n})), InvalidArgument);
  }
  SUBCASE("pinning is the energy-orthogonal projection") {
    const auto con = GridConstraint::pinning({2}, {5});
    const auto out = apply_constraint(psi, con);
    GridField diff = psi;
    for (std::size_t k = 0; k < diff.size(); ++k) diff.values()[k] -= out.values()[k];
    // The vorticity change lives on the pinned lines up to a constant.
    const auto dw = laplacian_apply(diff);
    const double c = dw(0, 0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != 2 && j != 5) CHECK(dw(i, j) == doctest::Approx(c).scale(1e-9 * dw.max_abs()));
      }
    }
    // Energy product of the residual with any admissible field vanishes.
    for (int trial = 0; trial < 5; ++trial) {
      const auto w = apply_constraint(random_field(n, gen), con);
      CHECK(std::abs(dot(diff, laplacian_apply(w))) < 1e-9 * diff.norm2() * laplacian_apply(w).norm2());
    }
    // Closest admissible point in that norm.
    auto energy_gap = [&](const GridField& cand) {
      GridField d = psi;
      for (std::size_t k = 0; k < d.size(); ++k) d.values()[k] -= cand.values()[k];
      return -dot(d, laplacian_apply(d));
    };
    auto other = out;
    const auto w = apply_constraint(random_field(n, gen, 1e-3), con);
    for (std::size_t k = 0; k < other.size(); ++k) other.values()[k] += w.values()[k];
    CHECK(energy_gap(out) < energy_gap(other));
  }
  CHECK(GridConstraint::pinning({0, 8}).describe() == "pinning(rows=[0,8],columns=[])");
  CHECK(GridConstraint::box(0.25).describe() == "box(0.25)");
}

TEST_CASE("shell spectrum") {
  const int n = 32;
  const auto zero = shell_spectrum(GridField(n));
  CHECK(zero.total_energy == 0.0);
  CHECK(zero.lowest_shell_fraction == 0.0);

  const auto rep = shell_spectrum(plane_wave(n, 3, 1, 0.4));
  const int shell = static_cast<int>(std::floor(std::sqrt(10.0)));
  // cos splits into +-k with amplitude 0.2 each: energy 2 * 10 * 0.04.
  CHECK(rep.total_energy == doctest::Approx(2.0 * 10.0 * 0.04).epsilon(1e-12));
  for (std::size_t s = 0; s < rep.shell_energy.size(); ++s) {
    if (int(s) == shell) {
      CHECK(rep.shell_energy[s] == doctest::Approx(rep.total_energy).epsilon(1e-12));
    } else {
      CHECK(rep.shell_energy[s] < 1e-25);
    }
  }
  CHECK(shell_spectrum(cellular_mode(n, 1, 1, 1.0)).lowest_shell_fraction == doctest::Approx(1.0));
  CHECK(shell_spectrum(plane_wave(n, 0, 1, 1.0)).lowest_shell_fraction == doctest::Approx(1.0));
  CHECK(shell_spectrum(plane_wave(n, 2, 0, 1.0)).lowest_shell_fraction == doctest::Approx(0.0));
  // Nyquist and odd sizes.
  CHECK(shell_spectrum(plane_wave(n, n / 2, 0, 1.0)).total_energy == doctest::Approx(256.0));

  std::mt19937_64 gen(2);
  for (int m : {16, 21, 32}) {
    const auto f = random_field(m, gen);
    const auto r = shell_spectrum(f);
    double sum = 0.0;
    for (double e : r.shell_energy) {
      CHECK(e >= 0.0);
      sum += e;
    }
    CHECK(sum == doctest::Approx(r.total_energy).epsilon(1e-10));
    // Parseval: sum k^2 |psi_hat|^2 against the direct double sum over the lattice.
    double direct = 0.0;
    for (int k1 = -(m / 2); k1 < m - m / 2; ++k1) {
      for (int k2 = -(m / 2); k2 < m - m / 2; ++k2) {
        std::complex<double> c{};
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < m; ++j) c += f(i, j) * std::polar(1.0, -2.0 * std::numbers::pi * (k1 * i + k2 * j) / m);
        }
        direct += double(k1 * k1 + k2 * k2) * std::norm(c / double(m * m));
      }
    }
    CHECK(r.total_energy == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("run_grid_sim") {
  const int n = 32;
  GridSimConfig cfg;
  cfg.n = n;
  cfg.steps = 1000;
  cfg.dt = 0.01;
  cfg.snapshot_every = 250;

  SUBCASE("eigenmode is stationary") {
    const auto init = cellular_mode(n, 4, 4, 0.01);
    const auto res = run_grid_sim(init, cfg);
    CHECK(max_diff(res.final_psi, init) < 1e-9);
    REQUIRE(res.snapshots.size() == 5);
    CHECK(res.snapshots.back().step == 1000);
    CHECK(res.snapshots.back().t == doctest::Approx(10.0));
  }
  SUBCASE("noiseless enstrophy is conserved") {
    std::mt19937_64 gen(4);
    const auto init = smooth_field(n, gen, 6, 0.02);
    const auto res = run_grid_sim(init, cfg);
    const double e0 = res.snapshots.front().enstrophy, e1 = res.snapshots.back().enstrophy;
    CHECK(std::abs(e1 - e0) < 1e-8 * e0);
    CHECK(max_diff(res.final_psi, init) > 1e-4 * init.max_abs());
  }
  SUBCASE("deterministic given the seed, callback receives snapshots") {
    cfg.steps = 50;
    cfg.epsilon = 1e-3;
    cfg.seed = 9;
    cfg.snapshot_every = 10;
    const auto init = cellular_mode(n, 4, 4, 0.01);
    const auto a = run_grid_sim(init, cfg);
    std::vector<std::uint64_t> steps;
    const auto b = run_grid_sim(init, cfg, [&](const GridSnapshot& s) { steps.push_back(s.step); });
    CHECK(a.final_psi == b.final_psi);
    CHECK(b.snapshots.empty());
    CHECK(steps == std::vector<std::uint64_t>{0, 10, 20, 30, 40, 50});
    cfg.seed = 10;
    CHECK_FALSE(run_grid_sim(init, cfg).final_psi == a.final_psi);
  }
  SUBCASE("constraints hold along the run") {
    cfg.steps = 100;
    cfg.epsilon = 1e-2;
    cfg.snapshot_every = 10;
    cfg.constraint = GridConstraint::pinning({0, n / 2});
    const auto res = run_grid_sim(cellular_mode(n, 4, 4, 0.01), cfg);
    for (const auto& s : res.snapshots) CHECK(satisfies(s.psi, cfg.constraint));
    cfg.constraint = GridConstraint::box(0.005);
    const auto rb = run_grid_sim(cellular_mode(n, 4, 4, 0.01), cfg);
    for (const auto& s : rb.snapshots) CHECK(s.psi.max_abs() <= 0.005);
  }
  SUBCASE("midpoint stepper conserves energy better than the frozen one") {
    std::mt19937_64 gen(6);
    const auto init = smooth_field(n, gen, 6, 0.05);
    auto energy = [](const GridField& p) { return -dot(p, laplacian_apply(p)); };
    cfg.steps = 200;
    cfg.snapshot_every = 200;
    const double e0 = energy(init);
    const double frozen = std::abs(energy(run_grid_sim(init, cfg).final_psi) - e0);
    cfg.stepper = GridStepper::midpoint;
    const auto mid = run_grid_sim(init, cfg);
    const double midpoint = std::abs(energy(mid.final_psi) - e0);
    CHECK(midpoint < 0.1 * frozen);
    CHECK(std::abs(mid.snapshots.back().enstrophy - mid.snapshots.front().enstrophy) <
          1e-9 * mid.snapshots.front().enstrophy);
  }
  SUBCASE("invalid configuration") {
    cfg.n = 4;
    CHECK_THROWS_AS(run_grid_sim(GridField(4), cfg), InvalidArgument);
    cfg.n = n;
    CHECK_THROWS_AS(run_grid_sim(GridField(16), cfg), InvalidArgument);
    cfg.dt = 0.0;
    CHECK_THROWS_AS(run_grid_sim(GridField(n), cfg), InvalidArgument);
    cfg.dt = 0.01;
    CHECK_THROWS_AS(run_grid_sim(GridField(n, 1.0), cfg), InvalidArgument);
  }
  SUBCASE("blow-up is reported with the step") {
    cfg.epsilon = 1e18;
    cfg.steps = 10;
    try {
      run_grid_sim(GridField(n), cfg);
      FAIL("expected BlowUpError");
    } catch (const BlowUpError& e) {
      CHECK(e.step() >= 1);
      CHECK(e.step() <= 10);
    }
  }
}
