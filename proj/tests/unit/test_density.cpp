#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eulerlab/density.hpp"
#include "eulerlab/errors.hpp"
#include "eulerlab/fd_oracle.hpp"
#include "eulerlab/sde.hpp"
#include "test_support.hpp"

using namespace eulerlab;

namespace {

constexpr double kFourPi2 = 4.0 * std::numbers::pi * std::numbers::pi;

ZDrift linear_drift(double a11, double a12, double a21, double a22, double c1, double c2) {
  return [=](std::span<const double> z, std::span<double> out) {
    out[0] = a11 * z[0] + a12 * z[1] + c1;
    out[1] = a21 * z[0] + a22 * z[1] + c2;
  };
}

}  // namespace

TEST_CASE("DomainSpec") {
  CHECK_THROWS_AS(DomainSpec::box({1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(DomainSpec::box({}), InvalidArgument);
  CHECK_THROWS_AS(DomainSpec::ball(-1.0, 2), InvalidArgument);
  CHECK_THROWS_AS(DomainSpec::ball(1.0, 0), InvalidArgument);

  const auto box = DomainSpec::box({2.0, 1.0});
  CHECK(box.contains(std::vector<double>{1.9, -0.9}));
  CHECK_FALSE(box.contains(std::vector<double>{2.0, 0.0}));
  CHECK_THROWS_AS(box.contains(std::vector<double>{0.0}), InvalidArgument);

  const auto x = box.crossing(std::vector<double>{1.0, 0.0}, std::vector<double>{3.0, 0.5});
  CHECK(x[0] == 2.0);
  CHECK(x[1] == doctest::Approx(0.25));
  // leaves through the nearer face when two are violated
  const auto y = box.crossing(std::vector<double>{0.0, 0.0}, std::vector<double>{4.0, 4.0});
  CHECK(y[1] == 1.0);
  CHECK(y[0] == doctest::Approx(1.0));

  const auto ball = DomainSpec::ball(1.0, 2);
  const auto b = ball.crossing(std::vector<double>{0.5, 0.0}, std::vector<double>{1.5, 0.0});
  CHECK(b[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(b[1] == 0.0);

  for (const auto& p : box.boundary_samples(10)) {
    CHECK((std::abs(p[0]) == 2.0 || std::abs(p[1]) == 1.0));
    CHECK(std::abs(p[0]) <= 2.0);
    CHECK(std::abs(p[1]) <= 1.0);
  }
  for (const auto& p : DomainSpec::ball(2.0, 3).boundary_samples(5)) {
    CHECK(std::hypot(p[0], p[1], p[2]) == doctest::Approx(2.0));
  }
}

TEST_CASE("reduced Euler systems") {
  SUBCASE("two-mode reduction is a rotation set by the spectator") {
    const double c = 0.3;
    const auto red = two_mode_reduction(c);
    const std::vector<double> z{0.7, -0.2};
    std::vector<double> b(2);
    red.drift(z, b);
    CHECK(b[0] == doctest::Approx(-kFourPi2 * c * z[1]).epsilon(1e-13));
    CHECK(b[1] == doctest::Approx(kFourPi2 * c * z[0]).epsilon(1e-13));
    two_mode_reduction(0.0).drift(z, b);
    CHECK(b[0] == 0.0);
    CHECK(b[1] == 0.0);
  }

  SUBCASE("stored quadratic form matches the direct projection") {
    std::mt19937_64 gen(71);
    auto modes = build_mode_set(3);
    const auto background = to_z_coordinates(test::random_state(modes, gen, 0.5));
    const ReducedSystem red(modes, background, {{{1, 0}, false}, {{1, 1}, true}, {{2, 1}, false}});
    std::normal_distribution<double> normal;
    for (int t = 0; t < 20; ++t) {
      const std::vector<double> z{normal(gen), normal(gen), normal(gen)};
      const auto ref = red.drift_direct(z);
      std::vector<double> b(3);
      red.drift(z, b);
      for (int i = 0; i < 3; ++i) CHECK(std::abs(b[i] - ref[i]) < 1e-11 * (1.0 + std::abs(ref[i])));
    }
    CHECK_THROWS_AS(ReducedSystem(modes, background, {{{5, 0}, false}}), InvalidArgument);
    CHECK_THROWS_AS(ReducedSystem(modes, background, {{{1, 0}, false}, {{1, 0}, false}}), InvalidArgument);
  }

  SUBCASE("enstrophy boundary uses k^4 weights in phi") {
    const auto red = two_mode_reduction(0.0);
    const auto f = red.enstrophy_boundary();
    CHECK(f(std::vector<double>{1.0, 2.0}) == doctest::Approx(std::exp(-0.5 * 5.0)));
    const double c = 0.2;
    const auto g = two_mode_reduction(c).enstrophy_boundary();
    // the (1,1) spectator has k^4 = 4
    CHECK(g(std::vector<double>{0.0, 0.0}) == doctest::Approx(std::exp(-0.5 * 4.0 * c * c)));
  }
}

TEST_CASE("estimate_density") {
  const auto ball = DomainSpec::ball(1.0, 2);
  const std::vector<double> z0{0.5, 0.0};

  SUBCASE("constant data is reproduced exactly") {
    const auto e = estimate_density(two_mode_reduction().field(), 0.3, DomainSpec::box({1.0, 1.0}),
                                    BoundaryFunction::constant(1.0), std::vector<double>{0.2, 0.1}, 200, 1e-3, 4);
    CHECK(e.value == 1.0);
    CHECK(e.std_error == 0.0);
    CHECK(e.paths == 200);
    CHECK(e.mean_exit_time > 0.0);
    CHECK_FALSE(e.flagged());
  }

  SUBCASE("harmonic data") {
    for (auto rule : {ExitRule::interpolate, ExitRule::bridge}) {
      const auto e = estimate_density(zero_drift(), 0.5, ball, BoundaryFunction::coordinate(0), z0, 4000,
                                      1e-3, 2, {.exit_rule = rule, .scheme = PathScheme::euler_maruyama});
      CHECK(std::abs(e.value - 0.5) < 4.0 * e.std_error);
      // exit time of Brownian motion with generator eps Laplacian: (r^2 - |z|^2) / (2 d eps)
      CHECK(e.mean_exit_time == doctest::Approx(0.75 / 2.0).epsilon(0.08));
    }
  }

  SUBCASE("errors") {
    const auto f = BoundaryFunction::coordinate(0);
    CHECK_THROWS_AS(estimate_density(zero_drift(), 0.5, ball, f, std::vector<double>{1.0, 0.0}, 10, 1e-3, 1),
                    InvalidArgument);
    CHECK_THROWS_AS(estimate_density(zero_drift(), 0.0, ball, f, z0, 10, 1e-3, 1), InvalidArgument);
    CHECK_THROWS_AS(estimate_density(zero_drift(), 0.5, ball, f, z0, 0, 1e-3, 1), InvalidArgument);
    CHECK_THROWS_AS(estimate_density(zero_drift(), 0.5, ball, f, z0, 10, -1.0, 1), InvalidArgument);
  }

  SUBCASE("step cap is reported, not hidden") {
    const auto e = estimate_density(zero_drift(), 1e-4, ball, BoundaryFunction::coordinate(0), z0, 50, 1e-3, 1,
                                    {.max_steps = 100});
    CHECK(e.max_steps_hit == 50);
    CHECK(e.paths == 0);
    CHECK(e.flagged());
  }

  SUBCASE("deterministic and independent of the worker count") {
    const auto red = two_mode_reduction();
    const auto box = DomainSpec::box({1.0, 1.0});
    const std::vector<double> z{0.3, -0.4};
    const auto a = estimate_density(red.field(), 0.4, box, red.enstrophy_boundary(), z, 300, 1e-3, 9, {.workers = 1});
    const auto b = estimate_density(red.field(), 0.4, box, red.enstrophy_boundary(), z, 300, 1e-3, 9, {.workers = 3});
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
    CHECK(a.mean_exit_time == b.mean_exit_time);
    const auto c = estimate_density(red.field(), 0.4, box, red.enstrophy_boundary(), z, 300, 1e-3, 10);
    CHECK(c.value != a.value);
  }
}

TEST_CASE("fd_oracle") {
  const auto box = DomainSpec::box({2.0, 2.0});

  SUBCASE("constants and linear data are reproduced") {
    const auto c = fd_oracle(two_mode_reduction().field(), 0.1, box, BoundaryFunction::constant(0.7), 41);
    for (double v : c.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
    const auto lin = fd_oracle(zero_drift(), 0.3, box, BoundaryFunction::coordinate(0), 201);
    for (int i = 0; i < lin.n; i += 10)
      for (int j = 0; j < lin.n; j += 10) CHECK(std::abs(lin.at_node(i, j) - lin.x(i)) < 1e-3);
    CHECK(lin.at(std::vector<double>{0.37, -1.1}) == doctest::Approx(0.37).epsilon(1e-9));
  }

  SUBCASE("unsupported domains") {
    const auto f = BoundaryFunction::constant(1.0);
    CHECK_THROWS_AS(fd_oracle(zero_drift(), 0.1, DomainSpec::ball(1.0, 2), f, 21), Unsupported);
    CHECK_THROWS_AS(fd_oracle(zero_drift(), 0.1, DomainSpec::box({1.0, 1.0, 1.0}), f, 21), Unsupported);
    CHECK_THROWS_AS(fd_oracle(zero_drift(), 0.0, box, f, 21), InvalidArgument);
  }

  SUBCASE("second-order self-convergence in the max norm") {
    const auto red = two_mode_reduction();
    const auto f = red.enstrophy_boundary();
    const auto g51 = fd_oracle(red.field(), 0.1, box, f, 51);
    const auto g101 = fd_oracle(red.field(), 0.1, box, f, 101);
    const auto g201 = fd_oracle(red.field(), 0.1, box, f, 201);
    double coarse = 0.0, fine = 0.0;
    for (int i = 0; i < 51; ++i)
      for (int j = 0; j < 51; ++j) {
        coarse = std::max(coarse, std::abs(g51.at_node(i, j) - g101.at_node(2 * i, 2 * j)));
        fine = std::max(fine, std::abs(g101.at_node(2 * i, 2 * j) - g201.at_node(4 * i, 4 * j)));
      }
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.2));
  }

  SUBCASE("upwind and hybrid converge to the central solution") {
    const auto red = two_mode_reduction();
    const auto f = red.enstrophy_boundary();
    const std::vector<double> z{0.3, -0.4};
    const double ref = fd_oracle(red.field(), 0.1, box, f, 201).at(z);
    CHECK(std::abs(fd_oracle(red.field(), 0.1, box, f, 201, AdvectionScheme::hybrid).at(z) - ref) < 1e-4);
    CHECK(std::abs(fd_oracle(red.field(), 0.1, box, f, 201, AdvectionScheme::upwind).at(z) - ref) < 2e-3);
  }
}

TEST_CASE("Monte Carlo agrees with the FD oracle on random linear problems") {
  std::mt19937_64 gen(83);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto box = DomainSpec::box({1.0, 1.0});
  for (int trial = 0; trial < 20; ++trial) {
    const auto drift = linear_drift(u(gen), u(gen), u(gen), u(gen), 0.5 * u(gen), 0.5 * u(gen));
    const double a = u(gen), b = u(gen);
    const auto f = BoundaryFunction::custom([a, b](std::span<const double> z) { return std::exp(a * z[0] + b * z[1]); });
    const std::vector<double> z0{0.6 * u(gen), 0.6 * u(gen)};
    const double eps = 0.5;
    const auto fine = fd_oracle(drift, eps, box, f, 101);
    const auto coarse = fd_oracle(drift, eps, box, f, 51);
    const double grid_err = std::abs(fine.at(z0) - coarse.at(z0)) / 3.0;
    const auto mc = estimate_density(drift, eps, box, f, z0, 3000, 5e-4, 100 + trial);
    CHECK(std::abs(mc.value - fine.at(z0)) <= 4.0 * mc.std_error + grid_err + 1e-4);
  }
}

TEST_CASE("epsilon_sweep") {
  const auto box = DomainSpec::box({1.0, 1.0});
  const std::vector<std::vector<double>> pts{{0.1, 0.2}, {-0.3, 0.0}};

  const auto flat = epsilon_sweep(two_mode_reduction().field(), box, BoundaryFunction::constant(1.0), pts,
                                  {0.4, 0.2, 0.1}, 100, 1e-3, 5);
  REQUIRE(flat.entries.size() == 6);
  CHECK(flat.differences.size() == 4);
  for (const auto& e : flat.entries) CHECK(e.estimate.value == 1.0);
  for (const auto& d : flat.differences) CHECK(d.difference == 0.0);
  CHECK(flat.entries[0].dt == 1e-3);
  CHECK(flat.entries[4].dt == doctest::Approx(2.5e-4));

  SUBCASE("harmonic data is epsilon-independent") {
    const auto r = epsilon_sweep(zero_drift(), box, BoundaryFunction::coordinate(0), pts, {0.4, 0.2}, 2000, 1e-3, 6);
    for (const auto& d : r.differences) CHECK(d.difference < 4.0 * d.std_error);
  }

  CHECK_THROWS_AS(epsilon_sweep(zero_drift(), box, BoundaryFunction::constant(1.0), pts, {0.1, 0.2}, 10, 1e-3, 1),
                  InvalidArgument);
  CHECK_THROWS_AS(epsilon_sweep(zero_drift(), box, BoundaryFunction::constant(1.0), pts, {0.1, 0.0}, 10, 1e-3, 1),
                  InvalidArgument);
}
