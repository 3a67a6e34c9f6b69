#include <gtest/gtest.h>

#include <cmath>

#include "pilm/experiments.hpp"

using namespace pilm;
using namespace pilm::experiments;

TEST(oscillator_exact, satisfies_equation_and_initial_state) {
  for (double c : {0.0, 1.0, 2.0, 3.0}) {
    const OscillatorParams p{1.0, c, 1.0};
    const double h = 1e-4;
    EXPECT_NEAR(oscillator_exact(p, 0.5, 0.5, 0.0), 0.5, 1e-15);
    EXPECT_NEAR((oscillator_exact(p, 0.5, 0.5, h) - oscillator_exact(p, 0.5, 0.5, -h)) / (2 * h), 0.5, 1e-7);
    for (double t : {0.7, 3.0, 8.5}) {
      const double u = oscillator_exact(p, 0.5, 0.5, t);
      const double up = oscillator_exact(p, 0.5, 0.5, t + h), um = oscillator_exact(p, 0.5, 0.5, t - h);
      const double residual = (up - 2 * u + um) / (h * h) + c * (up - um) / (2 * h) + u;
      EXPECT_NEAR(residual, 0.0, 1e-5) << "c=" << c << " t=" << t;
    }
  }
  EXPECT_NEAR(oscillator_exact({1.0, 2.0, 1.0}, 1.0, 0.0, 2.0), 3.0 * std::exp(-2.0), 1e-15);
  EXPECT_THROW(oscillator_exact({0.0, 1.0, 1.0}, 1.0, 0.0, 1.0), ConfigError);
}

TEST(oscillator_forward, accurate_at_fine_spacing) {
  for (double c : {0.0, 1.0, 2.0, 3.0})
    for (const auto& ic : std::vector<std::array<double, 2>>{{1, 0}, {0.5, 0.5}, {0, 1}}) {
      const auto r = oscillator_forward({1.0, c, 1.0}, ic[0], ic[1], 10.0, 103);
      EXPECT_LT(r.max_error, 1e-3);
      EXPECT_EQ(r.t.size(), 1000);
    }
}

TEST(oscillator_forward, coarse_basis_is_visibly_worse) {
  const auto coarse = oscillator_forward({1.0, 0.0, 1.0}, 1.0, 0.0, 10.0, 13);
  const auto fine = oscillator_forward({1.0, 0.0, 1.0}, 1.0, 0.0, 10.0, 103);
  EXPECT_GT(coarse.max_error, 100 * fine.max_error);
}

TEST(loglog_slope, exact_power_law) {
  std::vector<double> x{8, 16, 32, 64}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -4.0));
  EXPECT_NEAR(loglog_slope(x, y), -4.0, 1e-12);
  EXPECT_THROW(loglog_slope({1.0}, {1.0}), ConfigError);
}

TEST(oscillator_scaling, point_fields) {
  const auto row = oscillator_scaling_point(100.0, 64, 2000);
  EXPECT_EQ(row.m, 64);
  EXPECT_GT(row.loss, 0.0);
  EXPECT_GT(row.min_eigenvalue, 0.0);
}

TEST(diffusion_dataset, layout_and_noise) {
  DiffusionConfig cfg;
  const auto clean = make_diffusion_dataset(cfg);
  ASSERT_EQ(clean.points.size(), 100u);
  for (std::size_t i = 0; i < clean.points.size(); ++i) {
    EXPECT_EQ(clean.points[i].value, clean.truth[i]);
    EXPECT_GT(clean.points[i].coords[0], 0.0);
  }
  cfg.noise = 0.01;
  cfg.seed = 5;
  const auto noisy = make_diffusion_dataset(cfg);
  EXPECT_NE(noisy.points[0].value, noisy.truth[0]);
  EXPECT_EQ(noisy.truth, clean.truth);
  const auto layout = diffusion_layout(clean, {});
  EXPECT_EQ(layout.size(), 21 * 43);
}

TEST(elasticity_verify, quadratic_field_is_reproduced) {
  const auto r = elasticity_verify(ElasticityCase::quadratic, 0.5, 23);
  EXPECT_EQ(r.boundary_points, 80);
  EXPECT_LT(r.max_residual, 1e-10);
}

TEST(elasticity_verify, quartic_field_is_close) {
  const auto r = elasticity_verify(ElasticityCase::quartic, 0.0, 43);
  EXPECT_LT(r.max_residual, 3e-5);
}

TEST(elasticity_exact, fields_are_in_equilibrium) {
  // A u_xx + B v_xy + u_yy = 0 by finite differences
  const double h = 1e-3;
  for (auto [c, nu] : std::vector<std::pair<ElasticityCase, double>>{{ElasticityCase::quadratic, 0.5},
                                                                      {ElasticityCase::quartic, 0.0}}) {
    const double a = 2 / (1 - nu), b = (1 + nu) / (1 - nu);
    const double x = 0.3, y = -0.2;
    auto f = [&](double dx, double dy, int k) { return elasticity_exact(c, x + dx, y + dy)[k]; };
    const double uxx = (f(h, 0, 0) - 2 * f(0, 0, 0) + f(-h, 0, 0)) / (h * h);
    const double uyy = (f(0, h, 0) - 2 * f(0, 0, 0) + f(0, -h, 0)) / (h * h);
    const double vxy = (f(h, h, 1) - f(h, -h, 1) - f(-h, h, 1) + f(-h, -h, 1)) / (4 * h * h);
    EXPECT_NEAR(a * uxx + b * vxy + uyy, 0.0, 1e-5);
  }
}
