#include <gtest/gtest.h>

#include <cmath>

#include "pilm/experiments.hpp"
#include "pilm/integral_matrices.hpp"
#include "pilm/inverse.hpp"

using namespace pilm;

TEST(linear_grid, inclusive_and_validated) {
  const auto g = linear_grid(0.0, 1.5, 0.01);
  EXPECT_EQ(g.size(), 151u);
  EXPECT_NEAR(g.back(), 1.5, 1e-12);
  EXPECT_EQ(linear_grid(2.0, 2.0, 1.0).size(), 1u);
  EXPECT_THROW(linear_grid(0.0, 1.0, 0.0), ConfigError);
  EXPECT_THROW(linear_grid(1.0, 0.0, 0.1), ConfigError);
}

TEST(profile_curve, rejects_bad_grids) {
  ProfileProblem<double> p;
  p.instance = [](double) -> ProfileInstance<double> { throw std::logic_error("unused"); };
  EXPECT_THROW(profile_curve(p), ConfigError);
  p.grid = {0.1, 0.1};
  EXPECT_THROW(profile_curve(p), ConfigError);
}

TEST(profile_curve, flags_unsolvable_points) {
  const auto b = build_basis(10.0, 13);
  const auto r = integral_matrices(b);
  const auto obs = ic_system(b, 1.0, 0.0);
  ProfileProblem<double> p;
  p.grid = {-1.0, 0.0, 1.0};
  // weight theta: zero and negative weights leave the system underdetermined or invalid
  p.instance = [&](double w) {
    if (w < 0) throw UnderdeterminedError("synthetic failure", 1);
    return ProfileInstance<double>{obs, {{w, ode_penalty(r, 1.0, 0.0, 1.0)}}};
  };
  const auto curve = profile_curve(p);
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_FALSE(curve[0].solvable);
  EXPECT_FALSE(curve[1].solvable);
  EXPECT_TRUE(curve[2].solvable);
  const auto best = argmin(curve);
  EXPECT_EQ(best.index, 2u);
  EXPECT_TRUE(best.boundary);
}

TEST(argmin, ties_prefer_smaller_theta_and_empty_fails) {
  std::vector<ProfilePoint<double>> curve(3);
  for (int i = 0; i < 3; ++i) {
    curve[i].theta = i;
    curve[i].solvable = true;
    curve[i].loss = i == 0 ? 2.0 : 1.0;
    curve[i].fit = PilmFit<double>{};
  }
  const auto best = argmin(curve);
  EXPECT_EQ(best.index, 1u);
  EXPECT_FALSE(best.boundary);
  for (auto& p : curve) p.solvable = false;
  EXPECT_THROW(argmin(curve), NumericalError);
}

TEST(oscillator_inverse, recovers_damping_from_clean_data) {
  const auto data = experiments::oscillator_inverse_data(0.0, 1);
  ASSERT_EQ(data.t.size(), 10u);
  EXPECT_DOUBLE_EQ(data.t.front(), 0.5);
  EXPECT_DOUBLE_EQ(data.t.back(), 9.5);
  const auto r = experiments::oscillator_inverse(data, linear_grid(0.0, 1.5, 0.01));
  EXPECT_NEAR(r.minimum.theta, 0.5, 1e-9);
  EXPECT_FALSE(r.minimum.boundary);
  // the curve is unimodal around the minimum
  for (std::size_t i = 1; i < r.minimum.index; ++i) EXPECT_GT(r.curve[i - 1].loss, r.curve[i].loss);
  for (std::size_t i = r.minimum.index + 1; i < r.curve.size(); ++i) EXPECT_GT(r.curve[i].loss, r.curve[i - 1].loss);
}

TEST(oscillator_inverse, data_is_reproducible) {
  const auto a = experiments::oscillator_inverse_data(0.1, 42);
  const auto b = experiments::oscillator_inverse_data(0.1, 42);
  const auto c = experiments::oscillator_inverse_data(0.1, 43);
  EXPECT_EQ(a.u, b.u);
  EXPECT_NE(a.u, c.u);
}

TEST(diffusion_inverse, recovers_diffusivity) {
  using namespace experiments;
  for (auto profile : {DiffusionProfile::unimodal, DiffusionProfile::bimodal}) {
    DiffusionConfig cfg;
    cfg.profile = profile;
    const auto data = make_diffusion_dataset(cfg);
    EXPECT_EQ(data.points.size(), profile == DiffusionProfile::unimodal ? 100u : 400u);
    const auto r = diffusion_inverse(data, linear_grid(0.01, 0.3, 0.005));
    EXPECT_NEAR(r.minimum.theta, 0.1, 0.005 + 1e-12);
  }
}

TEST(diffusion_finite_difference, matches_gaussian_spreading) {
  // a Gaussian of width s spreads to sqrt(s^2 + 2 k t) with preserved mass
  using namespace experiments;
  const double k = 0.1, s = 0.15, t = 0.5;
  const auto u = diffusion_finite_difference(DiffusionProfile::unimodal, k, {{t, 1.0}, {t, 1.2}, {0.0, 1.0}});
  const double w = std::sqrt(s * s + 2 * k * t);
  auto exact = [&](double x) { return s / w * std::exp(-0.5 * std::pow((x - 1.0) / w, 2)); };
  EXPECT_NEAR(u[0], exact(1.0), 1e-5);
  EXPECT_NEAR(u[1], exact(1.2), 1e-5);
  EXPECT_DOUBLE_EQ(u[2], 1.0);
}
