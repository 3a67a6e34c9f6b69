#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pilm/experiments.hpp"
#include "pilm/integral_matrices.hpp"
#include "pilm/solver.hpp"

using namespace pilm;

namespace {

void expect_normal_residual(const ObservationSystem<double>& obs, const std::vector<WeightedPenalty<double>>& pens,
                            const PilmFit<double>& fit) {
  Matrix<double> n = obs.design().transpose() * obs.design();
  for (const auto& p : pens) n += p.weight * p.penalty.matrix();
  const Vector<double> rhs = obs.design().transpose() * obs.data();
  EXPECT_LE((n * fit.coefficients - rhs).norm(), 1e-8 * rhs.norm());
  EXPECT_LE(fit.normal_residual, 1e-8);
}

double loss_at(const ObservationSystem<double>& obs, const std::vector<WeightedPenalty<double>>& pens,
               const Vector<double>& a) {
  double l = obs.misfit(a);
  for (const auto& p : pens) l += p.weight * p.penalty.quadratic(a);
  return l;
}

}  // namespace

TEST(observation_system, initial_condition_rows) {
  const auto b = build_basis(10.0, 103);
  const auto obs = ic_system(b, 1.0, 0.5);
  EXPECT_EQ(obs.observations(), 2);
  EXPECT_EQ(obs.parameters(), 103);
  EXPECT_EQ(Vector<double>(obs.design().row(0).transpose()), eval_basis_vector(b, 0.0, 0));
  EXPECT_EQ(Vector<double>(obs.design().row(1).transpose()), eval_basis_vector(b, 0.0, 1));
  EXPECT_EQ(obs.rows()[1].kind, RowKind::derivative);
}

TEST(observation_system, point_rows) {
  const auto b = build_basis(10.0, 103);
  std::vector<PointObservation<double>> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({{0.5 + i, 0.0}, 0, 1.0, {0, 0}});
  const auto obs = point_system(layout_1d(b), pts);
  EXPECT_EQ(obs.design().rows(), 10);
  EXPECT_EQ(obs.design().cols(), 103);
  // a single point on a knot reproduces the evaluation vector
  const auto one = point_system(layout_1d(b), std::vector<PointObservation<double>>{{{3.0, 0.0}, 0, 0.0, {0, 0}}});
  EXPECT_EQ(Vector<double>(one.design().row(0).transpose()), eval_basis_vector(b, 3.0, 0));
}

TEST(observation_system, two_component_layout) {
  const auto b = build_basis(400.0, 23, -200.0);
  const auto layout = layout_2d(b, b, 2);
  EXPECT_EQ(layout.size_per_component(), 529);
  EXPECT_EQ(layout.size(), 1058);
  std::vector<PointObservation<double>> pts{{{10.0, -20.0}, 0, 1.0, {0, 0}}, {{10.0, -20.0}, 1, 2.0, {0, 0}}};
  const auto obs = point_system(layout, pts);
  EXPECT_EQ(obs.design().row(0).tail(529).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(obs.design().row(1).head(529).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(obs.design().row(0).sum(), 1.0, 1e-14);
  // entry k * M2 + l is phi_k(x) phi_l(y)
  const auto px = eval_basis_vector(b, 10.0, 0), py = eval_basis_vector(b, -20.0, 0);
  for (Index k = 0; k < 23; ++k)
    for (Index l = 0; l < 23; ++l) EXPECT_DOUBLE_EQ(obs.design()(0, k * 23 + l), px[k] * py[l]);
}

TEST(observation_system, rejects_out_of_domain_with_index) {
  const auto b = build_basis(10.0, 13);
  std::vector<PointObservation<double>> pts{{{1.0, 0.0}, 0, 0.0, {0, 0}}, {{11.0, 0.0}, 0, 0.0, {0, 0}}};
  try {
    point_system(layout_1d(b), pts);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("observation 1"), std::string::npos);
  }
}

TEST(observation_system, stack_concatenates) {
  const auto b = build_basis(10.0, 13);
  const auto ic = ic_system(b, 1.0, 0.0);
  const auto pts = point_system(layout_1d(b), std::vector<PointObservation<double>>{{{2.0, 0.0}, 0, 3.0, {0, 0}}});
  const auto s = stack<double>({ic, pts});
  EXPECT_EQ(s.observations(), 3);
  EXPECT_EQ(s.data()[2], 3.0);
  const auto other = ic_system(build_basis(10.0, 14), 1.0, 0.0);
  EXPECT_THROW(stack<double>({ic, other}), ConfigError);
}

TEST(solve, interpolation_limit) {
  const auto b = build_basis(3.0, 6);
  std::vector<PointObservation<double>> pts;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 6; ++i) pts.push_back({{0.25 + 0.5 * i, 0.0}, 0, u(rng), {0, 0}});
  const auto obs = point_system(layout_1d(b), pts);
  const auto fit = solve<double>(obs, {});
  EXPECT_LT((obs.design() * fit.coefficients - obs.data()).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT(fit.misfit, 1e-25);
}

TEST(solve, critically_damped_oscillator) {
  const auto b = build_basis(10.0, 103);
  const auto g = ode_penalty(integral_matrices(b), 1.0, 2.0, 1.0);
  const std::vector<WeightedPenalty<double>> pens{{1.0, g}};
  const auto obs = ic_system(b, 1.0, 0.0);
  const auto fit = solve(obs, pens);
  const Vector<double> t = Vector<double>::LinSpaced(1000, 0.0, 10.0);
  const Vector<double> u = evaluate_1d(fit.coefficients, b, t);
  for (Index i = 0; i < t.size(); ++i) EXPECT_NEAR(u[i], (1.0 + t[i]) * std::exp(-t[i]), 1e-3);
  expect_normal_residual(obs, pens, fit);
  EXPECT_NEAR(fit.total_loss, fit.misfit + fit.penalty_values[0], 1e-15);
}

TEST(solve, local_optimality) {
  const auto b = build_basis(10.0, 43);
  const auto g = ode_penalty(integral_matrices(b), 1.0, 0.5, 1.0);
  const std::vector<WeightedPenalty<double>> pens{{1.0, g}};
  const auto data = experiments::oscillator_inverse_data(0.05, 3);
  std::vector<PointObservation<double>> pts;
  for (std::size_t i = 0; i < data.t.size(); ++i) pts.push_back({{data.t[i], 0.0}, 0, data.u[i], {0, 0}});
  const auto obs = point_system(layout_1d(b), pts);
  const auto fit = solve(obs, pens);
  expect_normal_residual(obs, pens, fit);
  std::mt19937_64 rng(5);
  const double base = loss_at(obs, pens, fit.coefficients);
  EXPECT_NEAR(base, fit.total_loss, 1e-12 * base);
  for (int n = 0; n < 20; ++n) {
    const Vector<double> r = oracle::random_vector(b.size(), rng);
    EXPECT_GE(loss_at(obs, pens, fit.coefficients + 1e-4 * r), base);
  }
}

TEST(solve, underdetermined_names_deficiency) {
  const auto b = build_basis(10.0, 13);
  const auto obs = ic_system(b, 1.0, 0.0);
  try {
    solve<double>(obs, {});
    FAIL();
  } catch (const UnderdeterminedError& e) {
    EXPECT_EQ(e.deficiency(), 11);
    EXPECT_NE(std::string(e.what()).find("underdetermined"), std::string::npos);
  }
  // an ODE penalty with u'' only leaves affine functions free; the ICs pin both
  const auto g = ode_penalty(integral_matrices(b), 1.0, 0.0, 0.0);
  EXPECT_NO_THROW(solve<double>(obs, {{1.0, g}}));
  const auto value_only = point_system(layout_1d(b), std::vector<PointObservation<double>>{{{0.0, 0.0}, 0, 1.0, {0, 0}}});
  EXPECT_THROW(solve<double>(value_only, {{1.0, g}}), UnderdeterminedError);
}

TEST(solve, rejects_mismatched_penalty) {
  const auto b = build_basis(10.0, 13);
  const auto g = ode_penalty(integral_matrices(build_basis(10.0, 14)), 1.0, 0.0, 1.0);
  EXPECT_THROW(solve<double>(ic_system(b, 1.0, 0.0), {{1.0, g}}), ConfigError);
  const auto ok = ode_penalty(integral_matrices(b), 1.0, 0.0, 1.0);
  EXPECT_THROW(solve<double>(ic_system(b, 1.0, 0.0), {{-1.0, ok}}), ConfigError);
}

TEST(solve, block_diagonal_penalty_decouples_components) {
  const auto b = build_basis(4.0, 8, -2.0);
  const auto r = integral_matrices(b);
  const auto layout = layout_2d(b, b, 2);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), val(-1.0, 1.0);
  std::vector<PointObservation<double>> joint, pu, pv;
  for (int i = 0; i < 30; ++i) {
    const std::array<double, 2> p{pos(rng), pos(rng)};
    const double u = val(rng), v = val(rng);
    joint.push_back({p, 0, u, {0, 0}});
    joint.push_back({p, 1, v, {0, 0}});
    pu.push_back({p, 0, u, {0, 0}});
    pv.push_back({p, 0, v, {0, 0}});
  }
  for (const auto& g : {smoothness_penalty(r, r), elasticity_penalty(r, r, -1.0)}) {
    const auto fit = solve(point_system(layout, joint), {{0.1, g}});
    const Index m = layout.size_per_component();
    const PenaltyMatrix<double> gu(g.matrix().topLeftCorner(m, m), "u");
    const PenaltyMatrix<double> gv(g.matrix().bottomRightCorner(m, m), "v");
    const auto single = layout_2d(b, b, 1);
    const auto fu = solve(point_system(single, pu), {{0.1, gu}});
    const auto fv = solve(point_system(single, pv), {{0.1, gv}});
    EXPECT_LT((fit.coefficients.head(m) - fu.coefficients).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((fit.coefficients.tail(m) - fv.coefficients).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(solve, log_determinant_matches_eigenvalues) {
  const auto b = build_basis(10.0, 23);
  const auto g = ode_penalty(integral_matrices(b), 1.0, 0.3, 1.0);
  const auto obs = ic_system(b, 0.5, 0.5);
  const auto fit = solve(obs, {{2.0, g}});
  const Matrix<double> n = obs.gram().hth + 2.0 * g.matrix();
  const double expected = symmetric_eigenvalues(n).array().log().sum();
  EXPECT_NEAR(fit.log_det_normal, expected, 1e-6 * std::abs(expected));
}

TEST(evaluate, zero_and_affine) {
  const auto b = build_basis(5.0, 9);
  const auto layout = layout_2d(b, b, 1);
  const std::vector<std::array<double, 2>> pts{{0.0, 0.0}, {1.3, 4.2}, {5.0, 5.0}};
  const std::span<const std::array<double, 2>> view(pts);
  EXPECT_EQ(evaluate(Vector<double>::Zero(layout.size()).eval(), layout, view).cwiseAbs().maxCoeff(), 0.0);
  // u = 2x - y + 1 through the interpolation oracle
  const Vector<double> a = oracle::interpolate_2d<double>(
      b, b, [](double x, double y) { return 2 * x - y + 1; }, [](double, double) { return 2.0; },
      [](double, double) { return -1.0; }, [](double, double) { return 0.0; });
  const auto ux = evaluate(a, layout, view, {1, 0});
  const auto uy = evaluate(a, layout, view, {0, 1});
  for (Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(ux[i], 2.0, 1e-12);
    EXPECT_NEAR(uy[i], -1.0, 1e-12);
  }
  const std::vector<std::array<double, 2>> outside{{-0.1, 1.0}};
  EXPECT_THROW(evaluate(a, layout, std::span<const std::array<double, 2>>(outside)), DomainError);
  EXPECT_THROW(evaluate(a, layout, view, {3, 0}), ConfigError);
}

TEST(evaluate, harmonic_oscillator_refines_with_m) {
  const auto coarse = experiments::oscillator_forward({1.0, 0.0, 1.0}, 1.0, 0.0, 100.0, 256, 5000);
  const auto fine = experiments::oscillator_forward({1.0, 0.0, 1.0}, 1.0, 0.0, 100.0, 2048, 5000);
  EXPECT_LT(fine.rms_error, coarse.rms_error);
  EXPECT_TRUE(fine.fit.condition_estimate > 0.0);
}
