#ifndef PILM_EXPERIMENTS_HPP
#define PILM_EXPERIMENTS_HPP

// Reference problems: damped oscillator (forward, scaling, coefficient
// inversion), 1-D diffusion with unknown initial/boundary data, and the
// plane-elasticity verification fields. Shared by the CLI and the
// acceptance suite.

#include <cstdint>
#include <string>
#include <vector>

#include "pilm/inverse.hpp"
#include "pilm/solver.hpp"

namespace pilm::experiments {

// ---------------------------------------------------------------------------
// Damped oscillator m u'' + c u' + k u = 0

struct OscillatorParams {
  double mass = 1.0;
  double damping = 0.0;
  double stiffness = 1.0;
};

/// Closed-form solution with u(0) = u0, u'(0) = v0 (m > 0).
double oscillator_exact(const OscillatorParams& p, double u0, double v0, double t);

struct ForwardResult {
  BSplineBasis1D<double> basis;
  PilmFit<double> fit;
  Vector<double> t;
  Vector<double> u;
  Vector<double> exact;
  double max_error = 0.0;
  double rms_error = 0.0;
};

/// Unit-weight IC misfit plus ODE penalty, evaluated on `samples` points.
ForwardResult oscillator_forward(const OscillatorParams& p, double u0, double v0, double length, Index m,
                                 Index samples = 1000);

struct ScalingRow {
  Index m = 0;
  double loss = 0.0;
  double rms_error = 0.0;
  double min_eigenvalue = 0.0;
};

/// Harmonic oscillator with IC (1, 0) on [0, length]. The minimum
/// eigenvalue of G is computed in extended precision.
ScalingRow oscillator_scaling_point(double length, Index m, Index samples = 20000);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct InverseData {
  std::vector<double> t;
  std::vector<double> u;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Samples of the damped solution (m=1, k=1, c=true_damping, IC (0.5, 0.5))
/// at t = 0.5, 1.5, ..., 9.5 with optional Gaussian noise.
InverseData oscillator_inverse_data(double sigma, std::uint64_t seed, double true_damping = 0.5);

struct InverseResult {
  std::vector<ProfilePoint<double>> curve;
  ProfileMinimum<double> minimum;
};

/// Profile search over the damping with mass and stiffness fixed.
InverseResult oscillator_inverse(const InverseData& data, const std::vector<double>& grid, double length = 10.0,
                                 Index m = 103, double mass = 1.0, double stiffness = 1.0);

// ---------------------------------------------------------------------------
// Diffusion u_t - k u_xx = 0 on t in [0, T], x in [0, X]

enum class DiffusionProfile { unimodal, bimodal };

struct DiffusionConfig {
  DiffusionProfile profile = DiffusionProfile::unimodal;
  double diffusivity = 0.1;
  double duration = 2.0;
  double width = 2.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

struct DiffusionDataset {
  DiffusionConfig config;
  std::vector<PointObservation<double>> points;  // coords = (t, x)
  std::vector<double> truth;                     // noise-free values at the points
};

/// Initial temperature profile.
double diffusion_initial(DiffusionProfile profile, double x);

/// Explicit finite-difference solution on an extended domain, sampled at
/// (t, x) pairs. Independent of the spline model.
std::vector<double> diffusion_finite_difference(DiffusionProfile profile, double diffusivity,
                                                const std::vector<std::array<double, 2>>& samples,
                                                double dx = 0.0025);

/// Sensors on a uniform space-time lattice over t > 0; the bimodal case is
/// sampled twice as densely in both directions.
DiffusionDataset make_diffusion_dataset(const DiffusionConfig& config);

struct DiffusionModel {
  Index m_time = 21;
  Index m_space = 43;
};

InverseResult diffusion_inverse(const DiffusionDataset& data, const std::vector<double>& grid,
                                const DiffusionModel& model = {});

FieldLayout<double> diffusion_layout(const DiffusionDataset& data, const DiffusionModel& model);

// ---------------------------------------------------------------------------
// Plane elasticity verification

enum class ElasticityCase { quadratic, quartic };

struct ElasticityResult {
  FieldLayout<double> layout;
  PilmFit<double> fit;
  double max_residual = 0.0;  // over an evaluation lattice, both components
  Index boundary_points = 0;
};

/// Exact displacement (u, v) for the verification case.
std::array<double, 2> elasticity_exact(ElasticityCase c, double x, double y);

/// Boundary values at 80 points of the square [lower, lower + side]^2,
/// unit-weight equilibrium penalty, residual against the exact field on a
/// lattice x lattice grid.
ElasticityResult elasticity_verify(ElasticityCase c, double poisson, Index m_axis, Index lattice = 101,
                                   double lower = -0.5, double side = 1.0);

}  // namespace pilm::experiments

#endif  // PILM_EXPERIMENTS_HPP
