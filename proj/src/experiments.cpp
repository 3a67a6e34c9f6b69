#include "pilm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pilm/integral_matrices.hpp"
#include "pilm/quadratic_forms.hpp"

namespace pilm::experiments {

double oscillator_exact(const OscillatorParams& p, double u0, double v0, double t) {
  if (!(p.mass > 0.0)) throw ConfigError("oscillator mass must be positive");
  const double disc = p.damping * p.damping - 4.0 * p.mass * p.stiffness;
  const double gamma = p.damping / (2.0 * p.mass);
  if (disc < 0.0) {
    const double omega = std::sqrt(-disc) / (2.0 * p.mass);
    return std::exp(-gamma * t) * (u0 * std::cos(omega * t) + (v0 + gamma * u0) / omega * std::sin(omega * t));
  }
  if (disc == 0.0) return std::exp(-gamma * t) * (u0 + (v0 + gamma * u0) * t);
  const double root = std::sqrt(disc) / (2.0 * p.mass);
  const double r1 = -gamma + root, r2 = -gamma - root;
  const double a = (v0 - r2 * u0) / (r1 - r2);
  return a * std::exp(r1 * t) + (u0 - a) * std::exp(r2 * t);
}

ForwardResult oscillator_forward(const OscillatorParams& p, double u0, double v0, double length, Index m,
                                 Index samples) {
  const auto basis = build_basis(length, m);
  const auto r = integral_matrices(basis);
  const auto g = ode_penalty(r, p.mass, p.damping, p.stiffness);
  auto fit = solve(ic_system(basis, u0, v0), {{1.0, g}});

  const Vector<double> t = Vector<double>::LinSpaced(samples, 0.0, length);
  Vector<double> exact(samples);
  for (Index i = 0; i < samples; ++i) exact[i] = oscillator_exact(p, u0, v0, t[i]);
  Vector<double> u = evaluate_1d(fit.coefficients, basis, t);
  const Vector<double> err = u - exact;
  return {basis,
          std::move(fit),
          t,
          std::move(u),
          std::move(exact),
          err.cwiseAbs().maxCoeff(),
          std::sqrt(err.squaredNorm() / static_cast<double>(samples))};
}

ScalingRow oscillator_scaling_point(double length, Index m, Index samples) {
  const OscillatorParams harmonic{1.0, 0.0, 1.0};
  const auto forward = oscillator_forward(harmonic, 1.0, 0.0, length, m, samples);

  const auto basis = build_basis<long double>(static_cast<long double>(length), m);
  const auto g = ode_penalty<long double>(integral_matrices(basis), 1.0L, 0.0L, 1.0L);
  ScalingRow row;
  row.m = m;
  row.loss = forward.fit.total_loss;
  row.rms_error = forward.rms_error;
  row.min_eigenvalue = static_cast<double>(g.eigenvalues().minCoeff());
  return row;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope needs two or more paired samples");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

InverseData oscillator_inverse_data(double sigma, std::uint64_t seed, double true_damping) {
  InverseData data;
  data.sigma = sigma;
  data.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const OscillatorParams p{1.0, true_damping, 1.0};
  for (int i = 0; i < 10; ++i) {
    const double t = 0.5 + i;
    data.t.push_back(t);
    data.u.push_back(oscillator_exact(p, 0.5, 0.5, t) + sigma * noise(rng));
  }
  return data;
}

InverseResult oscillator_inverse(const InverseData& data, const std::vector<double>& grid, double length, Index m,
                                 double mass, double stiffness) {
  const auto basis = build_basis(length, m);
  const auto r = integral_matrices(basis);
  std::vector<PointObservation<double>> pts;
  for (std::size_t i = 0; i < data.t.size(); ++i) pts.push_back({{data.t[i], 0.0}, 0, data.u[i], {0, 0}});
  const auto obs = point_system(layout_1d(basis), pts);

  ProfileProblem<double> problem;
  problem.grid = grid;
  problem.instance = [&](double c) {
    return ProfileInstance<double>{obs, {{1.0, ode_penalty(r, mass, c, stiffness)}}};
  };
  InverseResult out;
  out.curve = profile_curve(problem);
  out.minimum = argmin(out.curve);
  return out;
}

// ---------------------------------------------------------------------------

double diffusion_initial(DiffusionProfile profile, double x) {
  auto bump = [](double x, double center, double width) {
    const double z = (x - center) / width;
    return std::exp(-0.5 * z * z);
  };
  if (profile == DiffusionProfile::unimodal) return bump(x, 1.0, 0.15);
  return bump(x, 0.6, 0.1) + 0.7 * bump(x, 1.35, 0.1);
}

std::vector<double> diffusion_finite_difference(DiffusionProfile profile, double diffusivity,
                                                const std::vector<std::array<double, 2>>& samples, double dx) {
  // FTCS on [-3, 5] with zero Dirichlet ends (far outside the model window)
  const double lo = -3.0, hi = 5.0;
  const auto nx = static_cast<Index>(std::llround((hi - lo) / dx)) + 1;
  const double dt_max = 0.4 * dx * dx / diffusivity;

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return samples[a][0] < samples[b][0]; });

  Vector<double> u(nx), next(nx);
  for (Index i = 0; i < nx; ++i) u[i] = diffusion_initial(profile, lo + i * dx);
  u[0] = u[nx - 1] = 0.0;

  std::vector<double> out(samples.size());
  double now = 0.0;
  auto sample_at = [&](double x) {
    const double pos = (x - lo) / dx;
    const auto i = static_cast<Index>(std::floor(pos));
    const double w = pos - i;
    if (w < 1e-9) return u[i];
    // cubic Lagrange through i-1..i+2
    const double l0 = -w * (w - 1.0) * (w - 2.0) / 6.0;
    const double l1 = (w + 1.0) * (w - 1.0) * (w - 2.0) / 2.0;
    const double l2 = -(w + 1.0) * w * (w - 2.0) / 2.0;
    const double l3 = (w + 1.0) * w * (w - 1.0) / 6.0;
    return l0 * u[i - 1] + l1 * u[i] + l2 * u[i + 1] + l3 * u[i + 2];
  };
  for (const std::size_t s : order) {
    const double target = samples[s][0];
    if (target > now) {
      const auto steps = static_cast<long>(std::ceil((target - now) / dt_max));
      const double dt = (target - now) / static_cast<double>(steps);
      const double lambda = diffusivity * dt / (dx * dx);
      for (long n = 0; n < steps; ++n) {
        next[0] = next[nx - 1] = 0.0;
        for (Index i = 1; i + 1 < nx; ++i) next[i] = u[i] + lambda * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
        u.swap(next);
      }
      now = target;
    }
    out[s] = sample_at(samples[s][1]);
  }
  return out;
}

DiffusionDataset make_diffusion_dataset(const DiffusionConfig& config) {
  DiffusionDataset data;
  data.config = config;
  const bool dense = config.profile == DiffusionProfile::bimodal;
  const int nt = dense ? 20 : 10;
  const int nx = dense ? 20 : 10;
  std::vector<std::array<double, 2>> coords;
  for (int i = 1; i <= nt; ++i)
    for (int j = 0; j < nx; ++j)
      coords.push_back({config.duration * i / nt, config.width * (j + 0.5) / nx});
  data.truth = diffusion_finite_difference(config.profile, config.diffusivity, coords);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const double value = data.truth[i] + (config.noise > 0.0 ? config.noise * noise(rng) : 0.0);
    data.points.push_back({coords[i], 0, value, {0, 0}});
  }
  return data;
}

FieldLayout<double> diffusion_layout(const DiffusionDataset& data, const DiffusionModel& model) {
  return layout_2d(build_basis(data.config.duration, model.m_time), build_basis(data.config.width, model.m_space));
}

InverseResult diffusion_inverse(const DiffusionDataset& data, const std::vector<double>& grid,
                                const DiffusionModel& model) {
  const auto layout = diffusion_layout(data, model);
  const auto rt = integral_matrices(layout.axes[0]);
  const auto rx = integral_matrices(layout.axes[1]);
  const auto obs = point_system(layout, data.points);

  ProfileProblem<double> problem;
  problem.grid = grid;
  problem.instance = [&](double k) {
    return ProfileInstance<double>{obs, {{1.0, pde_penalty_2d(rt, rx, diffusion_operator(k))}}};
  };
  InverseResult out;
  out.curve = profile_curve(problem);
  out.minimum = argmin(out.curve);
  return out;
}

// ---------------------------------------------------------------------------

std::array<double, 2> elasticity_exact(ElasticityCase c, double x, double y) {
  if (c == ElasticityCase::quadratic) return {x * x - y * y, -2.0 * x * y};
  return {x * x * x * x - 6.0 * x * x * y * y + y * y * y * y, -4.0 * x * y * (x * x - y * y)};
}

ElasticityResult elasticity_verify(ElasticityCase c, double poisson, Index m_axis, Index lattice, double lower,
                                   double side) {
  ElasticityResult out;
  const auto basis = build_basis(side, m_axis, lower);
  const double upper = lower + side;
  out.layout = layout_2d(basis, basis, 2);
  const auto r = integral_matrices(basis);
  const auto g = elasticity_penalty(r, r, poisson);

  // 20 points per edge, counter-clockwise from the lower-left corner
  std::vector<PointObservation<double>> pts;
  for (int edge = 0; edge < 4; ++edge) {
    for (int k = 0; k < 20; ++k) {
      const double s = side * k / 20.0;
      std::array<double, 2> p{};
      switch (edge) {
        case 0: p = {lower + s, lower}; break;
        case 1: p = {upper, lower + s}; break;
        case 2: p = {upper - s, upper}; break;
        default: p = {lower, upper - s}; break;
      }
      const auto uv = elasticity_exact(c, p[0], p[1]);
      pts.push_back({p, 0, uv[0], {0, 0}});
      pts.push_back({p, 1, uv[1], {0, 0}});
    }
  }
  out.boundary_points = static_cast<Index>(pts.size() / 2);
  out.fit = solve(point_system(out.layout, pts), {{1.0, g}});

  std::vector<std::array<double, 2>> grid;
  for (Index i = 0; i < lattice; ++i)
    for (Index j = 0; j < lattice; ++j)
      grid.push_back({lower + side * i / (lattice - 1.0), lower + side * j / (lattice - 1.0)});
  const std::span<const std::array<double, 2>> view(grid);
  const auto u = evaluate(out.fit, out.layout, view, {0, 0}, 0);
  const auto v = evaluate(out.fit, out.layout, view, {0, 0}, 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto e = elasticity_exact(c, grid[i][0], grid[i][1]);
    const auto k = static_cast<Index>(i);
    out.max_residual = std::max({out.max_residual, std::abs(u[k] - e[0]), std::abs(v[k] - e[1])});
  }
  return out;
}

}  // namespace pilm::experiments
