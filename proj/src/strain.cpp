#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "pilm/integral_matrices.hpp"
#include "pilm/strain.hpp"

namespace pilm::strain {

std::string Regularization::label() const {
  std::ostringstream s;
  switch (kind) {
    case RegularizationKind::math: return "math";
    case RegularizationKind::phys: s << "phys(nu=" << poisson << ")"; break;
    case RegularizationKind::hybrid: s << "hybrid(nu=" << poisson << ")"; break;
  }
  return s.str();
}

Regularization parse_regularization(const std::string& text) {
  if (text == "math") return {RegularizationKind::math, 0.0};
  for (const auto& [prefix, kind] : {std::pair<std::string, RegularizationKind>{"phys:", RegularizationKind::phys},
                                     {"hybrid:", RegularizationKind::hybrid}}) {
    if (text.rfind(prefix, 0) == 0) {
      const std::string number = text.substr(prefix.size());
      std::size_t used = 0;
      double nu = 0.0;
      try {
        nu = std::stod(number, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != number.size()) throw ConfigError("bad Poisson ratio in '" + text + "'");
      elastic_constants(nu);  // range check
      return {kind, nu};
    }
  }
  throw ConfigError("regularization must be math, phys:<nu> or hybrid:<nu>, got '" + text + "'");
}

StrainProblem build_problem(const StationSet& stations, double spacing_km, const Regularization& reg) {
  if (!(spacing_km > 0.0)) throw ConfigError("knot spacing must be positive");
  if (stations.stations.empty()) throw DataError("no stations");
  const double side = stations.region.side_km();
  const double intervals = side / spacing_km;
  const double whole = std::round(intervals);
  if (whole < 1.0 || std::abs(intervals - whole) > 1e-9 * intervals)
    throw ConfigError("knot spacing " + std::to_string(spacing_km) + " km does not divide the " +
                      std::to_string(side) + " km side");
  const auto m = static_cast<Index>(whole) + 3;
  const auto basis = build_basis(side, m, -stations.region.half_width_km);

  std::vector<PointObservation<double>> points;
  points.reserve(2 * stations.size());
  for (const auto& s : stations.stations) {
    points.push_back({{s.x, s.y}, 0, s.ve, {0, 0}});
    points.push_back({{s.x, s.y}, 1, s.vn, {0, 0}});
  }
  auto layout = layout_2d(basis, basis, 2);
  auto obs = point_system(layout, points);

  StrainProblem problem{std::move(layout), std::move(obs), std::nullopt, std::nullopt, reg};
  const auto r = integral_matrices(basis);
  if (reg.kind != RegularizationKind::phys) problem.math = smoothness_penalty(r, r);
  if (reg.kind != RegularizationKind::math) problem.phys = elasticity_penalty(r, r, reg.poisson);
  return problem;
}

const PenaltyMatrix<double>& primary_penalty(const StrainProblem& problem) {
  switch (problem.regularization.kind) {
    case RegularizationKind::math: return *problem.math;
    case RegularizationKind::phys: return *problem.phys;
    default: break;
  }
  throw ConfigError("a hybrid problem has two penalties");
}

RegressionResult fit_regression(const StrainProblem& problem, const std::vector<double>& log10_grid) {
  RegressionResult out;
  out.optimum = optimize_alpha(problem.observations, primary_penalty(problem), log10_grid);
  const auto& best = out.optimum.best;
  out.row.label = problem.regularization.label();
  out.row.log10_alpha2 = std::log10(best.alpha2);
  out.row.log_likelihood = best.log_likelihood;
  out.row.sigma = best.sigma();
  out.row.rmse = best.rmse();
  out.row.hyperparameters = 1;
  out.row.abic = abic(best.log_likelihood, 1);
  out.row.boundary = out.optimum.boundary;
  return out;
}

TableRow hybrid_row(const HybridSurface<double>& surface, const StrainProblem& problem) {
  if (!std::isfinite(surface.max_log_likelihood)) throw NumericalError("hybrid surface has no feasible cell");
  const double am = surface.alpha2_math[surface.argmax.first];
  const double ap = surface.alpha2_phys[surface.argmax.second];
  const auto form = am >= ap ? HybridForm::math : HybridForm::phys;
  const auto r = hybrid_log_likelihood(problem.observations, *problem.math, *problem.phys, am, ap, form);
  TableRow row;
  row.label = problem.regularization.label();
  row.log10_alpha2 = std::log10(am);
  row.log_likelihood = r.log_likelihood;
  row.sigma = r.sigma();
  row.rmse = r.rmse();
  row.hyperparameters = 2;
  row.abic = abic(r.log_likelihood, 2);
  return row;
}

StrainRateGrid strain_rates_at(const Vector<double>& coefficients, const FieldLayout<double>& layout,
                               const std::vector<std::array<double, 2>>& points) {
  if (layout.dimension() != 2 || layout.components != 2)
    throw ConfigError("strain rates need a two-component 2-D layout");
  const std::span<const std::array<double, 2>> view(points);
  auto field = [&](std::array<int, 2> orders, int comp) {
    const Vector<double> v = evaluate(coefficients, layout, view, orders, comp);
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  StrainRateGrid g;
  for (const auto& p : points) {
    g.x.push_back(p[0]);
    g.y.push_back(p[1]);
  }
  g.u = field({0, 0}, 0);
  g.v = field({0, 0}, 1);
  const auto ux = field({1, 0}, 0), uy = field({0, 1}, 0);
  const auto vx = field({1, 0}, 1), vy = field({0, 1}, 1);
  const std::size_t n = points.size();
  g.exx.resize(n);
  g.exy.resize(n);
  g.eyy.resize(n);
  g.max_shear.resize(n);
  g.rotation.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.exx[i] = kNanostrainPerMmYrKm * ux[i];
    g.eyy[i] = kNanostrainPerMmYrKm * vy[i];
    g.exy[i] = kNanostrainPerMmYrKm * 0.5 * (uy[i] + vx[i]);
    g.rotation[i] = kNanostrainPerMmYrKm * 0.5 * (vx[i] - uy[i]);
    g.max_shear[i] = std::hypot(0.5 * (g.exx[i] - g.eyy[i]), g.exy[i]);
  }
  return g;
}

StrainRateGrid strain_rates(const Vector<double>& coefficients, const FieldLayout<double>& layout,
                            const Region& region, double step_km) {
  if (!(step_km > 0.0)) throw ConfigError("grid step must be positive");
  const double side = region.side_km();
  const auto n = static_cast<Index>(std::floor(side / step_km + 1e-9)) + 1;
  std::vector<std::array<double, 2>> points;
  points.reserve(static_cast<std::size_t>(n * n));
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      points.push_back({-region.half_width_km + i * step_km, -region.half_width_km + j * step_km});
  return strain_rates_at(coefficients, layout, points);
}

void write_grid(std::ostream& out, const StrainRateGrid& g) {
  out << "x_km,y_km,u_mm_yr,v_mm_yr,exx_nstr_yr,exy_nstr_yr,eyy_nstr_yr,max_shear_nstr_yr,rotation_nstr_yr\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < g.size(); ++i)
    out << g.x[i] << ',' << g.y[i] << ',' << g.u[i] << ',' << g.v[i] << ',' << g.exx[i] << ',' << g.exy[i] << ','
        << g.eyy[i] << ',' << g.max_shear[i] << ',' << g.rotation[i] << '\n';
}

}  // namespace pilm::strain
