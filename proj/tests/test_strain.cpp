#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "pilm/strain.hpp"

using namespace pilm;
using namespace pilm::strain;

TEST(projection, center_and_round_trip) {
  const Region region;
  const auto c = project(region, 138.0, 36.0);
  EXPECT_EQ(c[0], 0.0);
  EXPECT_EQ(c[1], 0.0);
  for (double lon : {136.0, 137.3, 139.9})
    for (double lat : {34.5, 36.2, 37.7}) {
      const auto xy = project(region, lon, lat);
      const auto back = unproject(region, xy[0], xy[1]);
      EXPECT_NEAR(back[0], lon, 1e-9);
      EXPECT_NEAR(back[1], lat, 1e-9);
    }
  // one degree of latitude is about 111.2 km
  EXPECT_NEAR(project(region, 138.0, 37.0)[1], 111.19, 0.01);
}

TEST(load_stations, parses_filters_and_reports) {
  std::istringstream in(
      "# comment\n"
      "name,lon_deg,lat_deg,ve_mm_yr,vn_mm_yr,extra\n"
      "a,138.0,36.0,1.5,-2.0,x\n"
      "b,138.5,36.5,0.1,0.2,y\n"
      "far,145.0,36.0,0,0,z\n");
  const auto set = load_stations(in, Region{});
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.outside, 1u);
  EXPECT_EQ(set.stations[0].x, 0.0);
  EXPECT_EQ(set.stations[0].ve, 1.5);
  EXPECT_EQ(set.stations[0].vn, -2.0);
}

TEST(load_stations, whitespace_and_column_order) {
  std::istringstream in("vn_mm_yr ve_mm_yr lat_deg lon_deg\n  2.0 1.0 36.0 138.0\n");
  const auto set = load_stations(in, Region{});
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.stations[0].ve, 1.0);
  EXPECT_EQ(set.stations[0].vn, 2.0);
}

TEST(load_stations, errors_carry_line_numbers) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      load_stations(in, Region{}, "s.csv");
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("lon_deg,lat_deg,ve_mm_yr,vn_mm_yr\n138,36,1,1\n138,36,abc,1\n").find("s.csv:3"),
            std::string::npos);
  EXPECT_NE(message("lon_deg,lat_deg,ve_mm_yr\n").find("vn_mm_yr"), std::string::npos);
  EXPECT_NE(message("lon_deg,lat_deg,ve_mm_yr,vn_mm_yr\n138,36,1\n").find("s.csv:2"), std::string::npos);
  EXPECT_NE(message("lon_deg,lat_deg,ve_mm_yr,vn_mm_yr\n150,36,1,1\n").find("no stations"), std::string::npos);
  EXPECT_NE(message("").find("no header"), std::string::npos);
  EXPECT_THROW(load_stations("/nonexistent/stations.csv", Region{}), DataError);
}

TEST(regularization, parsing) {
  EXPECT_EQ(parse_regularization("math").kind, RegularizationKind::math);
  const auto p = parse_regularization("phys:-1");
  EXPECT_EQ(p.kind, RegularizationKind::phys);
  EXPECT_EQ(p.poisson, -1.0);
  EXPECT_EQ(parse_regularization("hybrid:0.5").kind, RegularizationKind::hybrid);
  EXPECT_THROW(parse_regularization("phys:0.7"), ConfigError);
  EXPECT_THROW(parse_regularization("phys:x"), ConfigError);
  EXPECT_THROW(parse_regularization("smooth"), ConfigError);
}

TEST(build_problem, sizes_and_blocks) {
  const auto set = synthetic_stations({});
  ASSERT_EQ(set.size(), 458u);
  const auto p = build_problem(set, 20.0, parse_regularization("math"));
  EXPECT_EQ(p.layout.axes[0].size(), 23);
  EXPECT_EQ(p.layout.size_per_component(), 529);
  EXPECT_EQ(p.observations.observations(), 916);
  EXPECT_EQ(p.observations.parameters(), 1058);
  EXPECT_EQ(p.math->matrix().block(0, 529, 529, 529).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_FALSE(p.phys.has_value());
  const auto q = build_problem(set, 20.0, parse_regularization("phys:-1"));
  EXPECT_EQ(q.phys->matrix().block(0, 529, 529, 529).cwiseAbs().maxCoeff(), 0.0);
  const auto h = build_problem(set, 20.0, parse_regularization("hybrid:0"));
  EXPECT_TRUE(h.math && h.phys);
  EXPECT_THROW(primary_penalty(h), ConfigError);
  EXPECT_THROW(build_problem(set, 30.0, parse_regularization("math")), ConfigError);
  EXPECT_THROW(build_problem(set, 0.0, parse_regularization("math")), ConfigError);
}

TEST(synthetic_stations, inside_region_and_seeded) {
  SyntheticConfig cfg;
  cfg.stations = 50;
  const auto a = synthetic_stations(cfg), b = synthetic_stations(cfg);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a.region.contains(a.stations[i].x, a.stations[i].y));
    EXPECT_EQ(a.stations[i].ve, b.stations[i].ve);
    const auto xy = project(a.region, a.stations[i].lon, a.stations[i].lat);
    EXPECT_NEAR(xy[0], a.stations[i].x, 1e-8);
  }
  cfg.noise = -1.0;
  EXPECT_THROW(synthetic_stations(cfg), ConfigError);
}

namespace {

FieldLayout<double> square_layout() {
  const auto b = build_basis(400.0, 23, -200.0);
  return layout_2d(b, b, 2);
}

Vector<double> interpolant(const FieldLayout<double>& layout, std::function<double(double, double)> f,
                           std::function<double(double, double)> fx, std::function<double(double, double)> fy) {
  return oracle::interpolate_2d<double>(layout.axes[0], layout.axes[1], f, fx, fy,
                                        [](double, double) { return 0.0; });
}

}  // namespace

TEST(strain_rates, rigid_translation_has_no_strain) {
  const auto layout = square_layout();
  const auto zero = [](double, double) { return 0.0; };
  Vector<double> a(layout.size());
  a << interpolant(layout, [](double, double) { return 3.0; }, zero, zero),
      interpolant(layout, [](double, double) { return -1.0; }, zero, zero);
  const auto g = strain_rates(a, layout, Region{}, 50.0);
  EXPECT_EQ(g.size(), 81u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(g.u[i], 3.0, 1e-12);
    EXPECT_NEAR(g.exx[i], 0.0, 1e-9);
    EXPECT_NEAR(g.exy[i], 0.0, 1e-9);
    EXPECT_NEAR(g.max_shear[i], 0.0, 1e-9);
  }
}

TEST(strain_rates, pure_shear) {
  // u = y, v = x in mm/yr with km coordinates: exy = 1e3 nanostrain/yr
  const auto layout = square_layout();
  const auto zero = [](double, double) { return 0.0; };
  const auto one = [](double, double) { return 1.0; };
  Vector<double> a(layout.size());
  a << interpolant(layout, [](double, double y) { return y; }, zero, one),
      interpolant(layout, [](double x, double) { return x; }, one, zero);
  const auto g = strain_rates_at(a, layout, {{0.0, 0.0}, {-150.0, 120.0}});
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(g.exy[i], 1e3, 1e-8);
    EXPECT_NEAR(g.max_shear[i], 1e3, 1e-8);
    EXPECT_NEAR(g.exx[i], 0.0, 1e-8);
    EXPECT_NEAR(g.eyy[i], 0.0, 1e-8);
    EXPECT_NEAR(g.rotation[i], 0.0, 1e-8);
  }
  EXPECT_THROW(strain_rates_at(a, layout, {{250.0, 0.0}}), DomainError);
}

TEST(strain_rates, finite_differences_converge) {
  const auto set = synthetic_stations({});
  const auto p = build_problem(set, 20.0, parse_regularization("math"));
  const auto fit = solve(p.observations, {{std::pow(10.0, 3.4), *p.math}});
  const std::array<double, 2> at{37.0, 91.0};
  double previous = 0.0;
  for (double h : {2.0, 1.0}) {
    const auto g = strain_rates_at(fit.coefficients, p.layout,
                                   {at, {at[0] + h, at[1]}, {at[0] - h, at[1]}, {at[0], at[1] + h}, {at[0], at[1] - h}});
    const double exx = 1e3 * (g.u[1] - g.u[2]) / (2 * h);
    const double eyy = 1e3 * (g.v[3] - g.v[4]) / (2 * h);
    const double exy = 1e3 * 0.5 * ((g.u[3] - g.u[4]) / (2 * h) + (g.v[1] - g.v[2]) / (2 * h));
    const double err = std::abs(exx - g.exx[0]) + std::abs(eyy - g.eyy[0]) + std::abs(exy - g.exy[0]);
    if (h == 1.0) EXPECT_NEAR(err / previous, 0.25, 0.05);
    previous = err;
  }
}

TEST(strain_rates, synthetic_shear_zones_are_resolved) {
  const auto set = synthetic_stations({});
  const auto p = build_problem(set, 20.0, parse_regularization("math"));
  const auto res = fit_regression(p, linear_grid(0.0, 6.0, 0.5));
  const auto g = strain_rates(res.optimum.best.fit.coefficients, p.layout, set.region, 10.0);
  auto at = [&](double x, double y) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g.x[i] == x && g.y[i] == y) return i;
    ADD_FAILURE() << "no node at " << x << "," << y;
    return std::size_t{0};
  };
  const auto quiet = at(-150.0, -150.0), fault = at(0.0, 100.0), source = at(100.0, -100.0);
  EXPECT_GT(g.max_shear[fault], 3.0 * g.max_shear[quiet]);
  // the radial source is pure dilatation at its center
  auto dilatation = [&](std::size_t i) { return g.exx[i] + g.eyy[i]; };
  EXPECT_GT(dilatation(source), 3.0 * std::abs(dilatation(quiet)));
  EXPECT_GT(dilatation(source), 0.0);
  for (double s : g.max_shear) EXPECT_GE(s, 0.0);
}

TEST(write_grid, header_and_rows) {
  StrainRateGrid g;
  g.x = {1};
  g.y = {2};
  g.u = {3};
  g.v = {4};
  g.exx = {5};
  g.exy = {6};
  g.eyy = {7};
  g.max_shear = {8};
  g.rotation = {9};
  std::ostringstream out;
  write_grid(out, g);
  EXPECT_EQ(out.str(),
            "x_km,y_km,u_mm_yr,v_mm_yr,exx_nstr_yr,exy_nstr_yr,eyy_nstr_yr,max_shear_nstr_yr,rotation_nstr_yr\n"
            "1,2,3,4,5,6,7,8,9\n");
}
