#ifndef PILM_STRAIN_HPP
#define PILM_STRAIN_HPP

// Horizontal velocity regression from station data and the strain-rate
// fields derived from it. Coordinates are local km on an equirectangular
// projection, velocities mm/yr.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pilm/bayes.hpp"
#include "pilm/solver.hpp"

namespace pilm::strain {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Square model region centered on (lon0, lat0).
struct Region {
  double lon0 = 138.0;
  double lat0 = 36.0;
  double half_width_km = 200.0;

  double side_km() const { return 2.0 * half_width_km; }
  bool contains(double x, double y) const;
};

std::array<double, 2> project(const Region& region, double lon, double lat);
std::array<double, 2> unproject(const Region& region, double x, double y);

struct Station {
  double lon = 0.0;
  double lat = 0.0;
  double ve = 0.0;  // east, mm/yr
  double vn = 0.0;  // north, mm/yr
  double x = 0.0;   // km
  double y = 0.0;   // km
};

struct StationSet {
  Region region;
  std::vector<Station> stations;
  std::size_t outside = 0;  // rows dropped by the region filter
  std::string source;

  std::size_t size() const { return stations.size(); }
};

/// Delimited text with a header naming lon_deg, lat_deg, ve_mm_yr and
/// vn_mm_yr (any order, extra columns ignored). Comma, tab, semicolon or
/// whitespace separated; '#' starts a comment line.
StationSet load_stations(std::istream& in, const Region& region, const std::string& source = "<stream>");
StationSet load_stations(const std::string& path, const Region& region);

void write_stations(std::ostream& out, const StationSet& set);

// ---------------------------------------------------------------------------

enum class RegularizationKind { math, phys, hybrid };

struct Regularization {
  RegularizationKind kind = RegularizationKind::math;
  double poisson = 0.0;  // phys and hybrid only

  std::string label() const;
};

/// Parses "math", "phys:<nu>" or "hybrid:<nu>".
Regularization parse_regularization(const std::string& text);

struct StrainProblem {
  FieldLayout<double> layout;  // two components (east, north) on one square basis
  ObservationSystem<double> observations;
  std::optional<PenaltyMatrix<double>> math;
  std::optional<PenaltyMatrix<double>> phys;
  Regularization regularization;
};

/// Knots every `spacing_km` over the region square; the side must be a
/// whole number of intervals. Rows are (east, north) per station.
StrainProblem build_problem(const StationSet& stations, double spacing_km, const Regularization& reg);

/// The single penalty of a math or phys problem.
const PenaltyMatrix<double>& primary_penalty(const StrainProblem& problem);

struct TableRow {
  std::string label;
  double log10_alpha2 = 0.0;
  double log_likelihood = 0.0;
  double sigma = 0.0;  // mm/yr
  double rmse = 0.0;   // mm/yr
  double abic = 0.0;
  int hyperparameters = 1;
  bool boundary = false;
};

struct RegressionResult {
  TableRow row;
  AlphaOptimum<double> optimum;
};

/// Marginal-likelihood grid search for a math or phys problem.
RegressionResult fit_regression(const StrainProblem& problem,
                                const std::vector<double>& log10_grid = default_log_alpha_grid());

TableRow hybrid_row(const HybridSurface<double>& surface, const StrainProblem& problem);

// ---------------------------------------------------------------------------

/// Velocities and strain rates on a regular grid. Strain components are in
/// nanostrain/yr (mm/yr per km times 1e3).
struct StrainRateGrid {
  std::vector<double> x, y;
  std::vector<double> u, v;
  std::vector<double> exx, exy, eyy;
  std::vector<double> max_shear;
  std::vector<double> rotation;

  std::size_t size() const { return x.size(); }
};

inline constexpr double kNanostrainPerMmYrKm = 1e3;

/// Grid points every `step_km` over the region square, x fastest.
StrainRateGrid strain_rates(const Vector<double>& coefficients, const FieldLayout<double>& layout,
                            const Region& region, double step_km = 5.0);

StrainRateGrid strain_rates_at(const Vector<double>& coefficients, const FieldLayout<double>& layout,
                               const std::vector<std::array<double, 2>>& points);

void write_grid(std::ostream& out, const StrainRateGrid& grid);

// ---------------------------------------------------------------------------

/// Smooth reference velocity field used when no station file is given:
/// uniform translation, a localized shear zone around (0, 100) km and a
/// radial source near (100, -100) km.
std::array<double, 2> synthetic_velocity(double x, double y);

struct SyntheticConfig {
  std::size_t stations = 458;
  double noise = 1.4;  // mm/yr
  std::uint64_t seed = 20240901;
};

/// Uniformly scattered stations inside the region with noisy synthetic
/// velocities.
StationSet synthetic_stations(const SyntheticConfig& config, const Region& region = {});

}  // namespace pilm::strain

#endif  // PILM_STRAIN_HPP
