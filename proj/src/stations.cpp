#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "pilm/strain.hpp"

namespace pilm::strain {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

char detect_delimiter(const std::string& header) {
  for (char c : {',', '\t', ';'})
    if (header.find(c) != std::string::npos) return c;
  return ' ';
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  if (delim == ' ') {
    std::istringstream in(line);
    std::string field;
    while (in >> field) out.push_back(field);
    return out;
  }
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delim)) out.push_back(trim(field));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(value))
    throw DataError(where + ": cannot parse number '" + text + "'");
  return value;
}

}  // namespace

bool Region::contains(double x, double y) const {
  return std::abs(x) <= half_width_km && std::abs(y) <= half_width_km;
}

std::array<double, 2> project(const Region& region, double lon, double lat) {
  return {kEarthRadiusKm * std::cos(region.lat0 * kDeg) * (lon - region.lon0) * kDeg,
          kEarthRadiusKm * (lat - region.lat0) * kDeg};
}

std::array<double, 2> unproject(const Region& region, double x, double y) {
  return {region.lon0 + x / (kEarthRadiusKm * std::cos(region.lat0 * kDeg)) / kDeg,
          region.lat0 + y / kEarthRadiusKm / kDeg};
}

StationSet load_stations(std::istream& in, const Region& region, const std::string& source) {
  if (!(region.half_width_km > 0.0)) throw ConfigError("region half-width must be positive");
  StationSet set;
  set.region = region;
  set.source = source;

  std::string line;
  std::size_t line_no = 0;
  char delim = ',';
  std::map<std::string, std::size_t> columns;
  const std::array<std::string, 4> required{"lon_deg", "lat_deg", "ve_mm_yr", "vn_mm_yr"};

  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    if (columns.empty()) {
      delim = detect_delimiter(text);
      const auto names = split(text, delim);
      for (std::size_t i = 0; i < names.size(); ++i) columns[names[i]] = i;
      for (const auto& name : required)
        if (!columns.count(name))
          throw DataError(source + ":" + std::to_string(line_no) + ": header lacks column '" + name + "'");
      continue;
    }
    const auto fields = split(text, delim);
    const std::string where = source + ":" + std::to_string(line_no);
    std::array<double, 4> v{};
    for (std::size_t k = 0; k < required.size(); ++k) {
      const std::size_t col = columns[required[k]];
      if (col >= fields.size())
        throw DataError(where + ": expected at least " + std::to_string(col + 1) + " fields, got " +
                        std::to_string(fields.size()));
      v[k] = parse_number(fields[col], where);
    }
    Station s{v[0], v[1], v[2], v[3], 0.0, 0.0};
    if (s.lat < -90.0 || s.lat > 90.0) throw DataError(where + ": latitude out of range");
    const auto xy = project(region, s.lon, s.lat);
    s.x = xy[0];
    s.y = xy[1];
    if (!region.contains(s.x, s.y)) {
      ++set.outside;
      continue;
    }
    set.stations.push_back(s);
  }
  if (columns.empty()) throw DataError(source + ": no header line");
  if (set.stations.empty()) throw DataError(source + ": no stations inside the region");
  return set;
}

StationSet load_stations(const std::string& path, const Region& region) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open station file '" + path + "'");
  return load_stations(in, region, path);
}

void write_stations(std::ostream& out, const StationSet& set) {
  out << "lon_deg,lat_deg,ve_mm_yr,vn_mm_yr,x_km,y_km\n" << std::setprecision(17);
  for (const auto& s : set.stations)
    out << s.lon << ',' << s.lat << ',' << s.ve << ',' << s.vn << ',' << s.x << ',' << s.y << '\n';
}

std::array<double, 2> synthetic_velocity(double x, double y) {
  // translation
  double u = -4.0, v = 2.5;
  // left-lateral shear zone along y = 100, fading away from x = 0
  const double taper = std::exp(-0.5 * std::pow(x / 150.0, 2));
  u += 6.0 * std::atan((y - 100.0) / 25.0) / std::numbers::pi * taper;
  // radial source at (100, -100)
  const double dx = x - 100.0, dy = y + 100.0;
  const double g = 5.0 * std::exp(-0.5 * (dx * dx + dy * dy) / (40.0 * 40.0)) / 40.0;
  u += g * dx;
  v += g * dy;
  return {u, v};
}

StationSet synthetic_stations(const SyntheticConfig& config, const Region& region) {
  if (config.stations == 0) throw ConfigError("synthetic station count must be positive");
  if (config.noise < 0.0) throw ConfigError("synthetic noise must be non-negative");
  StationSet set;
  set.region = region;
  set.source = "synthetic(seed=" + std::to_string(config.seed) + ")";
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> pos(-region.half_width_km, region.half_width_km);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < config.stations; ++i) {
    Station s;
    s.x = pos(rng);
    s.y = pos(rng);
    const auto ll = unproject(region, s.x, s.y);
    s.lon = ll[0];
    s.lat = ll[1];
    const auto uv = synthetic_velocity(s.x, s.y);
    s.ve = uv[0] + config.noise * noise(rng);
    s.vn = uv[1] + config.noise * noise(rng);
    set.stations.push_back(s);
  }
  return set;
}

}  // namespace pilm::strain
