// Command-line front end: one subcommand per experiment, CSV outputs and a
// key = value run report per output directory.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "pilm/bayes.hpp"
#include "pilm/experiments.hpp"
#include "pilm/report.hpp"
#include "pilm/strain.hpp"

namespace fs = std::filesystem;
using namespace pilm;
using pilm::experiments::ElasticityCase;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitTolerance = 5;

// ---------------------------------------------------------------------------
// value parsing

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError(what + ": cannot parse '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char delim) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, delim)) out.push_back(item);
  return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(item, what));
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

/// "lo:hi:step" or a comma list.
std::vector<double> parse_grid(const std::string& text, const std::string& what) {
  if (text.find(':') == std::string::npos) {
    auto v = parse_list(text, what);
    check_grid(v);
    return v;
  }
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError(what + ": expected lo:hi:step, got '" + text + "'");
  return linear_grid(parse_double(parts[0], what), parse_double(parts[1], what), parse_double(parts[2], what));
}

Index parse_count(double v, const std::string& what) {
  if (v != std::floor(v) || v < 1) throw ConfigError(what + ": expected a positive integer");
  return static_cast<Index>(v);
}

/// Decimal places that resolve a grid step.
int decimals_for(const std::vector<double>& grid) {
  if (grid.size() < 2) return 6;
  const double step = grid[1] - grid[0];
  return std::clamp(static_cast<int>(std::ceil(-std::log10(step) - 1e-9)), 0, 12);
}

std::string fixed(double v, int decimals) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(decimals);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// experiments and their knobs

struct Experiment {
  CLI::App* app = nullptr;
  std::string name;
  std::string out_dir;
  std::string config_file;
  std::vector<std::pair<std::string, std::function<std::string()>>> knobs;
  std::function<int(Experiment&)> run;

  template <typename T>
  CLI::Option* knob(const std::string& key, T& var, const std::string& help) {
    knobs.emplace_back(key, [&var] {
      if constexpr (std::is_same_v<T, bool>) return std::string(var ? "true" : "false");
      else if constexpr (std::is_same_v<T, double>) return format_full(var);
      else if constexpr (std::is_arithmetic_v<T>) return std::to_string(var);
      else return std::string(var);
    });
    if constexpr (std::is_same_v<T, bool>) return app->add_flag("--" + key, var, help);
    else return app->add_option("--" + key, var, help)->capture_default_str();
  }

  fs::path prepare() const {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + out_dir + "': " + ec.message());
    std::ofstream cfg(dir / "config.txt");
    if (!cfg) throw DataError("cannot write " + (dir / "config.txt").string());
    cfg << "# " << name << '\n';
    for (const auto& [key, value] : knobs) cfg << key << " = " << value() << '\n';
    return dir;
  }
};

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void finish(const RunReport& report, const fs::path& dir) {
  report.save((dir / "report.txt").string());
  report.write(std::cout);
}

// ---------------------------------------------------------------------------

struct OscForward {
  double length = 10.0;
  std::string counts = "13,103";
  std::string damping = "0,1,2,3";
  std::string ics = "1:0,0.5:0.5,0:1";
  double mass = 1.0;
  double stiffness = 1.0;
  double samples = 1000;
};

int run_osc_forward(Experiment& e, const OscForward& k) {
  const auto counts = parse_list(k.counts, "counts");
  const auto damping = parse_list(k.damping, "damping");
  std::vector<std::array<double, 2>> ics;
  for (const auto& item : split(k.ics, ',')) {
    const auto uv = split(item, ':');
    if (uv.size() != 2) throw ConfigError("ics: expected u0:v0 pairs, got '" + item + "'");
    ics.push_back({parse_double(uv[0], "ics"), parse_double(uv[1], "ics")});
  }
  const auto samples = parse_count(k.samples, "samples");
  const auto dir = e.prepare();

  RunReport report(e.name);
  for (double mv : counts) {
    const auto m = parse_count(mv, "counts");
    double worst = 0.0;
    for (double c : damping) {
      for (std::size_t i = 0; i < ics.size(); ++i) {
        const auto r = experiments::oscillator_forward({k.mass, c, k.stiffness}, ics[i][0], ics[i][1], k.length, m,
                                                       samples);
        const std::string tag = "c" + format_full(c) + "_ic" + std::to_string(i + 1) + "_M" + std::to_string(m);
        auto csv = open_csv(dir / ("forward_" + tag + ".csv"));
        csv << "t,u,u_exact\n";
        for (Index j = 0; j < r.t.size(); ++j)
          csv << format_full(r.t[j]) << ',' << format_full(r.u[j]) << ',' << format_full(r.exact[j]) << '\n';
        report.set("max_error_" + tag, r.max_error, 4);
        worst = std::max(worst, r.max_error);
      }
    }
    report.set("max_error_M" + std::to_string(m), worst, 4);
  }
  finish(report, dir);
  return 0;
}

struct OscScaling {
  double length = 100.0;
  std::string counts = "8,16,32,64,128,256,512,1024,2048";
  double samples = 20000;
};

int run_osc_scaling(Experiment& e, const OscScaling& k) {
  const auto counts = parse_list(k.counts, "counts");
  const auto samples = parse_count(k.samples, "samples");
  const auto dir = e.prepare();
  auto csv = open_csv(dir / "scaling.csv");
  csv << "M,loss,rms_error,min_eigenvalue\n";
  std::vector<double> m, loss, rms, eig;
  RunReport report(e.name);
  for (double mv : counts) {
    const auto row = experiments::oscillator_scaling_point(k.length, parse_count(mv, "counts"), samples);
    csv << row.m << ',' << format_full(row.loss) << ',' << format_full(row.rms_error) << ','
        << format_full(row.min_eigenvalue) << '\n';
    m.push_back(static_cast<double>(row.m));
    loss.push_back(row.loss);
    rms.push_back(row.rms_error);
    eig.push_back(std::abs(row.min_eigenvalue));
    report.set("rms_error_M" + std::to_string(row.m), row.rms_error, 4);
  }
  if (m.size() >= 2) {
    report.set("slope_loss", experiments::loglog_slope(m, loss), 4);
    report.set("slope_rms_error", experiments::loglog_slope(m, rms), 4);
    report.set("slope_min_eigenvalue", experiments::loglog_slope(m, eig), 4);
  }
  finish(report, dir);
  return 0;
}

struct OscInverse {
  double length = 10.0;
  double count = 103;
  double sigma = 0.0;
  double seed = 1;
  double true_damping = 0.5;
  std::string grid = "0:1.5:0.01";
};

int run_osc_inverse(Experiment& e, const OscInverse& k) {
  const auto grid = parse_grid(k.grid, "grid");
  const auto data = experiments::oscillator_inverse_data(k.sigma, static_cast<std::uint64_t>(k.seed), k.true_damping);
  const auto dir = e.prepare();
  const auto r = experiments::oscillator_inverse(data, grid, k.length, parse_count(k.count, "count"));

  auto data_csv = open_csv(dir / "data.csv");
  data_csv << "t,u\n";
  for (std::size_t i = 0; i < data.t.size(); ++i) data_csv << format_full(data.t[i]) << ',' << format_full(data.u[i]) << '\n';
  auto profile = open_csv(dir / "profile.csv");
  profile << "damping,solvable,loss\n";
  for (const auto& p : r.curve) profile << format_full(p.theta) << ',' << p.solvable << ',' << format_full(p.loss) << '\n';

  const auto basis = build_basis(k.length, parse_count(k.count, "count"));
  const Vector<double> t = Vector<double>::LinSpaced(1001, 0.0, k.length);
  const Vector<double> u = evaluate_1d(r.minimum.fit.coefficients, basis, t);
  auto fit = open_csv(dir / "fit.csv");
  fit << "t,u\n";
  for (Index i = 0; i < t.size(); ++i) fit << format_full(t[i]) << ',' << format_full(u[i]) << '\n';

  RunReport report(e.name);
  report.set("c_star", fixed(r.minimum.theta, decimals_for(grid)));
  report.set("loss_star", r.minimum.loss, 4);
  report.set("boundary", r.minimum.boundary);
  finish(report, dir);
  return 0;
}

struct DiffInverse {
  std::string profile = "unimodal";
  double diffusivity = 0.1;
  double duration = 2.0;
  double width = 2.0;
  double noise = 0.0;
  double seed = 1;
  double m_time = 21;
  double m_space = 43;
  std::string grid = "0.01:0.3:0.005";
};

int run_diff_inverse(Experiment& e, const DiffInverse& k) {
  experiments::DiffusionConfig cfg;
  if (k.profile == "unimodal") cfg.profile = experiments::DiffusionProfile::unimodal;
  else if (k.profile == "bimodal") cfg.profile = experiments::DiffusionProfile::bimodal;
  else throw ConfigError("profile must be unimodal or bimodal");
  if (!(k.diffusivity > 0.0) || !(k.duration > 0.0) || !(k.width > 0.0))
    throw ConfigError("diffusivity, duration and width must be positive");
  cfg.diffusivity = k.diffusivity;
  cfg.duration = k.duration;
  cfg.width = k.width;
  cfg.noise = k.noise;
  cfg.seed = static_cast<std::uint64_t>(k.seed);
  const experiments::DiffusionModel model{parse_count(k.m_time, "m-time"), parse_count(k.m_space, "m-space")};
  const auto grid = parse_grid(k.grid, "grid");
  const auto dir = e.prepare();

  const auto data = experiments::make_diffusion_dataset(cfg);
  const auto r = experiments::diffusion_inverse(data, grid, model);

  auto data_csv = open_csv(dir / "data.csv");
  data_csv << "t,x,u,u_true\n";
  for (std::size_t i = 0; i < data.points.size(); ++i)
    data_csv << format_full(data.points[i].coords[0]) << ',' << format_full(data.points[i].coords[1]) << ','
             << format_full(data.points[i].value) << ',' << format_full(data.truth[i]) << '\n';
  auto profile = open_csv(dir / "profile.csv");
  profile << "diffusivity,solvable,loss\n";
  for (const auto& p : r.curve) profile << format_full(p.theta) << ',' << p.solvable << ',' << format_full(p.loss) << '\n';

  const auto layout = experiments::diffusion_layout(data, model);
  std::vector<std::array<double, 2>> pts;
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j) pts.push_back({cfg.duration * i / 40.0, cfg.width * j / 40.0});
  const auto u = evaluate(r.minimum.fit, layout, std::span<const std::array<double, 2>>(pts));
  auto field = open_csv(dir / "field.csv");
  field << "t,x,u\n";
  for (std::size_t i = 0; i < pts.size(); ++i)
    field << format_full(pts[i][0]) << ',' << format_full(pts[i][1]) << ',' << format_full(u[static_cast<Index>(i)]) << '\n';
  auto initial = open_csv(dir / "initial.csv");
  initial << "x,u_fit,u_true\n";
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i][0] == 0.0)
      initial << format_full(pts[i][1]) << ',' << format_full(u[static_cast<Index>(i)]) << ','
              << format_full(experiments::diffusion_initial(cfg.profile, pts[i][1])) << '\n';

  RunReport report(e.name);
  report.set("profile", k.profile);
  report.set("observations", static_cast<long long>(data.points.size()));
  report.set("k_star", fixed(r.minimum.theta, decimals_for(grid)));
  report.set("loss_star", r.minimum.loss, 4);
  report.set("boundary", r.minimum.boundary);
  finish(report, dir);
  return 0;
}

struct ElasVerify {
  std::string field = "quadratic";
  std::string poisson = "auto";
  std::string count = "auto";
  double lattice = 101;
  double lower = -0.5;
  double side = 1.0;
};

int run_elas_verify(Experiment& e, ElasVerify& k) {
  ElasticityCase c;
  if (k.field == "quadratic") c = ElasticityCase::quadratic;
  else if (k.field == "quartic") c = ElasticityCase::quartic;
  else throw ConfigError("field must be quadratic or quartic");
  if (k.poisson == "auto") k.poisson = c == ElasticityCase::quadratic ? "0.5" : "0";
  if (k.count == "auto") k.count = c == ElasticityCase::quadratic ? "23" : "43";
  const double nu = parse_double(k.poisson, "poisson");
  const auto m = parse_count(parse_double(k.count, "count"), "count");
  const auto lattice = parse_count(k.lattice, "lattice");
  if (lattice < 2) throw ConfigError("lattice needs at least 2 points per side");
  if (!(k.side > 0.0)) throw ConfigError("side must be positive");
  const auto dir = e.prepare();

  const auto r = experiments::elasticity_verify(c, nu, m, lattice, k.lower, k.side);
  std::vector<std::array<double, 2>> pts;
  for (Index i = 0; i < lattice; ++i)
    for (Index j = 0; j < lattice; ++j)
      pts.push_back({k.lower + k.side * i / (lattice - 1.0), k.lower + k.side * j / (lattice - 1.0)});
  const std::span<const std::array<double, 2>> view(pts);
  const auto u = evaluate(r.fit, r.layout, view, {0, 0}, 0);
  const auto v = evaluate(r.fit, r.layout, view, {0, 0}, 1);
  auto csv = open_csv(dir / "field.csv");
  csv << "x,y,u,v,u_exact,v_exact,u_residual,v_residual\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto ex = experiments::elasticity_exact(c, pts[i][0], pts[i][1]);
    const auto n = static_cast<Index>(i);
    csv << format_full(pts[i][0]) << ',' << format_full(pts[i][1]) << ',' << format_full(u[n]) << ','
        << format_full(v[n]) << ',' << format_full(ex[0]) << ',' << format_full(ex[1]) << ','
        << format_full(u[n] - ex[0]) << ',' << format_full(v[n] - ex[1]) << '\n';
  }
  RunReport report(e.name);
  report.set("field", k.field);
  report.set("poisson", nu);
  report.set("basis_per_axis", static_cast<long long>(m));
  report.set("boundary_points", static_cast<long long>(r.boundary_points));
  report.set("max_residual", r.max_residual, 3);
  report.set("condition_estimate", r.fit.condition_estimate, 3);
  finish(report, dir);
  return 0;
}

// station source shared by strain and hybrid-scan
struct StationKnobs {
  std::string stations;
  double synthetic_count = 458;
  double noise = 1.4;
  double seed = 20240901;
  double lon0 = 138.0;
  double lat0 = 36.0;
  double half_width = 200.0;
  double spacing = 20.0;

  void add(Experiment& e) {
    e.knob("stations", stations, "station table (lon_deg, lat_deg, ve_mm_yr, vn_mm_yr); empty uses synthetic data");
    e.knob("synthetic-count", synthetic_count, "synthetic station count");
    e.knob("noise", noise, "synthetic velocity noise, mm/yr");
    e.knob("seed", seed, "synthetic data seed");
    e.knob("lon0", lon0, "region center longitude, deg");
    e.knob("lat0", lat0, "region center latitude, deg");
    e.knob("half-width", half_width, "region half-width, km");
    e.knob("spacing", spacing, "knot spacing, km");
  }

  strain::StationSet load() const {
    const strain::Region region{lon0, lat0, half_width};
    if (!stations.empty()) return strain::load_stations(stations, region);
    strain::SyntheticConfig cfg;
    cfg.stations = static_cast<std::size_t>(parse_count(synthetic_count, "synthetic-count"));
    cfg.noise = noise;
    cfg.seed = static_cast<std::uint64_t>(seed);
    return strain::synthetic_stations(cfg, region);
  }
};

void write_curve(const fs::path& path, const AlphaOptimum<double>& opt) {
  auto csv = open_csv(path);
  csv << "log10_alpha2,feasible,log_likelihood\n";
  auto curve = opt.curve;
  std::stable_sort(curve.begin(), curve.end(),
                   [](const auto& a, const auto& b) { return a.log10_alpha2 < b.log10_alpha2; });
  for (const auto& s : curve)
    csv << format_full(s.log10_alpha2) << ',' << s.feasible << ',' << format_full(s.log_likelihood) << '\n';
}

void set_row(RunReport& report, const std::string& prefix, const strain::TableRow& row) {
  report.set(prefix + "log10_alpha2", row.log10_alpha2, 4);
  report.set(prefix + "log_likelihood", row.log_likelihood, 7);
  report.set(prefix + "sigma", row.sigma, 3);
  report.set(prefix + "rmse", row.rmse, 3);
  report.set(prefix + "abic", row.abic, 7);
}

std::string slug(const std::string& label) {
  std::string out;
  for (char c : label)
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') out += c;
    else if (!out.empty() && out.back() != '_') out += '_';
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

struct StrainRun {
  StationKnobs source;
  std::string reg = "math";
  std::string alpha_grid = "-12:6:0.25";
  double grid_step = 5.0;
  bool table = false;
};

int run_strain(Experiment& e, const StrainRun& k) {
  const auto reg = strain::parse_regularization(k.reg);
  if (reg.kind == strain::RegularizationKind::hybrid)
    throw ConfigError("hybrid regularization is scanned by the hybrid-scan experiment");
  const auto grid = parse_grid(k.alpha_grid, "alpha-grid");
  const auto set = k.source.load();
  const auto dir = e.prepare();
  {
    auto csv = open_csv(dir / "stations.csv");
    strain::write_stations(csv, set);
  }

  RunReport report(e.name);
  report.set("source", set.source);
  report.set("stations", static_cast<long long>(set.size()));

  std::vector<std::string> regs{k.reg};
  if (k.table) regs = {"math", "phys:-1", "phys:0", "phys:0.5"};
  std::ofstream table;
  if (k.table) {
    table = open_csv(dir / "table.csv");
    table << "regularization,log10_alpha2,log_likelihood,sigma_mm_yr,rmse_mm_yr,abic,boundary\n";
  }
  for (const auto& text : regs) {
    const auto problem = strain::build_problem(set, k.source.spacing, strain::parse_regularization(text));
    const auto result = strain::fit_regression(problem, grid);
    const bool primary = text == k.reg;
    const std::string prefix = primary ? "" : slug(result.row.label) + "_";
    if (primary) {
      report.set("regularization", result.row.label);
      report.set("parameters", static_cast<long long>(problem.observations.parameters()));
      report.set("rank", static_cast<long long>(result.optimum.best.rank));
      report.set("boundary", result.row.boundary);
      write_curve(dir / "ll_curve.csv", result.optimum);
      const auto g = strain::strain_rates(result.optimum.best.fit.coefficients, problem.layout, set.region, k.grid_step);
      auto csv = open_csv(dir / "grid.csv");
      strain::write_grid(csv, g);
    } else {
      write_curve(dir / ("ll_curve_" + slug(result.row.label) + ".csv"), result.optimum);
    }
    set_row(report, prefix, result.row);
    if (k.table)
      table << result.row.label << ',' << format_full(result.row.log10_alpha2) << ','
            << format_full(result.row.log_likelihood) << ',' << format_full(result.row.sigma) << ','
            << format_full(result.row.rmse) << ',' << format_full(result.row.abic) << ',' << result.row.boundary
            << '\n';
  }
  finish(report, dir);
  return 0;
}

struct HybridScan {
  StationKnobs source;
  double poisson = 0.5;
  std::string math_grid = "0:6:0.5";
  std::string phys_grid = "-4:8:2";
  bool zero_column = true;
};

int run_hybrid(Experiment& e, const HybridScan& k) {
  const auto lg_math = parse_grid(k.math_grid, "math-grid");
  const auto lg_phys = parse_grid(k.phys_grid, "phys-grid");
  const auto set = k.source.load();
  const auto dir = e.prepare();

  strain::Regularization reg{strain::RegularizationKind::hybrid, k.poisson};
  elastic_constants(k.poisson);
  const auto problem = strain::build_problem(set, k.source.spacing, reg);
  auto math_only = problem;
  math_only.regularization = {strain::RegularizationKind::math, 0.0};
  const auto best_math = strain::fit_regression(math_only);

  std::vector<double> am, ap;
  for (double v : lg_math) am.push_back(std::pow(10.0, v));
  if (k.zero_column) ap.push_back(0.0);
  for (double v : lg_phys) ap.push_back(std::pow(10.0, v));
  const auto surface = hybrid_surface(problem.observations, *problem.math, *problem.phys, am, ap);

  auto csv = open_csv(dir / "surface.csv");
  csv << "log10_alpha2_math,log10_alpha2_phys,feasible,log_likelihood\n";
  for (std::size_t i = 0; i < am.size(); ++i)
    for (std::size_t j = 0; j < ap.size(); ++j)
      csv << format_full(lg_math[i]) << ',' << (ap[j] == 0.0 ? std::string("-inf") : format_full(std::log10(ap[j])))
          << ',' << surface.feasible(static_cast<Index>(i), static_cast<Index>(j)) << ','
          << format_full(surface.log_likelihood(static_cast<Index>(i), static_cast<Index>(j))) << '\n';

  RunReport report(e.name);
  report.set("source", set.source);
  report.set("stations", static_cast<long long>(set.size()));
  report.set("poisson", k.poisson);
  set_row(report, "math_", best_math.row);
  const auto hybrid = strain::hybrid_row(surface, problem);
  set_row(report, "hybrid_", hybrid);
  const double ap_best = ap[surface.argmax.second];
  report.set("hybrid_log10_alpha2_phys", ap_best == 0.0 ? std::string("-inf") : format_sig(std::log10(ap_best), 4));
  report.set("surface_exceeds_math", surface.max_log_likelihood > best_math.row.log_likelihood + 1e-6);
  finish(report, dir);
  return 0;
}

struct CompareRun {
  std::string a, b;
  double abs_tol = 0.0;
  double rel_tol = 0.0;
};

int run_compare(const CompareRun& k) {
  const auto a = RunReport::load(k.a);
  const auto b = RunReport::load(k.b);
  const auto c = compare(a, b, k.abs_tol, k.rel_tol);
  write_comparison(std::cout, c);
  return c.exceeded ? kExitTolerance : 0;
}

// ---------------------------------------------------------------------------
// flat config files: "key = value" lines become "--key=value" arguments
// placed before the command-line flags, which take precedence

std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
    };
    out.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
  }
  return out;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::config: return kExitConfig;
    case ErrorKind::data: return kExitData;
    case ErrorKind::numerical: return kExitNumerical;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed linear models: spline expansions with exactly integrated equation penalties.", "pilm"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.footer("Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical failure, 5 compare tolerance exceeded.");

  std::vector<std::unique_ptr<Experiment>> experiments;
  auto add = [&](const std::string& name, const std::string& help) -> Experiment& {
    auto e = std::make_unique<Experiment>();
    e->name = name;
    e->app = app.add_subcommand(name, help);
    e->out_dir = "pilm_out/" + name;
    e->knob("out", e->out_dir, "output directory");
    e->app->add_option("--config", e->config_file, "flat key = value file; command-line flags take precedence");
    experiments.push_back(std::move(e));
    return *experiments.back();
  };

  OscForward osc_forward;
  {
    auto& e = add("oscillator-forward",
                  "Damped oscillator from initial conditions for several damping values, initial states and basis sizes.");
    e.knob("length", osc_forward.length, "time span T");
    e.knob("counts", osc_forward.counts, "basis sizes M, comma separated");
    e.knob("damping", osc_forward.damping, "damping values c, comma separated");
    e.knob("ics", osc_forward.ics, "initial states u0:v0, comma separated");
    e.knob("mass", osc_forward.mass, "mass m");
    e.knob("stiffness", osc_forward.stiffness, "stiffness k");
    e.knob("samples", osc_forward.samples, "evaluation points");
    e.run = [&](Experiment& x) { return run_osc_forward(x, osc_forward); };
  }
  OscScaling osc_scaling;
  {
    auto& e = add("oscillator-scaling",
                  "Harmonic oscillator over a long span: loss, RMS error and smallest penalty eigenvalue against M.");
    e.knob("length", osc_scaling.length, "time span T");
    e.knob("counts", osc_scaling.counts, "basis sizes M, comma separated");
    e.knob("samples", osc_scaling.samples, "points for the RMS error");
    e.run = [&](Experiment& x) { return run_osc_scaling(x, osc_scaling); };
  }
  OscInverse osc_inverse;
  {
    auto& e = add("oscillator-inverse",
                  "Damping coefficient from ten samples with unknown initial state, by profile search.");
    e.knob("length", osc_inverse.length, "time span T");
    e.knob("count", osc_inverse.count, "basis size M");
    e.knob("sigma", osc_inverse.sigma, "noise standard deviation");
    e.knob("seed", osc_inverse.seed, "noise seed");
    e.knob("true-damping", osc_inverse.true_damping, "damping used to make the data");
    e.knob("grid", osc_inverse.grid, "candidate damping values, lo:hi:step or a comma list");
    e.run = [&](Experiment& x) { return run_osc_inverse(x, osc_inverse); };
  }
  DiffInverse diff_inverse;
  {
    auto& e = add("diffusion-inverse",
                  "Diffusivity of a 1-D heat equation from sensor data with unknown initial and boundary values.");
    e.knob("profile", diff_inverse.profile, "initial profile: unimodal or bimodal");
    e.knob("diffusivity", diff_inverse.diffusivity, "diffusivity used to make the data");
    e.knob("duration", diff_inverse.duration, "time span");
    e.knob("width", diff_inverse.width, "spatial window");
    e.knob("noise", diff_inverse.noise, "noise standard deviation");
    e.knob("seed", diff_inverse.seed, "noise seed");
    e.knob("m-time", diff_inverse.m_time, "basis size along time");
    e.knob("m-space", diff_inverse.m_space, "basis size along space");
    e.knob("grid", diff_inverse.grid, "candidate diffusivities, lo:hi:step or a comma list");
    e.run = [&](Experiment& x) { return run_diff_inverse(x, diff_inverse); };
  }
  ElasVerify elas;
  {
    auto& e = add("elasticity-verify",
                  "Plane elasticity from boundary displacements of a known equilibrium field.");
    e.knob("field", elas.field, "quadratic (nu 0.5, 23 per axis) or quartic (nu 0, 43 per axis)");
    e.knob("poisson", elas.poisson, "Poisson ratio, or auto");
    e.knob("count", elas.count, "basis size per axis, or auto");
    e.knob("lattice", elas.lattice, "residual lattice points per side");
    e.knob("lower", elas.lower, "lower corner coordinate of the square");
    e.knob("side", elas.side, "side length of the square");
    e.run = [&](Experiment& x) { return run_elas_verify(x, elas); };
  }
  StrainRun strain_run;
  {
    auto& e = add("strain",
                  "Velocity and strain-rate fields from station velocities with marginal-likelihood weight selection.");
    strain_run.source.add(e);
    e.knob("reg", strain_run.reg, "math or phys:<poisson>");
    e.knob("alpha-grid", strain_run.alpha_grid, "log10 alpha^2 grid, lo:hi:step or a comma list");
    e.knob("grid-step", strain_run.grid_step, "output grid step, km");
    e.knob("table", strain_run.table, "also fit math and phys with poisson -1, 0, 0.5 and write table.csv");
    e.run = [&](Experiment& x) { return run_strain(x, strain_run); };
  }
  HybridScan hybrid;
  {
    auto& e = add("hybrid-scan", "Marginal likelihood over pairs of smoothness and elasticity weights.");
    hybrid.source.add(e);
    e.knob("poisson", hybrid.poisson, "Poisson ratio");
    e.knob("math-grid", hybrid.math_grid, "log10 smoothness weights");
    e.knob("phys-grid", hybrid.phys_grid, "log10 elasticity weights");
    e.knob("zero-column", hybrid.zero_column, "include a zero elasticity weight");
    e.run = [&](Experiment& x) { return run_hybrid(x, hybrid); };
  }
  CompareRun cmp;
  auto* compare_app = app.add_subcommand("compare", "Compare two run reports of the same experiment.");
  compare_app->add_option("a", cmp.a, "first report")->required();
  compare_app->add_option("b", cmp.b, "second report")->required();
  compare_app->add_option("--abs-tol", cmp.abs_tol, "absolute tolerance")->capture_default_str();
  compare_app->add_option("--rel-tol", cmp.rel_tol, "relative tolerance")->capture_default_str();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    // splice config entries in right after the subcommand name
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) {
        config = args[i + 1];
        args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
        break;
      }
      if (args[i].rfind("--config=", 0) == 0) {
        config = args[i].substr(9);
        args.erase(args.begin() + static_cast<long>(i));
        break;
      }
    }
    if (!config.empty()) {
      const auto extra = config_arguments(config);
      auto at = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
        return std::any_of(experiments.begin(), experiments.end(), [&](const auto& e) { return e->name == a; });
      });
      if (at == args.end()) throw ConfigError("--config needs an experiment subcommand");
      args.insert(at + 1, extra.begin(), extra.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (compare_app->parsed()) return run_compare(cmp);
    for (auto& e : experiments)
      if (e->app->parsed()) return e->run(*e);
  } catch (const Error& e) {
    const char* kind = e.kind() == ErrorKind::config ? "config" : e.kind() == ErrorKind::data ? "data" : "numerical";
    std::cerr << kind << " error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
