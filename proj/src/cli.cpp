#include "casimir/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "casimir/classical.hpp"
#include "casimir/constants.hpp"
#include "casimir/csv.hpp"
#include "casimir/curvature.hpp"
#include "casimir/errors.hpp"
#include "casimir/fit.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/material.hpp"

namespace casimir::cli {

namespace {

using nlohmann::json;

constexpr double kMicron = 1e-6;
constexpr double kNano = 1e-9;

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": cannot parse number from '" + text + "'");
  }
  if (used != text.size())
    throw std::invalid_argument(what + ": trailing characters in '" + text + "'");
  return v;
}

// lengths require an explicit unit: nm, um, or m
double parse_length(const std::string& text, const std::string& what) {
  static const std::string number_chars = "+-0123456789.eE";
  const std::size_t pos = text.find_first_not_of(number_chars);
  if (pos == std::string::npos)
    throw std::invalid_argument(what + ": length needs a unit suffix nm/um/m, got '" + text +
                                "'");
  const std::string suffix = text.substr(pos);
  double scale = 0.0;
  if (suffix == "nm")
    scale = kNano;
  else if (suffix == "um")
    scale = kMicron;
  else if (suffix == "m")
    scale = 1.0;
  else
    throw std::invalid_argument(what + ": unknown length unit '" + suffix + "' (use nm/um/m)");
  const double v = parse_number(text.substr(0, pos), what);
  if (!(v > 0.0)) throw std::invalid_argument(what + ": length must be positive");
  return v * scale;
}

double parse_radius(const std::string& text, const std::string& what) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  return parse_length(text, what);
}

double parse_temperature(const std::string& text) {
  std::string t = text;
  if (!t.empty() && t.back() == 'K') t.pop_back();
  const double v = parse_number(t, "--temperature");
  if (!(v > 0.0)) throw std::invalid_argument("--temperature: must be positive");
  return v;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// options shared by every subcommand
struct CommonOptions {
  std::string material = "gold";
  double omega_p_ev = 9.0;
  double gamma_ev = 0.035;
  std::string eps_table_path;
  std::string temperature_text = "300";
  double term_tol = 1e-10;
  long max_modes = 100000;
  double quad_tol = 1e-10;
  double l_tol = 1e-12;
  std::string table1_path, table2_path;
  std::string output_path;
  std::string format;  // subcommand-specific default when empty
  int threads = 0;
};

void add_common_options(CLI::App* sub, CommonOptions& o) {
  auto take_last = [](CLI::Option* opt) {
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    return opt;
  };
  take_last(sub->add_option("--material", o.material,
                            "Material model: gold, ideal, drude, tabulated")
                ->check(CLI::IsMember({"gold", "ideal", "drude", "tabulated"})));
  take_last(sub->add_option("--omega-p", o.omega_p_ev, "Drude plasma frequency in eV"));
  take_last(sub->add_option("--gamma", o.gamma_ev, "Drude relaxation rate in eV"));
  take_last(sub->add_option("--eps-table", o.eps_table_path,
                            "CSV permittivity table (xi_rad_per_s,eps) for --material tabulated"));
  take_last(
      sub->add_option("--temperature,-T", o.temperature_text, "Temperature in K (default 300)"));
  take_last(sub->add_option("--term-tol", o.term_tol,
                            "Matsubara relative term tolerance (default 1e-10)"));
  take_last(sub->add_option("--max-modes", o.max_modes, "Matsubara mode cap (default 100000)"));
  take_last(sub->add_option("--quad-tol", o.quad_tol,
                            "Quadrature relative tolerance (default 1e-10)"));
  take_last(sub->add_option("--l-tol", o.l_tol,
                            "Classical series relative tolerance (default 1e-12)"));
  take_last(sub->add_option("--table1", o.table1_path,
                            "Coefficient CSV a_um,theta_tilde,kappa (checksummed)"));
  take_last(sub->add_option("--table2", o.table2_path,
                            "Coefficient CSV a_um,theta_hat,kappa_hat (checksummed)"));
  take_last(sub->add_option("--output", o.output_path, "Write result to file instead of stdout"));
  take_last(sub->add_option("--format", o.format, "Output format: json or csv")
                ->check(CLI::IsMember({"json", "csv"})));
  take_last(sub->add_option("--threads", o.threads, "OpenMP thread count (0 = library default)"));
}

MaterialResponse build_material(const CommonOptions& o) {
  if (o.material == "gold") return MaterialResponse::gold();
  if (o.material == "ideal") return MaterialResponse::ideal_metal();
  if (o.material == "drude") return MaterialResponse::drude(o.omega_p_ev, o.gamma_ev);
  if (o.eps_table_path.empty())
    throw std::invalid_argument("--material tabulated requires --eps-table");
  return MaterialResponse::tabulated_from_csv(o.eps_table_path);
}

MatsubaraPolicy build_policy(const CommonOptions& o) {
  MatsubaraPolicy p;
  p.relative_term_tolerance = o.term_tol;
  p.max_modes = o.max_modes;
  p.quadrature_relative_tolerance = o.quad_tol;
  return p;
}

const CoefficientTable& build_table(const CommonOptions& o, std::optional<CoefficientTable>& owned) {
  if (o.table1_path.empty() != o.table2_path.empty())
    throw std::invalid_argument("--table1 and --table2 must be given together");
  if (o.table1_path.empty()) return CoefficientTable::builtin();
  owned = CoefficientTable::load(o.table1_path, o.table2_path);
  return *owned;
}

void apply_threads(const CommonOptions& o) {
#ifdef _OPENMP
  if (o.threads > 0) omp_set_num_threads(o.threads);
#else
  (void)o;
#endif
}

json provenance_block(const CommonOptions& o, const MaterialResponse& material,
                      const CoefficientTable& table, std::optional<std::uint64_t> seed = {}) {
  json p = {
      {"material", material.description()},
      {"temperature_K", parse_temperature(o.temperature_text)},
      {"coefficient_table",
       {{"source", table.provenance()},
        {"primary_checksum", hex64(table.primary_checksum())},
        {"hat_checksum", hex64(table.hat_checksum())}}},
      {"tolerances",
       {{"relative_term_tolerance", o.term_tol},
        {"max_modes", o.max_modes},
        {"quadrature_relative_tolerance", o.quad_tol},
        {"classical_l_tolerance", o.l_tol}}},
  };
  if (seed) p["seed"] = *seed;
  return p;
}

// geometry options shared by spheres/classical/deviation
struct GeometryOptions {
  std::string r1_text, r2_text = "inf";
  std::string rtilde_text;
  double u = -1.0;
};

void add_geometry_options(CLI::App* sub, GeometryOptions& g) {
  auto take_last = [](CLI::Option* opt) {
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    return opt;
  };
  take_last(sub->add_option("--R1", g.r1_text, "First sphere radius (nm/um/m)"));
  take_last(sub->add_option("--R2", g.r2_text, "Second sphere radius or 'inf' (default inf)"));
  take_last(sub->add_option("--Rtilde", g.rtilde_text,
                            "Effective radius R1 R2/(R1+R2); use with --u"));
  take_last(sub->add_option("--u", g.u, "Radius-ratio parameter in [0, 1/4]; use with --Rtilde"));
}

SphereGeometry build_geometry(const GeometryOptions& g, double gap) {
  const bool by_radii = !g.r1_text.empty();
  const bool by_effective = !g.rtilde_text.empty() || g.u >= 0.0;
  if (by_radii && by_effective)
    throw std::invalid_argument("give either --R1/--R2 or --Rtilde/--u, not both");
  if (by_radii)
    return SphereGeometry(parse_radius(g.r1_text, "--R1"), parse_radius(g.r2_text, "--R2"), gap);
  if (!g.rtilde_text.empty()) {
    const double u = g.u >= 0.0 ? g.u : 0.0;
    return SphereGeometry::from_effective(parse_length(g.rtilde_text, "--Rtilde"), u, gap);
  }
  throw std::invalid_argument("geometry required: --R1 [--R2] or --Rtilde [--u]");
}

// --config: apply JSON file values as defaults, command-line flags win
std::vector<std::string> apply_config_file(const std::vector<std::string>& args,
                                           const CLI::App& app) {
  // extract --config <path> or --config=<path>
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file path");
      config_path = args[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
    } else {
      rest.push_back(a);
    }
  }
  if (config_path.empty()) return rest;

  if (rest.empty() || rest.front().empty() || rest.front()[0] == '-')
    throw std::invalid_argument("--config requires a subcommand on the command line");
  const std::string sub_name = rest.front();
  const CLI::App* sub = nullptr;
  for (const CLI::App* s : app.get_subcommands({})) {
    if (s->get_name() == sub_name) {
      sub = s;
      break;
    }
  }
  if (sub == nullptr) throw std::invalid_argument("unknown subcommand '" + sub_name + "'");

  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot open config file " + config_path);
  json config;
  try {
    config = json::parse(in);
  } catch (const json::exception& ex) {
    throw std::invalid_argument("config file " + config_path + " is not valid JSON: " +
                                ex.what());
  }
  if (!config.is_object())
    throw std::invalid_argument("config file " + config_path + " must hold a JSON object");

  std::vector<std::string> expanded;
  expanded.push_back(sub_name);
  for (auto it = config.begin(); it != config.end(); ++it) {
    const std::string flag = "--" + it.key();
    const CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option(flag);
    } catch (const CLI::OptionNotFound&) {
      throw std::invalid_argument("unknown config key '" + it.key() + "' for subcommand " +
                                  sub_name);
    }
    const json& value = it.value();
    if (value.is_boolean()) {
      if (opt->get_expected_min() > 0)
        throw std::invalid_argument("config key '" + it.key() + "' needs a value, not a bool");
      if (value.get<bool>()) expanded.push_back(flag);
      continue;
    }
    expanded.push_back(flag);
    if (value.is_string())
      expanded.push_back(value.get<std::string>());
    else if (value.is_number_integer())
      expanded.push_back(std::to_string(value.get<long long>()));
    else if (value.is_number())
      expanded.push_back(csv::format_full(value.get<double>()));
    else
      throw std::invalid_argument("config key '" + it.key() +
                                  "' must be a string, number, or boolean");
  }
  // original flags after the config-derived ones, so they take precedence
  expanded.insert(expanded.end(), rest.begin() + 1, rest.end());
  return expanded;
}

class OutputSink {
 public:
  OutputSink(const CommonOptions& o, std::ostream& fallback) {
    if (!o.output_path.empty()) {
      file_.open(o.output_path);
      if (!file_) throw std::invalid_argument("cannot open output file " + o.output_path);
      stream_ = &file_;
    } else {
      stream_ = &fallback;
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

std::string format_or(const CommonOptions& o, const char* fallback) {
  return o.format.empty() ? fallback : o.format;
}

void emit_json(std::ostream& out, const json& doc) { out << doc.dump(2) << '\n'; }

// ---------------------------------------------------------------- plane ----

struct PlaneArgs {
  CommonOptions common;
  std::string a_text;
};

void run_plane(const PlaneArgs& args, std::ostream& out) {
  const double a = parse_length(args.a_text, "--a");
  const MaterialResponse material = build_material(args.common);
  const ThermalEnvironment thermal(parse_temperature(args.common.temperature_text));
  const MatsubaraPolicy policy = build_policy(args.common);
  apply_threads(args.common);

  const PlaneInteractionSplit s = plane_interaction(material, thermal, a, policy);

  OutputSink sink(args.common, out);
  if (format_or(args.common, "json") == "csv") {
    sink.stream()
        << "separation_m,free_energy_n0_J_per_m2,free_energy_npos_J_per_m2,free_energy_total_J_"
           "per_m2,force_n0_N_per_m2,force_npos_N_per_m2,force_total_N_per_m2,force_gradient_n0_"
           "N_per_m3,force_gradient_npos_N_per_m3,force_gradient_total_N_per_m3,modes_used\n";
    sink.stream() << csv::format_full(s.separation) << ',' << csv::format_full(s.free_energy_n0)
                  << ',' << csv::format_full(s.free_energy_npos) << ','
                  << csv::format_full(s.free_energy_total()) << ','
                  << csv::format_full(s.force_n0) << ',' << csv::format_full(s.force_npos) << ','
                  << csv::format_full(s.force_total()) << ','
                  << csv::format_full(s.force_gradient_n0) << ','
                  << csv::format_full(s.force_gradient_npos) << ','
                  << csv::format_full(s.force_gradient_total()) << ',' << s.modes_used << '\n';
    return;
  }
  std::optional<CoefficientTable> owned;
  const CoefficientTable& table = build_table(args.common, owned);
  json doc = {
      {"subcommand", "plane"},
      {"inputs", {{"separation_m", a}}},
      {"result",
       {{"free_energy_n0_J_per_m2", s.free_energy_n0},
        {"free_energy_npos_J_per_m2", s.free_energy_npos},
        {"free_energy_total_J_per_m2", s.free_energy_total()},
        {"force_n0_N_per_m2", s.force_n0},
        {"force_npos_N_per_m2", s.force_npos},
        {"force_total_N_per_m2", s.force_total()},
        {"force_gradient_n0_N_per_m3", s.force_gradient_n0},
        {"force_gradient_npos_N_per_m3", s.force_gradient_npos},
        {"force_gradient_total_N_per_m3", s.force_gradient_total()},
        {"modes_used", s.modes_used}}},
      {"provenance", provenance_block(args.common, material, table)},
  };
  emit_json(sink.stream(), doc);
}

// -------------------------------------------------------------- spheres ----

struct SpheresArgs {
  CommonOptions common;
  GeometryOptions geometry;
  std::string a_text;
};

void run_spheres(const SpheresArgs& args, std::ostream& out, std::ostream& err) {
  const double a = parse_length(args.a_text, "--a");
  const SphereGeometry geom = build_geometry(args.geometry, a);
  const MaterialResponse material = build_material(args.common);
  const ThermalEnvironment thermal(parse_temperature(args.common.temperature_text));
  CurvaturePolicies policies;
  policies.matsubara = build_policy(args.common);
  policies.classical_l_tolerance = args.common.l_tol;
  std::optional<CoefficientTable> owned;
  const CoefficientTable& table = build_table(args.common, owned);
  apply_threads(args.common);

  if (!derivative_expansion_trustworthy(geom, thermal))
    err << "warning: min(R1, R2) < 10 thermal lengths; the curvature correction for the "
           "thermal modes is outside its validated regime\n";

  const DeviationReport report = deviation_report(material, thermal, geom, table, policies);
  const double classical_part =
      classical_force_gradient(geom, thermal, policies.classical_l_tolerance);
  const double thermal_part = report.force_gradient - classical_part;

  OutputSink sink(args.common, out);
  if (format_or(args.common, "json") == "csv") {
    sink.stream() << "R1_um,R2_um,a_um,Rtilde_um,u,force_gradient_N_per_m,classical_n0_N_per_m,"
                     "thermal_npos_N_per_m,pfa_force_gradient_N_per_m,deviation_metric,beta_"
                     "prime,effective_pressure_Pa\n";
    sink.stream() << csv::format_g12(geom.radius_1() / kMicron) << ',';
    if (geom.sphere_plate())
      sink.stream() << "inf";
    else
      sink.stream() << csv::format_g12(geom.radius_2() / kMicron);
    sink.stream() << ',' << csv::format_g12(a / kMicron) << ','
                  << csv::format_g12(geom.effective_radius() / kMicron) << ','
                  << csv::format_full(geom.u()) << ',' << csv::format_full(report.force_gradient)
                  << ',' << csv::format_full(classical_part) << ','
                  << csv::format_full(thermal_part) << ','
                  << csv::format_full(report.pfa_force_gradient) << ','
                  << csv::format_full(report.deviation_metric) << ','
                  << csv::format_full(report.beta_prime) << ','
                  << csv::format_full(report.effective_pressure) << '\n';
    return;
  }
  json doc = {
      {"subcommand", "spheres"},
      {"inputs",
       {{"R1_m", geom.radius_1()},
        {"R2_m", geom.sphere_plate() ? json("inf") : json(geom.radius_2())},
        {"separation_m", a},
        {"Rtilde_m", geom.effective_radius()},
        {"u", geom.u()},
        {"x", geom.x()}}},
      {"result",
       {{"force_gradient_N_per_m", report.force_gradient},
        {"classical_n0_N_per_m", classical_part},
        {"thermal_npos_N_per_m", thermal_part},
        {"pfa_force_gradient_N_per_m", report.pfa_force_gradient},
        {"deviation_metric", report.deviation_metric},
        {"beta_prime", report.beta_prime},
        {"beta_prime_from_table", report.beta_from_table},
        {"effective_pressure_Pa", report.effective_pressure},
        {"derivative_expansion_trustworthy", derivative_expansion_trustworthy(geom, thermal)}}},
      {"provenance", provenance_block(args.common, material, table)},
  };
  emit_json(sink.stream(), doc);
}

// ------------------------------------------------------------- classical ----

struct ClassicalArgs {
  CommonOptions common;
  GeometryOptions geometry;
  std::string a_text;
};

void run_classical(const ClassicalArgs& args, std::ostream& out) {
  const double a = parse_length(args.a_text, "--a");
  const SphereGeometry geom = build_geometry(args.geometry, a);
  const ThermalEnvironment thermal(parse_temperature(args.common.temperature_text));
  const ClassicalInteraction result =
      classical_interaction(geom, thermal, args.common.l_tol);

  OutputSink sink(args.common, out);
  if (format_or(args.common, "json") == "csv") {
    sink.stream() << "a_um,Rtilde_um,u,x,z_parameter,free_energy_J,force_N,force_gradient_N_per_"
                     "m,small_x_expansion_N_per_m,terms\n";
    sink.stream() << csv::format_g12(a / kMicron) << ','
                  << csv::format_g12(geom.effective_radius() / kMicron) << ','
                  << csv::format_full(geom.u()) << ',' << csv::format_full(geom.x()) << ','
                  << csv::format_full(geom.z_parameter()) << ','
                  << csv::format_full(result.free_energy) << ',' << csv::format_full(result.force)
                  << ',' << csv::format_full(result.force_gradient) << ','
                  << csv::format_full(classical_small_x_expansion(geom, thermal)) << ','
                  << result.terms << '\n';
    return;
  }
  json doc = {
      {"subcommand", "classical"},
      {"inputs",
       {{"R1_m", geom.radius_1()},
        {"R2_m", geom.sphere_plate() ? json("inf") : json(geom.radius_2())},
        {"separation_m", a},
        {"Rtilde_m", geom.effective_radius()},
        {"u", geom.u()},
        {"x", geom.x()},
        {"z_parameter", geom.z_parameter()}}},
      {"result",
       {{"free_energy_J", result.free_energy},
        {"force_N", result.force},
        {"force_gradient_N_per_m", result.force_gradient},
        {"small_x_expansion_N_per_m", classical_small_x_expansion(geom, thermal)},
        {"terms", result.terms}}},
  };
  emit_json(sink.stream(), doc);
}

// ---------------------------------------------------------------- coeffs ----

struct CoeffsArgs {
  CommonOptions common;
  std::string a_text;
};

void run_coeffs(const CoeffsArgs& args, std::ostream& out) {
  const double a = parse_length(args.a_text, "--a");
  const MaterialResponse material = build_material(args.common);
  const ThermalEnvironment thermal(parse_temperature(args.common.temperature_text));
  const MatsubaraPolicy policy = build_policy(args.common);
  std::optional<CoefficientTable> owned;
  const CoefficientTable& table = build_table(args.common, owned);
  apply_threads(args.common);

  // strict: theta_tilde has no fallback outside its grid
  const double theta = theta_tilde(table, a);
  const KappaValue kap = kappa(table, a, material, thermal, policy);
  const double kappa_computed = kappa_from_lifshitz(material, thermal, a, policy);
  const HatCoefficients hats = hat_coefficients(material, thermal, a, theta, kap.value, policy);
  const double alpha = implied_alpha_npos(material, thermal, a, theta, policy);

  json result = {
      {"theta_tilde", theta},
      {"kappa", kap.value},
      {"kappa_provenance", kap.provenance},
      {"kappa_computed_from_lifshitz", kappa_computed},
      {"hat_from_conversion", {{"theta_hat", hats.theta_hat}, {"kappa_hat", hats.kappa_hat}}},
      {"implied_alpha_npos_J_per_m2", alpha},
  };
  if (a >= table.hat_grid_min() && a <= table.hat_grid_max()) {
    result["theta_hat"] = table.theta_hat(a);
    result["kappa_hat"] = table.kappa_hat(a);
  } else {
    result["theta_hat"] = nullptr;
    result["kappa_hat"] = nullptr;
  }

  OutputSink sink(args.common, out);
  if (format_or(args.common, "json") == "csv") {
    sink.stream() << "a_um,theta_tilde,kappa,kappa_computed,theta_hat_conv,kappa_hat_conv\n"
                  << csv::format_g12(a / kMicron) << ',' << csv::format_full(theta) << ','
                  << csv::format_full(kap.value) << ',' << csv::format_full(kappa_computed)
                  << ',' << csv::format_full(hats.theta_hat) << ','
                  << csv::format_full(hats.kappa_hat) << '\n';
    return;
  }
  json doc = {
      {"subcommand", "coeffs"},
      {"inputs", {{"separation_m", a}}},
      {"result", result},
      {"provenance", provenance_block(args.common, material, table)},
  };
  emit_json(sink.stream(), doc);
}

// ------------------------------------------------------------- deviation ----

struct DeviationArgs {
  CommonOptions common;
  GeometryOptions geometry;
  bool u_sweep = false;
  bool a_sweep = false;
  std::string a_text;
  std::string a_min_text, a_max_text;
  int a_count = 26;
  std::string spacing = "linear";
};

void run_deviation(const DeviationArgs& args, std::ostream& out, std::ostream& err) {
  const MaterialResponse material = build_material(args.common);
  const ThermalEnvironment thermal(parse_temperature(args.common.temperature_text));
  CurvaturePolicies policies;
  policies.matsubara = build_policy(args.common);
  policies.classical_l_tolerance = args.common.l_tol;
  std::optional<CoefficientTable> owned;
  const CoefficientTable& table = build_table(args.common, owned);
  apply_threads(args.common);

  if (args.u_sweep == args.a_sweep)
    throw std::invalid_argument("deviation: choose exactly one of --u-sweep or --a-sweep");

  struct Row {
    double a, u, rtilde;
    DeviationReport report;
  };
  std::vector<Row> rows;

  if (args.u_sweep) {
    if (args.a_text.empty() || args.geometry.rtilde_text.empty())
      throw std::invalid_argument("deviation --u-sweep needs --a and --Rtilde");
    const double a = parse_length(args.a_text, "--a");
    const double rtilde = parse_length(args.geometry.rtilde_text, "--Rtilde");
    for (int i = 0; i <= 10; ++i) {
      const double u = 0.25 * static_cast<double>(i) / 10.0;
      const SphereGeometry geom = SphereGeometry::from_effective(rtilde, u, a);
      rows.push_back({a, u, rtilde, deviation_report(material, thermal, geom, table, policies)});
    }
  } else {
    if (args.a_min_text.empty() || args.a_max_text.empty())
      throw std::invalid_argument("deviation --a-sweep needs --a-min and --a-max");
    if (args.a_count < 2) throw std::invalid_argument("deviation: --a-count must be >= 2");
    const double a_min = parse_length(args.a_min_text, "--a-min");
    const double a_max = parse_length(args.a_max_text, "--a-max");
    if (!(a_max > a_min)) throw std::invalid_argument("deviation: need --a-max > --a-min");
    for (int i = 0; i < args.a_count; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(args.a_count - 1);
      const double a = (args.spacing == "log")
                           ? a_min * std::pow(a_max / a_min, f)
                           : a_min + (a_max - a_min) * f;
      const SphereGeometry geom = build_geometry(args.geometry, a);
      rows.push_back({a, geom.u(), geom.effective_radius(),
                      deviation_report(material, thermal, geom, table, policies)});
    }
  }

  if (!rows.empty()) {
    const SphereGeometry& g0 = rows.front().report.geometry;
    if (!derivative_expansion_trustworthy(g0, thermal))
      err << "warning: min(R1, R2) < 10 thermal lengths; the curvature correction for the "
             "thermal modes is outside its validated regime\n";
  }

  OutputSink sink(args.common, out);
  if (format_or(args.common, "csv") == "json") {
    json rows_json = json::array();
    for (const Row& r : rows) {
      rows_json.push_back({{"a_um", r.a / kMicron},
                           {"u", r.u},
                           {"Rtilde_um", r.rtilde / kMicron},
                           {"force_gradient_N_per_m", r.report.force_gradient},
                           {"pfa_force_gradient_N_per_m", r.report.pfa_force_gradient},
                           {"deviation_metric", r.report.deviation_metric},
                           {"beta_prime", r.report.beta_prime}});
    }
    json doc = {
        {"subcommand", "deviation"},
        {"rows", rows_json},
        {"provenance", provenance_block(args.common, material, table)},
    };
    emit_json(sink.stream(), doc);
    return;
  }
  sink.stream() << "a_um,u,Rtilde_um,force_gradient_N_per_m,pfa_force_gradient_N_per_m,"
                   "deviation_metric,beta_prime\n";
  for (const Row& r : rows) {
    sink.stream() << csv::format_g12(r.a / kMicron) << ',' << csv::format_g12(r.u) << ','
                  << csv::format_g12(r.rtilde / kMicron) << ','
                  << csv::format_full(r.report.force_gradient) << ','
                  << csv::format_full(r.report.pfa_force_gradient) << ','
                  << csv::format_full(r.report.deviation_metric) << ','
                  << csv::format_full(r.report.beta_prime) << '\n';
  }
}

// ------------------------------------------------------------------ fit ----

struct FitArgs {
  CommonOptions common;
  std::string dataset_path;
  std::string emit_dataset_path;
  std::string fit_a_text;
  std::string model = "both";
  double noise = 0.0;
  std::uint64_t seed = 1;
};

json fit_result_to_json(const FitResult& r) {
  json coefficients = json::array();
  for (std::size_t i = 0; i < r.estimates.size(); ++i)
    coefficients.push_back({{"name", r.coefficient_names[i]},
                            {"estimate", r.estimates[i]},
                            {"standard_error", r.standard_errors[i]}});
  double rss = 0.0;
  for (double res : r.residuals) rss += res * res;
  const double rms =
      r.residuals.empty() ? 0.0 : std::sqrt(rss / static_cast<double>(r.residuals.size()));
  return {{"coefficients", coefficients},
          {"condition_number", r.condition_number},
          {"n_records", r.residuals.size()},
          {"residual_rms", rms}};
}

void run_fit(const FitArgs& args, std::ostream& out) {
  const MaterialResponse material = build_material(args.common);
  const ThermalEnvironment thermal(parse_temperature(args.common.temperature_text));
  CurvaturePolicies policies;
  policies.matsubara = build_policy(args.common);
  policies.classical_l_tolerance = args.common.l_tol;
  std::optional<CoefficientTable> owned;
  const CoefficientTable& table = build_table(args.common, owned);
  apply_threads(args.common);

  FitDataset dataset;
  std::string source;
  if (!args.dataset_path.empty()) {
    dataset = read_dataset_csv(args.dataset_path);
    source = args.dataset_path;
  } else {
    dataset = synthesize_dataset(material, thermal, experimental_radius_combinations(),
                                 experimental_separations(), table, args.noise, args.seed,
                                 policies);
    source = "synthesized";
  }

  if (!args.emit_dataset_path.empty()) {
    std::ofstream f(args.emit_dataset_path);
    if (!f) throw std::invalid_argument("cannot open " + args.emit_dataset_path);
    write_dataset_csv(f, dataset);
  }

  json doc = {
      {"subcommand", "fit"},
      {"dataset", {{"source", source}, {"records", dataset.records.size()}}},
      {"provenance", provenance_block(args.common, material, table, args.seed)},
  };

  if (!args.fit_a_text.empty()) {
    const double fit_a = parse_length(args.fit_a_text, "--fit-a");
    json fits;
    if (args.model == "one" || args.model == "both")
      fits["one_parameter"] =
          fit_result_to_json(fit_one_parameter(dataset, fit_a, material, thermal,
                                               policies.matsubara));
    if (args.model == "two" || args.model == "both")
      fits["two_parameter"] =
          fit_result_to_json(fit_two_parameter(dataset, fit_a, material, thermal,
                                               policies.matsubara));
    doc["fits"] = fits;
    doc["fit_separation_m"] = fit_a;
    if (fit_a >= table.hat_grid_min() && fit_a <= table.hat_grid_max())
      doc["reference"] = {{"theta_hat_table", table.theta_hat(fit_a)},
                          {"kappa_hat_table", table.kappa_hat(fit_a)}};
  } else if (args.emit_dataset_path.empty()) {
    throw std::invalid_argument("fit: give --fit-a to fit, or --emit-dataset to export data");
  }

  OutputSink sink(args.common, out);
  emit_json(sink.stream(), doc);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Casimir force gradient between metallic spheres: exact classical mode plus "
               "curvature-corrected thermal modes, PFA baselines, deviation metrics, and an "
               "experiment-style fitting harness"};
  app.require_subcommand(1);

  PlaneArgs plane_args;
  CLI::App* plane = app.add_subcommand(
      "plane", "Plane-plane free energy, force, and force gradient (n=0 / n>0 split)");
  add_common_options(plane, plane_args.common);
  plane->add_option("--a", plane_args.a_text, "Separation (nm/um/m)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SpheresArgs spheres_args;
  CLI::App* spheres = app.add_subcommand(
      "spheres", "Beyond-PFA force gradient for two spheres (or sphere-plate)");
  add_common_options(spheres, spheres_args.common);
  add_geometry_options(spheres, spheres_args.geometry);
  spheres->add_option("--a", spheres_args.a_text, "Separation (nm/um/m)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  ClassicalArgs classical_args;
  CLI::App* classical = app.add_subcommand(
      "classical", "Exact classical (zero-frequency) sphere-sphere interaction");
  add_common_options(classical, classical_args.common);
  add_geometry_options(classical, classical_args.geometry);
  classical->add_option("--a", classical_args.a_text, "Separation (nm/um/m)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  CoeffsArgs coeffs_args;
  CLI::App* coeffs = app.add_subcommand(
      "coeffs", "Curvature coefficients: table lookups, computed kappa, hat conversion");
  add_common_options(coeffs, coeffs_args.common);
  coeffs->add_option("--a", coeffs_args.a_text, "Separation (nm/um/m)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  DeviationArgs deviation_args;
  CLI::App* deviation = app.add_subcommand(
      "deviation", "Beyond-PFA deviation sweeps (CSV rows per grid point)");
  add_common_options(deviation, deviation_args.common);
  add_geometry_options(deviation, deviation_args.geometry);
  deviation->add_flag("--u-sweep", deviation_args.u_sweep,
                      "Sweep u over 11 points in [0, 1/4] at fixed --a, --Rtilde");
  deviation->add_flag("--a-sweep", deviation_args.a_sweep,
                      "Sweep separation over [--a-min, --a-max] at fixed geometry");
  deviation->add_option("--a", deviation_args.a_text, "Separation for --u-sweep (nm/um/m)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  deviation->add_option("--a-min", deviation_args.a_min_text, "Sweep start (nm/um/m)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  deviation->add_option("--a-max", deviation_args.a_max_text, "Sweep end (nm/um/m)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  deviation->add_option("--a-count", deviation_args.a_count, "Sweep point count (default 26)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  deviation->add_option("--spacing", deviation_args.spacing, "Grid spacing: linear or log")
      ->check(CLI::IsMember({"linear", "log"}))
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit", "Synthesize or load F'/R~ datasets and run the one- and two-parameter fits");
  add_common_options(fit, fit_args.common);
  fit->add_option("--dataset", fit_args.dataset_path,
                  "Read records from CSV instead of synthesizing")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  fit->add_option("--emit-dataset", fit_args.emit_dataset_path,
                  "Write the dataset used to this CSV path")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  fit->add_option("--fit-a", fit_args.fit_a_text, "Separation at which to fit (nm/um/m)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  fit->add_option("--model", fit_args.model, "one, two, or both (default both)")
      ->check(CLI::IsMember({"one", "two", "both"}))
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  fit->add_option("--noise", fit_args.noise, "Gaussian noise scale on F'/R~ (N/m^2)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  fit->add_option("--seed", fit_args.seed, "Noise seed (default 1)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  try {
    std::vector<std::string> effective_args = apply_config_file(args, app);
    // CLI11's vector parse expects reversed order
    std::vector<std::string> reversed(effective_args.rbegin(), effective_args.rend());
    app.parse(reversed);

    if (plane->parsed()) {
      run_plane(plane_args, out);
    } else if (spheres->parsed()) {
      run_spheres(spheres_args, out, err);
    } else if (classical->parsed()) {
      run_classical(classical_args, out);
    } else if (coeffs->parsed()) {
      run_coeffs(coeffs_args, out);
    } else if (deviation->parsed()) {
      run_deviation(deviation_args, out, err);
    } else if (fit->parsed()) {
      run_fit(fit_args, out);
    }
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "usage error: " << ex.what() << '\n';
    return 2;
  } catch (const NumericError& ex) {
    err << "numeric error: " << ex.what() << '\n';
    return 3;
  } catch (const FitError& ex) {
    err << "fit error: " << ex.what() << '\n';
    return 3;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  }
}

}  // namespace casimir::cli
