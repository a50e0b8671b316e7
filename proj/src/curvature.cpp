#include "casimir/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "casimir/csv.hpp"
#include "casimir/errors.hpp"
#include "casimir/quadrature.hpp"

namespace casimir {

namespace {

// Reference coefficients for gold at room temperature, separations in um.
// Stored verbatim (note the 4-digit entries); never re-rounded.
constexpr int kPrimaryRows = 24;
constexpr double kPrimaryAum[kPrimaryRows] = {0.10, 0.15, 0.2,  0.25, 0.3,  0.35, 0.4,  0.45,
                                              0.5,  0.55, 0.6,  0.65, 0.70, 0.75, 0.8,  0.85,
                                              0.9,  0.95, 1.0,  1.2,  1.4,  1.6,  1.8,  2.0};
constexpr double kThetaTilde[kPrimaryRows] = {0.456,  0.4715, 0.470, 0.463,  0.454, 0.4445,
                                              0.435,  0.425,  0.415, 0.4055, 0.396, 0.387,
                                              0.379,  0.370,  0.362, 0.3545, 0.347, 0.3395,
                                              0.332,  0.306,  0.282, 0.261,  0.242, 0.225};
constexpr double kKappa[kPrimaryRows] = {0.245, 0.270, 0.289, 0.305, 0.319, 0.331, 0.342, 0.353,
                                         0.362, 0.371, 0.380, 0.389, 0.397, 0.405, 0.413, 0.421,
                                         0.429, 0.437, 0.444, 0.474, 0.502, 0.529, 0.554, 0.578};

constexpr int kHatRows = 12;
constexpr double kHatAum[kHatRows] = {0.05, 0.10, 0.15, 0.2,  0.25, 0.3,
                                      0.35, 0.4,  0.45, 0.5,  0.55, 0.6};
constexpr double kThetaHat[kHatRows] = {0.378, 0.439, 0.449, 0.443, 0.432, 0.419,
                                        0.405, 0.392, 0.378, 0.365, 0.352, 0.340};
constexpr double kKappaHat[kHatRows] = {0.209, 0.237, 0.259, 0.275, 0.288, 0.298,
                                        0.306, 0.313, 0.320, 0.325, 0.330, 0.334};

constexpr double kMicron = 1e-6;

std::string canonical_rows(const std::vector<double>& a_m, const std::vector<double>& c1,
                           const std::vector<double>& c2) {
  std::string s;
  for (std::size_t i = 0; i < a_m.size(); ++i) {
    s += csv::format_full(a_m[i] / kMicron);
    s += ',';
    s += csv::format_full(c1[i]);
    s += ',';
    s += csv::format_full(c2[i]);
    s += '\n';
  }
  return s;
}

struct CsvTable {
  std::vector<double> a_m, col1, col2;
};

CsvTable read_coefficient_csv(const std::string& path, const std::string& col1_name,
                              const std::string& col2_name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("curvature: cannot open coefficient table " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("curvature: empty coefficient table " + path);
  auto header = csv::split(line);
  if (header.size() != 3 || header[0] != "a_um" || header[1] != col1_name ||
      header[2] != col2_name)
    throw std::runtime_error("curvature: expected header 'a_um," + col1_name + "," + col2_name +
                             "' in " + path);
  CsvTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = csv::split(line);
    if (fields.size() != 3)
      throw std::runtime_error("curvature: malformed row in " + path + ": " + line);
    t.a_m.push_back(std::stod(fields[0]) * kMicron);
    t.col1.push_back(std::stod(fields[1]));
    t.col2.push_back(std::stod(fields[2]));
  }
  return t;
}

}  // namespace

const CoefficientTable& CoefficientTable::builtin() {
  static const CoefficientTable table = [] {
    CoefficientTable t;
    t.primary_grid_.assign(kPrimaryAum, kPrimaryAum + kPrimaryRows);
    for (double& a : t.primary_grid_) a *= kMicron;
    t.theta_tilde_.assign(kThetaTilde, kThetaTilde + kPrimaryRows);
    t.kappa_.assign(kKappa, kKappa + kPrimaryRows);
    t.hat_grid_.assign(kHatAum, kHatAum + kHatRows);
    for (double& a : t.hat_grid_) a *= kMicron;
    t.theta_hat_.assign(kThetaHat, kThetaHat + kHatRows);
    t.kappa_hat_.assign(kKappaHat, kKappaHat + kHatRows);
    t.provenance_ = "builtin";
    t.build_interpolants();
    return t;
  }();
  return table;
}

CoefficientTable CoefficientTable::load(const std::string& primary_csv_path,
                                        const std::string& hat_csv_path) {
  CsvTable primary = read_coefficient_csv(primary_csv_path, "theta_tilde", "kappa");
  CsvTable hat = read_coefficient_csv(hat_csv_path, "theta_hat", "kappa_hat");

  CoefficientTable t;
  t.primary_grid_ = std::move(primary.a_m);
  t.theta_tilde_ = std::move(primary.col1);
  t.kappa_ = std::move(primary.col2);
  t.hat_grid_ = std::move(hat.a_m);
  t.theta_hat_ = std::move(hat.col1);
  t.kappa_hat_ = std::move(hat.col2);

  const CoefficientTable& ref = builtin();
  if (t.primary_checksum() != ref.primary_checksum())
    throw std::runtime_error("curvature: " + primary_csv_path +
                             " does not match the reference coefficient data (checksum "
                             "mismatch); refusing to run with altered tables");
  if (t.hat_checksum() != ref.hat_checksum())
    throw std::runtime_error("curvature: " + hat_csv_path +
                             " does not match the reference coefficient data (checksum "
                             "mismatch); refusing to run with altered tables");
  t.provenance_ = primary_csv_path + ";" + hat_csv_path;
  t.build_interpolants();
  return t;
}

void CoefficientTable::build_interpolants() {
  for (std::size_t i = 0; i < primary_grid_.size(); ++i) {
    if (i > 0 && !(primary_grid_[i] > primary_grid_[i - 1]))
      throw std::invalid_argument("curvature: primary grid must be strictly increasing");
    if (!(theta_tilde_[i] > 0.0) || !(kappa_[i] > 0.0))
      throw std::invalid_argument("curvature: coefficients must be positive");
  }
  for (std::size_t i = 0; i < hat_grid_.size(); ++i) {
    if (i > 0 && !(hat_grid_[i] > hat_grid_[i - 1]))
      throw std::invalid_argument("curvature: hat grid must be strictly increasing");
    if (!(theta_hat_[i] > 0.0) || !(kappa_hat_[i] > 0.0))
      throw std::invalid_argument("curvature: coefficients must be positive");
  }
  theta_tilde_interp_ = MonotoneCubic(primary_grid_, theta_tilde_);
  kappa_interp_ = MonotoneCubic(primary_grid_, kappa_);
  theta_hat_interp_ = MonotoneCubic(hat_grid_, theta_hat_);
  kappa_hat_interp_ = MonotoneCubic(hat_grid_, kappa_hat_);
}

double CoefficientTable::theta_tilde(double separation) const {
  if (separation < theta_grid_min() || separation > theta_grid_max())
    throw std::out_of_range("curvature: separation " + csv::format_g12(separation / kMicron) +
                            " um outside the theta_tilde grid [" +
                            csv::format_g12(theta_grid_min() / kMicron) + ", " +
                            csv::format_g12(theta_grid_max() / kMicron) +
                            "] um; theta_tilde has no computable fallback");
  return theta_tilde_interp_(separation);
}

double CoefficientTable::kappa(double separation) const {
  if (separation < theta_grid_min() || separation > theta_grid_max())
    throw std::out_of_range("curvature: separation outside the kappa grid");
  return kappa_interp_(separation);
}

double CoefficientTable::theta_hat(double separation) const {
  if (separation < hat_grid_min() || separation > hat_grid_max())
    throw std::out_of_range("curvature: separation outside the hat-coefficient grid");
  return theta_hat_interp_(separation);
}

double CoefficientTable::kappa_hat(double separation) const {
  if (separation < hat_grid_min() || separation > hat_grid_max())
    throw std::out_of_range("curvature: separation outside the hat-coefficient grid");
  return kappa_hat_interp_(separation);
}

std::uint64_t CoefficientTable::primary_checksum() const {
  return csv::fnv1a(canonical_rows(primary_grid_, theta_tilde_, kappa_));
}

std::uint64_t CoefficientTable::hat_checksum() const {
  return csv::fnv1a(canonical_rows(hat_grid_, theta_hat_, kappa_hat_));
}

double kappa_from_plane(const PlaneInteractionSplit& plane) {
  return 1.0 - 2.0 * plane.free_energy_npos / (plane.separation * plane.force_npos);
}

double kappa_from_lifshitz(const MaterialResponse& material, const ThermalEnvironment& thermal,
                           double separation, const MatsubaraPolicy& policy) {
  return kappa_from_plane(plane_interaction(material, thermal, separation, policy));
}

double kappa_from_lifshitz_zero_temperature(const MaterialResponse& material, double separation,
                                            const MatsubaraPolicy& policy) {
  ZeroTemperatureInteraction s =
      plane_interaction_zero_temperature(material, separation, policy);
  return 1.0 - 2.0 * s.free_energy / (separation * s.force);
}

double theta_tilde(const CoefficientTable& table, double separation) {
  return table.theta_tilde(separation);
}

KappaValue kappa(const CoefficientTable& table, double separation,
                 const MaterialResponse& material, const ThermalEnvironment& thermal,
                 const MatsubaraPolicy& policy) {
  KappaValue out;
  if (separation >= table.theta_grid_min() && separation <= table.theta_grid_max()) {
    out.value = table.kappa(separation);
    out.from_table = true;
    out.provenance = "table";
  } else {
    out.value = kappa_from_lifshitz(material, thermal, separation, policy);
    out.from_table = false;
    out.provenance = "lifshitz-ratio (separation outside the coefficient grid)";
  }
  return out;
}

HatCoefficients hat_coefficients(const PlaneInteractionSplit& plane, double theta_tilde_value,
                                 double kappa_value) {
  const double total = plane.force_total();
  const double frac_npos = plane.force_npos / total;
  const double frac_n0 = plane.force_n0 / total;
  HatCoefficients out;
  out.theta_hat = frac_npos * theta_tilde_value - frac_n0 / (12.0 * constants::zeta3);
  out.kappa_hat = frac_npos * kappa_value;
  return out;
}

HatCoefficients hat_coefficients(const MaterialResponse& material,
                                 const ThermalEnvironment& thermal, double separation,
                                 double theta_tilde_value, double kappa_value,
                                 const MatsubaraPolicy& policy) {
  return hat_coefficients(plane_interaction(material, thermal, separation, policy),
                          theta_tilde_value, kappa_value);
}

bool derivative_expansion_trustworthy(const SphereGeometry& geom,
                                      const ThermalEnvironment& thermal) {
  const double limit = 10.0 * thermal.thermal_length();
  return std::min(geom.radius_1(), geom.radius_2()) >= limit;
}

namespace {

// theta_tilde frozen at the nearest grid edge when the separation leaves
// the table: below the grid the DE itself is out of validity, above it the
// n>0 term the coefficient multiplies is exponentially negligible.
double theta_tilde_clamped(const CoefficientTable& table, double separation) {
  const double clamped =
      std::clamp(separation, table.theta_grid_min(), table.theta_grid_max());
  return table.theta_tilde(clamped);
}

}  // namespace

double force_gradient_total(const PlaneInteractionSplit& plane, const SphereGeometry& geom,
                            const ThermalEnvironment& thermal, const CoefficientTable& table,
                            double classical_l_tolerance) {
  const double a = geom.gap();
  const double rt = geom.effective_radius();
  const double classical_part = classical_force_gradient(geom, thermal, classical_l_tolerance);
  const double theta = theta_tilde_clamped(table, a);
  // kappa from the table when covered; otherwise its defining ratio, reusing
  // the split already computed for this separation
  const double kap = (a >= table.theta_grid_min() && a <= table.theta_grid_max())
                         ? table.kappa(a)
                         : kappa_from_plane(plane);
  const double correction = 1.0 - (theta + geom.u() * kap) * a / rt;
  return classical_part - 2.0 * constants::pi * rt * plane.force_npos * correction;
}

double force_gradient_total(const MaterialResponse& material, const ThermalEnvironment& thermal,
                            const SphereGeometry& geom, const CoefficientTable& table,
                            const CurvaturePolicies& policies) {
  PlaneInteractionSplit s = plane_interaction(material, thermal, geom.gap(), policies.matsubara);
  return force_gradient_total(s, geom, thermal, table, policies.classical_l_tolerance);
}

double pfa_force(const MaterialResponse& material, const ThermalEnvironment& thermal,
                 const SphereGeometry& geom, const MatsubaraPolicy& policy) {
  PlaneInteractionSplit s = plane_interaction(material, thermal, geom.gap(), policy);
  return 2.0 * constants::pi * geom.effective_radius() * s.free_energy_total();
}

double pfa_force_gradient(const MaterialResponse& material, const ThermalEnvironment& thermal,
                          const SphereGeometry& geom, const MatsubaraPolicy& policy) {
  PlaneInteractionSplit s = plane_interaction(material, thermal, geom.gap(), policy);
  return -2.0 * constants::pi * geom.effective_radius() * s.force_total();
}

DeviationReport deviation_report(const MaterialResponse& material,
                                 const ThermalEnvironment& thermal, const SphereGeometry& geom,
                                 const CoefficientTable& table,
                                 const CurvaturePolicies& policies) {
  DeviationReport report{geom};
  const double a = geom.gap();
  const double rt = geom.effective_radius();
  PlaneInteractionSplit s = plane_interaction(material, thermal, a, policies.matsubara);
  report.force_gradient =
      force_gradient_total(s, geom, thermal, table, policies.classical_l_tolerance);
  report.pfa_force_gradient = -2.0 * constants::pi * rt * s.force_total();
  report.deviation_metric =
      (rt / a) * (report.force_gradient / report.pfa_force_gradient - 1.0);
  report.effective_pressure = -report.force_gradient / (2.0 * constants::pi * rt);

  double th, kh;
  if (a >= table.hat_grid_min() && a <= table.hat_grid_max()) {
    th = table.theta_hat(a);
    kh = table.kappa_hat(a);
    report.beta_from_table = true;
  } else {
    const double theta = theta_tilde_clamped(table, a);
    const double kap = (a >= table.theta_grid_min() && a <= table.theta_grid_max())
                           ? table.kappa(a)
                           : kappa_from_plane(s);
    HatCoefficients hats = hat_coefficients(s, theta, kap);
    th = hats.theta_hat;
    kh = hats.kappa_hat;
    report.beta_from_table = false;
  }
  report.beta_prime = -(th + geom.u() * kh);
  return report;
}

double derjaguin_numeric_gradient(const MaterialResponse& material,
                                  const ThermalEnvironment& thermal, const SphereGeometry& geom,
                                  const MatsubaraPolicy& policy,
                                  double outer_relative_tolerance, bool include_quartic) {
  const double a = geom.gap();
  const double rt = geom.effective_radius();
  if (!(geom.x() <= 0.05))
    throw std::domain_error(
        "curvature: the Derjaguin average is meaningful only for x = a/R~ <= 0.05");

  const double r1 = geom.radius_1();
  const double r2 = geom.radius_2();
  double curvature_cubed = 1.0 / (r1 * r1 * r1);
  if (!geom.sphere_plate()) curvature_cubed += 1.0 / (r2 * r2 * r2);
  if (!include_quartic) curvature_cubed = 0.0;

  // substitution xi = r^2/(a R~): area element 2 pi r dr = pi a R~ dxi.
  // F'_pp decays like H^-4 or faster, so xi = 400 (H > 200 a) leaves a
  // relative tail below 1e-7
  auto local_gradient = [&](double xi) {
    const double quartic = a * rt * xi;
    const double height = a * (1.0 + 0.5 * xi) + quartic * quartic / 8.0 * curvature_cubed;
    return plane_interaction(material, thermal, height, policy).force_gradient_total();
  };
  bool converged = true;
  const double integral =
      quadrature::integrate_scalar(local_gradient, 0.0, 400.0, outer_relative_tolerance,
                                   &converged);
  if (!converged)
    throw NumericError("curvature: Derjaguin height-profile quadrature did not converge");
  return constants::pi * a * rt * integral;
}

double implied_alpha_npos(const MaterialResponse& material, const ThermalEnvironment& thermal,
                          double separation, double theta_tilde_value,
                          const MatsubaraPolicy& policy) {
  PlaneInteractionSplit s = plane_interaction(material, thermal, separation, policy);
  return 0.5 * (s.free_energy_npos - separation * theta_tilde_value * s.force_npos);
}

}  // namespace casimir
