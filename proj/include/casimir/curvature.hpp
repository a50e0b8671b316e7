#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "casimir/classical.hpp"
#include "casimir/constants.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/material.hpp"

namespace casimir {

// Separation-gridded curvature-correction coefficients for gold at room
// temperature. The primary table carries (theta_tilde, kappa) on
// [0.10, 2.0] um; the hat table carries the short-distance conversions
// (theta_hat, kappa_hat) on [0.05, 0.6] um. Lookups interpolate with the
// shape-preserving cubic; no extrapolation.
class CoefficientTable {
 public:
  // bundled reference data
  static const CoefficientTable& builtin();
  // load from CSV ("a_um,theta_tilde,kappa" and "a_um,theta_hat,kappa_hat");
  // contents are checksummed against the bundled values so a corrupted or
  // edited table fails loudly at load time
  static CoefficientTable load(const std::string& primary_csv_path,
                               const std::string& hat_csv_path);

  // strict lookups; throw std::out_of_range outside their grids
  double theta_tilde(double separation) const;
  double kappa(double separation) const;
  double theta_hat(double separation) const;
  double kappa_hat(double separation) const;

  double theta_grid_min() const { return primary_grid_.front(); }
  double theta_grid_max() const { return primary_grid_.back(); }
  double hat_grid_min() const { return hat_grid_.front(); }
  double hat_grid_max() const { return hat_grid_.back(); }

  const std::vector<double>& primary_grid() const { return primary_grid_; }
  const std::vector<double>& theta_tilde_nodes() const { return theta_tilde_; }
  const std::vector<double>& kappa_nodes() const { return kappa_; }
  const std::vector<double>& hat_grid() const { return hat_grid_; }
  const std::vector<double>& theta_hat_nodes() const { return theta_hat_; }
  const std::vector<double>& kappa_hat_nodes() const { return kappa_hat_; }

  std::uint64_t primary_checksum() const;
  std::uint64_t hat_checksum() const;
  const std::string& provenance() const { return provenance_; }

 private:
  CoefficientTable() = default;
  void build_interpolants();

  std::vector<double> primary_grid_;  // m
  std::vector<double> theta_tilde_, kappa_;
  std::vector<double> hat_grid_;  // m
  std::vector<double> theta_hat_, kappa_hat_;
  MonotoneCubic theta_tilde_interp_, kappa_interp_, theta_hat_interp_, kappa_hat_interp_;
  std::string provenance_ = "builtin";
};

// Exact zero-temperature perfect-conductor values of the two coefficients.
constexpr double theta_tilde_pc_t0() {
  return 20.0 / (3.0 * constants::pi * constants::pi) - 1.0 / 9.0;
}
constexpr double kappa_pc_t0() { return 1.0 / 3.0; }

// kappa(a) = 1 - 2 F_energy_npos / (a F_force_npos): computable directly
// from the Lifshitz split, no table required.
double kappa_from_plane(const PlaneInteractionSplit& plane);
double kappa_from_lifshitz(const MaterialResponse& material, const ThermalEnvironment& thermal,
                           double separation, const MatsubaraPolicy& policy = {});

// Same ratio in the T -> 0 limit, where the whole interaction is "n > 0".
double kappa_from_lifshitz_zero_temperature(const MaterialResponse& material, double separation,
                                            const MatsubaraPolicy& policy = {});

// Strict table lookup of theta_tilde; range error outside the grid (there
// is no computable fallback for theta_tilde).
double theta_tilde(const CoefficientTable& table, double separation);

// kappa lookup with fallback: table value inside the grid, otherwise
// computed from the Lifshitz split, with the provenance recorded.
struct KappaValue {
  double value = 0.0;
  bool from_table = true;
  std::string provenance;
};
KappaValue kappa(const CoefficientTable& table, double separation,
                 const MaterialResponse& material, const ThermalEnvironment& thermal,
                 const MatsubaraPolicy& policy = {});

// Short-distance conversion of (theta_tilde, kappa) into (theta_hat,
// kappa_hat) through the n=0 / n>0 force fractions at this separation.
struct HatCoefficients {
  double theta_hat = 0.0;
  double kappa_hat = 0.0;
};
HatCoefficients hat_coefficients(const MaterialResponse& material,
                                 const ThermalEnvironment& thermal, double separation,
                                 double theta_tilde_value, double kappa_value,
                                 const MatsubaraPolicy& policy = {});
HatCoefficients hat_coefficients(const PlaneInteractionSplit& plane, double theta_tilde_value,
                                 double kappa_value);

struct CurvaturePolicies {
  MatsubaraPolicy matsubara;
  double classical_l_tolerance = 1e-12;
};

// Combined beyond-PFA force gradient: exact classical term plus the
// curvature-corrected positive-mode term,
//   F' = F'_classical - 2 pi R~ F_npos(a) [1 - (theta_tilde + u kappa) a/R~].
// Coefficient lookups clamp to the nearest grid edge outside the table
// (there the correction is either negligible or beyond the expansion's
// validity; see README). kappa falls back to the Lifshitz ratio when the
// grid does not cover the separation.
double force_gradient_total(const MaterialResponse& material, const ThermalEnvironment& thermal,
                            const SphereGeometry& geom, const CoefficientTable& table,
                            const CurvaturePolicies& policies = {});

// Same, reusing a plane split already computed at geom.gap(). Sweeps and
// dataset synthesis share one split across many radius combinations.
double force_gradient_total(const PlaneInteractionSplit& plane, const SphereGeometry& geom,
                            const ThermalEnvironment& thermal, const CoefficientTable& table,
                            double classical_l_tolerance = 1e-12);

// True when both radii exceed 10 thermal lengths, the regime where the
// derivative expansion for the thermal modes is trustworthy. Callers that
// report to humans should warn when this is false.
bool derivative_expansion_trustworthy(const SphereGeometry& geom,
                                      const ThermalEnvironment& thermal);

// PFA baselines: F = 2 pi R~ E_pp(a), F' = -2 pi R~ F_pp(a).
double pfa_force(const MaterialResponse& material, const ThermalEnvironment& thermal,
                 const SphereGeometry& geom, const MatsubaraPolicy& policy = {});
double pfa_force_gradient(const MaterialResponse& material, const ThermalEnvironment& thermal,
                          const SphereGeometry& geom, const MatsubaraPolicy& policy = {});

struct DeviationReport {
  SphereGeometry geometry;
  double force_gradient = 0.0;      // N/m
  double pfa_force_gradient = 0.0;  // N/m
  double deviation_metric = 0.0;    // (R~/a)(F'/F'_PFA - 1)
  double beta_prime = 0.0;          // -(theta_hat + u kappa_hat)
  double effective_pressure = 0.0;  // -F'/(2 pi R~), Pa
  bool beta_from_table = true;      // hat table vs computed conversion
};

DeviationReport deviation_report(const MaterialResponse& material,
                                 const ThermalEnvironment& thermal, const SphereGeometry& geom,
                                 const CoefficientTable& table,
                                 const CurvaturePolicies& policies = {});

// Numeric Derjaguin average of the plane-plane force gradient over the
// height profile H(r) = a + r^2/(2 R~) + (r^4/8)(1/R1^3 + 1/R2^3).
// Independent oracle for the leading PFA term and its first geometric
// correction. Requires x = a/R~ <= 0.05. include_quartic = false drops the
// r^4 term (pure paraboloid), which the substitution xi = r^2/(a R~) maps
// exactly onto -2 pi R~ F_pp(a).
double derjaguin_numeric_gradient(const MaterialResponse& material,
                                  const ThermalEnvironment& thermal, const SphereGeometry& geom,
                                  const MatsubaraPolicy& policy = {},
                                  double outer_relative_tolerance = 1e-9,
                                  bool include_quartic = true);

// Inverts the theta_tilde definition to expose the implied positive-mode
// kernel coefficient alpha_npos(a) = (E_npos - a theta_tilde F_npos)/2.
double implied_alpha_npos(const MaterialResponse& material, const ThermalEnvironment& thermal,
                          double separation, double theta_tilde_value,
                          const MatsubaraPolicy& policy = {});

}  // namespace casimir
