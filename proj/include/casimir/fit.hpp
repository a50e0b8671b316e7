#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "casimir/curvature.hpp"

namespace casimir {

// One sphere pair; radius_2 = +infinity means sphere-plate.
struct RadiusCombination {
  double radius_1 = 0.0;  // m
  double radius_2 = 0.0;  // m or +inf
};

// The twelve radius pairings of the two-sphere AFM experiment: three
// spheres measured against a plate and against three other spheres.
std::vector<RadiusCombination> experimental_radius_combinations();

// 26 separations evenly spaced on [40, 300] nm, the experimental window.
std::vector<double> experimental_separations();

struct FitRecord {
  double radius_1 = 0.0;    // m
  double radius_2 = 0.0;    // m or +inf
  double separation = 0.0;  // m
  double value = 0.0;       // observed F'/R~, N/m^2
  double sigma = 0.0;       // per-point noise scale; 0 = unweighted
};

struct FitDataset {
  std::vector<FitRecord> records;
};

// CSV round trip, header "R1_um,R2_um,a_nm,Fprime_over_Rtilde,sigma";
// "inf" is accepted and written for R2_um of sphere-plate records.
FitDataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const FitDataset& dataset);

enum class FitModel { one_parameter, two_parameter };

struct FitResult {
  FitModel model = FitModel::one_parameter;
  std::vector<std::string> coefficient_names;
  std::vector<double> estimates;
  std::vector<double> standard_errors;
  // residuals of the dimensionless regression, one per record used,
  // in dataset order
  std::vector<double> residuals;
  double condition_number = 1.0;
  // row-major k x k covariance of the estimates
  std::vector<double> covariance;
};

// Synthesizes F'/R~ data from the full beyond-PFA model (classical term
// plus corrected thermal modes), one record per (combination, separation)
// in combination-major order. sigma > 0 adds seeded Gaussian noise with
// that scale (also recorded per record); sigma = 0 is noiseless.
FitDataset synthesize_dataset(const MaterialResponse& material,
                              const ThermalEnvironment& thermal,
                              const std::vector<RadiusCombination>& combinations,
                              const std::vector<double>& separations,
                              const CoefficientTable& table, double noise_sigma,
                              std::uint64_t seed, const CurvaturePolicies& policies = {});

// Synthesizes data from the truncated linear parametrization
//   F'/R~ = -2 pi F_pp(a) [1 - theta_hat a/R~ - kappa_hat a/(R1+R2)],
// the exact model underlying the two-parameter fit; round-trip tests use
// this generator to check coefficient recovery to machine precision.
FitDataset synthesize_linear_dataset(const MaterialResponse& material,
                                     const ThermalEnvironment& thermal,
                                     const std::vector<RadiusCombination>& combinations,
                                     const std::vector<double>& separations, double theta_hat,
                                     double kappa_hat, double noise_sigma, std::uint64_t seed,
                                     const MatsubaraPolicy& policy = {});

// Both fits work on records at one separation, transformed to the
// dimensionless residual ratio y = (F'/R~)/(-2 pi F_pp(a)) - 1, which pins
// the intercept at the PFA value by construction:
//   one-parameter: y = beta_prime * (a/R~)
//   two-parameter: y = -theta_hat * (a/R~) - kappa_hat * a/(R1+R2)
// Weighted least squares via normal equations; an orthogonalized solve
// takes over when the Gram condition number exceeds 1e8. Records must be
// either all unweighted (sigma = 0) or all weighted.
FitResult fit_one_parameter(const FitDataset& dataset, double separation,
                            const MaterialResponse& material, const ThermalEnvironment& thermal,
                            const MatsubaraPolicy& policy = {});

FitResult fit_two_parameter(const FitDataset& dataset, double separation,
                            const MaterialResponse& material, const ThermalEnvironment& thermal,
                            const MatsubaraPolicy& policy = {});

}  // namespace casimir
