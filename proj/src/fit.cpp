#include "casimir/fit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "casimir/constants.hpp"
#include "casimir/csv.hpp"
#include "casimir/errors.hpp"

namespace casimir {

namespace {

constexpr double kMicron = 1e-6;
constexpr double kNano = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Portable Gaussian deviates: explicit Box-Muller over mt19937_64 words,
// so a seed reproduces the same dataset on every platform (the standard
// library's normal_distribution is implementation-defined).
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * constants::pi * u2);
  }

 private:
  double uniform_open() {
    // 53-bit mantissa, shifted into (0, 1]
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }
  std::mt19937_64 engine_;
};

double effective_radius_of(double r1, double r2) {
  if (std::isinf(r2)) return r1;
  return r1 * r2 / (r1 + r2);
}

double inverse_radius_sum_of(double r1, double r2) {
  if (std::isinf(r2)) return 0.0;
  return 1.0 / (r1 + r2);
}

// plane-plane total force per unit area, cached per distinct separation
class PlaneForceCache {
 public:
  PlaneForceCache(const MaterialResponse& material, const ThermalEnvironment& thermal,
                  const MatsubaraPolicy& policy)
      : material_(material), thermal_(thermal), policy_(policy) {}

  double operator()(double a) {
    auto it = cache_.find(a);
    if (it != cache_.end()) return it->second;
    const double value = plane_interaction(material_, thermal_, a, policy_).force_total();
    cache_.emplace(a, value);
    return value;
  }

 private:
  const MaterialResponse& material_;
  const ThermalEnvironment& thermal_;
  const MatsubaraPolicy& policy_;
  std::map<double, double> cache_;
};

}  // namespace

std::vector<RadiusCombination> experimental_radius_combinations() {
  const std::array<double, 3> spheres = {40.7 * kMicron, 36.1 * kMicron, 34.2 * kMicron};
  const std::array<double, 3> partners = {29.8 * kMicron, 38.0 * kMicron, 46.9 * kMicron};
  std::vector<RadiusCombination> out;
  out.reserve(12);
  for (double r1 : spheres) out.push_back({r1, kInf});
  for (double r1 : spheres)
    for (double r2 : partners) out.push_back({r1, r2});
  return out;
}

std::vector<double> experimental_separations() {
  std::vector<double> out;
  out.reserve(26);
  for (int i = 0; i < 26; ++i)
    out.push_back((40.0 + static_cast<double>(i) * (300.0 - 40.0) / 25.0) * kNano);
  return out;
}

FitDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("fit: cannot open dataset " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("fit: empty dataset " + path);
  auto header = csv::split(line);
  const std::vector<std::string> expected = {"R1_um", "R2_um", "a_nm", "Fprime_over_Rtilde",
                                             "sigma"};
  if (std::vector<std::string>(header.begin(), header.end()) != expected)
    throw std::runtime_error(
        "fit: expected header 'R1_um,R2_um,a_nm,Fprime_over_Rtilde,sigma' in " + path);
  FitDataset dataset;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = csv::split(line);
    if (fields.size() != 5)
      throw std::runtime_error("fit: malformed row in " + path + ": " + line);
    FitRecord rec;
    rec.radius_1 = std::stod(fields[0]) * kMicron;
    rec.radius_2 = (fields[1] == "inf") ? kInf : std::stod(fields[1]) * kMicron;
    rec.separation = std::stod(fields[2]) * kNano;
    rec.value = std::stod(fields[3]);
    rec.sigma = std::stod(fields[4]);
    if (!(rec.radius_1 > 0.0) || !(rec.radius_2 > 0.0) || !(rec.separation > 0.0) ||
        rec.sigma < 0.0)
      throw std::runtime_error("fit: invalid values in row: " + line);
    dataset.records.push_back(rec);
  }
  return dataset;
}

void write_dataset_csv(std::ostream& out, const FitDataset& dataset) {
  out << "R1_um,R2_um,a_nm,Fprime_over_Rtilde,sigma\n";
  for (const FitRecord& rec : dataset.records) {
    out << csv::format_g12(rec.radius_1 / kMicron) << ',';
    if (std::isinf(rec.radius_2))
      out << "inf";
    else
      out << csv::format_g12(rec.radius_2 / kMicron);
    out << ',' << csv::format_g12(rec.separation / kNano) << ','
        << csv::format_full(rec.value) << ',' << csv::format_full(rec.sigma) << '\n';
  }
}

FitDataset synthesize_dataset(const MaterialResponse& material,
                              const ThermalEnvironment& thermal,
                              const std::vector<RadiusCombination>& combinations,
                              const std::vector<double>& separations,
                              const CoefficientTable& table, double noise_sigma,
                              std::uint64_t seed, const CurvaturePolicies& policies) {
  if (noise_sigma < 0.0) throw std::domain_error("fit: noise sigma must be >= 0");
  GaussianSource noise(seed);
  // one plane split per distinct separation, shared across all combinations
  std::map<double, PlaneInteractionSplit> plane_at;
  for (double a : separations)
    if (plane_at.find(a) == plane_at.end())
      plane_at.emplace(a, plane_interaction(material, thermal, a, policies.matsubara));
  FitDataset dataset;
  dataset.records.reserve(combinations.size() * separations.size());
  for (const RadiusCombination& combo : combinations) {
    for (double a : separations) {
      SphereGeometry geom(combo.radius_1, combo.radius_2, a);
      const double gradient = force_gradient_total(plane_at.at(a), geom, thermal, table,
                                                   policies.classical_l_tolerance);
      FitRecord rec;
      rec.radius_1 = combo.radius_1;
      rec.radius_2 = combo.radius_2;
      rec.separation = a;
      rec.value = gradient / geom.effective_radius();
      rec.sigma = noise_sigma;
      if (noise_sigma > 0.0) rec.value += noise_sigma * noise();
      dataset.records.push_back(rec);
    }
  }
  return dataset;
}

FitDataset synthesize_linear_dataset(const MaterialResponse& material,
                                     const ThermalEnvironment& thermal,
                                     const std::vector<RadiusCombination>& combinations,
                                     const std::vector<double>& separations, double theta_hat,
                                     double kappa_hat, double noise_sigma, std::uint64_t seed,
                                     const MatsubaraPolicy& policy) {
  if (noise_sigma < 0.0) throw std::domain_error("fit: noise sigma must be >= 0");
  GaussianSource noise(seed);
  PlaneForceCache plane_force_at(material, thermal, policy);
  FitDataset dataset;
  dataset.records.reserve(combinations.size() * separations.size());
  for (const RadiusCombination& combo : combinations) {
    const double rt = effective_radius_of(combo.radius_1, combo.radius_2);
    const double inv_sum = inverse_radius_sum_of(combo.radius_1, combo.radius_2);
    for (double a : separations) {
      const double pfa_term = -2.0 * constants::pi * plane_force_at(a);
      FitRecord rec;
      rec.radius_1 = combo.radius_1;
      rec.radius_2 = combo.radius_2;
      rec.separation = a;
      rec.value = pfa_term * (1.0 - theta_hat * a / rt - kappa_hat * a * inv_sum);
      rec.sigma = noise_sigma;
      if (noise_sigma > 0.0) rec.value += noise_sigma * noise();
      dataset.records.push_back(rec);
    }
  }
  return dataset;
}

namespace {

struct DesignPoint {
  double x1 = 0.0;      // a/R~
  double x2 = 0.0;      // a/(R1+R2)
  double y = 0.0;       // residual ratio
  double weight = 1.0;  // 1/sigma_y^2 or 1
  std::size_t record_index = 0;
  // sort key for permutation-invariant accumulation
  double r1 = 0.0, r2 = 0.0;
};

std::vector<DesignPoint> build_design(const FitDataset& dataset, double separation,
                                      const MaterialResponse& material,
                                      const ThermalEnvironment& thermal,
                                      const MatsubaraPolicy& policy, int needed_regressors) {
  std::vector<const FitRecord*> at_separation;
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const FitRecord& rec = dataset.records[i];
    if (std::abs(rec.separation - separation) <= 1e-12 * separation) {
      at_separation.push_back(&rec);
      indices.push_back(i);
    }
  }
  if (at_separation.size() < 3)
    throw FitError("fit: need at least 3 records at separation " +
                   csv::format_g12(separation / kNano) + " nm, found " +
                   std::to_string(at_separation.size()));

  bool any_weighted = false, any_unweighted = false;
  for (const FitRecord* rec : at_separation)
    (rec->sigma > 0.0 ? any_weighted : any_unweighted) = true;
  if (any_weighted && any_unweighted)
    throw FitError("fit: records must be all weighted (sigma > 0) or all unweighted");

  const double plane_force =
      plane_interaction(material, thermal, separation, policy).force_total();
  const double pfa_value = -2.0 * constants::pi * plane_force;  // > 0

  std::vector<DesignPoint> design;
  design.reserve(at_separation.size());
  for (std::size_t k = 0; k < at_separation.size(); ++k) {
    const FitRecord& rec = *at_separation[k];
    const double rt = effective_radius_of(rec.radius_1, rec.radius_2);
    DesignPoint p;
    p.x1 = rec.separation / rt;
    p.x2 = rec.separation * inverse_radius_sum_of(rec.radius_1, rec.radius_2);
    p.y = rec.value / pfa_value - 1.0;
    if (any_weighted) {
      const double sigma_y = rec.sigma / pfa_value;
      p.weight = 1.0 / (sigma_y * sigma_y);
    }
    p.record_index = indices[k];
    p.r1 = rec.radius_1;
    p.r2 = rec.radius_2;
    design.push_back(p);
  }

  // identifiability
  auto distinct = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = 1;
    for (std::size_t i = 1; i < v.size(); ++i) {
      const double scale = std::max(std::abs(v[i]), 1.0e-300);
      if ((v[i] - v[i - 1]) > 1e-12 * scale) ++n;
    }
    return n;
  };
  std::vector<double> x1s, x2s;
  for (const DesignPoint& p : design) {
    x1s.push_back(p.x1);
    x2s.push_back(p.x2);
  }
  if (distinct(x1s) < 2)
    throw FitError("fit: all records share one effective radius; the slope is unidentifiable");
  if (needed_regressors == 2 && distinct(x2s) < 2)
    throw FitError(
        "fit: records span fewer than 2 distinct u values; the two-parameter design is "
        "collinear");

  // canonical order makes the accumulated sums independent of record order
  std::sort(design.begin(), design.end(), [](const DesignPoint& a, const DesignPoint& b) {
    if (a.r1 != b.r1) return a.r1 < b.r1;
    if (a.r2 != b.r2) return a.r2 < b.r2;
    return a.record_index < b.record_index;
  });
  return design;
}

FitResult solve_weighted_least_squares(const std::vector<DesignPoint>& design, int k,
                                       FitModel model) {
  // Gram matrix and moment vector in the (x1, x2) basis; k = 1 uses x1 only
  double g11 = 0.0, g12 = 0.0, g22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (const DesignPoint& p : design) {
    g11 += p.weight * p.x1 * p.x1;
    b1 += p.weight * p.x1 * p.y;
    if (k == 2) {
      g12 += p.weight * p.x1 * p.x2;
      g22 += p.weight * p.x2 * p.x2;
      b2 += p.weight * p.x2 * p.y;
    }
  }

  double c1 = 0.0, c2 = 0.0;
  double condition = 1.0;
  if (k == 1) {
    if (g11 <= 0.0) throw FitError("fit: degenerate one-parameter design");
    c1 = b1 / g11;
  } else {
    // eigenvalues of the symmetric 2x2 Gram matrix
    const double tr = g11 + g22;
    const double det = g11 * g22 - g12 * g12;
    const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
    const double lo = 0.5 * (tr - disc), hi = 0.5 * (tr + disc);
    condition = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();

    if (condition <= 1e8) {
      c2 = (g11 * b2 - g12 * b1) / det;
      c1 = (b1 - g12 * c2) / g11;
    } else {
      // orthogonalized solve: modified Gram-Schmidt QR on the
      // sqrt(weight)-scaled columns, stable when the regressors are nearly
      // collinear
      const std::size_t n = design.size();
      std::vector<double> q1(n), v(n), z(n);
      double r11_sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double sw = std::sqrt(design[i].weight);
        q1[i] = sw * design[i].x1;
        v[i] = sw * design[i].x2;
        z[i] = sw * design[i].y;
        r11_sq += q1[i] * q1[i];
      }
      const double r11 = std::sqrt(r11_sq);
      if (!(r11 > 0.0)) throw FitError("fit: degenerate design (zero first column)");
      for (double& q : q1) q /= r11;
      double r12 = 0.0;
      for (std::size_t i = 0; i < n; ++i) r12 += q1[i] * v[i];
      double r22_sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] -= r12 * q1[i];
        r22_sq += v[i] * v[i];
      }
      const double r22 = std::sqrt(r22_sq);
      if (!(r22 > 0.0))
        throw FitError("fit: regressors are exactly collinear (condition number " +
                       csv::format_g12(condition) + ")");
      double q1z = 0.0, q2z = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        q1z += q1[i] * z[i];
        q2z += (v[i] / r22) * z[i];
      }
      c2 = q2z / r22;
      c1 = (q1z - r12 * c2) / r11;
    }
  }

  FitResult result;
  result.model = model;
  result.condition_number = condition;

  // residuals in dataset order
  std::vector<std::pair<std::size_t, double>> ordered;
  double rss = 0.0;
  for (const DesignPoint& p : design) {
    const double fitted = c1 * p.x1 + (k == 2 ? c2 * p.x2 : 0.0);
    const double r = p.y - fitted;
    ordered.emplace_back(p.record_index, r);
    rss += p.weight * r * r;
  }
  std::sort(ordered.begin(), ordered.end());
  for (auto& [idx, r] : ordered) result.residuals.push_back(r);

  // covariance of (c1, c2): inverse Gram, scaled by the residual variance
  // when the records are unweighted (weights all 1), chi-square convention
  // when per-point sigmas were supplied
  const bool weighted = std::any_of(design.begin(), design.end(),
                                    [](const DesignPoint& p) { return p.weight != 1.0; });
  const std::size_t n = design.size();
  double scale = 1.0;
  if (!weighted) {
    const std::size_t dof = n - static_cast<std::size_t>(k);
    scale = (dof > 0) ? rss / static_cast<double>(dof) : 0.0;
  }
  if (k == 1) {
    const double var = scale / g11;
    result.covariance = {var};
    result.standard_errors = {std::sqrt(var)};
  } else {
    const double det = g11 * g22 - g12 * g12;
    const double v11 = scale * g22 / det;
    const double v22 = scale * g11 / det;
    const double v12 = -scale * g12 / det;
    result.covariance = {v11, v12, v12, v22};
    result.standard_errors = {std::sqrt(v11), std::sqrt(v22)};
  }

  if (model == FitModel::one_parameter) {
    result.coefficient_names = {"beta_prime"};
    result.estimates = {c1};
  } else {
    // y = -theta_hat x1 - kappa_hat x2
    result.coefficient_names = {"theta_hat", "kappa_hat"};
    result.estimates = {-c1, -c2};
  }
  return result;
}

}  // namespace

FitResult fit_one_parameter(const FitDataset& dataset, double separation,
                            const MaterialResponse& material, const ThermalEnvironment& thermal,
                            const MatsubaraPolicy& policy) {
  auto design = build_design(dataset, separation, material, thermal, policy, 1);
  return solve_weighted_least_squares(design, 1, FitModel::one_parameter);
}

FitResult fit_two_parameter(const FitDataset& dataset, double separation,
                            const MaterialResponse& material, const ThermalEnvironment& thermal,
                            const MatsubaraPolicy& policy) {
  auto design = build_design(dataset, separation, material, thermal, policy, 2);
  return solve_weighted_least_squares(design, 2, FitModel::two_parameter);
}

}  // namespace casimir
