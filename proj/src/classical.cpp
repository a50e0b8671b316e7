#include "casimir/classical.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"

namespace casimir {

namespace {
constexpr double kSmallXSwitch = 1e-6;
}

SphereGeometry::SphereGeometry(double radius_1, double radius_2, double gap)
    : radius_1_(radius_1), radius_2_(radius_2), gap_(gap) {
  const bool r1_ok = radius_1 > 0.0 && std::isfinite(radius_1);
  const bool r2_ok = radius_2 > 0.0;  // may be +infinity (sphere-plate)
  if (!r1_ok || !r2_ok) throw std::domain_error("classical: radii must be positive");
  if (!(gap > 0.0) || !std::isfinite(gap))
    throw std::domain_error("classical: gap must be positive and finite");
}

SphereGeometry SphereGeometry::from_effective(double effective_radius, double u, double gap) {
  if (!(effective_radius > 0.0))
    throw std::domain_error("classical: effective radius must be positive");
  if (!(u >= 0.0) || !(u <= 0.25))
    throw std::domain_error("classical: u must lie in [0, 1/4]");
  if (u == 0.0)
    return SphereGeometry(effective_radius, std::numeric_limits<double>::infinity(), gap);
  // invert R~ = R1 R2/(R1+R2), u = R~^2/(R1 R2); the stable root pair is
  // R_small = 2 R~/(1+s), R_large = R~ (1+s)/(2u) with s = sqrt(1-4u)
  const double s = std::sqrt(1.0 - 4.0 * u);
  return SphereGeometry(2.0 * effective_radius / (1.0 + s),
                        effective_radius * (1.0 + s) / (2.0 * u), gap);
}

bool SphereGeometry::sphere_plate() const { return std::isinf(radius_2_); }

double SphereGeometry::effective_radius() const {
  if (sphere_plate()) return radius_1_;
  return radius_1_ * radius_2_ / (radius_1_ + radius_2_);
}

double SphereGeometry::u() const {
  if (sphere_plate()) return 0.0;
  const double rt = effective_radius();
  return rt * rt / (radius_1_ * radius_2_);
}

double SphereGeometry::inverse_radius_sum() const {
  if (sphere_plate()) return 0.0;
  return 1.0 / (radius_1_ + radius_2_);
}

double SphereGeometry::z_parameter() const {
  const double xv = x();
  const double t = xv + 0.5 * xv * xv * u();
  return 1.0 / (1.0 + t + std::sqrt(t * (2.0 + t)));
}

namespace {

// Series state shared by energy, force, and gradient: everything follows
// from mu(a) = -ln Z and its first two a-derivatives, which are closed-form
// through t(a) = a/R~ + (a/R~)^2 u/2.
struct SeriesParameters {
  double mu;        // -ln Z > 0
  double dmu_da;    // 1/m
  double d2mu_da2;  // 1/m^2
};

SeriesParameters series_parameters(const SphereGeometry& geom) {
  const double rt = geom.effective_radius();
  const double uv = geom.u();
  const double xv = geom.x();
  const double t = xv + 0.5 * xv * xv * uv;
  const double t2 = t * (2.0 + t);
  const double st = std::sqrt(t2);
  const double denom = 1.0 + t + st;  // 1/Z

  const double dmu_dt = (1.0 + (1.0 + t) / st) / denom;
  const double d2mu_dt2 = -1.0 / (t2 * st * denom) - dmu_dt * dmu_dt;
  const double dt_da = (1.0 + xv * uv) / rt;
  const double d2t_da2 = uv / (rt * rt);

  SeriesParameters p;
  p.mu = std::log1p(t + st);
  p.dmu_da = dmu_dt * dt_da;
  p.d2mu_da2 = d2mu_dt2 * dt_da * dt_da + dmu_dt * d2t_da2;
  return p;
}

}  // namespace

ClassicalInteraction classical_interaction(const SphereGeometry& geom,
                                           const ThermalEnvironment& thermal,
                                           double l_tolerance, long term_cap) {
  if (!(l_tolerance > 0.0) || !(l_tolerance < 1.0))
    throw std::domain_error("classical: l_tolerance must be in (0, 1)");
  if (term_cap < 1) throw std::domain_error("classical: term_cap must be >= 1");

  const SeriesParameters p = series_parameters(geom);
  const double kt_half = 0.5 * constants::boltzmann * thermal.temperature();

  double sum_e = 0.0, sum_f = 0.0, sum_g = 0.0;
  long l = 0;
  while (true) {
    const double weight = 2.0 * static_cast<double>(l) + 1.0;
    const double pm = weight * p.mu;
    const double decayed = std::exp(-pm);  // Z^(2l+1)
    // occupation g = Z^P/(1 - Z^P), stable for small and large pm
    const double occupation = decayed / (-std::expm1(-pm));

    const double term_e = weight * std::log1p(-decayed);
    const double term_f = weight * weight * p.dmu_da * occupation;
    const double term_g =
        weight * weight *
        (weight * p.dmu_da * p.dmu_da * occupation * (1.0 + occupation) -
         p.d2mu_da2 * occupation);

    sum_e += term_e;
    sum_f += term_f;
    sum_g += term_g;
    ++l;

    const bool done = std::abs(term_e) <= l_tolerance * std::abs(sum_e) &&
                      std::abs(term_f) <= l_tolerance * std::abs(sum_f) &&
                      std::abs(term_g) <= l_tolerance * std::abs(sum_g);
    if (done) break;
    if (l >= term_cap)
      throw NumericError(
          "classical: series exceeded " + std::to_string(term_cap) +
              " terms; x = a/R~ is deep in the asymptotic regime x << 1 where the "
              "small-distance expansion should be used instead",
          l);
  }

  ClassicalInteraction out;
  out.free_energy = kt_half * sum_e;
  out.force = -kt_half * sum_f;
  out.force_gradient = kt_half * sum_g;
  out.terms = l;
  return out;
}

double classical_free_energy(const SphereGeometry& geom, const ThermalEnvironment& thermal,
                             double l_tolerance) {
  return classical_interaction(geom, thermal, l_tolerance).free_energy;
}

double classical_force_gradient(const SphereGeometry& geom, const ThermalEnvironment& thermal,
                                double l_tolerance) {
  if (geom.x() < kSmallXSwitch) return classical_small_x_expansion(geom, thermal);
  return classical_interaction(geom, thermal, l_tolerance).force_gradient;
}

double classical_small_x_expansion(const SphereGeometry& geom,
                                   const ThermalEnvironment& thermal) {
  const double kt = constants::boltzmann * thermal.temperature();
  const double rt = geom.effective_radius();
  const double a = geom.gap();
  const double leading = kt * constants::zeta3 * rt / (4.0 * a * a * a);
  return leading * (1.0 + a / (12.0 * constants::zeta3 * rt));
}

}  // namespace casimir
