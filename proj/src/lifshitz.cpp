#include "casimir/lifshitz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/quadrature.hpp"

namespace casimir {

namespace {

constexpr double kC = constants::speed_of_light;

// Integration window above the lower edge y_n = 2 a xi_n / c. The integrand
// decays like e^(-y); a 60-wide window leaves a tail below e^(-60) ~ 1e-26
// relative, far beyond any tolerance used here.
constexpr double kTailWindow = 60.0;

// Modes are evaluated in chunks of this size: the chunk body parallelizes
// under OpenMP while the truncation decision scans serially in mode order,
// so the result is bit-identical for any thread count.
constexpr int kModeChunk = 16;

struct ModeIntegrals {
  double e = 0.0;  // integral of y   * sum_pol ln(1 - s)
  double f = 0.0;  // integral of y^2 * sum_pol s/(1-s)
  double g = 0.0;  // integral of y^3 * sum_pol s/(1-s)^2
  bool converged = true;
  int error_kind = 0;  // 0 none, 1 range error, 2 other
  std::string error_message;
};

// All three kernels at one Matsubara frequency, in the rescaled variable
// y = 2 a q. s = r_pol^2 e^(-y); the force and gradient kernels come from
// differentiating ln(1 - s) under the integral (each d/da pulls down -2q).
ModeIntegrals mode_integrals_y(const MaterialResponse& material, double a, double xi,
                               double quad_tol) {
  ModeIntegrals result;
  const double ylo = 2.0 * a * xi / kC;
  const double yhi = ylo + kTailWindow;
  const bool ideal = material.is_ideal();
  const bool zero_frequency = (xi == 0.0);

  double eps = 0.0;
  double contrast = 0.0;  // (eps - 1) (xi/c)^2
  if (!ideal && !zero_frequency) {
    eps = material.permittivity(xi);
    const double xc = xi / kC;
    contrast = (eps - 1.0) * xc * xc;
  }

  auto integrand = [&](double y, std::array<double, 3>& out) {
    double r2_te, r2_tm;
    if (ideal) {
      r2_te = r2_tm = 1.0;
    } else if (zero_frequency) {
      r2_te = 0.0;
      r2_tm = 1.0;
    } else {
      const double q = y / (2.0 * a);
      const double kz = std::sqrt(q * q + contrast);
      const double r_te = (q - kz) / (q + kz);
      const double r_tm = (eps * q - kz) / (eps * q + kz);
      r2_te = r_te * r_te;
      r2_tm = r_tm * r_tm;
    }
    const double decay = std::exp(-y);
    const double s_te = r2_te * decay;
    const double s_tm = r2_tm * decay;
    const double om_te = 1.0 - s_te;
    const double om_tm = 1.0 - s_tm;
    out[0] = y * (std::log1p(-s_te) + std::log1p(-s_tm));
    const double y2 = y * y;
    out[1] = y2 * (s_te / om_te + s_tm / om_tm);
    out[2] = y2 * y * (s_te / (om_te * om_te) + s_tm / (om_tm * om_tm));
  };

  auto q = quadrature::integrate_triple(integrand, ylo, yhi, quad_tol);
  result.e = q.value[0];
  result.f = q.value[1];
  result.g = q.value[2];
  result.converged = q.converged;
  return result;
}

// Reference kernels in the raw transverse wavenumber k. Used only by the
// serial reference path; results are rescaled to the same dimensionless
// convention as mode_integrals_y so both feed identical prefactors.
ModeIntegrals mode_integrals_kperp(const MaterialResponse& material, double a, double xi,
                                   double quad_tol) {
  ModeIntegrals result;
  const double xc = xi / kC;
  const double q_max = (2.0 * a * xi / kC + kTailWindow) / (2.0 * a);
  const double k_max = std::sqrt(std::max(q_max * q_max - xc * xc, 0.0));
  const bool ideal = material.is_ideal();
  const bool zero_frequency = (xi == 0.0);

  double eps = 0.0;
  double contrast = 0.0;
  if (!ideal && !zero_frequency) {
    eps = material.permittivity(xi);
    contrast = (eps - 1.0) * xc * xc;
  }

  auto integrand = [&](double k, std::array<double, 3>& out) {
    const double q = std::sqrt(xc * xc + k * k);
    double r2_te, r2_tm;
    if (ideal) {
      r2_te = r2_tm = 1.0;
    } else if (zero_frequency) {
      r2_te = 0.0;
      r2_tm = 1.0;
    } else {
      const double kz = std::sqrt(q * q + contrast);
      const double r_te = (q - kz) / (q + kz);
      const double r_tm = (eps * q - kz) / (eps * q + kz);
      r2_te = r_te * r_te;
      r2_tm = r_tm * r_tm;
    }
    const double decay = std::exp(-2.0 * a * q);
    const double s_te = r2_te * decay;
    const double s_tm = r2_tm * decay;
    const double om_te = 1.0 - s_te;
    const double om_tm = 1.0 - s_tm;
    out[0] = k * (std::log1p(-s_te) + std::log1p(-s_tm));
    out[1] = k * q * (s_te / om_te + s_tm / om_tm);
    out[2] = k * q * q * (s_te / (om_te * om_te) + s_tm / (om_tm * om_tm));
  };

  auto q = quadrature::integrate_triple(integrand, 0.0, k_max, quad_tol);
  const double a2 = a * a;
  result.e = 4.0 * a2 * q.value[0];
  result.f = 8.0 * a2 * a * q.value[1];
  result.g = 16.0 * a2 * a2 * q.value[2];
  result.converged = q.converged;
  return result;
}

void validate_policy(const MatsubaraPolicy& policy) {
  if (!(policy.relative_term_tolerance > 0.0) || !(policy.relative_term_tolerance < 1.0))
    throw std::domain_error("lifshitz: relative_term_tolerance must be in (0, 1)");
  if (!(policy.quadrature_relative_tolerance > 0.0) ||
      !(policy.quadrature_relative_tolerance < 1.0))
    throw std::domain_error("lifshitz: quadrature_relative_tolerance must be in (0, 1)");
  if (policy.max_modes < 1) throw std::domain_error("lifshitz: max_modes must be >= 1");
}

using ModeEvaluator = ModeIntegrals (*)(const MaterialResponse&, double, double, double);

PlaneInteractionSplit sum_modes(const MaterialResponse& material,
                                const ThermalEnvironment& thermal, double a,
                                const MatsubaraPolicy& policy, ModeEvaluator evaluate,
                                bool parallel_chunks) {
  if (!(a > 0.0)) throw std::domain_error("lifshitz: separation must be positive");
  validate_policy(policy);

  const double kt = constants::boltzmann * thermal.temperature();
  const double energy_scale = kt / (8.0 * constants::pi * a * a);

  PlaneInteractionSplit out;
  out.separation = a;

  ModeIntegrals m0 = evaluate(material, a, 0.0, policy.quadrature_relative_tolerance);
  if (!m0.converged)
    throw NumericError("lifshitz: quadrature did not converge at Matsubara mode 0", 0);
  out.free_energy_n0 = 0.5 * energy_scale * m0.e;
  out.force_n0 = -0.5 * (energy_scale / a) * m0.f;
  out.force_gradient_n0 = 0.5 * (energy_scale / (a * a)) * m0.g;

#ifndef _OPENMP
  (void)parallel_chunks;
#endif
  double sum_e = 0.0, sum_f = 0.0, sum_g = 0.0;
  int consecutive_small = 0;
  long stop_mode = -1;
  std::vector<ModeIntegrals> chunk(kModeChunk);

  for (long base = 1; stop_mode < 0; base += kModeChunk) {
    const long hi = std::min<long>(base + kModeChunk - 1, policy.max_modes);
    const int count = static_cast<int>(hi - base + 1);

    // exceptions must not escape the parallel region; they are recorded per
    // slot and rethrown by the in-order scan below
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel_chunks)
#endif
    for (int i = 0; i < count; ++i) {
      try {
        chunk[i] = evaluate(material, a, thermal.matsubara_frequency(base + i),
                            policy.quadrature_relative_tolerance);
      } catch (const std::out_of_range& ex) {
        chunk[i].error_kind = 1;
        chunk[i].error_message = ex.what();
      } catch (const std::exception& ex) {
        chunk[i].error_kind = 2;
        chunk[i].error_message = ex.what();
      }
    }

    // serial in-order scan: accumulate, test truncation, surface errors
    for (int i = 0; i < count; ++i) {
      const long n = base + i;
      if (chunk[i].error_kind == 1) throw std::out_of_range(chunk[i].error_message);
      if (chunk[i].error_kind == 2) throw NumericError(chunk[i].error_message, n);
      if (!chunk[i].converged)
        throw NumericError(
            "lifshitz: quadrature did not converge at Matsubara mode " + std::to_string(n), n);
      sum_e += chunk[i].e;
      sum_f += chunk[i].f;
      sum_g += chunk[i].g;
      const double tol = policy.relative_term_tolerance;
      const bool small = std::abs(chunk[i].e) <= tol * std::abs(sum_e) &&
                         std::abs(chunk[i].f) <= tol * std::abs(sum_f) &&
                         std::abs(chunk[i].g) <= tol * std::abs(sum_g);
      consecutive_small = small ? consecutive_small + 1 : 0;
      if (consecutive_small >= 3) {
        stop_mode = n;
        break;
      }
    }

    if (stop_mode < 0 && hi >= policy.max_modes)
      throw NumericError("lifshitz: Matsubara sum reached max_modes = " +
                             std::to_string(policy.max_modes) +
                             " before meeting relative_term_tolerance",
                         policy.max_modes);
  }

  out.free_energy_npos = energy_scale * sum_e;
  out.force_npos = -(energy_scale / a) * sum_f;
  out.force_gradient_npos = (energy_scale / (a * a)) * sum_g;
  out.modes_used = stop_mode;
  return out;
}

}  // namespace

PlaneInteractionSplit plane_interaction(const MaterialResponse& material,
                                        const ThermalEnvironment& thermal, double separation,
                                        const MatsubaraPolicy& policy) {
  return sum_modes(material, thermal, separation, policy, mode_integrals_y, true);
}

PlaneInteractionSplit plane_interaction_reference(const MaterialResponse& material,
                                                  const ThermalEnvironment& thermal,
                                                  double separation,
                                                  const MatsubaraPolicy& policy) {
  return sum_modes(material, thermal, separation, policy, mode_integrals_kperp, false);
}

ZeroTemperatureInteraction plane_interaction_zero_temperature(const MaterialResponse& material,
                                                              double separation,
                                                              const MatsubaraPolicy& policy) {
  if (!(separation > 0.0)) throw std::domain_error("lifshitz: separation must be positive");
  validate_policy(policy);
  const double a = separation;
  // inner mode integrals one decade tighter than the outer frequency integral
  const double inner_tol = std::max(policy.quadrature_relative_tolerance * 0.1, 1e-13);

  auto outer = [&](double s, std::array<double, 3>& out) {
    // s = 2 a xi / c is the dimensionless frequency
    const double xi = s * kC / (2.0 * a);
    ModeIntegrals m = mode_integrals_y(material, a, xi, inner_tol);
    if (!m.converged)
      throw NumericError("lifshitz: inner quadrature did not converge in the T = 0 integral");
    out[0] = m.e;
    out[1] = m.f;
    out[2] = m.g;
  };

  auto q = quadrature::integrate_triple(outer, 0.0, kTailWindow,
                                        policy.quadrature_relative_tolerance);
  if (!q.converged)
    throw NumericError("lifshitz: frequency integral did not converge in the T = 0 limit");

  const double a3 = a * a * a;
  const double scale =
      constants::hbar * kC / (32.0 * constants::pi * constants::pi * a3);
  ZeroTemperatureInteraction out;
  out.free_energy = scale * q.value[0];
  out.force = -(scale / a) * q.value[1];
  out.force_gradient = (scale / (a * a)) * q.value[2];
  return out;
}

}  // namespace casimir
