#pragma once

#include <string>
#include <vector>

#include "casimir/interpolation.hpp"

namespace casimir {

enum class Polarization { te, tm };

// Dielectric response at imaginary frequency plus thick-slab Fresnel
// coefficients. Three kinds: ideal metal (perfect reflector), Drude metal,
// and a user-supplied table of (xi, eps) interpolated in log xi.
class MaterialResponse {
 public:
  enum class Kind { ideal_metal, drude, tabulated };

  static MaterialResponse ideal_metal();
  // Drude parameters in energy units (eV), converted internally to rad/s.
  static MaterialResponse drude(double plasma_frequency_ev, double relaxation_rate_ev);
  // Default gold surrogate: omega_p = 9.0 eV, gamma = 0.035 eV.
  static MaterialResponse gold();
  static MaterialResponse tabulated(std::vector<double> xi_rad_per_s,
                                    std::vector<double> permittivity);
  // CSV with header "xi_rad_per_s,eps", strictly increasing first column.
  static MaterialResponse tabulated_from_csv(const std::string& path);

  Kind kind() const { return kind_; }
  bool is_ideal() const { return kind_ == Kind::ideal_metal; }

  // eps(i xi). xi <= 0 is a domain error: the zero-frequency mode never goes
  // through this evaluator (fresnel handles it with dedicated logic).
  // Returns +infinity for the ideal metal. Tabulated lookups outside the
  // grid throw std::out_of_range; no extrapolation.
  double permittivity(double xi) const;

  // Thick-slab reflection coefficient at imaginary frequency xi and
  // transverse wavenumber k_perp. Requires xi >= 0, k_perp >= 0, not both
  // zero. At xi = 0 a metal reflects as r_TE = 0 (Drude), r_TM = 1.
  double fresnel(double xi, double k_perp, Polarization pol) const;

  // Human-readable tag for provenance output.
  std::string description() const;

  double plasma_frequency_rad_s() const { return plasma_rad_s_; }
  double relaxation_rate_rad_s() const { return relaxation_rad_s_; }

 private:
  MaterialResponse() = default;

  Kind kind_ = Kind::ideal_metal;
  double plasma_rad_s_ = 0.0;
  double relaxation_rad_s_ = 0.0;
  MonotoneCubic table_;  // permittivity vs log(xi)
  double table_xi_min_ = 0.0, table_xi_max_ = 0.0;
  std::size_t table_points_ = 0;
};

// Temperature and the derived Matsubara ladder.
class ThermalEnvironment {
 public:
  explicit ThermalEnvironment(double temperature_kelvin);

  double temperature() const { return temperature_; }
  // xi_n = 2 pi n k_B T / hbar, n >= 0
  double matsubara_frequency(long n) const;
  // lambda_T = hbar c / (2 pi k_B T), ~1.21 um at 300 K
  double thermal_length() const;

 private:
  double temperature_;
};

}  // namespace casimir
