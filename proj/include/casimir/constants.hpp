#pragma once

#include <numbers>

// CODATA 2018 exact values (SI). Fixed at build time so golden numbers are
// bit-stable across runs and machines.
namespace casimir::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double speed_of_light = 299792458.0;            // m/s
inline constexpr double hbar = 1.054571817e-34;                  // J s
inline constexpr double boltzmann = 1.380649e-23;                // J/K
inline constexpr double elementary_charge = 1.602176634e-19;     // C

// rad/s per eV of photon energy
inline constexpr double ev_to_rad_per_s = elementary_charge / hbar;

// Apery's constant zeta(3), appears in every zero-frequency closed form
inline constexpr double zeta3 = 1.2020569031595943;

}  // namespace casimir::constants
