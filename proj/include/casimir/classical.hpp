#pragma once

#include "casimir/material.hpp"

namespace casimir {

// Two-sphere configuration; radius_2 may be infinite for sphere-plate.
// Derived quantities: effective radius R~ = R1 R2/(R1+R2), radius-ratio
// parameter u = R~^2/(R1 R2) in [0, 1/4], aspect ratio x = a/R~, and the
// geometric parameter Z driving the classical series.
class SphereGeometry {
 public:
  SphereGeometry(double radius_1, double radius_2, double gap);

  // Build from the effective radius and u; u = 0 means sphere-plate.
  static SphereGeometry from_effective(double effective_radius, double u, double gap);

  double radius_1() const { return radius_1_; }
  double radius_2() const { return radius_2_; }
  double gap() const { return gap_; }
  bool sphere_plate() const;

  double effective_radius() const;
  double u() const;
  double x() const { return gap_ / effective_radius(); }
  // 1/(R1+R2), equal to u/R~ exactly; 0 for sphere-plate
  double inverse_radius_sum() const;
  // Z = 1/(1 + t + sqrt(t(2+t))) with t = x + x^2 u/2
  double z_parameter() const;

 private:
  double radius_1_, radius_2_, gap_;
};

inline double z_parameter(const SphereGeometry& geom) { return geom.z_parameter(); }

// Classical (zero-frequency) interaction between grounded conductors,
// Dirichlet boundary conditions. Energy J, force N, gradient N/m.
struct ClassicalInteraction {
  double free_energy = 0.0;     // < 0
  double force = 0.0;           // < 0, -d(free_energy)/da
  double force_gradient = 0.0;  // > 0, dF/da
  long terms = 0;               // multipole terms summed
};

// Sums the bisphere multipole series with closed-form a-derivatives,
// truncating once the energy, force, and gradient terms are all below
// l_tolerance relative to their running sums.
ClassicalInteraction classical_interaction(const SphereGeometry& geom,
                                           const ThermalEnvironment& thermal,
                                           double l_tolerance = 1e-12,
                                           long term_cap = 1000000);

double classical_free_energy(const SphereGeometry& geom, const ThermalEnvironment& thermal,
                             double l_tolerance = 1e-12);

// Exact series for x >= 1e-6; below that the two-term small-distance
// expansion is exact to well beyond the switch tolerance and avoids a
// 10^4-term summation (the switch is continuous to ~1e-9 relative).
double classical_force_gradient(const SphereGeometry& geom, const ThermalEnvironment& thermal,
                                double l_tolerance = 1e-12);

// Two-term small-distance expansion of the classical force gradient:
// k_B T zeta(3) R~/(4 a^3) (1 + a/(12 zeta(3) R~)). No u dependence.
double classical_small_x_expansion(const SphereGeometry& geom,
                                   const ThermalEnvironment& thermal);

}  // namespace casimir
