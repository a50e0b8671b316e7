// Timing and agreement check: serial raw-k_perp reference vs the production
// y-substituted kernel, single- and multi-threaded.  The production path must
// be bit-identical across thread counts; the reference path must agree to the
// quadrature tolerance.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "casimir/lifshitz.hpp"
#include "casimir/material.hpp"

namespace {

using casimir::MaterialResponse;
using casimir::MatsubaraPolicy;
using casimir::PlaneInteractionSplit;
using casimir::ThermalEnvironment;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Timed {
  PlaneInteractionSplit split;
  double seconds;
};

template <typename F>
Timed time_call(F&& call, int repeats) {
  Timed result{call(), 0.0};
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) result.split = call();
  result.seconds = seconds_since(start) / repeats;
  return result;
}

double rel_diff(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

int main(int argc, char** argv) {
  int repeats = 3;
  if (argc > 1) repeats = std::max(1, std::atoi(argv[1]));

  const MaterialResponse gold = MaterialResponse::gold();
  const ThermalEnvironment room(300.0);
  const MatsubaraPolicy policy;
  const std::vector<double> separations = {0.1e-6, 0.2e-6, 0.5e-6, 1.0e-6};

#ifdef _OPENMP
  const int max_threads = omp_get_max_threads();
#else
  const int max_threads = 1;
#endif

  std::printf("plane-plane Matsubara sum, gold at 300 K, %d repeats per cell\n", repeats);
  std::printf("threads available: %d\n\n", max_threads);
  std::printf("%8s %7s %12s %12s %12s %10s %10s\n", "a_um", "modes", "ref_ms", "prod1_ms",
              "prodN_ms", "ref_rel", "prodN_bit");

  bool all_ok = true;
  for (double a : separations) {
    const auto reference = time_call(
        [&] { return casimir::plane_interaction_reference(gold, room, a, policy); }, repeats);

#ifdef _OPENMP
    omp_set_num_threads(1);
#endif
    const auto serial = time_call(
        [&] { return casimir::plane_interaction(gold, room, a, policy); }, repeats);

#ifdef _OPENMP
    omp_set_num_threads(max_threads);
#endif
    const auto parallel = time_call(
        [&] { return casimir::plane_interaction(gold, room, a, policy); }, repeats);

    const double ref_rel =
        rel_diff(reference.split.force_gradient_total(), serial.split.force_gradient_total());
    const bool bitwise =
        serial.split.free_energy_npos == parallel.split.free_energy_npos &&
        serial.split.force_npos == parallel.split.force_npos &&
        serial.split.force_gradient_npos == parallel.split.force_gradient_npos &&
        serial.split.modes_used == parallel.split.modes_used;
    all_ok = all_ok && bitwise && ref_rel < 1e-8;

    std::printf("%8.2f %7ld %12.3f %12.3f %12.3f %10.2e %10s\n", a * 1e6,
                serial.split.modes_used, reference.seconds * 1e3, serial.seconds * 1e3,
                parallel.seconds * 1e3, ref_rel, bitwise ? "yes" : "NO");
  }

  std::printf("\n%s\n", all_ok ? "agreement: ok" : "agreement: FAILED");
  return all_ok ? 0 : 1;
}
