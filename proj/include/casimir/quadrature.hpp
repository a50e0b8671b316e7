#pragma once

#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace casimir::quadrature {

// Gauss-Kronrod 7-15 node set on [-1, 1] (QUADPACK values). The three
// integrands evaluated here (energy, force, gradient kernels) share every
// reflection-coefficient evaluation, so the integrator works on a
// three-component vector integrand and refines until each component meets
// the relative tolerance.
inline constexpr std::array<double, 8> kKronrodAbscissae = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct TripleOutcome {
  std::array<double, 3> value{0.0, 0.0, 0.0};
  std::array<double, 3> error{0.0, 0.0, 0.0};
  int panels = 0;
  bool converged = true;
};

namespace detail {

struct Panel {
  double lo = 0, hi = 0;
  std::array<double, 3> value{0.0, 0.0, 0.0};
  std::array<double, 3> error{0.0, 0.0, 0.0};
  double badness = 0;  // max component error, heap priority
};

struct PanelOrder {
  bool operator()(const Panel& a, const Panel& b) const { return a.badness < b.badness; }
};

template <class F>
Panel evaluate_panel(F& f, double lo, double hi) {
  Panel p;
  p.lo = lo;
  p.hi = hi;
  const double center = 0.5 * (lo + hi);
  const double halfw = 0.5 * (hi - lo);

  std::array<double, 3> k15{0.0, 0.0, 0.0}, g7{0.0, 0.0, 0.0}, sample{};
  f(center, sample);
  for (int c = 0; c < 3; ++c) {
    k15[c] += kKronrodWeights[7] * sample[c];
    g7[c] += kGaussWeights[3] * sample[c];
  }
  for (int j = 0; j < 7; ++j) {
    double offset = halfw * kKronrodAbscissae[j];
    std::array<double, 3> left{}, right{};
    f(center - offset, left);
    f(center + offset, right);
    for (int c = 0; c < 3; ++c) {
      double pair_sum = left[c] + right[c];
      k15[c] += kKronrodWeights[j] * pair_sum;
      if (j % 2 == 1) g7[c] += kGaussWeights[j / 2] * pair_sum;
    }
  }
  for (int c = 0; c < 3; ++c) {
    p.value[c] = halfw * k15[c];
    p.error[c] = std::abs(halfw * (k15[c] - g7[c]));
    p.badness = std::max(p.badness, p.error[c]);
  }
  return p;
}

}  // namespace detail

// Adaptive bisection, worst panel first. Termination: for every component,
// summed error <= rel_tol * |summed value|, with an absolute floor so that
// integrals that are identically zero terminate immediately.
template <class F>
TripleOutcome integrate_triple(F&& f, double lo, double hi, double rel_tol,
                               int max_panels = 4000) {
  constexpr double kAbsoluteFloor = 1e-305;
  TripleOutcome out;
  if (!(hi > lo)) return out;

  std::priority_queue<detail::Panel, std::vector<detail::Panel>, detail::PanelOrder> queue;
  detail::Panel whole = detail::evaluate_panel(f, lo, hi);
  out.panels = 1;
  std::array<double, 3> total = whole.value;
  std::array<double, 3> total_err = whole.error;
  queue.push(whole);

  auto needs_refinement = [&]() {
    for (int c = 0; c < 3; ++c) {
      double target = std::max(rel_tol * std::abs(total[c]), kAbsoluteFloor);
      if (total_err[c] > target) return true;
    }
    return false;
  };

  while (needs_refinement()) {
    if (out.panels >= max_panels || queue.empty()) {
      out.converged = false;
      break;
    }
    detail::Panel worst = queue.top();
    queue.pop();
    double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      // interval no longer bisectable at double precision
      out.converged = false;
      break;
    }
    detail::Panel a = detail::evaluate_panel(f, worst.lo, mid);
    detail::Panel b = detail::evaluate_panel(f, mid, worst.hi);
    ++out.panels;
    for (int c = 0; c < 3; ++c) {
      total[c] += a.value[c] + b.value[c] - worst.value[c];
      total_err[c] += a.error[c] + b.error[c] - worst.error[c];
    }
    queue.push(a);
    queue.push(b);
  }

  out.value = total;
  out.error = total_err;
  return out;
}

// Scalar convenience wrapper over the triple integrator.
template <class F>
double integrate_scalar(F&& f, double lo, double hi, double rel_tol, bool* converged = nullptr,
                        int max_panels = 4000) {
  auto wrapped = [&f](double x, std::array<double, 3>& out) {
    out[0] = f(x);
    out[1] = 0.0;
    out[2] = 0.0;
  };
  TripleOutcome r = integrate_triple(wrapped, lo, hi, rel_tol, max_panels);
  if (converged) *converged = r.converged;
  return r.value[0];
}

}  // namespace casimir::quadrature
