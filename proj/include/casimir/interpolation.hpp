#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace casimir {

// Monotone cubic Hermite interpolant (Fritsch-Carlson slope limiting, the
// same scheme as PCHIP). Shape-preserving: never overshoots the data, which
// matters for dielectric tables that span orders of magnitude.
//
// Strictly interpolates inside [x.front(), x.back()]; evaluation outside
// that range throws std::out_of_range. No extrapolation by design.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;

  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
      throw std::invalid_argument("interpolation: need at least 2 nodes and matching y");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1]))
        throw std::invalid_argument("interpolation: abscissae must be strictly increasing");

    slopes_.assign(n, 0.0);
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      d[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 2) {
      slopes_[0] = slopes_[1] = d[0];
      return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0) != (d[i] > 0)) {
        slopes_[i] = 0.0;
      } else {
        // weighted harmonic mean of adjacent secants
        double w1 = 2.0 * h[i] + h[i - 1];
        double w2 = h[i] + 2.0 * h[i - 1];
        slopes_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
    slopes_[0] = edge_slope(h[0], h[1], d[0], d[1]);
    slopes_[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  }

  double operator()(double x) const {
    if (x < x_.front() || x > x_.back())
      throw std::out_of_range("interpolation: abscissa " + std::to_string(x) +
                              " outside table range [" + std::to_string(x_.front()) + ", " +
                              std::to_string(x_.back()) + "]");
    // locate bracket via binary search
    std::size_t hi = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    if (hi == x_.size()) hi = x_.size() - 1;
    if (hi == 0) hi = 1;
    std::size_t lo = hi - 1;
    double hseg = x_[hi] - x_[lo];
    double t = (x - x_[lo]) / hseg;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1;
    double h10 = t3 - 2 * t2 + t;
    double h01 = -2 * t3 + 3 * t2;
    double h11 = t3 - t2;
    return h00 * y_[lo] + h10 * hseg * slopes_[lo] + h01 * y_[hi] + h11 * hseg * slopes_[hi];
  }

  double min_abscissa() const { return x_.front(); }
  double max_abscissa() const { return x_.back(); }
  std::size_t size() const { return x_.size(); }

 private:
  static int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

  // one-sided three-point slope with monotonicity clamps
  static double edge_slope(double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sign_of(m) != sign_of(d0)) return 0.0;
    if (sign_of(d0) != sign_of(d1) && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return m;
  }

  std::vector<double> x_, y_, slopes_;
};

}  // namespace casimir
