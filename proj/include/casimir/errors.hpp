#pragma once

#include <stdexcept>
#include <string>

namespace casimir {

// Thrown when an adaptive quadrature or a series fails to reach its target
// tolerance. mode_index() identifies the Matsubara mode (or series index)
// that failed; -1 when the failure is not tied to a specific mode.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& message, long mode_index = -1)
      : std::runtime_error(message), mode_index_(mode_index) {}
  long mode_index() const noexcept { return mode_index_; }

 private:
  long mode_index_;
};

// Thrown on degenerate fit inputs (too few records, collinear design, ...).
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace casimir
