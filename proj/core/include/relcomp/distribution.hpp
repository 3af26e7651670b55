#pragma once

#include <string>
#include <vector>

#include "relcomp/mixed_radix.hpp"

namespace relcomp {

/// Probability vector over the mixed-radix state space of `labels`
/// (rightmost label fastest).
struct Distribution {
  std::vector<std::string> labels;
  RadixVector radices;
  std::vector<double> values;

  double sum() const noexcept;
  /// Entry for 1-based states.
  double at(std::span<const State> states) const;
  /// Throws NumericError unless entries are >= 0 and sum to 1 within tol.
  void check_normalized(double tol = 1e-9, const std::string& what = "distribution") const;
};

}  // namespace relcomp
