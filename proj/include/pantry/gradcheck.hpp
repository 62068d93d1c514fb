#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pantry/tensor.hpp"

namespace pantry {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  double step = 0.0;
  double tolerance = 0.0;
  std::vector<GradCheckEntry> entries;
  bool pass = false;

  std::string to_string() const;
};

/// Central-difference verification of reverse-mode gradients at 64-bit
/// precision. `f` must be a pure forward function of `params` returning a
/// scalar (it is re-evaluated ~2x per parameter element, without a tape).
/// Relative error is |analytic - numeric| / max(1, |analytic|, |numeric|)
/// per element; a parameter passes when its max stays within tolerance.
GradCheckReport gradient_check(const std::function<TensorT<double>()>& f,
                               std::vector<std::pair<std::string, TensorT<double>>> params,
                               double step, double tolerance);

/// Comparison core against externally supplied analytic gradients (same
/// report semantics as gradient_check, which feeds it the tape's gradients).
GradCheckReport compare_with_central_differences(
    const std::function<TensorT<double>()>& f,
    std::vector<std::pair<std::string, TensorT<double>>> params,
    const std::vector<std::vector<double>>& analytic, double step, double tolerance);

}  // namespace pantry
