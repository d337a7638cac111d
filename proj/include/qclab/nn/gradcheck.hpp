#pragma once

#include <cstddef>
#include <functional>

#include "qclab/nn/network.hpp"

namespace qclab::nn {

struct GradCheckResult {
  // ||analytic - numeric|| / max(||analytic||, ||numeric||) over the checked entries
  double relative_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

// Central differences of `loss` with respect to `values`, compared against
// `analytic`. With `max_entries` > 0 a random subset of that size is probed.
GradCheckResult check_gradient(const std::function<double()>& loss, Vector& values, const Vector& analytic,
                               double eps = 1e-5, std::size_t max_entries = 0, Rng* rng = nullptr);

}  // namespace qclab::nn
