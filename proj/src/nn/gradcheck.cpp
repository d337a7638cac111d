#include "qclab/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qclab::nn {

GradCheckResult check_gradient(const std::function<double()>& loss, Vector& values, const Vector& analytic,
                               double eps, std::size_t max_entries, Rng* rng) {
  if (values.size() != analytic.size()) throw std::invalid_argument("check_gradient: size mismatch");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), 0);
  if (max_entries > 0 && max_entries < idx.size()) {
    if (rng == nullptr) throw std::invalid_argument("check_gradient: subset needs an rng");
    for (std::size_t i = 0; i < max_entries; ++i) std::swap(idx[i], idx[i + rng->below(idx.size() - i)]);
    idx.resize(max_entries);
  }
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  GradCheckResult out;
  for (Eigen::Index i : idx) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double up = loss();
    values[i] = saved - eps;
    const double down = loss();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double d = analytic[i] - numeric;
    diff2 += d * d;
    a2 += analytic[i] * analytic[i];
    n2 += numeric * numeric;
    out.max_abs_error = std::max(out.max_abs_error, std::abs(d));
  }
  out.checked = idx.size();
  const double scale = std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
  out.relative_error = std::sqrt(diff2) / scale;
  return out;
}

}  // namespace qclab::nn
