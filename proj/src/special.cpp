#include "ktsbm/special.hpp"

#include <algorithm>

namespace ktsbm {

double log_sum_exp(std::span<const double> values) {
  LogSumExp acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

HalfIntLogGamma::HalfIntLogGamma(std::int64_t max_m)
    : half_(static_cast<std::size_t>(std::max<std::int64_t>(max_m, 0) + 1)),
      whole_(half_.size()) {
  for (std::size_t m = 0; m < half_.size(); ++m) {
    half_[m] = std::lgamma(static_cast<double>(m) + 0.5);
    whole_[m] = std::lgamma(static_cast<double>(m) + 1.0);
  }
}

double log_beta_half_cell(std::int64_t edges, std::int64_t pairs) {
  if (pairs == 0) return 0.0;
  const double e = static_cast<double>(edges);
  const double p = static_cast<double>(pairs);
  return std::lgamma(e + 0.5) + std::lgamma(p - e + 0.5) - std::lgamma(p + 1.0) - kLogPi;
}

}  // namespace ktsbm
