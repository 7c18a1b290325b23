#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace ktsbm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogPi = 1.14472988584940017414;
/// log Gamma(1/2) = log(sqrt(pi)).
inline constexpr double kLogGammaHalf = 0.57236494292470008707;

/// x log x with 0 log 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// count * log(p) with the 0 * log 0 = 0 convention; -inf when a positive
/// count meets a zero probability.
inline double count_log(double count, double p) {
  if (count == 0.0) return 0.0;
  if (p <= 0.0) return kNegInf;
  return count * std::log(p);
}

double log_sum_exp(std::span<const double> values);

/// Streaming log-sum-exp. Accumulation order is the only source of rounding
/// differences, so two accumulators fed the same sequence agree bitwise.
class LogSumExp {
 public:
  void add(double v) {
    if (v == kNegInf) return;
    if (v <= max_) {
      sum_ += std::exp(v - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - v) + 1.0;
      max_ = v;
    }
  }
  void merge(const LogSumExp& other) {
    if (other.max_ == kNegInf) return;
    if (other.max_ <= max_) {
      sum_ += other.sum_ * std::exp(other.max_ - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
      max_ = other.max_;
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }
  bool empty() const { return max_ == kNegInf; }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

/// Cached lgamma(m + 1/2) and lgamma(m + 1) for integer m in [0, max_m].
/// Every Beta/Dirichlet closed form in this library only needs these.
class HalfIntLogGamma {
 public:
  explicit HalfIntLogGamma(std::int64_t max_m);
  double half(std::int64_t m) const { return half_[static_cast<std::size_t>(m)]; }
  double whole(std::int64_t m) const { return whole_[static_cast<std::size_t>(m)]; }
  std::int64_t max_m() const { return static_cast<std::int64_t>(half_.size()) - 1; }

 private:
  std::vector<double> half_;
  std::vector<double> whole_;
};

/// log of the Beta(1/2,1/2) mixture of p^edges (1-p)^(pairs-edges):
/// Gamma(edges+1/2) Gamma(pairs-edges+1/2) / (pi Gamma(pairs+1)).
inline double log_beta_half_cell(const HalfIntLogGamma& lg, std::int64_t edges,
                                 std::int64_t pairs) {
  if (pairs == 0) return 0.0;
  return lg.half(edges) + lg.half(pairs - edges) - lg.whole(pairs) - kLogPi;
}

double log_beta_half_cell(std::int64_t edges, std::int64_t pairs);

}  // namespace ktsbm
