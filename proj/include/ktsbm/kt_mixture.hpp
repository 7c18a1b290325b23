#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ktsbm/labeling_enum.hpp"
#include "ktsbm/sbm_core.hpp"

namespace ktsbm {

enum class KtMethod { exact, monte_carlo };

struct KtValue {
  double log_value = 0.0;
  KtMethod method = KtMethod::exact;
  std::int64_t samples = 0;
  /// Delta-method standard error of log_value (0 for exact).
  double std_error = 0.0;
  int k = 1;
  int n = 0;
};

/// log K(z) = log[Gamma(k/2)/Gamma(1/2)^k prod_a Gamma(n_a+1/2) / Gamma(n+k/2)]
/// (Dirichlet(1/2) mixture of the label law).
double log_kt_labels(const LabelVector& z, int k);
/// Same from block sizes; labels beyond sizes.size() are treated as empty.
double log_kt_labels(std::span<const std::int64_t> sizes, int k);

/// log K(x|z): product over cells a <= b of the Beta(1/2,1/2) mixture.
double log_kt_graph_given_labels(const LabelVector& z, const Graph& x, int k);
double log_kt_graph_given_labels(const SuffStats& stats);

/// log K_k(x) by canonical-labeling enumeration with k!/(k-m)! weights.
KtValue log_kt_marginal_exact(const Graph& x, int k, double cap = kDefaultEnumerationCap);

/// log K_k(x) for every k in 1..k_max from one enumeration (index k-1).
/// OpenMP over labeling prefixes with an in-order reduction, so results do
/// not depend on the thread count.
std::vector<KtValue> log_kt_marginal_exact_upto(const Graph& x, int k_max, double cap = kDefaultEnumerationCap);
/// Single-threaded reference for log_kt_marginal_exact_upto.
std::vector<KtValue> log_kt_marginal_exact_upto_serial(const Graph& x, int k_max,
                                                       double cap = kDefaultEnumerationCap);

/// Monte Carlo estimate of K_k(x) = E_{z ~ K(z)} K(x|z) with labels drawn
/// exactly by the Polya urn of the Dirichlet(1/2,...,1/2) mixture. Samples
/// are split into fixed-size chunks with seeds mix_seed(seed, chunk), so
/// the value is independent of the thread count.
KtValue log_kt_marginal_mc(const Graph& x, int k, std::int64_t samples, std::uint64_t seed);
/// One-stream single-threaded estimator (statistically equivalent reference).
KtValue log_kt_marginal_mc_serial(const Graph& x, int k, std::int64_t samples, std::uint64_t seed);

struct BoundConstants {
  int k = 1;
  int n = 4;
  double c_kn = 0.0;
  double slope = 0.0;
  double rhs = 0.0;
};

/// Uniform bound on log(sup P(x) / K_k(x)): slope log n + c_{k,n}, n >= max(4,k).
BoundConstants kt_regret_bound(int k, int n);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// lhs = sup_log_lik - log K_k(x). With an approximate sup this is a
/// necessary-condition test only.
BoundCheck verify_kt_regret(const Graph& x, int k, double sup_log_lik, double cap = kDefaultEnumerationCap);

/// prod (n_j/n)^{n_j} / prod Gamma(n_j+1/2) <= 1/(Gamma(n+1/2) Gamma(1/2)^{J-1}),
/// both sides in log space; holds with slack >= -1e-9.
BoundCheck gamma_composition_inequality(std::span<const std::int64_t> parts);

/// log(sup_pi P(z) / K(z)) and its label-count-free upper bound
/// log(Gamma(1/2) Gamma(n+k/2) / (Gamma(k/2) Gamma(n+1/2))).
double log_label_sup_ratio(std::span<const std::int64_t> sizes, int k);
double log_label_ratio_bound(int k, std::int64_t n);

/// Per-cell analogue: log(sup_p p^e (1-p)^{m-e} / Beta-mixture) and the bound
/// log(Gamma(1/2) Gamma(m+1) / Gamma(m+1/2)) with m unordered pairs.
double log_cell_sup_ratio(std::int64_t edges, std::int64_t pairs);
double log_cell_ratio_bound(std::int64_t pairs);

}  // namespace ktsbm
