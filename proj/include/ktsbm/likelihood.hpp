#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "ktsbm/labeling_enum.hpp"
#include "ktsbm/sbm_core.hpp"

namespace ktsbm {

/// gamma(p) = p log p + (1-p) log(1-p) on [0,1], zero at both ends.
double gamma_fn(double p);
/// tau(s) = s log s - s on [0, inf), tau(0) = 0.
double tau_fn(double s);

/// Log of the complete-data law P(z, x). 0 log 0 = 0; -inf when a positive
/// count meets a zero-probability parameter.
double complete_log_prob(const SbmParams& params, const LabelVector& z, const Graph& x);
double complete_log_prob(const SbmParams& params, const SuffStats& stats);

/// Plug-in estimates pi_a = n_a/n, P_ab = O_ab/n_ab. Cells with n_ab = 0
/// are set to 0 and listed in `empty_cells` (a <= b).
struct MleEstimate {
  std::vector<double> pi;
  SymMatrix P;
  std::vector<std::pair<int, int>> empty_cells;
};

MleEstimate mle_from_labels(const LabelVector& z, const Graph& x, int k);
MleEstimate mle_from_stats(const SuffStats& stats);

/// n sum_a pi_a log pi_a + 1/2 sum_{a,b} n_ab gamma(P_ab) at the plug-in.
double max_complete_log_lik(const LabelVector& z, const Graph& x, int k);
double max_complete_log_lik(const SuffStats& stats);

struct ExactProfile {
  double cap = kDefaultEnumerationCap;
};
struct LocalProfile {
  int restarts = 20;
  int max_sweeps = 100;
  std::uint64_t seed = 0;
};
using ProfileMode = std::variant<ExactProfile, LocalProfile>;

struct ProfileResult {
  LabelVector labels;
  double value = 0.0;
};

/// argmax over z in [k]^n of max_complete_log_lik(z, x, k).
/// Exact mode walks canonical labelings on an OpenMP pool and throws
/// InfeasibleError when k^n/k! exceeds the cap. Local mode runs greedy
/// single-node relabel sweeps from random starts (ties keep the current label).
ProfileResult profile_label_search(const Graph& x, int k, const ProfileMode& mode);
/// Single-threaded exact search. Reference for the parallel kernel.
ProfileResult profile_label_search_serial(const Graph& x, int k, double cap = kDefaultEnumerationCap);

/// log sum_{z in [k]^n} P(z, x). Throws InfeasibleError when k^n > cap.
double marginal_log_lik_exact(const SbmParams& params, const Graph& x, double cap = kDefaultEnumerationCap);

/// k = 1 closed form of sup P(x): (n(n-1)/2) gamma(E_n / (n(n-1))).
double bernoulli_sup_log_lik(const Graph& x);

struct EmOptions {
  int starts = 16;
  double tol = 1e-8;
  int max_iterations = 500;
  std::uint64_t seed = 0;
  double cap = kDefaultEnumerationCap;
  bool force_mean_field = false;
};

struct FitResult {
  SbmParams params;
  /// Exact log P(x) at `params`, or the variational lower bound in
  /// mean-field mode.
  double log_marginal = 0.0;
  int iterations = 0;
  bool converged = false;
  bool exact_estep = true;
  /// Objective at the start of each iteration of the winning run.
  std::vector<double> trace;
};

/// Multi-start EM approximation of sup over the k-block parameter space of
/// P(x). Exact E-step over [k]^n when k^n <= cap, otherwise mean-field.
FitResult fit_marginal_ml(const Graph& x, int k, const EmOptions& options = {});
/// One EM run from `init`.
FitResult fit_marginal_ml_from(const Graph& x, const SbmParams& init, const EmOptions& options = {});

/// (k+1)-block parameters with block a split into two identical halves.
/// Leaves P(x) unchanged.
SbmParams split_block(const SbmParams& params, int a);

struct DecompositionCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

/// Sparse expansion of sum pi_a pi_b gamma(P_ab):
/// rhs = rho sum pi_a pi_b tau(P_ab / rho) + density log rho,
/// with density = E_n / n^2.
DecompositionCheck sparse_decomposition(const std::vector<double>& pi, const SymMatrix& P, double density,
                                        double rho);
DecompositionCheck sparse_decomposition_check(const LabelVector& z, const Graph& x, double rho, int k);

}  // namespace ktsbm
