#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ktsbm/kt_mixture.hpp"
#include "ktsbm/likelihood.hpp"
#include "ktsbm/sbm_core.hpp"

namespace ktsbm {

struct PenaltySpec {
  double epsilon = 1.0;
};

/// pen(k, n) = sum_{i=1}^{k-1} (i(i+2) + 3 + eps)/2 * log n.
double penalty(int k, std::int64_t n, const PenaltySpec& spec);
/// [k(k-1)(2k-1)/12 + k(k-1)/2 + (3+eps)(k-1)/2] * log n.
double penalty_closed_form(int k, std::int64_t n, const PenaltySpec& spec);
/// Compares the log n coefficients of both forms as exact rationals
/// (integer arithmetic, eps-free part and eps coefficient separately).
bool penalty_forms_agree_exactly(int k);

struct KtOptions {
  KtMethod method = KtMethod::exact;
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  double cap = kDefaultEnumerationCap;

  static KtOptions exact(double cap = kDefaultEnumerationCap) { return {KtMethod::exact, 0, 0, cap}; }
  static KtOptions monte_carlo(std::int64_t samples, std::uint64_t seed) {
    return {KtMethod::monte_carlo, samples, seed, kDefaultEnumerationCap};
  }
};

struct CriterionRow {
  int k = 1;
  double log_kt = 0.0;
  double pen = 0.0;
  double score = 0.0;
  KtMethod method = KtMethod::exact;
  double std_error = 0.0;
};

struct CriterionTable {
  std::int64_t n = 0;
  std::vector<CriterionRow> rows;
};

struct OrderEstimate {
  int k_hat = 1;
  CriterionTable table;
};

/// argmax_k log K_k(x) - pen(k, n) over 1..k_max; ties go to the smallest k.
OrderEstimate estimate_order(const Graph& x, const PenaltySpec& spec, int k_max, const KtOptions& kt = {});

struct OverestimationBound {
  double log_bound = 0.0;
  /// min(1, exp(log_bound)).
  double value = 0.0;
};

/// Upper bound on P(k_hat = k) for k > k0:
/// exp{(k0(k0+2)-1)/2 log n + c_{k0,n} + pen(k0,n) - pen(k,n)}.
OverestimationBound overestimation_bound(int k0, int k, int n, const PenaltySpec& spec);

struct MergeResult {
  std::vector<double> pi_star;
  SymMatrix P_star;
  /// Merged blocks (0-based, a < b). The merged block sits at index a; the
  /// remaining blocks keep their relative order.
  std::pair<int, int> merged_pair;
};

/// Combines blocks a and b by pi-weighted averaging of the affected rows.
MergeResult merge_blocks(const std::vector<double>& pi, const SymMatrix& P, int a, int b);

struct GapResult {
  double gap = 0.0;
  std::pair<int, int> best_pair{0, 1};
  MergeResult merged;
  /// Two columns coincide within max-norm 1e-10; gap is then reported as 0.
  bool reducible = false;
  double full_term = 0.0;
  double merged_term = 0.0;
};

/// 1/2 [sum pi_a pi_b gamma(P_ab) - max over pair merges of the same sum].
GapResult dense_gap(const std::vector<double>& pi0, const SymMatrix& P0);
/// As dense_gap with tau(s) = s log s - s in place of gamma.
GapResult sparse_gap(const std::vector<double>& pi0, const SymMatrix& S0);

/// (1/(norm n^2)) [max_complete_log_lik(z, x, k0) - profile(x, k0 - 1)].
/// norm = 1 in the dense regime, rho_n in the sparse one.
double empirical_underfit_ratio(const LabelVector& z, const Graph& x, int k0, const ProfileMode& mode,
                                double norm = 1.0);

}  // namespace ktsbm
