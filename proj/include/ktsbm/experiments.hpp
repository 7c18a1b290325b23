#pragma once

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ktsbm/order_selection.hpp"

namespace ktsbm {

/// Parses "exact" or "mc:SAMPLES".
KtOptions parse_kt_spec(const std::string& spec);
std::string format_kt_spec(const KtOptions& kt);

/// Drives the consistency simulation. Flat JSON with every field explicit.
struct ExperimentConfig {
  int k0 = 1;
  std::vector<double> pi0{1.0};
  /// P0 in the dense regime, S0 in the sparse one.
  std::vector<std::vector<double>> P0{{0.5}};
  std::string regime = "dense";  // "dense" | "sparse"
  double c = 1.0;
  double alpha = 0.0;
  std::vector<int> n_grid{4, 6, 8};
  int trials = 100;
  double epsilon = 1.0;
  int k_max = 8;
  std::string kt = "exact";
  std::uint64_t master_seed = 0;
  std::string output_path = "results";

  /// Throws ValidationError on inconsistent fields.
  void validate() const;
  bool sparse() const { return regime == "sparse"; }
  double rho(int n) const;
  SbmParams params_at(int n) const;
  int k_max_at(int n) const { return std::min(n, k_max); }
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// trial_seed = mix_seed(master_seed, n, trial_index).
std::uint64_t trial_seed(std::uint64_t master_seed, int n, int trial_index);

struct TrialRecord {
  int n = 0;
  int trial_index = 0;
  std::uint64_t seed = 0;
  double rho_n = 1.0;
  int k_hat = 1;
  std::vector<double> scores;
  std::vector<double> std_errors;
  KtMethod method = KtMethod::exact;
  double wall_time = 0.0;
};

struct SummaryRow {
  int n = 0;
  double rho_n = 1.0;
  int trials = 0;
  double frac_correct = 0.0;
  double under_rate = 0.0;
  double over_rate = 0.0;
  int modal_k_hat = 1;
};

struct ConsistencyResult {
  std::vector<TrialRecord> records;  // sorted by (n, trial_index)
  std::vector<SummaryRow> summary;
};

/// Runs every (n, trial) task on `threads` OpenMP workers. Output is a pure
/// function of the config. Throws InfeasibleError when exact KT is
/// requested beyond the enumeration cap.
ConsistencyResult run_consistency(const ExperimentConfig& config, int threads);

/// trials.csv: n,trial,seed,rho_n,k_hat,kt,score_1..score_K[,se_1..se_K]
/// with K = config.k_max; cells for k > min(n, k_max) are empty.
void write_trials_csv(std::ostream& out, const ExperimentConfig& config, const ConsistencyResult& result);
/// summary.csv: n,rho_n,trials,frac_correct,under_rate,over_rate,modal_k_hat
void write_summary_csv(std::ostream& out, const ConsistencyResult& result);
/// timings.csv: n,trial,wall_time_s (kept apart so trials.csv is reproducible).
void write_timings_csv(std::ostream& out, const ConsistencyResult& result);

struct SuiteReport {
  std::string name;
  int checks = 0;
  int failures = 0;
  std::vector<std::string> lines;
  bool passed() const { return failures == 0; }
};

/// Bound on log(sup/KT) over every graph on n nodes; exact Bernoulli sup for
/// k = 1, best-of-`em_starts` EM otherwise.
SuiteReport verify_kt_regret_suite(const std::vector<int>& n_values, const std::vector<int>& k_values,
                                int em_starts = 16, std::uint64_t seed = 0);
/// Random compositions n = n_1 + ... + n_J with n <= n_max, J <= j_max.
SuiteReport verify_gamma_inequality_suite(int count, std::uint64_t seed, int n_max = 200, int j_max = 10);
/// K(z), K(x|z) and K(x) each sum to one within `tol`.
SuiteReport verify_normalization_suite(int n_labels_max = 6, int n_graphs_max = 4, int k_max = 3,
                                       double tol = 1e-10);
/// Exact P(k_hat = k) under `truth` (all graphs on n nodes) against the
/// overestimation bound for each k in `k_values` (all > truth.k()).
SuiteReport verify_overestimation_suite(const SbmParams& truth, int n, const std::vector<int>& k_values,
                                        const PenaltySpec& spec);

/// Human-readable gap report plus a JSON mirror.
struct GapReport {
  GapResult dense;
  GapResult sparse;
  bool has_dense = false;
  bool has_sparse = false;
  nlohmann::json to_json() const;
  std::string to_text() const;
};
GapReport gap_report(const std::vector<double>& pi, const SymMatrix& M, bool dense, bool sparse);

nlohmann::json to_json(const OrderEstimate& est);
std::string format_table(const OrderEstimate& est);

/// Every graph on n nodes, in bit order of the upper triangle.
std::vector<Graph> all_graphs(int n);

}  // namespace ktsbm
