#include "ktsbm/experiments.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "ktsbm/rng.hpp"
#include "ktsbm/special.hpp"

namespace ktsbm {

KtOptions parse_kt_spec(const std::string& spec) {
  if (spec == "exact") return KtOptions::exact();
  if (spec.rfind("mc:", 0) == 0) {
    const std::string count = spec.substr(3);
    std::size_t used = 0;
    long long samples = 0;
    try {
      samples = std::stoll(count, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != count.size() || count.empty() || samples < 100)
      throw ValidationError("--kt mc:SAMPLES needs an integer SAMPLES >= 100");
    return KtOptions::monte_carlo(samples, 0);
  }
  throw ValidationError("--kt must be 'exact' or 'mc:SAMPLES'");
}

std::string format_kt_spec(const KtOptions& kt) {
  return kt.method == KtMethod::exact ? "exact" : "mc:" + std::to_string(kt.samples);
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* method_tag(KtMethod m) { return m == KtMethod::exact ? "exact" : "mc"; }

}  // namespace

void ExperimentConfig::validate() const {
  if (k0 < 1) throw ValidationError("k0 must be positive");
  if (static_cast<int>(pi0.size()) != k0) throw ValidationError("pi0 must have k0 entries");
  if (static_cast<int>(P0.size()) != k0) throw ValidationError("P0 must be k0 x k0");
  if (regime != "dense" && regime != "sparse") throw ValidationError("regime must be 'dense' or 'sparse'");
  if (n_grid.empty()) throw ValidationError("n_grid must be nonempty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ValidationError("n_grid entries must be positive");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ValidationError("n_grid must be strictly increasing");
  }
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (k_max < 1) throw ValidationError("k_max must be positive");
  parse_kt_spec(kt);
  for (int n : n_grid) params_at(n);
}

double ExperimentConfig::rho(int n) const {
  if (!sparse()) return 1.0;
  return SparseSchedule(SymMatrix::from_rows(P0), c, alpha).rho(n);
}

SbmParams ExperimentConfig::params_at(int n) const {
  const auto M = SymMatrix::from_rows(P0);
  if (!sparse()) return SbmParams(pi0, M);
  return realize_sparse(pi0, SparseSchedule(M, c, alpha), n);
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  return nlohmann::json{{"k0", cfg.k0},
                        {"pi0", cfg.pi0},
                        {"P0", cfg.P0},
                        {"regime", cfg.regime},
                        {"c", cfg.c},
                        {"alpha", cfg.alpha},
                        {"n_grid", cfg.n_grid},
                        {"trials", cfg.trials},
                        {"epsilon", cfg.epsilon},
                        {"k_max", cfg.k_max},
                        {"kt", cfg.kt},
                        {"master_seed", cfg.master_seed},
                        {"output_path", cfg.output_path}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    if (j.contains("k0")) cfg.k0 = j.at("k0").get<int>();
    if (j.contains("pi0")) cfg.pi0 = j.at("pi0").get<std::vector<double>>();
    if (j.contains("P0")) cfg.P0 = j.at("P0").get<std::vector<std::vector<double>>>();
    if (j.contains("regime")) cfg.regime = j.at("regime").get<std::string>();
    if (j.contains("c")) cfg.c = j.at("c").get<double>();
    if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<int>>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
    if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
    if (j.contains("k_max")) cfg.k_max = j.at("k_max").get<int>();
    if (j.contains("kt")) cfg.kt = j.at("kt").get<std::string>();
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("output_path")) cfg.output_path = j.at("output_path").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return cfg;
}

std::uint64_t trial_seed(std::uint64_t master_seed, int n, int trial_index) {
  return mix_seed(master_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial_index));
}

ConsistencyResult run_consistency(const ExperimentConfig& config, int threads) {
  config.validate();
  const KtOptions kt_base = parse_kt_spec(config.kt);
  if (kt_base.method == KtMethod::exact) {
    for (int n : config.n_grid)
      if (!canonical_enumeration_feasible(n, config.k_max_at(n), kt_base.cap))
        throw InfeasibleError("exact KT infeasible at n=" + std::to_string(n) + " with k_max=" +
                              std::to_string(config.k_max_at(n)) + "; rerun with --kt mc:SAMPLES");
  }
  const PenaltySpec spec{config.epsilon};

  struct Task {
    int n;
    int trial;
  };
  std::vector<Task> tasks;
  for (int n : config.n_grid)
    for (int t = 0; t < config.trials; ++t) tasks.push_back({n, t});

  ConsistencyResult result;
  result.records.resize(tasks.size());
  std::string error;
  omp_set_max_active_levels(1);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, threads))
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    try {
      const auto start = std::chrono::steady_clock::now();
      const auto [n, trial] = tasks[i];
      TrialRecord rec;
      rec.n = n;
      rec.trial_index = trial;
      rec.seed = trial_seed(config.master_seed, n, trial);
      rec.rho_n = config.rho(n);
      const auto sample = sample_sbm(config.params_at(n), n, rec.seed);
      KtOptions kt = kt_base;
      kt.seed = mix_seed(rec.seed, 1);
      const auto est = estimate_order(sample.graph, spec, config.k_max_at(n), kt);
      rec.k_hat = est.k_hat;
      rec.method = kt.method;
      for (const auto& row : est.table.rows) {
        rec.scores.push_back(row.score);
        rec.std_errors.push_back(row.std_error);
      }
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.records[i] = std::move(rec);
    } catch (const std::exception& e) {
#pragma omp critical
      error = e.what();
    }
  }
  if (!error.empty()) throw std::runtime_error("consistency trial failed: " + error);

  for (int n : config.n_grid) {
    SummaryRow row;
    row.n = n;
    row.rho_n = config.rho(n);
    std::map<int, int> hist;
    int correct = 0, under = 0, over = 0;
    for (const auto& rec : result.records) {
      if (rec.n != n) continue;
      ++row.trials;
      ++hist[rec.k_hat];
      if (rec.k_hat == config.k0)
        ++correct;
      else if (rec.k_hat < config.k0)
        ++under;
      else
        ++over;
    }
    row.frac_correct = static_cast<double>(correct) / row.trials;
    row.under_rate = static_cast<double>(under) / row.trials;
    row.over_rate = static_cast<double>(over) / row.trials;
    int best = -1;
    for (auto [k, count] : hist)
      if (count > best) {
        best = count;
        row.modal_k_hat = k;
      }
    result.summary.push_back(row);
  }
  return result;
}

void write_trials_csv(std::ostream& out, const ExperimentConfig& config, const ConsistencyResult& result) {
  const bool mc = parse_kt_spec(config.kt).method == KtMethod::monte_carlo;
  out << "n,trial,seed,rho_n,k_hat,kt";
  for (int k = 1; k <= config.k_max; ++k) out << ",score_" << k;
  if (mc)
    for (int k = 1; k <= config.k_max; ++k) out << ",se_" << k;
  out << '\n';
  for (const auto& rec : result.records) {
    out << rec.n << ',' << rec.trial_index << ',' << rec.seed << ',' << fmt_double(rec.rho_n) << ',' << rec.k_hat
        << ',' << method_tag(rec.method);
    for (int k = 1; k <= config.k_max; ++k) {
      out << ',';
      if (k <= static_cast<int>(rec.scores.size())) out << fmt_double(rec.scores[k - 1]);
    }
    if (mc)
      for (int k = 1; k <= config.k_max; ++k) {
        out << ',';
        if (k <= static_cast<int>(rec.std_errors.size())) out << fmt_double(rec.std_errors[k - 1]);
      }
    out << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ConsistencyResult& result) {
  out << "n,rho_n,trials,frac_correct,under_rate,over_rate,modal_k_hat\n";
  for (const auto& row : result.summary)
    out << row.n << ',' << fmt_double(row.rho_n) << ',' << row.trials << ',' << fmt_double(row.frac_correct) << ','
        << fmt_double(row.under_rate) << ',' << fmt_double(row.over_rate) << ',' << row.modal_k_hat << '\n';
}

void write_timings_csv(std::ostream& out, const ConsistencyResult& result) {
  out << "n,trial,wall_time_s\n";
  for (const auto& rec : result.records) out << rec.n << ',' << rec.trial_index << ',' << rec.wall_time << '\n';
}

std::vector<Graph> all_graphs(int n) {
  const int pairs = n * (n - 1) / 2;
  if (pairs > 24) throw InfeasibleError("too many graphs to enumerate");
  std::vector<std::pair<int, int>> slots;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) slots.emplace_back(i, j);
  std::vector<Graph> out;
  out.reserve(std::size_t{1} << pairs);
  for (std::uint32_t mask = 0; mask < (1u << pairs); ++mask) {
    Graph g(n);
    for (int s = 0; s < pairs; ++s)
      if (mask >> s & 1u) g.set_edge(slots[s].first, slots[s].second);
    out.push_back(std::move(g));
  }
  return out;
}

SuiteReport verify_kt_regret_suite(const std::vector<int>& n_values, const std::vector<int>& k_values, int em_starts,
                                std::uint64_t seed) {
  SuiteReport report;
  report.name = "prop31";
  for (int n : n_values) {
    const auto graphs = all_graphs(n);
    for (int k : k_values) {
      int fails = 0;
      double worst_margin = std::numeric_limits<double>::infinity();
      double rhs = 0.0;
      for (std::size_t g = 0; g < graphs.size(); ++g) {
        double sup = 0.0;
        if (k == 1) {
          sup = bernoulli_sup_log_lik(graphs[g]);
        } else {
          EmOptions opts;
          opts.starts = em_starts;
          opts.seed = mix_seed(seed, g);
          sup = fit_marginal_ml(graphs[g], k, opts).log_marginal;
        }
        const auto check = verify_kt_regret(graphs[g], k, sup);
        rhs = check.rhs;
        worst_margin = std::min(worst_margin, check.rhs - check.lhs);
        ++report.checks;
        if (!check.holds) ++fails;
      }
      report.failures += fails;
      std::ostringstream line;
      line << (fails == 0 ? "PASS" : "FAIL") << " prop31 n=" << n << " k=" << k << " graphs=" << graphs.size()
           << " rhs=" << rhs << " min(rhs-lhs)=" << worst_margin << " violations=" << fails;
      report.lines.push_back(line.str());
    }
  }
  return report;
}

SuiteReport verify_gamma_inequality_suite(int count, std::uint64_t seed, int n_max, int j_max) {
  SuiteReport report;
  report.name = "gamma_ineq";
  Rng rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (int c = 0; c < count; ++c) {
    const int j = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(j_max));
    const int n = j + static_cast<int>(rng.next() % static_cast<std::uint64_t>(n_max - j + 1));
    // j-1 distinct cut points in 1..n-1.
    std::vector<int> cuts;
    while (static_cast<int>(cuts.size()) < j - 1) {
      const int cut = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(n - 1));
      if (std::find(cuts.begin(), cuts.end(), cut) == cuts.end()) cuts.push_back(cut);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::int64_t> parts;
    int prev = 0;
    for (int cut : cuts) {
      parts.push_back(cut - prev);
      prev = cut;
    }
    parts.push_back(n - prev);
    const auto check = gamma_composition_inequality(parts);
    worst = std::min(worst, check.rhs - check.lhs);
    ++report.checks;
    if (!check.holds) ++report.failures;
  }
  std::ostringstream line;
  line << (report.passed() ? "PASS" : "FAIL") << " gamma_ineq compositions=" << count
       << " min slack=" << worst << " violations=" << report.failures;
  report.lines.push_back(line.str());
  return report;
}

SuiteReport verify_normalization_suite(int n_labels_max, int n_graphs_max, int k_max, double tol) {
  SuiteReport report;
  report.name = "normalization";
  auto record = [&](const std::string& what, double total) {
    const bool ok = std::abs(total - 1.0) <= tol;
    ++report.checks;
    if (!ok) ++report.failures;
    std::ostringstream line;
    line << (ok ? "PASS " : "FAIL ") << what << " sum=" << fmt_double(total)
         << " |sum-1|=" << std::abs(total - 1.0);
    report.lines.push_back(line.str());
  };
  for (int n = 1; n <= n_labels_max; ++n)
    for (int k = 1; k <= k_max; ++k) {
      LogSumExp acc;
      for_each_labeling(n, k, [&](std::span<const int> z) {
        acc.add(log_kt_labels(LabelVector(std::vector<int>(z.begin(), z.end()), k), k));
      });
      record("K(z) n=" + std::to_string(n) + " k=" + std::to_string(k), std::exp(acc.value()));
    }
  for (int n = 1; n <= n_graphs_max; ++n) {
    const auto graphs = all_graphs(n);
    for (int k = 1; k <= k_max; ++k) {
      double worst = 1.0;
      for_each_labeling(n, k, [&](std::span<const int> zs) {
        const LabelVector z(std::vector<int>(zs.begin(), zs.end()), k);
        LogSumExp acc;
        for (const auto& g : graphs) acc.add(log_kt_graph_given_labels(z, g, k));
        const double total = std::exp(acc.value());
        if (std::abs(total - 1.0) > std::abs(worst - 1.0)) worst = total;
      });
      record("K(x|z) n=" + std::to_string(n) + " k=" + std::to_string(k) + " (worst z)", worst);
      LogSumExp acc;
      for (const auto& g : graphs) acc.add(log_kt_marginal_exact(g, k).log_value);
      record("K(x) n=" + std::to_string(n) + " k=" + std::to_string(k), std::exp(acc.value()));
    }
  }
  return report;
}

SuiteReport verify_overestimation_suite(const SbmParams& truth, int n, const std::vector<int>& k_values,
                                        const PenaltySpec& spec) {
  SuiteReport report;
  report.name = "lemmaA2";
  const int k_max = std::min(n, 8);
  std::map<int, double> prob;
  for (const auto& g : all_graphs(n)) {
    const double p = std::exp(marginal_log_lik_exact(truth, g));
    prob[estimate_order(g, spec, k_max).k_hat] += p;
  }
  for (int k : k_values) {
    const auto bound = overestimation_bound(truth.k(), k, n, spec);
    const double p = prob.count(k) ? prob[k] : 0.0;
    const bool ok = p <= bound.value;
    ++report.checks;
    if (!ok) ++report.failures;
    std::ostringstream line;
    line << (ok ? "PASS" : "FAIL") << " lemmaA2 n=" << n << " k0=" << truth.k() << " k=" << k
         << " P(k_hat=k)=" << fmt_double(p) << " bound=" << fmt_double(bound.value);
    report.lines.push_back(line.str());
  }
  return report;
}

namespace {

nlohmann::json gap_json(const GapResult& g) {
  return {{"gap", g.gap},
          {"best_pair", {g.best_pair.first + 1, g.best_pair.second + 1}},
          {"reducible", g.reducible},
          {"full_term", g.full_term},
          {"merged_term", g.merged_term},
          {"pi_star", g.merged.pi_star},
          {"P_star", g.merged.P_star.rows()}};
}

void gap_text(std::ostream& out, const char* name, const GapResult& g) {
  out << name << " gap: " << fmt_double(g.gap) << "\n";
  out << "  best merge pair: (" << g.best_pair.first + 1 << ", " << g.best_pair.second + 1 << ")\n";
  if (g.reducible) out << "  warning: two identical columns; the model is reducible to fewer blocks\n";
  out << "  merged pi*:";
  for (double v : g.merged.pi_star) out << ' ' << fmt_double(v);
  out << "\n  merged P*:\n";
  for (const auto& row : g.merged.P_star.rows()) {
    out << "   ";
    for (double v : row) out << ' ' << fmt_double(v);
    out << '\n';
  }
}

}  // namespace

nlohmann::json GapReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  if (has_dense) j["dense"] = gap_json(dense);
  if (has_sparse) j["sparse"] = gap_json(sparse);
  return j;
}

std::string GapReport::to_text() const {
  std::ostringstream out;
  if (has_dense) gap_text(out, "dense", dense);
  if (has_sparse) gap_text(out, "sparse", sparse);
  return out.str();
}

GapReport gap_report(const std::vector<double>& pi, const SymMatrix& M, bool dense, bool sparse) {
  GapReport r;
  if (dense) {
    r.dense = dense_gap(pi, M);
    r.has_dense = true;
  }
  if (sparse) {
    r.sparse = sparse_gap(pi, M);
    r.has_sparse = true;
  }
  return r;
}

nlohmann::json to_json(const OrderEstimate& est) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : est.table.rows)
    rows.push_back({{"k", r.k},
                    {"log_kt", r.log_kt},
                    {"pen", r.pen},
                    {"score", r.score},
                    {"method", method_tag(r.method)},
                    {"std_error", r.std_error}});
  return {{"n", est.table.n}, {"k_hat", est.k_hat}, {"table", rows}};
}

std::string format_table(const OrderEstimate& est) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%4s %16s %14s %16s %8s %12s\n", "k", "log_kt", "pen", "score", "method",
                "std_error");
  out << buf;
  for (const auto& r : est.table.rows) {
    std::snprintf(buf, sizeof buf, "%4d %16.8f %14.8f %16.8f %8s %12.3g\n", r.k, r.log_kt, r.pen, r.score,
                  method_tag(r.method), r.std_error);
    out << buf;
  }
  out << "k_hat = " << est.k_hat << '\n';
  return out.str();
}

}  // namespace ktsbm
