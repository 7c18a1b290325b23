#include <omp.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ktsbm/errors.hpp"
#include "ktsbm/experiments.hpp"
#include "ktsbm/order_selection.hpp"
#include "ktsbm/sbm_core.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ktsbm;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSuite = 4;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  return fs::path(dir);
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

template <class T>
T json_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("field '") + key + "': " + e.what());
  }
}

// Parameters for `sample` and `gap`: a config carrying pi/P (or the
// experiment-style pi0/P0).
struct ModelFile {
  std::vector<double> pi;
  std::vector<std::vector<double>> P;
};

ModelFile model_from_json(const json& j) {
  ModelFile m;
  if (j.contains("pi")) {
    m.pi = json_field<std::vector<double>>(j, "pi");
    m.P = json_field<std::vector<std::vector<double>>>(j, "P");
  } else {
    m.pi = json_field<std::vector<double>>(j, "pi0");
    m.P = json_field<std::vector<std::vector<double>>>(j, "P0");
  }
  return m;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<int> k_max;
  std::optional<std::string> kt;
  std::string out;
  int threads = 1;
};

void add_common(CLI::App* cmd, Common& c, bool with_config = true) {
  if (with_config) cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("--seed", c.seed, "64-bit seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

int cmd_sample(const Common& c, int n_flag, const std::string& regime_flag) {
  json cfg = c.config.empty() ? json::object() : load_json(c.config);
  ModelFile m = model_from_json(cfg);
  int n = n_flag > 0 ? n_flag : cfg.value("n", 0);
  if (n < 1) throw ValidationError("sample needs n >= 1 (--n or \"n\" in config)");
  const std::uint64_t seed = c.seed ? *c.seed : cfg.value("seed", std::uint64_t{0});
  const std::string regime = !regime_flag.empty() ? regime_flag : cfg.value("regime", std::string("dense"));
  const auto M = SymMatrix::from_rows(m.P);
  double c_const = cfg.value("c", 1.0), alpha = cfg.value("alpha", 0.0);
  SbmParams params = regime == "sparse" ? realize_sparse(m.pi, SparseSchedule(M, c_const, alpha), n)
                     : regime == "dense" ? SbmParams(m.pi, M)
                                         : throw ValidationError("regime must be 'dense' or 'sparse'");
  const auto sample = sample_sbm(params, n, seed);

  const fs::path dir = prepare_dir(c.out.empty() ? "." : c.out);
  {
    auto out = open_out(dir / "graph.txt");
    write_graph(out, sample.graph);
  }
  {
    auto out = open_out(dir / "labels.txt");
    write_labels(out, sample.labels);
  }
  json resolved{{"pi", m.pi}, {"P", m.P}, {"n", n}, {"seed", seed}, {"regime", regime}};
  if (regime == "sparse") {
    resolved["c"] = c_const;
    resolved["alpha"] = alpha;
  }
  write_json(dir / "config.json", resolved);

  const double density =
      sample.graph.pair_count() > 0 ? static_cast<double>(sample.graph.edge_count()) / sample.graph.pair_count() : 0.0;
  std::cerr << "n=" << n << " edges=" << sample.graph.edge_count() << " density=" << density << '\n';
  return 0;
}

int cmd_estimate(const Common& c, const std::string& graph_path) {
  std::ifstream in(graph_path);
  if (!in) throw IoError("cannot open " + graph_path);
  const Graph x = read_graph(in);
  const int k_max = std::min(c.k_max.value_or(8), x.n());
  if (k_max < 1) throw ValidationError("--k-max must be positive");
  const PenaltySpec spec{c.epsilon.value_or(1.0)};
  if (!(spec.epsilon > 0)) throw ValidationError("--epsilon must be positive");
  KtOptions kt = parse_kt_spec(c.kt.value_or("exact"));
  kt.seed = c.seed.value_or(0);
  const auto est = estimate_order(x, spec, k_max, kt);
  std::cout << format_table(est);
  if (!c.out.empty()) {
    const fs::path dir = prepare_dir(c.out);
    json j = to_json(est);
    j["graph"] = graph_path;
    j["epsilon"] = spec.epsilon;
    j["k_max"] = k_max;
    j["kt"] = format_kt_spec(kt);
    j["seed"] = kt.seed;
    write_json(dir / "estimate.json", j);
  }
  return 0;
}

int cmd_consistency(const Common& c) {
  if (c.config.empty()) throw ValidationError("consistency needs --config");
  ExperimentConfig cfg = config_from_json(load_json(c.config));
  if (c.seed) cfg.master_seed = *c.seed;
  if (c.epsilon) cfg.epsilon = *c.epsilon;
  if (c.k_max) cfg.k_max = *c.k_max;
  if (c.kt) cfg.kt = *c.kt;
  if (!c.out.empty()) cfg.output_path = c.out;
  cfg.validate();

  const auto result = run_consistency(cfg, c.threads);
  const fs::path dir = prepare_dir(cfg.output_path);
  {
    auto out = open_out(dir / "trials.csv");
    write_trials_csv(out, cfg, result);
  }
  {
    auto out = open_out(dir / "summary.csv");
    write_summary_csv(out, result);
  }
  {
    auto out = open_out(dir / "timings.csv");
    write_timings_csv(out, result);
  }
  write_json(dir / "config.json", to_json(cfg));
  for (const auto& row : result.summary)
    std::cerr << "n=" << row.n << " frac_correct=" << row.frac_correct << " under=" << row.under_rate
              << " over=" << row.over_rate << " modal=" << row.modal_k_hat << '\n';
  return 0;
}

int cmd_verify(const Common& c, const std::string& suite, std::vector<int> n_values, std::vector<int> k_values,
               int count, double tol) {
  const std::uint64_t seed = c.seed.value_or(0);
  SuiteReport report;
  if (suite == "prop31") {
    if (n_values.empty()) n_values = {4};
    if (k_values.empty()) k_values = {1, 2};
    for (int n : n_values)
      for (int k : k_values)
        if (n < std::max(4, k)) throw ValidationError("prop31 needs n >= max(4, k)");
    report = verify_kt_regret_suite(n_values, k_values, 16, seed);
  } else if (suite == "gamma_ineq") {
    report = verify_gamma_inequality_suite(count, seed);
  } else if (suite == "normalization") {
    const int n_labels = n_values.empty() ? 6 : n_values.back();
    const int n_graphs = n_values.empty() ? 4 : n_values.back();
    const int k_max = k_values.empty() ? 3 : k_values.back();
    if (n_graphs > 6) throw InfeasibleError("normalization over graphs needs n <= 6");
    report = verify_normalization_suite(n_labels, n_graphs, k_max, tol);
  } else if (suite == "lemmaA2") {
    json cfg = c.config.empty() ? json::object() : load_json(c.config);
    ModelFile m = cfg.empty() ? ModelFile{{1.0}, {{0.5}}} : model_from_json(cfg);
    const SbmParams truth(m.pi, SymMatrix::from_rows(m.P));
    const int n = n_values.empty() ? 4 : n_values.front();
    if (k_values.empty())
      for (int k = truth.k() + 1; k <= std::min(n, truth.k() + 2); ++k) k_values.push_back(k);
    for (int k : k_values)
      if (k <= truth.k()) throw ValidationError("lemmaA2 needs k > k0");
    report = verify_overestimation_suite(truth, n, k_values, PenaltySpec{c.epsilon.value_or(1.0)});
  } else {
    throw ValidationError("unknown suite '" + suite + "' (prop31 | gamma_ineq | normalization | lemmaA2)");
  }
  for (const auto& line : report.lines) std::cout << line << '\n';
  std::cout << report.name << ": " << report.checks << " checks, " << report.failures << " failures\n";
  if (!c.out.empty()) {
    const fs::path dir = prepare_dir(c.out);
    write_json(dir / ("verify_" + report.name + ".json"),
               json{{"suite", report.name},
                    {"checks", report.checks},
                    {"failures", report.failures},
                    {"lines", report.lines}});
  }
  return report.passed() ? 0 : kExitSuite;
}

int cmd_gap(const Common& c, const std::string& params_path, const std::string& which) {
  const std::string path = !params_path.empty() ? params_path : c.config;
  if (path.empty()) throw ValidationError("gap needs a params file (positional or --config)");
  const json j = load_json(path);
  const ModelFile m = model_from_json(j);
  const auto M = SymMatrix::from_rows(m.P);
  std::string mode = which;
  if (mode.empty()) mode = j.value("regime", std::string(M.max_entry() > 1.0 ? "sparse" : "both"));
  const bool dense = mode == "dense" || mode == "both";
  const bool sparse = mode == "sparse" || mode == "both";
  if (!dense && !sparse) throw ValidationError("--regime must be dense, sparse or both");
  const SbmParams weights_check(m.pi, SymMatrix(static_cast<int>(m.pi.size()), 0.0));
  (void)weights_check;
  const auto report = gap_report(m.pi, M, dense, sparse);
  std::cout << report.to_text();
  if (!c.out.empty()) write_json(prepare_dir(c.out) / "gap.json", report.to_json());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order selection for stochastic block models with KT mixtures"};
  app.require_subcommand(1);

  Common common;
  int n_flag = 0;
  std::string regime;
  std::string graph_path, suite, params_path, gap_regime;
  std::vector<int> n_values, k_values;
  int count = 1000;
  double tol = 1e-10;

  auto* sample = app.add_subcommand("sample", "draw (labels, graph) from an SBM");
  add_common(sample, common);
  sample->add_option("--n", n_flag, "number of nodes");
  sample->add_option("--regime", regime, "dense | sparse");

  auto* estimate = app.add_subcommand("estimate", "estimate the number of blocks of a graph file");
  add_common(estimate, common, false);
  estimate->add_option("graph", graph_path, "graph file")->required();
  estimate->add_option("--epsilon", common.epsilon, "penalty epsilon");
  estimate->add_option("--k-max", common.k_max, "largest k considered");
  estimate->add_option("--kt", common.kt, "exact | mc:SAMPLES");

  auto* consistency = app.add_subcommand("consistency", "seeded consistency experiment");
  add_common(consistency, common);
  consistency->add_option("--epsilon", common.epsilon, "penalty epsilon");
  consistency->add_option("--k-max", common.k_max, "largest k considered");
  consistency->add_option("--kt", common.kt, "exact | mc:SAMPLES");

  auto* verify = app.add_subcommand("verify", "run a property suite");
  add_common(verify, common);
  verify->add_option("suite", suite, "prop31 | gamma_ineq | normalization | lemmaA2")->required();
  verify->add_option("--n", n_values, "node counts");
  verify->add_option("--k", k_values, "block counts");
  verify->add_option("--count", count, "random compositions (gamma_ineq)");
  verify->add_option("--tol", tol, "normalization tolerance");
  verify->add_option("--epsilon", common.epsilon, "penalty epsilon (lemmaA2)");

  auto* gap = app.add_subcommand("gap", "under-fitting gap of a parameter file");
  add_common(gap, common);
  gap->add_option("params", params_path, "JSON with pi and P");
  gap->add_option("--regime", gap_regime, "dense | sparse | both");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  omp_set_num_threads(common.threads);
  try {
    if (*sample) return cmd_sample(common, n_flag, regime);
    if (*estimate) return cmd_estimate(common, graph_path);
    if (*consistency) return cmd_consistency(common);
    if (*verify) return cmd_verify(common, suite, n_values, k_values, count, tol);
    if (*gap) return cmd_gap(common, params_path, gap_regime);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
