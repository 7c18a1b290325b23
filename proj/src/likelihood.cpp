#include "ktsbm/likelihood.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ktsbm/rng.hpp"
#include "ktsbm/special.hpp"

namespace ktsbm {

double gamma_fn(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("gamma_fn: argument outside [0,1]");
  return xlogx(p) + xlogx(1.0 - p);
}

double tau_fn(double s) {
  if (!(s >= 0.0)) throw ValidationError("tau_fn: argument must be nonnegative");
  return xlogx(s) - s;
}

double complete_log_prob(const SbmParams& params, const SuffStats& stats) {
  if (stats.k != params.k()) throw ValidationError("stats and params disagree on k");
  double total = 0.0;
  for (int a = 0; a < stats.k; ++a) total += count_log(static_cast<double>(stats.n_a[a]), params.pi()[a]);
  const auto& P = params.P();
  for (int a = 0; a < stats.k; ++a) {
    for (int b = 0; b < stats.k; ++b) {
      const double o = static_cast<double>(stats.O_ab(a, b));
      const double m = static_cast<double>(stats.n_ab(a, b));
      total += count_log(o / 2.0, P(a, b)) + count_log((m - o) / 2.0, 1.0 - P(a, b));
    }
  }
  return total;
}

double complete_log_prob(const SbmParams& params, const LabelVector& z, const Graph& x) {
  return complete_log_prob(params, compute_stats(z, x, params.k()));
}

MleEstimate mle_from_stats(const SuffStats& stats) {
  MleEstimate out;
  out.pi.resize(static_cast<std::size_t>(stats.k));
  for (int a = 0; a < stats.k; ++a)
    out.pi[a] = stats.n > 0 ? static_cast<double>(stats.n_a[a]) / static_cast<double>(stats.n) : 0.0;
  out.P = SymMatrix(stats.k);
  for (int a = 0; a < stats.k; ++a) {
    for (int b = a; b < stats.k; ++b) {
      if (stats.n_ab(a, b) == 0) {
        out.empty_cells.emplace_back(a, b);
        continue;
      }
      out.P.set(a, b, static_cast<double>(stats.O_ab(a, b)) / static_cast<double>(stats.n_ab(a, b)));
    }
  }
  return out;
}

MleEstimate mle_from_labels(const LabelVector& z, const Graph& x, int k) {
  return mle_from_stats(compute_stats(z, x, k));
}

double max_complete_log_lik(const SuffStats& stats) {
  const auto mle = mle_from_stats(stats);
  double total = 0.0;
  for (int a = 0; a < stats.k; ++a) total += static_cast<double>(stats.n) * xlogx(mle.pi[a]);
  for (int a = 0; a < stats.k; ++a)
    for (int b = 0; b < stats.k; ++b)
      if (stats.n_ab(a, b) > 0) total += 0.5 * static_cast<double>(stats.n_ab(a, b)) * gamma_fn(mle.P(a, b));
  return total;
}

double max_complete_log_lik(const LabelVector& z, const Graph& x, int k) {
  return max_complete_log_lik(compute_stats(z, x, k));
}

namespace {

// Profile objective from block sizes and undirected per-cell edge counts.
// sum_a n_a log(n_a/n) + sum_{a<=b} pairs*gamma(edges/pairs), written with
// x log x terms so integer counts stay exact until the last step.
template <typename EdgeFn>
double profile_objective(std::span<const std::int64_t> sizes, std::int64_t n, EdgeFn&& edges) {
  double value = -xlogx(static_cast<double>(n));
  const int m = static_cast<int>(sizes.size());
  for (int a = 0; a < m; ++a) value += xlogx(static_cast<double>(sizes[a]));
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) {
      const std::int64_t pairs = a == b ? sizes[a] * (sizes[a] - 1) / 2 : sizes[a] * sizes[b];
      if (pairs == 0) continue;
      const std::int64_t e = edges(a, b);
      value += xlogx(static_cast<double>(e)) + xlogx(static_cast<double>(pairs - e)) -
               xlogx(static_cast<double>(pairs));
    }
  }
  return value;
}

struct BestLabeling {
  double value = kNegInf;
  std::vector<int> labels;

  void offer(const PartitionWalker& w) {
    const double v = profile_objective(w.sizes(), w.n(), [&](int a, int b) { return w.edges(a, b); });
    if (v > value) {
      value = v;
      labels.assign(w.labels().begin(), w.labels().end());
    }
  }
};

void check_profile_feasible(const Graph& x, int k, double cap) {
  if (k < 1) throw ValidationError("k must be positive");
  if (!canonical_enumeration_feasible(x.n(), k, cap))
    throw InfeasibleError("exact profile search infeasible: k^n/k! exceeds cap");
}

ProfileResult local_profile_search(const Graph& x, int k, const LocalProfile& opts) {
  const int n = x.n();
  if (k < 1) throw ValidationError("k must be positive");
  if (opts.restarts < 1) throw ValidationError("local search needs at least one restart");
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (auto [i, j] : x.edges()) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }

  ProfileResult best{LabelVector(std::vector<int>(static_cast<std::size_t>(n), 0), k), kNegInf};
  for (int r = 0; r < opts.restarts; ++r) {
    Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(r)));
    std::vector<int> z(static_cast<std::size_t>(n));
    for (auto& v : z) v = static_cast<int>(rng.next() % static_cast<std::uint64_t>(k));

    std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 0);
    CountMatrix edges(k);
    std::vector<std::vector<std::int64_t>> nb(static_cast<std::size_t>(n),
                                              std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
    for (int i = 0; i < n; ++i) ++sizes[z[i]];
    for (int i = 0; i < n; ++i)
      for (int j : adj[i]) {
        ++nb[i][z[j]];
        if (i < j) ++edges(std::min(z[i], z[j]), std::max(z[i], z[j]));
      }
    auto objective = [&](const std::vector<std::int64_t>& s, const CountMatrix& e) {
      return profile_objective(s, n, [&](int a, int b) { return e(a, b); });
    };
    auto move = [&](std::vector<std::int64_t>& s, CountMatrix& e, int i, int from, int to) {
      for (int c = 0; c < k; ++c) e(std::min(from, c), std::max(from, c)) -= nb[i][c];
      --s[from];
      for (int c = 0; c < k; ++c) e(std::min(to, c), std::max(to, c)) += nb[i][c];
      ++s[to];
    };

    double current = objective(sizes, edges);
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
      bool moved = false;
      for (int i = 0; i < n; ++i) {
        const int from = z[i];
        int best_to = from;
        double best_val = current;
        for (int to = 0; to < k; ++to) {
          if (to == from) continue;
          auto s = sizes;
          auto e = edges;
          move(s, e, i, from, to);
          const double v = objective(s, e);
          if (v > best_val + 1e-12 * std::max(1.0, std::abs(best_val))) {
            best_val = v;
            best_to = to;
          }
        }
        if (best_to != from) {
          move(sizes, edges, i, from, best_to);
          for (int j : adj[i]) {
            --nb[j][from];
            ++nb[j][best_to];
          }
          z[i] = best_to;
          current = best_val;
          moved = true;
        }
      }
      if (!moved) break;
    }
    current = objective(sizes, edges);
    if (current > best.value) best = {LabelVector(z, k), current};
  }
  return best;
}

}  // namespace

ProfileResult profile_label_search_serial(const Graph& x, int k, double cap) {
  check_profile_feasible(x, k, cap);
  PartitionWalker walker(x, k);
  BestLabeling best;
  walker.walk({}, [&](const PartitionWalker& w) { best.offer(w); });
  return {LabelVector(best.labels, k), best.value};
}

ProfileResult profile_label_search(const Graph& x, int k, const ProfileMode& mode) {
  if (const auto* local = std::get_if<LocalProfile>(&mode)) return local_profile_search(x, k, *local);
  const double cap = std::get<ExactProfile>(mode).cap;
  check_profile_feasible(x, k, cap);

  const int depth = PartitionWalker::split_depth(x.n(), k, 64);
  const auto prefixes = PartitionWalker::prefixes(x.n(), depth, k);
  std::vector<BestLabeling> partial(prefixes.size());
#pragma omp parallel
  {
    PartitionWalker walker(x, k);
#pragma omp for schedule(dynamic, 1)
    for (std::size_t p = 0; p < prefixes.size(); ++p)
      walker.walk(prefixes[p], [&](const PartitionWalker& w) { partial[p].offer(w); });
  }
  // In-order reduction with strict > reproduces the serial first-maximum.
  BestLabeling best;
  for (auto& part : partial)
    if (part.value > best.value) best = std::move(part);
  return {LabelVector(best.labels, k), best.value};
}

double marginal_log_lik_exact(const SbmParams& params, const Graph& x, double cap) {
  const int k = params.k();
  if (!full_enumeration_feasible(x.n(), k, cap)) throw InfeasibleError("k^n exceeds enumeration cap");
  std::vector<double> log_pi(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) log_pi[a] = std::log(params.pi()[a]);
  const auto& P = params.P();
  LogSumExp acc;
  PartitionWalker walker(x, k, /*canonical=*/false);
  walker.walk({}, [&](const PartitionWalker& w) {
    const auto sizes = w.sizes();
    double v = 0.0;
    for (int a = 0; a < k; ++a) v += count_log(static_cast<double>(sizes[a]), params.pi()[a]);
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        const std::int64_t pairs = a == b ? sizes[a] * (sizes[a] - 1) / 2 : sizes[a] * sizes[b];
        const std::int64_t e = w.edges(a, b);
        v += count_log(static_cast<double>(e), P(a, b)) + count_log(static_cast<double>(pairs - e), 1.0 - P(a, b));
      }
    acc.add(v);
  });
  return acc.value();
}

double bernoulli_sup_log_lik(const Graph& x) {
  const double pairs = static_cast<double>(x.pair_count());
  if (pairs == 0.0) return 0.0;
  return pairs * gamma_fn(static_cast<double>(x.edge_count()) / pairs);
}

DecompositionCheck sparse_decomposition(const std::vector<double>& pi, const SymMatrix& P, double density,
                                        double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ValidationError("rho must lie in (0,1]");
  DecompositionCheck out;
  const int k = static_cast<int>(pi.size());
  double tau_sum = 0.0;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      const double w = pi[a] * pi[b];
      out.lhs += w * gamma_fn(P(a, b));
      tau_sum += w * tau_fn(P(a, b) / rho);
    }
  out.rhs = rho * tau_sum + density * std::log(rho);
  out.residual = out.lhs - out.rhs;
  return out;
}

DecompositionCheck sparse_decomposition_check(const LabelVector& z, const Graph& x, double rho, int k) {
  if (!(rho > 0.0)) throw ValidationError("rho must be positive");
  const auto stats = compute_stats(z, x, k);
  const auto mle = mle_from_stats(stats);
  const double n = static_cast<double>(stats.n);
  return sparse_decomposition(mle.pi, mle.P, static_cast<double>(stats.E_n) / (n * n), rho);
}

}  // namespace ktsbm
