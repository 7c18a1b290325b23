#include "ktsbm/kt_mixture.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ktsbm/rng.hpp"
#include "ktsbm/special.hpp"

namespace ktsbm {

double log_kt_labels(std::span<const std::int64_t> sizes, int k) {
  if (static_cast<int>(sizes.size()) > k) throw ValidationError("more blocks than k");
  const std::int64_t n = std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0});
  const double half_k = 0.5 * k;
  double v = std::lgamma(half_k) - k * kLogGammaHalf - std::lgamma(static_cast<double>(n) + half_k);
  for (auto s : sizes) v += std::lgamma(static_cast<double>(s) + 0.5);
  v += static_cast<double>(k - static_cast<int>(sizes.size())) * kLogGammaHalf;
  return v;
}

double log_kt_labels(const LabelVector& z, int k) {
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 0);
  for (int v : z.values()) {
    if (v >= k) throw ValidationError("label exceeds k");
    ++sizes[v];
  }
  return log_kt_labels(sizes, k);
}

double log_kt_graph_given_labels(const SuffStats& stats) {
  double v = 0.0;
  for (int a = 0; a < stats.k; ++a)
    for (int b = a; b < stats.k; ++b) v += log_beta_half_cell(stats.cell_edges(a, b), stats.cell_pairs(a, b));
  return v;
}

double log_kt_graph_given_labels(const LabelVector& z, const Graph& x, int k) {
  return log_kt_graph_given_labels(compute_stats(z, x, k));
}

namespace {

// Per block count m: log sum over canonical labelings with m blocks of
// log K(x|z) + sum_a log Gamma(n_a + 1/2).
class BlockCountSums {
 public:
  BlockCountSums(int max_blocks, const HalfIntLogGamma* lg)
      : sums_(static_cast<std::size_t>(max_blocks) + 1), lg_(lg) {}

  void add(const PartitionWalker& w) {
    const int m = w.blocks();
    const auto sizes = w.sizes();
    double v = 0.0;
    for (int a = 0; a < m; ++a) {
      v += lg_->half(sizes[a]);
      for (int b = a; b < m; ++b) {
        const std::int64_t pairs = a == b ? sizes[a] * (sizes[a] - 1) / 2 : sizes[a] * sizes[b];
        v += log_beta_half_cell(*lg_, w.edges(a, b), pairs);
      }
    }
    sums_[m].add(v);
  }

  void merge(const BlockCountSums& other) {
    for (std::size_t m = 0; m < sums_.size(); ++m) sums_[m].merge(other.sums_[m]);
  }

  double log_sum(int m) const { return sums_[static_cast<std::size_t>(m)].value(); }

 private:
  std::vector<LogSumExp> sums_;
  const HalfIntLogGamma* lg_;
};

std::vector<KtValue> assemble_kt(const BlockCountSums& sums, int n, int k_max) {
  std::vector<KtValue> out;
  for (int k = 1; k <= k_max; ++k) {
    const double half_k = 0.5 * k;
    LogSumExp acc;
    for (int m = 1; m <= std::min(k, n); ++m) {
      const double weight = std::lgamma(half_k) - m * kLogGammaHalf - std::lgamma(n + half_k) +
                            std::lgamma(k + 1.0) - std::lgamma(static_cast<double>(k - m) + 1.0);
      acc.add(sums.log_sum(m) + weight);
    }
    out.push_back({acc.value(), KtMethod::exact, 0, 0.0, k, n});
  }
  return out;
}

void check_kt_inputs(const Graph& x, int k_max, double cap) {
  if (k_max < 1) throw ValidationError("k must be positive");
  if (x.n() < 1) throw ValidationError("graph must have at least one node");
  if (!canonical_enumeration_feasible(x.n(), k_max, cap))
    throw InfeasibleError("exact KT infeasible at n=" + std::to_string(x.n()) + ", k=" + std::to_string(k_max) +
                          " (k^n/k! exceeds cap); use Monte Carlo");
}

std::int64_t max_pairs(int n) { return static_cast<std::int64_t>(n) * (n - 1) / 2 + 1; }

}  // namespace

std::vector<KtValue> log_kt_marginal_exact_upto_serial(const Graph& x, int k_max, double cap) {
  check_kt_inputs(x, k_max, cap);
  const HalfIntLogGamma lg(max_pairs(x.n()));
  const int blocks = std::min(k_max, x.n());
  BlockCountSums sums(blocks, &lg);
  PartitionWalker walker(x, blocks);
  walker.walk({}, [&](const PartitionWalker& w) { sums.add(w); });
  return assemble_kt(sums, x.n(), k_max);
}

std::vector<KtValue> log_kt_marginal_exact_upto(const Graph& x, int k_max, double cap) {
  check_kt_inputs(x, k_max, cap);
  const HalfIntLogGamma lg(max_pairs(x.n()));
  const int blocks = std::min(k_max, x.n());
  const int depth = PartitionWalker::split_depth(x.n(), blocks, 64);
  const auto prefixes = PartitionWalker::prefixes(x.n(), depth, blocks);
  std::vector<BlockCountSums> partial(prefixes.size(), BlockCountSums(blocks, &lg));
#pragma omp parallel
  {
    PartitionWalker walker(x, blocks);
#pragma omp for schedule(dynamic, 1)
    for (std::size_t p = 0; p < prefixes.size(); ++p)
      walker.walk(prefixes[p], [&](const PartitionWalker& w) { partial[p].add(w); });
  }
  BlockCountSums total(blocks, &lg);
  for (const auto& part : partial) total.merge(part);
  return assemble_kt(total, x.n(), k_max);
}

KtValue log_kt_marginal_exact(const Graph& x, int k, double cap) {
  return log_kt_marginal_exact_upto(x, k, cap).back();
}

namespace {

constexpr std::int64_t kMcChunk = 1 << 14;

struct McSampler {
  const Graph& x;
  int k;
  std::vector<std::pair<int, int>> edge_list;
  HalfIntLogGamma lg;
  std::vector<int> z;
  std::vector<std::int64_t> sizes;
  std::vector<double> urn;
  CountMatrix edges;

  McSampler(const Graph& g, int kk)
      : x(g), k(kk), edge_list(g.edges()), lg(max_pairs(g.n())), z(static_cast<std::size_t>(g.n())),
        sizes(static_cast<std::size_t>(kk)), urn(static_cast<std::size_t>(kk)), edges(kk) {}

  double draw(Rng& rng) {
    std::fill(sizes.begin(), sizes.end(), 0);
    for (int i = 0; i < x.n(); ++i) {
      for (int a = 0; a < k; ++a) urn[a] = static_cast<double>(sizes[a]) + 0.5;
      z[i] = rng.categorical(urn);
      ++sizes[z[i]];
    }
    edges = CountMatrix(k);
    for (auto [i, j] : edge_list) ++edges(std::min(z[i], z[j]), std::max(z[i], z[j]));
    double v = 0.0;
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        const std::int64_t pairs = a == b ? sizes[a] * (sizes[a] - 1) / 2 : sizes[a] * sizes[b];
        v += log_beta_half_cell(lg, edges(a, b), pairs);
      }
    return v;
  }
};

// Running sums of exp(v - shift) and exp(2(v - shift)).
struct Moments {
  double shift = kNegInf;
  double s1 = 0.0;
  double s2 = 0.0;
  std::int64_t count = 0;

  static Moments of(std::span<const double> values) {
    Moments m;
    m.count = static_cast<std::int64_t>(values.size());
    if (values.empty()) return m;
    m.shift = *std::max_element(values.begin(), values.end());
    for (double v : values) {
      const double e = std::exp(v - m.shift);
      m.s1 += e;
      m.s2 += e * e;
    }
    return m;
  }

  void merge(const Moments& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double top = std::max(shift, o.shift);
    const double a = std::exp(shift - top), b = std::exp(o.shift - top);
    s1 = s1 * a + o.s1 * b;
    s2 = s2 * a * a + o.s2 * b * b;
    shift = top;
    count += o.count;
  }

  KtValue finish(int k, int n) const {
    const double N = static_cast<double>(count);
    const double mean = s1 / N;
    const double second = s2 / N;
    const double var = count > 1 ? std::max(0.0, second - mean * mean) * N / (N - 1.0) : 0.0;
    return {shift + std::log(mean), KtMethod::monte_carlo, count, std::sqrt(var / N) / mean, k, n};
  }
};

void check_mc_inputs(const Graph& x, int k, std::int64_t samples) {
  if (k < 1) throw ValidationError("k must be positive");
  if (x.n() < 1) throw ValidationError("graph must have at least one node");
  if (samples < 1) throw ValidationError("Monte Carlo needs at least one sample");
}

}  // namespace

KtValue log_kt_marginal_mc(const Graph& x, int k, std::int64_t samples, std::uint64_t seed) {
  check_mc_inputs(x, k, samples);
  const std::int64_t chunks = (samples + kMcChunk - 1) / kMcChunk;
  std::vector<Moments> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel
  {
    McSampler sampler(x, k);
    std::vector<double> values;
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < chunks; ++c) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
      const std::int64_t count = std::min(kMcChunk, samples - c * kMcChunk);
      values.resize(static_cast<std::size_t>(count));
      for (auto& v : values) v = sampler.draw(rng);
      partial[static_cast<std::size_t>(c)] = Moments::of(values);
    }
  }
  Moments total;
  for (const auto& m : partial) total.merge(m);
  return total.finish(k, x.n());
}

KtValue log_kt_marginal_mc_serial(const Graph& x, int k, std::int64_t samples, std::uint64_t seed) {
  check_mc_inputs(x, k, samples);
  McSampler sampler(x, k);
  Rng rng(seed);
  std::vector<double> values(static_cast<std::size_t>(samples));
  for (auto& v : values) v = sampler.draw(rng);
  return Moments::of(values).finish(k, x.n());
}

BoundConstants kt_regret_bound(int k, int n) {
  if (k < 1) throw ValidationError("k must be positive");
  if (n < std::max(4, k)) throw ValidationError("bound requires n >= max(4, k)");
  BoundConstants b;
  b.k = k;
  b.n = n;
  const double kk = k, nn = n;
  b.c_kn = kk * (kk + 1.0) / 2.0 * kLogGammaHalf + kk * (kk - 1.0) / (4.0 * nn) + 1.0 / (12.0 * nn) +
           (kLogGammaHalf - std::lgamma(kk / 2.0)) + 7.0 * kk * (kk + 1.0) / 12.0;
  b.slope = kk * (kk + 2.0) / 2.0 - 0.5;
  b.rhs = b.slope * std::log(nn) + b.c_kn;
  return b;
}

BoundCheck verify_kt_regret(const Graph& x, int k, double sup_log_lik, double cap) {
  const auto bound = kt_regret_bound(k, x.n());
  const double lhs = sup_log_lik - log_kt_marginal_exact(x, k, cap).log_value;
  return {lhs, bound.rhs, lhs <= bound.rhs + 1e-9};
}

BoundCheck gamma_composition_inequality(std::span<const std::int64_t> parts) {
  if (parts.empty()) throw ValidationError("composition needs at least one part");
  std::int64_t n = 0;
  for (auto p : parts) {
    if (p < 1) throw ValidationError("composition parts must be positive");
    n += p;
  }
  const double nn = static_cast<double>(n);
  double lhs = 0.0;
  for (auto p : parts) {
    const double pp = static_cast<double>(p);
    lhs += pp * std::log(pp / nn) - std::lgamma(pp + 0.5);
  }
  const double rhs = -std::lgamma(nn + 0.5) - static_cast<double>(parts.size() - 1) * kLogGammaHalf;
  return {lhs, rhs, rhs - lhs >= -1e-9};
}

double log_label_sup_ratio(std::span<const std::int64_t> sizes, int k) {
  const std::int64_t n = std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0});
  double sup = 0.0;
  for (auto s : sizes)
    if (s > 0) sup += static_cast<double>(s) * std::log(static_cast<double>(s) / static_cast<double>(n));
  return sup - log_kt_labels(sizes, k);
}

double log_label_ratio_bound(int k, std::int64_t n) {
  const double nn = static_cast<double>(n);
  return kLogGammaHalf + std::lgamma(nn + 0.5 * k) - std::lgamma(0.5 * k) - std::lgamma(nn + 0.5);
}

double log_cell_sup_ratio(std::int64_t edges, std::int64_t pairs) {
  const double e = static_cast<double>(edges), m = static_cast<double>(pairs);
  const double sup = xlogx(e) + xlogx(m - e) - xlogx(m);
  return sup - log_beta_half_cell(edges, pairs);
}

double log_cell_ratio_bound(std::int64_t pairs) {
  const double m = static_cast<double>(pairs);
  return kLogGammaHalf + std::lgamma(m + 1.0) - std::lgamma(m + 0.5);
}

}  // namespace ktsbm
