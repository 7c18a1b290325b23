#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "ktsbm/likelihood.hpp"
#include "ktsbm/rng.hpp"
#include "ktsbm/special.hpp"

namespace ktsbm {
namespace {

// Labelings of [k]^n grouped by their sufficient statistics.
struct StatsClass {
  std::vector<std::int64_t> sizes;
  std::vector<std::int64_t> edges;  // upper triangle a <= b
  std::vector<std::int64_t> pairs;  // upper triangle a <= b
  double log_count = 0.0;
};

int cell_index(int k, int a, int b) { return a * k - a * (a - 1) / 2 + (b - a); }

std::vector<StatsClass> stats_classes(const Graph& x, int k) {
  std::map<std::vector<std::int64_t>, std::int64_t> counts;
  PartitionWalker walker(x, k, /*canonical=*/false);
  std::vector<std::int64_t> key;
  walker.walk({}, [&](const PartitionWalker& w) {
    key.assign(w.sizes().begin(), w.sizes().end());
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) key.push_back(w.edges(a, b));
    ++counts[key];
  });
  std::vector<StatsClass> out;
  out.reserve(counts.size());
  for (const auto& [kv, count] : counts) {
    StatsClass c;
    c.sizes.assign(kv.begin(), kv.begin() + k);
    c.edges.assign(kv.begin() + k, kv.end());
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b)
        c.pairs.push_back(a == b ? c.sizes[a] * (c.sizes[a] - 1) / 2 : c.sizes[a] * c.sizes[b]);
    c.log_count = std::log(static_cast<double>(count));
    out.push_back(std::move(c));
  }
  return out;
}

struct Expectations {
  std::vector<double> sizes;
  std::vector<double> edges;
  std::vector<double> pairs;
};

double exact_estep(const std::vector<StatsClass>& classes, const SbmParams& theta, Expectations& ex) {
  const int k = theta.k();
  const int cells = k * (k + 1) / 2;
  std::vector<double> logw(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& cl = classes[c];
    double v = cl.log_count;
    for (int a = 0; a < k; ++a) v += count_log(static_cast<double>(cl.sizes[a]), theta.pi()[a]);
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        const int idx = cell_index(k, a, b);
        const double p = theta.P()(a, b);
        v += count_log(static_cast<double>(cl.edges[idx]), p) +
             count_log(static_cast<double>(cl.pairs[idx] - cl.edges[idx]), 1.0 - p);
      }
    logw[c] = v;
  }
  const double total = log_sum_exp(logw);
  ex.sizes.assign(static_cast<std::size_t>(k), 0.0);
  ex.edges.assign(static_cast<std::size_t>(cells), 0.0);
  ex.pairs.assign(static_cast<std::size_t>(cells), 0.0);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const double w = std::exp(logw[c] - total);
    if (w == 0.0) continue;
    for (int a = 0; a < k; ++a) ex.sizes[a] += w * static_cast<double>(classes[c].sizes[a]);
    for (int i = 0; i < cells; ++i) {
      ex.edges[i] += w * static_cast<double>(classes[c].edges[i]);
      ex.pairs[i] += w * static_cast<double>(classes[c].pairs[i]);
    }
  }
  return total;
}

std::vector<double> normalized_weights(std::vector<double> pi) {
  for (auto& v : pi) v = std::max(v, 1e-300);
  double total = 0.0;
  for (double v : pi) total += v;
  for (auto& v : pi) v /= total;
  // Push the rounding residue into the largest weight so the sum is 1 to
  // within the SbmParams tolerance.
  double sum = 0.0;
  for (double v : pi) sum += v;
  auto it = std::max_element(pi.begin(), pi.end());
  *it += 1.0 - sum;
  return pi;
}

SbmParams exact_mstep(const Expectations& ex, const SbmParams& prev, double n) {
  const int k = prev.k();
  std::vector<double> pi(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) pi[a] = ex.sizes[a] / n;
  SymMatrix P(k);
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) {
      const int idx = cell_index(k, a, b);
      const double v = ex.pairs[idx] > 0.0 ? ex.edges[idx] / ex.pairs[idx] : prev.P()(a, b);
      P.set(a, b, std::clamp(v, 0.0, 1.0));
    }
  return SbmParams(normalized_weights(std::move(pi)), std::move(P));
}

bool converged(double prev, double cur, double tol) { return std::abs(cur - prev) <= tol * std::abs(prev); }

FitResult exact_em(const std::vector<StatsClass>& classes, const Graph& x, SbmParams theta,
                   const EmOptions& opts) {
  Expectations ex;
  double L = exact_estep(classes, theta, ex);
  FitResult out{theta, L, 1, false, true, {L}};
  while (out.iterations < opts.max_iterations) {
    SbmParams next = exact_mstep(ex, theta, static_cast<double>(x.n()));
    Expectations next_ex;
    const double next_L = exact_estep(classes, next, next_ex);
    ++out.iterations;
    out.trace.push_back(next_L);
    theta = std::move(next);
    ex = std::move(next_ex);
    const bool done = converged(L, next_L, opts.tol);
    L = next_L;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.params = std::move(theta);
  out.log_marginal = L;
  return out;
}

constexpr double kLogFloor = 1e-10;
double safe_log(double p) { return std::log(std::clamp(p, kLogFloor, 1.0)); }

// Variational EM with a fully factorized posterior over labels.
class MeanField {
 public:
  MeanField(const Graph& x, int k) : x_(x), n_(x.n()), k_(k), tau_(static_cast<std::size_t>(n_) * k, 0.0) {
    adj_.resize(static_cast<std::size_t>(n_));
    for (auto [i, j] : x.edges()) {
      adj_[i].push_back(j);
      adj_[j].push_back(i);
    }
  }

  void init_random(std::uint64_t seed) {
    Rng rng(seed);
    for (int i = 0; i < n_; ++i) {
      double total = 0.0;
      for (int a = 0; a < k_; ++a) total += (t(i, a) = 0.1 + rng.uniform());
      for (int a = 0; a < k_; ++a) t(i, a) /= total;
    }
  }

  void sweep(const SbmParams& theta) {
    std::vector<double> logit(static_cast<std::size_t>(k_));
    for (int i = 0; i < n_; ++i) {
      for (int a = 0; a < k_; ++a) {
        double v = safe_log(theta.pi()[a]);
        for (int j = 0; j < n_; ++j) {
          if (j == i) continue;
          const bool e = x_.has_edge(i, j);
          for (int b = 0; b < k_; ++b) {
            const double p = theta.P()(a, b);
            v += t(j, b) * (e ? safe_log(p) : safe_log(1.0 - p));
          }
        }
        logit[a] = v;
      }
      const double z = log_sum_exp(logit);
      for (int a = 0; a < k_; ++a) t(i, a) = std::exp(logit[a] - z);
    }
  }

  SbmParams mstep(const SbmParams& prev) const {
    std::vector<double> T(static_cast<std::size_t>(k_), 0.0);
    for (int i = 0; i < n_; ++i)
      for (int a = 0; a < k_; ++a) T[a] += t(i, a);
    SquareMatrix<double> self(k_), edge(k_);
    std::vector<double> S(static_cast<std::size_t>(k_));
    for (int i = 0; i < n_; ++i) {
      std::fill(S.begin(), S.end(), 0.0);
      for (int j : adj_[i])
        for (int b = 0; b < k_; ++b) S[b] += t(j, b);
      for (int a = 0; a < k_; ++a)
        for (int b = 0; b < k_; ++b) {
          self(a, b) += t(i, a) * t(i, b);
          edge(a, b) += t(i, a) * S[b];
        }
    }
    std::vector<double> pi(static_cast<std::size_t>(k_));
    for (int a = 0; a < k_; ++a) pi[a] = T[a] / n_;
    SymMatrix P(k_);
    for (int a = 0; a < k_; ++a)
      for (int b = a; b < k_; ++b) {
        const double denom = T[a] * T[b] - self(a, b);
        P.set(a, b, denom > 0.0 ? std::clamp(edge(a, b) / denom, 0.0, 1.0) : prev.P()(a, b));
      }
    return SbmParams(normalized_weights(std::move(pi)), std::move(P));
  }

  double elbo(const SbmParams& theta) const {
    double v = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int a = 0; a < k_; ++a)
        if (t(i, a) > 0.0) v += t(i, a) * (safe_log(theta.pi()[a]) - std::log(t(i, a)));
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) {
        const bool e = x_.has_edge(i, j);
        for (int a = 0; a < k_; ++a)
          for (int b = 0; b < k_; ++b) {
            const double p = theta.P()(a, b);
            v += t(i, a) * t(j, b) * (e ? safe_log(p) : safe_log(1.0 - p));
          }
      }
    return v;
  }

 private:
  double& t(int i, int a) { return tau_[static_cast<std::size_t>(i) * k_ + a]; }
  double t(int i, int a) const { return tau_[static_cast<std::size_t>(i) * k_ + a]; }

  const Graph& x_;
  int n_;
  int k_;
  std::vector<double> tau_;
  std::vector<std::vector<int>> adj_;
};

FitResult mean_field_em(const Graph& x, SbmParams theta, std::uint64_t seed, const EmOptions& opts) {
  MeanField mf(x, theta.k());
  mf.init_random(seed);
  mf.sweep(theta);
  double L = mf.elbo(theta);
  FitResult out{theta, L, 1, false, false, {L}};
  while (out.iterations < opts.max_iterations) {
    theta = mf.mstep(theta);
    mf.sweep(theta);
    const double next_L = mf.elbo(theta);
    ++out.iterations;
    out.trace.push_back(next_L);
    const bool done = converged(L, next_L, opts.tol);
    L = next_L;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.params = std::move(theta);
  out.log_marginal = L;
  return out;
}

SbmParams random_start(int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> pi(static_cast<std::size_t>(k));
  for (auto& v : pi) v = 0.5 + rng.uniform();
  SymMatrix P(k);
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) P.set(a, b, 0.05 + 0.9 * rng.uniform());
  return SbmParams(normalized_weights(std::move(pi)), std::move(P));
}

bool use_exact(const Graph& x, int k, const EmOptions& opts) {
  return !opts.force_mean_field && full_enumeration_feasible(x.n(), k, opts.cap);
}

}  // namespace

FitResult fit_marginal_ml_from(const Graph& x, const SbmParams& init, const EmOptions& opts) {
  if (x.n() < 2) throw ValidationError("EM fit needs n >= 2");
  if (use_exact(x, init.k(), opts)) return exact_em(stats_classes(x, init.k()), x, init, opts);
  return mean_field_em(x, init, opts.seed, opts);
}

FitResult fit_marginal_ml(const Graph& x, int k, const EmOptions& opts) {
  if (x.n() < 2) throw ValidationError("EM fit needs n >= 2");
  if (k < 1) throw ValidationError("k must be positive");
  if (opts.starts < 1) throw ValidationError("EM needs at least one start");
  const bool exact = use_exact(x, k, opts);
  std::vector<StatsClass> classes;
  if (exact) classes = stats_classes(x, k);

  std::vector<std::optional<FitResult>> runs(static_cast<std::size_t>(opts.starts));
#pragma omp parallel for schedule(dynamic, 1)
  for (int s = 0; s < opts.starts; ++s) {
    const std::uint64_t seed = mix_seed(opts.seed, static_cast<std::uint64_t>(s));
    auto init = random_start(k, seed);
    runs[s] = exact ? exact_em(classes, x, std::move(init), opts)
                    : mean_field_em(x, std::move(init), mix_seed(seed, 1), opts);
  }
  std::size_t best = 0;
  for (std::size_t s = 1; s < runs.size(); ++s)
    if (runs[s]->log_marginal > runs[best]->log_marginal) best = s;
  return std::move(*runs[best]);
}

SbmParams split_block(const SbmParams& params, int a) {
  const int k = params.k();
  if (a < 0 || a >= k) throw ValidationError("block index out of range");
  std::vector<double> pi = params.pi();
  pi[a] /= 2.0;
  pi.push_back(pi[a]);
  SymMatrix P(k + 1);
  auto src = [&](int i) { return i == k ? a : i; };
  for (int i = 0; i <= k; ++i)
    for (int j = i; j <= k; ++j) P.set(i, j, params.P()(src(i), src(j)));
  return SbmParams(std::move(pi), std::move(P));
}

}  // namespace ktsbm
