#include "ktsbm/sbm_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "ktsbm/rng.hpp"

namespace ktsbm {

SymMatrix::SymMatrix(int dim, double fill)
    : dim_(dim), upper_(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim + 1) / 2, fill) {
  if (dim < 0) throw ValidationError("matrix dimension must be nonnegative");
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const int dim = static_cast<int>(rows.size());
  SymMatrix m(dim);
  for (int a = 0; a < dim; ++a) {
    if (static_cast<int>(rows[a].size()) != dim) throw ValidationError("matrix is not square");
  }
  for (int a = 0; a < dim; ++a) {
    for (int b = a; b < dim; ++b) {
      if (rows[a][b] != rows[b][a]) throw ValidationError("matrix is not symmetric");
      m.set(a, b, rows[a][b]);
    }
  }
  return m;
}

std::size_t SymMatrix::index(int a, int b) const {
  if (a > b) std::swap(a, b);
  const auto ua = static_cast<std::size_t>(a);
  return ua * (2 * static_cast<std::size_t>(dim_) - ua + 1) / 2 + static_cast<std::size_t>(b - a);
}

double SymMatrix::max_entry() const {
  return upper_.empty() ? 0.0 : *std::max_element(upper_.begin(), upper_.end());
}

std::vector<std::vector<double>> SymMatrix::rows() const {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(dim_), std::vector<double>(dim_));
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) out[a][b] = (*this)(a, b);
  return out;
}

SbmParams::SbmParams(std::vector<double> pi, SymMatrix P) : pi_(std::move(pi)), P_(std::move(P)) {
  if (pi_.empty()) throw ValidationError("k must be positive");
  if (P_.dim() != k()) throw ValidationError("P dimension does not match pi");
  double total = 0.0;
  for (double p : pi_) {
    if (!(p > 0.0)) throw ValidationError("community weights must be strictly positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("community weights must sum to 1");
  for (int a = 0; a < k(); ++a)
    for (int b = a; b < k(); ++b) {
      const double v = P_(a, b);
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("edge probabilities must lie in [0,1]");
    }
}

SparseSchedule::SparseSchedule(SymMatrix S0, double c, double alpha)
    : S0_(std::move(S0)), c_(c), alpha_(alpha) {
  if (!(c_ > 0.0)) throw ValidationError("sparse schedule needs c > 0");
  if (!(alpha_ >= 0.0 && alpha_ < 1.0)) throw ValidationError("sparse schedule needs 0 <= alpha < 1");
  for (int a = 0; a < S0_.dim(); ++a)
    for (int b = a; b < S0_.dim(); ++b)
      if (!(S0_(a, b) >= 0.0 && S0_(a, b) <= 1.0)) throw ValidationError("S0 entries must lie in [0,1]");
}

double SparseSchedule::rho(std::int64_t n) const {
  if (n < 1) throw ValidationError("n must be positive");
  return std::min(1.0, c_ * std::pow(static_cast<double>(n), -alpha_));
}

LabelVector::LabelVector(std::vector<int> labels, int k) : labels_(std::move(labels)), k_(k) {
  if (k_ < 1) throw ValidationError("label alphabet must be nonempty");
  for (int v : labels_)
    if (v < 0 || v >= k_) throw ValidationError("label out of range [1," + std::to_string(k_) + "]");
}

LabelVector LabelVector::from_one_based(const std::vector<int>& labels, int k) {
  std::vector<int> zero(labels.size());
  std::transform(labels.begin(), labels.end(), zero.begin(), [](int v) { return v - 1; });
  return LabelVector(std::move(zero), k);
}

std::vector<int> LabelVector::one_based() const {
  std::vector<int> out(labels_.size());
  std::transform(labels_.begin(), labels_.end(), out.begin(), [](int v) { return v + 1; });
  return out;
}

Graph::Graph(int n) : n_(n) {
  if (n < 0) throw ValidationError("node count must be nonnegative");
  const std::size_t pairs = static_cast<std::size_t>(n) * static_cast<std::size_t>(n > 0 ? n - 1 : 0) / 2;
  bits_.assign((pairs + 63) / 64, 0);
}

std::size_t Graph::bit_index(int i, int j) const {
  if (i > j) std::swap(i, j);
  const auto ui = static_cast<std::size_t>(i);
  const auto un = static_cast<std::size_t>(n_);
  return ui * (2 * un - ui - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

bool Graph::has_edge(int i, int j) const {
  if (i == j) return false;
  const std::size_t idx = bit_index(i, j);
  return (bits_[idx >> 6] >> (idx & 63)) & 1ULL;
}

void Graph::set_edge(int i, int j, bool present) {
  if (i == j) throw ValidationError("self-loops are not allowed");
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw ValidationError("node index out of range");
  const std::size_t idx = bit_index(i, j);
  if (present)
    bits_[idx >> 6] |= (1ULL << (idx & 63));
  else
    bits_[idx >> 6] &= ~(1ULL << (idx & 63));
}

std::int64_t Graph::edge_count() const {
  std::int64_t total = 0;
  for (auto w : bits_) total += std::popcount(w);
  return total;
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (has_edge(i, j)) out.emplace_back(i, j);
  return out;
}

Graph Graph::permuted(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) throw ValidationError("permutation size mismatch");
  Graph g(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (has_edge(perm[i], perm[j])) g.set_edge(i, j);
  return g;
}

SbmSample sample_sbm(const SbmParams& params, int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("n must be positive");
  Rng rng(seed);
  std::vector<int> z(static_cast<std::size_t>(n));
  for (auto& v : z) v = rng.categorical(params.pi());
  Graph g(n);
  const auto& P = params.P();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(P(z[i], z[j]))) g.set_edge(i, j);
  return {LabelVector(std::move(z), params.k()), std::move(g)};
}

SbmParams realize_sparse(const std::vector<double>& pi, const SparseSchedule& schedule, std::int64_t n) {
  const double rho = schedule.rho(n);
  const double raw = schedule.c() * std::pow(static_cast<double>(n), -schedule.alpha());
  const auto& S0 = schedule.S0();
  SymMatrix P(S0.dim());
  for (int a = 0; a < S0.dim(); ++a)
    for (int b = a; b < S0.dim(); ++b) {
      if (raw * S0(a, b) > 1.0)
        throw ValidationError("c n^-alpha * S0 = " + std::to_string(raw * S0(a, b)) + " exceeds 1 at n=" +
                              std::to_string(n));
      P.set(a, b, rho * S0(a, b));
    }
  return SbmParams(pi, std::move(P));
}

SuffStats stats_from_counts(std::span<const std::int64_t> sizes, const CountMatrix& edges) {
  SuffStats s;
  s.k = static_cast<int>(sizes.size());
  s.n_a.assign(sizes.begin(), sizes.end());
  s.n = std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0});
  s.n_ab = CountMatrix(s.k);
  s.n_ab_tilde = CountMatrix(s.k);
  s.O_ab = CountMatrix(s.k);
  s.O_ab_tilde = CountMatrix(s.k);
  for (int a = 0; a < s.k; ++a) {
    for (int b = 0; b < s.k; ++b) {
      const int lo = std::min(a, b), hi = std::max(a, b);
      const std::int64_t e = edges(lo, hi);
      if (a == b) {
        s.n_ab(a, a) = s.n_a[a] * (s.n_a[a] - 1);
        s.n_ab_tilde(a, a) = s.n_ab(a, a);
        s.O_ab(a, a) = 2 * e;
        s.O_ab_tilde(a, a) = s.O_ab(a, a);
      } else {
        s.n_ab(a, b) = s.n_a[a] * s.n_a[b];
        s.n_ab_tilde(a, b) = 2 * s.n_ab(a, b);
        s.O_ab(a, b) = e;
        s.O_ab_tilde(a, b) = 2 * e;
      }
      s.E_n += s.O_ab(a, b);
    }
  }
  return s;
}

SuffStats compute_stats(const LabelVector& z, const Graph& x, int k) {
  if (z.size() != x.n()) throw ValidationError("label vector length does not match graph size");
  if (z.k() > k) {
    for (int v : z.values())
      if (v >= k) throw ValidationError("label exceeds k");
  }
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 0);
  for (int v : z.values()) ++sizes[v];
  CountMatrix edges(k);
  for (int i = 0; i < x.n(); ++i)
    for (int j = i + 1; j < x.n(); ++j)
      if (x.has_edge(i, j)) ++edges(std::min(z[i], z[j]), std::max(z[i], z[j]));
  return stats_from_counts(sizes, edges);
}

}  // namespace ktsbm
