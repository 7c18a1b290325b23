#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ktsbm/errors.hpp"

namespace ktsbm {

/// Dense row-major k x k matrix.
template <typename T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int dim, T fill = T{})
      : dim_(dim), data_(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), fill) {}

  int dim() const { return dim_; }
  T& operator()(int a, int b) { return data_[index(a, b)]; }
  const T& operator()(int a, int b) const { return data_[index(a, b)]; }
  std::span<const T> data() const { return data_; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(b);
  }
  int dim_ = 0;
  std::vector<T> data_;
};

using CountMatrix = SquareMatrix<std::int64_t>;

/// Symmetric matrix stored as its upper triangle; reads are mirrored, so
/// symmetry holds exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim, double fill = 0.0);

  /// Throws ValidationError unless `rows` is square and exactly symmetric.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);

  int dim() const { return dim_; }
  double operator()(int a, int b) const { return upper_[index(a, b)]; }
  void set(int a, int b, double v) { upper_[index(a, b)] = v; }
  double max_entry() const;
  std::vector<std::vector<double>> rows() const;

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t index(int a, int b) const;
  int dim_ = 0;
  std::vector<double> upper_;
};

/// A point (pi, P) of the k-block parameter space.
class SbmParams {
 public:
  /// Validates: pi strictly positive summing to 1 within 1e-12, P in [0,1].
  SbmParams(std::vector<double> pi, SymMatrix P);

  int k() const { return static_cast<int>(pi_.size()); }
  const std::vector<double>& pi() const { return pi_; }
  const SymMatrix& P() const { return P_; }

 private:
  std::vector<double> pi_;
  SymMatrix P_;
};

/// rho_n = min(1, c n^-alpha) with 0 <= alpha < 1, so n rho_n -> infinity.
class SparseSchedule {
 public:
  SparseSchedule(SymMatrix S0, double c, double alpha);

  const SymMatrix& S0() const { return S0_; }
  double c() const { return c_; }
  double alpha() const { return alpha_; }
  double rho(std::int64_t n) const;

 private:
  SymMatrix S0_;
  double c_;
  double alpha_;
};

/// Community assignment. Stored 0-based; files and CLI output use 1..k.
class LabelVector {
 public:
  LabelVector() = default;
  LabelVector(std::vector<int> labels, int k);
  static LabelVector from_one_based(const std::vector<int>& labels, int k);

  int size() const { return static_cast<int>(labels_.size()); }
  int k() const { return k_; }
  int operator[](int i) const { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& values() const { return labels_; }
  std::vector<int> one_based() const;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<int> labels_;
  int k_ = 1;
};

/// Simple undirected graph as an upper-triangular bitset.
class Graph {
 public:
  explicit Graph(int n = 0);

  int n() const { return n_; }
  bool has_edge(int i, int j) const;
  void set_edge(int i, int j, bool present = true);
  std::int64_t edge_count() const;
  std::int64_t pair_count() const { return static_cast<std::int64_t>(n_) * (n_ - 1) / 2; }
  /// Edges as (i, j) with i < j, lexicographic.
  std::vector<std::pair<int, int>> edges() const;
  /// Graph with node `perm[i]` playing the role of node i.
  Graph permuted(std::span<const int> perm) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t bit_index(int i, int j) const;
  int n_;
  std::vector<std::uint64_t> bits_;
};

/// Counters of a (z, x) pair. O counts ordered pairs, so an edge inside
/// block a adds 2 to O(a,a); the tilde versions double the off-diagonal.
struct SuffStats {
  int k = 0;
  std::int64_t n = 0;
  std::vector<std::int64_t> n_a;
  CountMatrix n_ab;
  CountMatrix n_ab_tilde;
  CountMatrix O_ab;
  CountMatrix O_ab_tilde;
  std::int64_t E_n = 0;

  /// Unordered pairs and undirected edges in cell a <= b.
  std::int64_t cell_pairs(int a, int b) const { return n_ab_tilde(a, b) / 2; }
  std::int64_t cell_edges(int a, int b) const { return O_ab_tilde(a, b) / 2; }
};

struct SbmSample {
  LabelVector labels;
  Graph graph;
};

/// Labels i.i.d. from pi, then each pair i < j (lexicographic) Bernoulli.
SbmSample sample_sbm(const SbmParams& params, int n, std::uint64_t seed);

/// Dense parameters (pi, rho_n S0) for this n. Throws if an entry exceeds 1.
SbmParams realize_sparse(const std::vector<double>& pi, const SparseSchedule& schedule,
                         std::int64_t n);

SuffStats compute_stats(const LabelVector& z, const Graph& x, int k);

/// Same counters from block sizes and undirected per-cell edge counts
/// (edges(a,b) for a <= b; lower triangle ignored).
SuffStats stats_from_counts(std::span<const std::int64_t> sizes, const CountMatrix& edges);

// Canonical text formats.
Graph read_graph(std::istream& in);
void write_graph(std::ostream& out, const Graph& g);
LabelVector read_labels(std::istream& in, int k);
void write_labels(std::ostream& out, const LabelVector& z);

}  // namespace ktsbm
