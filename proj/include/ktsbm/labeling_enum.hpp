#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ktsbm/sbm_core.hpp"

namespace ktsbm {

/// Default cap on k^n / k! for exact enumeration.
inline constexpr double kDefaultEnumerationCap = 1e7;

/// True when k^n / k! <= cap (evaluated in log space).
bool canonical_enumeration_feasible(int n, int k, double cap);
/// True when k^n <= cap.
bool full_enumeration_feasible(int n, int k, double cap);

/// Depth-first walk over canonical labelings (restricted growth strings:
/// node 0 gets block 0, every later node joins a used block or opens the
/// next one). Each canonical labeling with m blocks stands for
/// k!/(k-m)! labelings of [k]^n. Block sizes and undirected per-cell edge
/// counts are maintained incrementally.
class PartitionWalker {
 public:
  /// With `canonical == false` every labeling of [max_blocks]^n is visited
  /// and sizes() always spans max_blocks entries.
  PartitionWalker(const Graph& x, int max_blocks, bool canonical = true);

  int n() const { return n_; }
  int blocks() const { return blocks_; }
  std::span<const std::int64_t> sizes() const { return {sizes_.data(), static_cast<std::size_t>(blocks_)}; }
  /// Undirected edge count between blocks a <= b.
  std::int64_t edges(int a, int b) const { return edges_(a, b); }
  std::span<const int> labels() const { return labels_; }

  /// Visits every canonical completion of `prefix` (which must itself be a
  /// canonical labeling of nodes 0..prefix.size()-1).
  template <typename Visit>
  void walk(std::span<const int> prefix, Visit&& visit) {
    reset();
    for (std::size_t i = 0; i < prefix.size(); ++i) assign(static_cast<int>(i), prefix[i]);
    descend(static_cast<int>(prefix.size()), visit);
  }

  /// Canonical prefixes of length min(depth, n), in enumeration order.
  static std::vector<std::vector<int>> prefixes(int n, int depth, int max_blocks);
  /// Shortest prefix depth giving at least `target` prefixes (or n).
  static int split_depth(int n, int max_blocks, std::size_t target);

 private:
  void reset();
  void assign(int node, int block);
  void unassign(int node);

  template <typename Visit>
  void descend(int node, Visit& visit) {
    if (node == n_) {
      visit(static_cast<const PartitionWalker&>(*this));
      return;
    }
    const int limit = !canonical_ ? max_blocks_ : (blocks_ < max_blocks_ ? blocks_ + 1 : blocks_);
    for (int b = 0; b < limit; ++b) {
      assign(node, b);
      descend(node + 1, visit);
      unassign(node);
    }
  }

  int n_;
  int max_blocks_;
  bool canonical_;
  int blocks_ = 0;
  std::vector<std::vector<int>> earlier_neighbors_;
  std::vector<int> labels_;
  std::vector<std::int64_t> sizes_;
  CountMatrix edges_;
};

/// Odometer over all of [k]^n in lexicographic order (node n-1 fastest).
template <typename Visit>
void for_each_labeling(int n, int k, Visit&& visit) {
  std::vector<int> z(static_cast<std::size_t>(n), 0);
  while (true) {
    visit(std::span<const int>(z));
    int i = n - 1;
    while (i >= 0 && z[i] == k - 1) z[i--] = 0;
    if (i < 0) return;
    ++z[i];
  }
}

}  // namespace ktsbm
