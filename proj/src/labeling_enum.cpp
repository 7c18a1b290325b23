#include "ktsbm/labeling_enum.hpp"

#include <algorithm>
#include <cmath>

namespace ktsbm {

bool canonical_enumeration_feasible(int n, int k, double cap) {
  const double log_count = n * std::log(static_cast<double>(k)) - std::lgamma(k + 1.0);
  return log_count <= std::log(cap) + 1e-12;
}

bool full_enumeration_feasible(int n, int k, double cap) {
  return n * std::log(static_cast<double>(k)) <= std::log(cap) + 1e-12;
}

PartitionWalker::PartitionWalker(const Graph& x, int max_blocks, bool canonical)
    : n_(x.n()),
      max_blocks_(std::max(1, max_blocks)),
      canonical_(canonical),
      earlier_neighbors_(static_cast<std::size_t>(x.n())),
      labels_(static_cast<std::size_t>(x.n()), -1),
      sizes_(static_cast<std::size_t>(std::max(1, max_blocks)), 0),
      edges_(std::max(1, max_blocks)) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < i; ++j)
      if (x.has_edge(i, j)) earlier_neighbors_[i].push_back(j);
}

void PartitionWalker::reset() {
  blocks_ = canonical_ ? 0 : max_blocks_;
  std::fill(labels_.begin(), labels_.end(), -1);
  std::fill(sizes_.begin(), sizes_.end(), 0);
  edges_ = CountMatrix(max_blocks_);
}

void PartitionWalker::assign(int node, int block) {
  labels_[node] = block;
  if (canonical_ && block == blocks_) ++blocks_;
  ++sizes_[block];
  for (int j : earlier_neighbors_[node]) {
    const int c = labels_[j];
    ++edges_(std::min(block, c), std::max(block, c));
  }
}

void PartitionWalker::unassign(int node) {
  const int block = labels_[node];
  for (int j : earlier_neighbors_[node]) {
    const int c = labels_[j];
    --edges_(std::min(block, c), std::max(block, c));
  }
  if (--sizes_[block] == 0 && canonical_) --blocks_;
  labels_[node] = -1;
}

std::vector<std::vector<int>> PartitionWalker::prefixes(int n, int depth, int max_blocks) {
  depth = std::clamp(depth, 0, n);
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int used) -> void {
    if (static_cast<int>(cur.size()) == depth) {
      out.push_back(cur);
      return;
    }
    const int limit = used < max_blocks ? used + 1 : used;
    for (int b = 0; b < limit; ++b) {
      cur.push_back(b);
      self(self, std::max(used, b + 1));
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

int PartitionWalker::split_depth(int n, int max_blocks, std::size_t target) {
  for (int d = 0; d <= n; ++d)
    if (prefixes(n, d, max_blocks).size() >= target) return d;
  return n;
}

}  // namespace ktsbm
