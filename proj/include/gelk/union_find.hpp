#pragma once

#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace gelk {

/// Disjoint sets with union-by-size and path compression.
class UnionFind {
 public:
  explicit UnionFind(std::size_t count = 0) : parent_(count), size_(count, 1), components_(count) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t v) {
    std::size_t root = v;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[v] != root) {
      std::size_t next = parent_[v];
      parent_[v] = root;
      v = next;
    }
    return root;
  }

  /// Joins the sets of a and b. Returns {surviving root, absorbed root}; both
  /// equal the common root when a and b were already joined.
  std::pair<std::size_t, std::size_t> unite(std::size_t a, std::size_t b) {
    std::size_t ra = find(a);
    std::size_t rb = find(b);
    if (ra == rb) return {ra, ra};
    if (size_[ra] < size_[rb] || (size_[ra] == size_[rb] && rb < ra)) std::swap(ra, rb);
    parent_[rb] = ra;
    size_[ra] += size_[rb];
    --components_;
    return {ra, rb};
  }

  std::size_t component_size(std::size_t v) { return size_[find(v)]; }
  bool is_root(std::size_t v) const { return parent_[v] == v; }
  std::size_t root_size(std::size_t root) const { return size_[root]; }
  std::size_t components() const { return components_; }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::size_t components_;
};

}  // namespace gelk
