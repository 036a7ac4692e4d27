#pragma once

// Binary indexed tree over nonnegative weights with prefix-sum search.

#include <cstddef>
#include <vector>

namespace gelk {

class Fenwick {
 public:
  Fenwick() = default;
  explicit Fenwick(const std::vector<double>& weights) { build(weights); }

  void build(const std::vector<double>& weights) {
    values_ = weights;
    tree_.assign(weights.size() + 1, 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
      tree_[i + 1] += weights[i];
      const std::size_t parent = (i + 1) + ((i + 1) & (~(i + 1) + 1));
      if (parent <= weights.size()) tree_[parent] += tree_[i + 1];
    }
    mask_ = 1;
    while (mask_ * 2 <= weights.size()) mask_ *= 2;
  }

  std::size_t size() const { return values_.size(); }
  double value(std::size_t i) const { return values_[i]; }

  void set(std::size_t i, double w) {
    const double delta = w - values_[i];
    values_[i] = w;
    if (delta == 0.0) return;
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  /// Sum of the first `count` weights.
  double prefix(std::size_t count) const {
    double s = 0.0;
    for (std::size_t k = count; k > 0; k -= k & (~k + 1)) s += tree_[k];
    return s;
  }
  double total() const { return prefix(values_.size()); }

  /// Smallest index whose inclusive prefix sum exceeds u. Returns size() if
  /// rounding pushes u past the total.
  std::size_t find(double u) const {
    std::size_t pos = 0;
    for (std::size_t step = mask_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= u) {
        pos = next;
        u -= tree_[next];
      }
    }
    return pos;
  }

 private:
  std::vector<double> values_;
  std::vector<double> tree_;
  std::size_t mask_ = 0;
};

}  // namespace gelk
