#pragma once

#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace oeis {

// Disjoint-set forest over dense ids, union by size with path halving.
class UnionFind {
 public:
  std::size_t add() {
    parent_.push_back(parent_.size());
    size_.push_back(1);
    ++classes_;
    return parent_.size() - 1;
  }

  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  // Returns true when two distinct classes were merged.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --classes_;
    return true;
  }

  std::size_t size() const { return parent_.size(); }
  std::size_t classes() const { return classes_; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::size_t classes_ = 0;
};

}  // namespace oeis
