#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgcl/rng.hpp"
#include "sgcl/types.hpp"

namespace sgcl {

// Item transition graph over all raw train sessions. Neighbor lists are
// deduplicated; repeated transitions accumulate in the count.
class GlobalGraph {
 public:
  struct Neighbor {
    ItemIndex item;
    std::int64_t count;
  };

  // Adjacent ordered pairs (x_i, x_{i+1}), self-transitions dropped.
  // Undirected accumulation (both directions) unless `directed` is set.
  static GlobalGraph build(const std::vector<Session>& train, int total_items,
                           bool directed = false);

  const std::vector<Neighbor>& neighbors(ItemIndex item) const { return adjacency_[item]; }
  bool has_neighbors(ItemIndex item) const {
    return item >= 0 && item < static_cast<ItemIndex>(adjacency_.size()) &&
           !adjacency_[item].empty();
  }
  int total_items() const { return static_cast<int>(adjacency_.size()) - 1; }  // excludes [mask]

  // Histogram of distinct-neighbor counts over all real items; isolated
  // items sit at degree 0.
  std::map<int, std::int64_t> degree_stats() const;

  void save(const std::string& path) const;
  static GlobalGraph load(const std::string& path);

 private:
  // adjacency_[0] (the [mask] slot) stays empty.
  std::vector<std::vector<Neighbor>> adjacency_;
};

// Draws 1-hop neighbors with probability proportional to count^k. The damping
// exponent k in [0,1] suppresses high-degree items. Holds cumulative weight
// tables per item; draws are O(log degree) and the sampler itself is
// immutable, so it can be shared freely across callers with their own RNGs.
class SynonymSampler {
 public:
  SynonymSampler(const GlobalGraph& graph, Real k = 0.75);

  // Never returns `item` itself or the [mask] index. The item must have at
  // least one neighbor; check has_neighbors() first or catch the error.
  ItemIndex sample(ItemIndex item, Rng& rng) const;
  bool can_sample(ItemIndex item) const { return graph_->has_neighbors(item); }
  Real damping() const { return k_; }
  int total_items() const { return graph_->total_items(); }

 private:
  const GlobalGraph* graph_;
  Real k_;
  std::vector<std::vector<Real>> cumulative_;  // per item, parallel to neighbor lists
};

}  // namespace sgcl
