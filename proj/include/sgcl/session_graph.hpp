#pragma once

#include "sgcl/types.hpp"

namespace sgcl {

// Star-augmented directed graph of one session. The star node is implicit:
// it is wired to every node by the encoder's gates and never appears in the
// adjacency matrices.
struct SessionGraph {
  std::vector<ItemIndex> nodes;  // unique items, first-occurrence order
  std::vector<int> alias;        // session position -> node index
  Matrix a_in;                   // N x N, rows normalized over incoming edges
  Matrix a_out;                  // N x N, rows normalized over outgoing edges

  int node_count() const { return static_cast<int>(nodes.size()); }
};

// Adjacent pairs become directed edges with multiplicity; self-transitions
// keep their self-loop. Each row of a_in / a_out sums to 1 (or 0 when the
// node has no edges of that direction).
SessionGraph build_session_graph(const Session& s);

// Initial star state: arithmetic mean of the initial node states (N x d).
RowVector init_star(const Matrix& h0);

}  // namespace sgcl
