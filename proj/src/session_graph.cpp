#include "sgcl/session_graph.hpp"

#include <stdexcept>
#include <unordered_map>

namespace sgcl {

SessionGraph build_session_graph(const Session& s) {
  if (s.items.empty()) throw std::invalid_argument("build_session_graph: empty session");

  SessionGraph g;
  g.alias.reserve(s.items.size());
  std::unordered_map<ItemIndex, int> index_of;
  for (ItemIndex item : s.items) {
    auto [it, inserted] = index_of.try_emplace(item, static_cast<int>(g.nodes.size()));
    if (inserted) g.nodes.push_back(item);
    g.alias.push_back(it->second);
  }

  const int n = g.node_count();
  Matrix counts = Matrix::Zero(n, n);  // counts(u, v) = multiplicity of u -> v
  for (std::size_t p = 0; p + 1 < s.items.size(); ++p)
    counts(g.alias[p], g.alias[p + 1]) += 1.0;

  g.a_out = Matrix::Zero(n, n);
  g.a_in = Matrix::Zero(n, n);
  for (int u = 0; u < n; ++u) {
    Real out_deg = counts.row(u).sum();
    if (out_deg > 0) g.a_out.row(u) = counts.row(u) / out_deg;
    Real in_deg = counts.col(u).sum();
    if (in_deg > 0) g.a_in.row(u) = counts.col(u).transpose() / in_deg;
  }
  return g;
}

RowVector init_star(const Matrix& h0) {
  if (h0.rows() < 1) throw std::invalid_argument("init_star: no node states");
  return h0.colwise().mean();
}

}  // namespace sgcl
