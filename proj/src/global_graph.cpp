#include "sgcl/global_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace sgcl {

GlobalGraph GlobalGraph::build(const std::vector<Session>& train, int total_items,
                               bool directed) {
  if (train.empty()) throw std::runtime_error("GlobalGraph::build: no train sessions");
  GlobalGraph g;
  std::vector<std::unordered_map<ItemIndex, std::int64_t>> counts(
      static_cast<std::size_t>(total_items) + 1);
  for (const Session& s : train) {
    for (std::size_t p = 0; p + 1 < s.items.size(); ++p) {
      ItemIndex a = s.items[p], b = s.items[p + 1];
      if (a == b) continue;  // a synonym equal to the original is a no-op
      ++counts[a][b];
      if (!directed) ++counts[b][a];
    }
  }
  g.adjacency_.resize(counts.size());
  for (std::size_t i = 1; i < counts.size(); ++i) {
    auto& list = g.adjacency_[i];
    list.reserve(counts[i].size());
    for (const auto& [item, count] : counts[i]) list.push_back({item, count});
    std::sort(list.begin(), list.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.item < b.item; });
  }
  return g;
}

std::map<int, std::int64_t> GlobalGraph::degree_stats() const {
  std::map<int, std::int64_t> hist;
  for (std::size_t i = 1; i < adjacency_.size(); ++i)
    ++hist[static_cast<int>(adjacency_[i].size())];
  return hist;
}

namespace {
constexpr char kGraphMagic[8] = {'S', 'G', 'C', 'L', 'G', 'R', 'P', 'H'};
constexpr std::uint16_t kGraphVersion = 1;
}  // namespace

void GlobalGraph::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.write(kGraphMagic, sizeof kGraphMagic);
  os.write(reinterpret_cast<const char*>(&kGraphVersion), sizeof kGraphVersion);
  auto n = static_cast<std::uint32_t>(adjacency_.size());
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (const auto& list : adjacency_) {
    auto len = static_cast<std::uint32_t>(list.size());
    os.write(reinterpret_cast<const char*>(&len), sizeof len);
    for (const Neighbor& nb : list) {
      os.write(reinterpret_cast<const char*>(&nb.item), sizeof nb.item);
      os.write(reinterpret_cast<const char*>(&nb.count), sizeof nb.count);
    }
  }
}

GlobalGraph GlobalGraph::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kGraphMagic, sizeof kGraphMagic) != 0)
    throw std::runtime_error(path + " is not a global graph file");
  std::uint16_t version;
  is.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != kGraphVersion)
    throw std::runtime_error("unsupported graph version " + std::to_string(version));
  std::uint32_t n;
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  GlobalGraph g;
  g.adjacency_.resize(n);
  for (auto& list : g.adjacency_) {
    std::uint32_t len;
    is.read(reinterpret_cast<char*>(&len), sizeof len);
    list.resize(len);
    for (Neighbor& nb : list) {
      is.read(reinterpret_cast<char*>(&nb.item), sizeof nb.item);
      is.read(reinterpret_cast<char*>(&nb.count), sizeof nb.count);
    }
  }
  if (!is) throw std::runtime_error(path + " truncated");
  return g;
}

SynonymSampler::SynonymSampler(const GlobalGraph& graph, Real k) : graph_(&graph), k_(k) {
  if (k < 0.0 || k > 1.0)
    throw std::invalid_argument("SynonymSampler: k must lie in [0, 1]");
  cumulative_.resize(static_cast<std::size_t>(graph.total_items()) + 1);
  for (std::size_t i = 1; i < cumulative_.size(); ++i) {
    const auto& list = graph.neighbors(static_cast<ItemIndex>(i));
    auto& cum = cumulative_[i];
    cum.reserve(list.size());
    Real acc = 0.0;
    for (const auto& nb : list) {
      acc += std::pow(static_cast<Real>(nb.count), k);
      cum.push_back(acc);
    }
  }
}

ItemIndex SynonymSampler::sample(ItemIndex item, Rng& rng) const {
  if (!graph_->has_neighbors(item))
    throw std::runtime_error("sample_synonym: item " + std::to_string(item) +
                             " has no neighbors");
  const auto& cum = cumulative_[static_cast<std::size_t>(item)];
  Real u = rng.next_double() * cum.back();
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) --it;  // u == cum.back() edge
  ItemIndex chosen = graph_->neighbors(item)[static_cast<std::size_t>(it - cum.begin())].item;
  return chosen;
}

}  // namespace sgcl
