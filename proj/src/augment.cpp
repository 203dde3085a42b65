#include "sgcl/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgcl {

namespace {

void check_gamma(Real gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("augment: gamma must lie in [0, 1]");
}

void check_nonempty(const Session& s) {
  if (s.items.empty()) throw std::invalid_argument("augment: empty session");
}

int ceil_count(Real gamma, int len) {
  return static_cast<int>(std::ceil(gamma * static_cast<Real>(len)));
}

// First `count` entries of a partial Fisher-Yates over [0, len), then sorted
// so downstream RNG draws consume in a position-independent order.
std::vector<int> distinct_positions(int len, int count, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < count; ++i) {
    int j = i + rng.next_int(len - i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

const char* method_name(AugmentMethod m) {
  switch (m) {
    case AugmentMethod::crop: return "crop";
    case AugmentMethod::mask: return "mask";
    case AugmentMethod::reorder: return "reorder";
    case AugmentMethod::change: return "change";
    case AugmentMethod::inject: return "inject";
  }
  return "?";
}

std::optional<AugmentMethod> method_from_name(const std::string& name) {
  for (AugmentMethod m : {AugmentMethod::crop, AugmentMethod::mask, AugmentMethod::reorder,
                          AugmentMethod::change, AugmentMethod::inject})
    if (name == method_name(m)) return m;
  return std::nullopt;
}

Real AugmentConfig::gamma_of(AugmentMethod m) const {
  switch (m) {
    case AugmentMethod::crop: return gamma_crop;
    case AugmentMethod::mask: return gamma_mask;
    case AugmentMethod::reorder: return gamma_reorder;
    case AugmentMethod::change: return gamma_change;
    case AugmentMethod::inject: return gamma_inject;
  }
  return 0.0;
}

Session crop(const Session& s, Real gamma, Rng& rng) {
  check_nonempty(s);
  check_gamma(gamma);
  int len = s.size();
  // floor per the sub-sequence length formula, clamped so output is non-empty
  int n = std::max(1, static_cast<int>(std::floor(gamma * static_cast<Real>(len))));
  int start = rng.next_int(len - n + 1);
  Session out;
  out.items.assign(s.items.begin() + start, s.items.begin() + start + n);
  out.label = s.label;
  return out;
}

Session mask(const Session& s, Real gamma, Rng& rng) {
  check_nonempty(s);
  check_gamma(gamma);
  Session out = s;
  int n = ceil_count(gamma, s.size());
  for (int p : distinct_positions(s.size(), n, rng))
    out.items[static_cast<std::size_t>(p)] = kMaskIndex;
  return out;
}

Session reorder(const Session& s, Real gamma, Rng& rng) {
  check_nonempty(s);
  check_gamma(gamma);
  Session out = s;
  int len = s.size();
  int n = ceil_count(gamma, len);
  if (n <= 1) return out;
  int start = rng.next_int(len - n + 1);
  // Fisher-Yates over the window
  for (int i = n - 1; i > 0; --i) {
    int j = rng.next_int(i + 1);
    std::swap(out.items[static_cast<std::size_t>(start + i)],
              out.items[static_cast<std::size_t>(start + j)]);
  }
  return out;
}

namespace {

std::optional<ItemIndex> synonym_or_fallback(ItemIndex x, const SynonymSampler& sampler,
                                             Rng& rng, const AugmentConfig& cfg,
                                             int total_items) {
  if (cfg.global_context) {
    if (!sampler.can_sample(x)) return std::nullopt;
    return sampler.sample(x, rng);
  }
  if (total_items < 2) return std::nullopt;
  // uniform over real items, excluding x itself
  ItemIndex pick = static_cast<ItemIndex>(1 + rng.next_int(total_items - 1));
  if (pick >= x) ++pick;
  return pick;
}

}  // namespace

Session change(const Session& s, Real gamma, const SynonymSampler& sampler, Rng& rng,
               const AugmentConfig& cfg, AugmentStats* stats,
               std::vector<SynonymRecord>* records) {
  check_nonempty(s);
  check_gamma(gamma);
  Session out = s;
  int n = ceil_count(gamma, s.size());
  int total = sampler.total_items();
  for (int p : distinct_positions(s.size(), n, rng)) {
    ItemIndex original = out.items[static_cast<std::size_t>(p)];
    std::optional<ItemIndex> syn = synonym_or_fallback(original, sampler, rng, cfg, total);
    if (!syn) {
      if (stats) ++stats->change_fallbacks;
      continue;  // isolated item stays unchanged
    }
    out.items[static_cast<std::size_t>(p)] = *syn;
    if (records) records->push_back({p, original, *syn});
  }
  return out;
}

Session inject(const Session& s, Real gamma, const SynonymSampler& sampler, Rng& rng,
               const AugmentConfig& cfg, AugmentStats* stats,
               std::vector<SynonymRecord>* records) {
  check_nonempty(s);
  check_gamma(gamma);
  Session out = s;
  int n_insert = ceil_count(gamma, s.size());  // counted on the original length
  int total = sampler.total_items();
  for (int i = 0; i < n_insert; ++i) {
    // positions re-drawn from the grown sequence each round
    int p = rng.next_int(out.size());
    ItemIndex original = out.items[static_cast<std::size_t>(p)];
    std::optional<ItemIndex> syn = synonym_or_fallback(original, sampler, rng, cfg, total);
    if (!syn) {
      if (stats) ++stats->inject_skips;
      continue;
    }
    out.items.insert(out.items.begin() + p + 1, *syn);
    if (records) records->push_back({p + 1, original, *syn});
  }
  int dropped = std::max(0, out.size() - cfg.max_len);
  if (dropped > 0) {
    out.items.erase(out.items.begin(), out.items.begin() + dropped);
    if (records)
      for (auto& r : *records) r.position -= dropped;
  }
  return out;
}

Session apply_method(AugmentMethod m, const Session& s, const SynonymSampler& sampler, Rng& rng,
                     const AugmentConfig& cfg, AugmentStats* stats) {
  switch (m) {
    case AugmentMethod::crop: return crop(s, cfg.gamma_crop, rng);
    case AugmentMethod::mask: return mask(s, cfg.gamma_mask, rng);
    case AugmentMethod::reorder: return reorder(s, cfg.gamma_reorder, rng);
    case AugmentMethod::change: return change(s, cfg.gamma_change, sampler, rng, cfg, stats);
    case AugmentMethod::inject: return inject(s, cfg.gamma_inject, sampler, rng, cfg, stats);
  }
  throw std::logic_error("apply_method: unknown method");
}

std::vector<AugmentMethod> select_methods(const AugmentConfig& cfg, Rng& rng) {
  if (cfg.pool.empty()) throw std::invalid_argument("select_methods: empty pool");
  if (cfg.methods_per_batch < 1 ||
      cfg.methods_per_batch > static_cast<int>(cfg.pool.size()))
    throw std::invalid_argument("select_methods: M must lie in [1, |pool|]");
  std::vector<AugmentMethod> pool = cfg.pool;
  int m = cfg.methods_per_batch;
  for (int i = 0; i < m; ++i) {
    int j = i + rng.next_int(static_cast<int>(pool.size()) - i);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(m));
  return pool;
}

std::vector<Session> augment_batch(const std::vector<Session>& batch,
                                   const std::vector<AugmentMethod>& methods,
                                   const SynonymSampler& sampler, const AugmentConfig& cfg,
                                   const StreamKey& key, AugmentStats* stats) {
  std::vector<Session> views;
  views.reserve(methods.size() * batch.size());
  for (std::size_t slot = 0; slot < methods.size(); ++slot) {
    AugmentMethod m = methods[slot];
    for (std::size_t n = 0; n < batch.size(); ++n) {
      // The slot keeps streams apart even when the same method fills two
      // view positions (possible in sweeps that fix the method list).
      Rng rng = Rng::from_key({key.seed, static_cast<std::uint64_t>(key.epoch),
                               static_cast<std::uint64_t>(key.batch_index),
                               static_cast<std::uint64_t>(n), slot,
                               static_cast<std::uint64_t>(m)});
      Session view = apply_method(m, batch[n], sampler, rng, cfg, stats);
      view.label = -1;  // contrastive branch needs no labels
      views.push_back(std::move(view));
    }
  }
  return views;
}

}  // namespace sgcl
