#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgcl/global_graph.hpp"
#include "sgcl/rng.hpp"
#include "sgcl/types.hpp"

namespace sgcl {

enum class AugmentMethod { crop, mask, reorder, change, inject };

const char* method_name(AugmentMethod m);
std::optional<AugmentMethod> method_from_name(const std::string& name);

struct AugmentConfig {
  Real gamma_crop = 0.5;
  Real gamma_mask = 0.5;
  Real gamma_reorder = 0.5;
  Real gamma_change = 0.5;
  Real gamma_inject = 0.5;
  std::vector<AugmentMethod> pool = {AugmentMethod::crop, AugmentMethod::mask,
                                     AugmentMethod::reorder, AugmentMethod::change,
                                     AugmentMethod::inject};
  int methods_per_batch = 2;  // M
  int max_len = 10;
  // Off switches synonym sampling to uniform random replacement over the
  // vocabulary, the "no global context" ablation arm.
  bool global_context = true;

  Real gamma_of(AugmentMethod m) const;
};

// Diagnostic counters for silent fallbacks on isolated items.
struct AugmentStats {
  long change_fallbacks = 0;
  long inject_skips = 0;
};

// Per-position provenance of synonym substitutions, for the demo CLI.
struct SynonymRecord {
  int position;  // position in the output session
  ItemIndex original;
  ItemIndex synonym;
};

// Contiguous window of length max(1, floor(gamma * |s|)), uniform start.
Session crop(const Session& s, Real gamma, Rng& rng);
// ceil(gamma * |s|) distinct positions replaced by the [mask] index.
Session mask(const Session& s, Real gamma, Rng& rng);
// Uniformly shuffles a contiguous window of length ceil(gamma * |s|).
Session reorder(const Session& s, Real gamma, Rng& rng);
// Replaces ceil(gamma * |s|) distinct positions by synonyms; isolated items
// stay unchanged (counted in stats).
Session change(const Session& s, Real gamma, const SynonymSampler& sampler, Rng& rng,
               const AugmentConfig& cfg, AugmentStats* stats = nullptr,
               std::vector<SynonymRecord>* records = nullptr);
// Applies the single-insertion step ceil(gamma * |s0|) times: pick a position,
// insert a synonym of that item right after it. Result truncated to the most
// recent max_len items.
Session inject(const Session& s, Real gamma, const SynonymSampler& sampler, Rng& rng,
               const AugmentConfig& cfg, AugmentStats* stats = nullptr,
               std::vector<SynonymRecord>* records = nullptr);

Session apply_method(AugmentMethod m, const Session& s, const SynonymSampler& sampler, Rng& rng,
                     const AugmentConfig& cfg, AugmentStats* stats = nullptr);

// M distinct methods drawn uniformly without replacement; the first drawn
// method is the query method a_1.
std::vector<AugmentMethod> select_methods(const AugmentConfig& cfg, Rng& rng);

struct StreamKey {
  std::uint64_t seed = 0;
  std::int64_t epoch = 0;
  std::int64_t batch_index = 0;
};

// Returns M * N sessions ordered [a_1(s_1..s_N), a_2(s_1..s_N), ...], labels
// dropped. Each view gets its own RNG stream keyed by
// (seed, epoch, batch, session index, method id), so results do not depend on
// evaluation order.
std::vector<Session> augment_batch(const std::vector<Session>& batch,
                                   const std::vector<AugmentMethod>& methods,
                                   const SynonymSampler& sampler, const AugmentConfig& cfg,
                                   const StreamKey& key, AugmentStats* stats = nullptr);

}  // namespace sgcl
