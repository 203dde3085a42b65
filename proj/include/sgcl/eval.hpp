#pragma once

#include <optional>
#include <vector>

#include "sgcl/model.hpp"
#include "sgcl/types.hpp"

namespace sgcl {

struct Metrics {
  Real p_at_k = 0.0;    // fraction in [0, 1]; reported x100
  Real mrr_at_k = 0.0;  // mean reciprocal rank in [0, 1]; reported x100
  int k = 20;
  long n_examples = 0;
};

// rank = 1 + |{i : s_i > s_y}| + |{i < y : s_i == s_y}| (ties resolved by
// ascending item index); nullopt when rank > k.
std::optional<int> rank_target(const Vector& scores, ItemIndex target, int k);

// P@K = hit fraction; MRR@K = mean of 1/rank with misses contributing 0.
Metrics aggregate_ranks(const std::vector<std::optional<int>>& ranks, int k);

// Scores every example's prediction against all real item embeddings with
// the layer-normalized similarity; the [mask] row never competes.
Metrics evaluate(const ModelParams& params, const EncoderConfig& cfg,
                 const std::vector<Session>& examples, int k = 20);

}  // namespace sgcl
