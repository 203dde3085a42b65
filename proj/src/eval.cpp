#include "sgcl/eval.hpp"

#include <limits>
#include <stdexcept>

#include "sgcl/encoder.hpp"
#include "sgcl/objectives.hpp"

namespace sgcl {

std::optional<int> rank_target(const Vector& scores, ItemIndex target, int k) {
  if (k < 1) throw std::invalid_argument("rank_target: k must be >= 1");
  if (target < 0 || target >= scores.size())
    throw std::invalid_argument("rank_target: invalid target");
  const Real ts = scores(target);
  int rank = 1;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (i == target) continue;
    if (scores(i) > ts || (scores(i) == ts && i < target)) ++rank;
  }
  if (rank > k) return std::nullopt;
  return rank;
}

Metrics aggregate_ranks(const std::vector<std::optional<int>>& ranks, int k) {
  if (ranks.empty()) throw std::invalid_argument("aggregate_ranks: no examples");
  Metrics metrics;
  metrics.k = k;
  metrics.n_examples = static_cast<long>(ranks.size());
  Real hits = 0.0, reciprocal = 0.0;
  for (const auto& rank : ranks) {
    if (!rank) continue;
    hits += 1.0;
    reciprocal += 1.0 / static_cast<Real>(*rank);
  }
  metrics.p_at_k = hits / static_cast<Real>(ranks.size());
  metrics.mrr_at_k = reciprocal / static_cast<Real>(ranks.size());
  return metrics;
}

Metrics evaluate(const ModelParams& params, const EncoderConfig& cfg,
                 const std::vector<Session>& examples, int k) {
  if (examples.empty()) throw std::invalid_argument("evaluate: empty test set");

  Matrix normalized_items = normalize_rows(params.item_embeddings, &params);

  std::vector<std::optional<int>> ranks;
  ranks.reserve(examples.size());

  // One tape reused across a chunk of examples keeps the parameter copy
  // amortized without letting the tape grow unbounded.
  constexpr int kChunk = 1024;
  Tape tape;
  ParamVars pv;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (i % kChunk == 0) {
      tape.clear();
      pv = watch_params(tape, params);
    }
    const Session& ex = examples[i];
    if (!ex.has_label()) throw std::invalid_argument("evaluate: example without label");
    Var r = encode_session(tape, pv, cfg, ex);
    Var t = predict_next(r, pv);
    RowVector prediction = tape.value(t).row(0);
    Vector scores = normalized_items * normalize_rows(prediction, &params).transpose();
    scores(kMaskIndex) = -std::numeric_limits<Real>::infinity();  // never competes

    ranks.push_back(rank_target(scores, ex.label, k));
  }
  return aggregate_ranks(ranks, k);
}

}  // namespace sgcl
