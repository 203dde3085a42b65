#pragma once

#include "sgcl/model.hpp"
#include "sgcl/tape.hpp"
#include "sgcl/types.hpp"

namespace sgcl {

struct LossConfig {
  Real tau_main = 0.085;  // softmax temperature of the prediction loss
  Real tau_cl = 0.005;    // softmax temperature of the contrastive loss
  Real lambda = 0.7;      // contrastive weight in the total loss
  // Ablation switch: drop the query itself from its positive set
  // (SimCLR convention). Default keeps the self-term, as displayed.
  bool exclude_self_positive = false;

  void validate() const;
};

// t = W_pred r + b_pred : 2d -> d
Var predict_next(Var r, const ParamVars& pv);

// z = W_h2 relu(W_h1 r + b_h1) + b_h2 : 2d -> d
Var project(Var r, const ParamVars& pv);

// The similarity normalizer: row-wise layer normalization, then the model's
// learned affine when it carries one.
Var normalize_rows(Var m, const ParamVars& pv);
Matrix normalize_rows(const Matrix& m, const ModelParams* params = nullptr);

// sim(v1, v2) = normalize(v1) . normalize(v2); symmetric, sim(v, v) = d.
Var similarity(Var v1, Var v2, const ParamVars& pv);
Real similarity(const RowVector& v1, const RowVector& v2);

// -log softmax_tau(sim(t, v_i) over all vocabulary rows)[target].
// items_normalized must be normalize_rows(item_embeddings, ...), computed
// once per batch and shared across examples.
Var main_loss(Var t, ItemIndex target, Var items_normalized, const ParamVars& pv,
              Real tau_main);

// M x N projected views in method-major order: the a_1 block comes first and
// serves as the query set; every view is a key.
struct ContrastiveBatch {
  std::vector<Var> views;
  int methods = 0;   // M
  int sessions = 0;  // N

  int origin_session(int view) const { return view % sessions; }
  int origin_method(int view) const { return view / sessions; }
};

// Multi-positive InfoNCE: positives of query z_q are all M views of its
// source session (the query itself included unless excluded by config);
// keys are all M*N views. Mean over the N queries.
Var contrastive_loss(const ContrastiveBatch& batch, const ParamVars& pv,
                     const LossConfig& cfg);

// main + lambda * cl
Var total_loss(Var main, Var cl, Real lambda);

}  // namespace sgcl
