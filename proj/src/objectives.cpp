#include "sgcl/objectives.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace sgcl {

void LossConfig::validate() const {
  if (!(tau_main > 0) || !(tau_cl > 0))
    throw std::invalid_argument("LossConfig: temperatures must be positive");
  if (lambda < 0) throw std::invalid_argument("LossConfig: lambda must be >= 0");
}

Var predict_next(Var r, const ParamVars& pv) {
  return add(matmul(r, transpose(pv.w_pred)), pv.b_pred);
}

Var project(Var r, const ParamVars& pv) {
  Var hidden = relu(add(matmul(r, transpose(pv.w_h1)), pv.b_h1));
  return add(matmul(hidden, transpose(pv.w_h2)), pv.b_h2);
}

Var normalize_rows(Var m, const ParamVars& pv) {
  Var normed = layer_norm(m);
  if (!pv.has_ln_affine) return normed;
  int n = static_cast<int>(m.tape->value(m).rows());
  return add(hadamard(normed, broadcast_rows(pv.ln_gain, n)), broadcast_rows(pv.ln_bias, n));
}

Matrix normalize_rows(const Matrix& m, const ModelParams* params) {
  if (m.cols() < 2) throw std::invalid_argument("normalize_rows: needs at least 2 columns");
  Eigen::Index n = m.cols();
  Vector mu = m.rowwise().mean();
  Matrix centered = m.array().colwise() - mu.array();
  Vector inv_std =
      ((centered.array().square().rowwise().sum() / static_cast<Real>(n)) + 1e-12)
          .sqrt()
          .inverse();
  Matrix out = centered.array().colwise() * inv_std.array();
  if (params != nullptr && params->has_ln_affine()) {
    out = out.array().rowwise() * params->ln_gain.row(0).array();
    out = out.array().rowwise() + params->ln_bias.row(0).array();
  }
  return out;
}

Var similarity(Var v1, Var v2, const ParamVars& pv) {
  return matmul(normalize_rows(v1, pv), transpose(normalize_rows(v2, pv)));
}

Real similarity(const RowVector& v1, const RowVector& v2) {
  return (normalize_rows(v1) * normalize_rows(v2).transpose())(0, 0);
}

Var main_loss(Var t, ItemIndex target, Var items_normalized, const ParamVars& pv,
              Real tau_main) {
  const Matrix& items = items_normalized.tape->value(items_normalized);
  if (target < 0 || target >= items.rows())
    throw std::invalid_argument("main_loss: invalid target " + std::to_string(target));
  Var scores = matmul(items_normalized, transpose(normalize_rows(t, pv)));  // V x 1
  Var log_probs = log_softmax(scores, tau_main);
  return scalar_mul(row_gather(log_probs, {target}), -1.0);
}

Var contrastive_loss(const ContrastiveBatch& batch, const ParamVars& pv,
                     const LossConfig& cfg) {
  const int m = batch.methods, n = batch.sessions;
  if (m < 1 || n < 1 || batch.views.size() != static_cast<std::size_t>(m) * n)
    throw std::invalid_argument("contrastive_loss: view count does not match M x N");
  if (m * n < 2)
    std::cerr << "warning: contrastive batch has a single view; loss is zero\n";

  Tape& tape = *batch.views.front().tape;
  Var z = concat(batch.views, 0);            // (M*N) x d
  Var keys = normalize_rows(z, pv);          // shared by queries and keys
  Var sims = matmul(keys, transpose(keys));  // (M*N) x (M*N)

  const int positives = cfg.exclude_self_positive ? m - 1 : m;
  Var acc = tape.constant(Matrix::Zero(1, 1));
  if (positives > 0) {
    for (int q = 0; q < n; ++q) {
      Var log_probs = log_softmax(transpose(row_gather(sims, {q})), cfg.tau_cl);
      std::vector<int> pos;
      pos.reserve(static_cast<std::size_t>(positives));
      for (int method = 0; method < m; ++method) {
        int view = method * n + q;
        if (cfg.exclude_self_positive && view == q) continue;
        pos.push_back(view);
      }
      acc = add(acc, scalar_mul(sum(row_gather(log_probs, pos)),
                                -1.0 / static_cast<Real>(positives)));
    }
  }
  return scalar_mul(acc, 1.0 / static_cast<Real>(n));
}

Var total_loss(Var main, Var cl, Real lambda) { return add(main, scalar_mul(cl, lambda)); }

}  // namespace sgcl
