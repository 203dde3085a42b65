#include "sgcl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sgcl/encoder.hpp"
#include "sgcl/eval.hpp"

namespace sgcl {

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(lr > 0)) throw std::invalid_argument("TrainConfig: lr must be positive");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
    throw std::invalid_argument("TrainConfig: betas must lie in [0, 1)");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (decay_every_epochs < 1)
    throw std::invalid_argument("TrainConfig: decay_every_epochs must be >= 1");
  if (validation_fraction < 0 || validation_fraction >= 1)
    throw std::invalid_argument("TrainConfig: validation_fraction must lie in [0, 1)");
}

OptimizerState make_optimizer_state(const ModelParams& params) {
  OptimizerState state;
  for (auto& [name, mat] : params.entries()) {
    state.m.push_back(Matrix::Zero(mat->rows(), mat->cols()));
    state.v.push_back(Matrix::Zero(mat->rows(), mat->cols()));
  }
  return state;
}

Real effective_lr(const TrainConfig& cfg, int epoch) {
  return cfg.lr * std::pow(cfg.decay_factor, epoch / cfg.decay_every_epochs);
}

void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, long step, Real lr,
                 const TrainConfig& cfg) {
  Matrix g = grad + cfg.l2 * param;
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  const Real bc1 = 1.0 - std::pow(cfg.beta1, static_cast<Real>(step));
  const Real bc2 = 1.0 - std::pow(cfg.beta2, static_cast<Real>(step));
  Matrix m_hat = m / bc1;
  Matrix v_hat = v / bc2;
  param.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + cfg.adam_eps);
}

void adam_step(ModelParams& params, const std::vector<Matrix>& grads, OptimizerState& state,
               const TrainConfig& cfg, int epoch) {
  auto entries = params.entries();
  if (grads.size() != entries.size() || state.m.size() != entries.size())
    throw std::invalid_argument("adam_step: gradient/state count mismatch");
  ++state.step;
  const Real lr = effective_lr(cfg, epoch);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!grads[i].allFinite())
      throw std::runtime_error("non-finite gradient for parameter " + entries[i].first);
    adam_update(*entries[i].second, grads[i], state.m[i], state.v[i], state.step, lr, cfg);
  }
}

StepLosses train_step(const std::vector<Session>& batch, ModelParams& params,
                      OptimizerState& state, const EncoderConfig& enc_cfg,
                      const LossConfig& loss_cfg, const AugmentConfig& aug_cfg,
                      const SynonymSampler& sampler, const TrainConfig& train_cfg, int epoch,
                      std::int64_t batch_index, AugmentStats* aug_stats) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");

  Tape tape;
  ParamVars pv = watch_params(tape, params);
  Var items_normalized = normalize_rows(pv.item_embeddings, pv);

  // (a) next-item prediction on the anchors
  Var main_acc = tape.constant(Matrix::Zero(1, 1));
  for (const Session& anchor : batch) {
    if (!anchor.has_label()) throw std::invalid_argument("train_step: anchor without label");
    Var r = encode_session(tape, pv, enc_cfg, anchor);
    Var t = predict_next(r, pv);
    main_acc = add(main_acc, main_loss(t, anchor.label, items_normalized, pv, loss_cfg.tau_main));
  }
  Var main = scalar_mul(main_acc, 1.0 / static_cast<Real>(batch.size()));

  // (b) contrastive branch on the augmented views
  Rng method_rng = Rng::from_key({train_cfg.seed, static_cast<std::uint64_t>(epoch),
                                  static_cast<std::uint64_t>(batch_index), 0x4D455448ULL});
  std::vector<AugmentMethod> methods = select_methods(aug_cfg, method_rng);
  StreamKey key{train_cfg.seed, epoch, batch_index};
  std::vector<Session> views = augment_batch(batch, methods, sampler, aug_cfg, key, aug_stats);

  ContrastiveBatch cb;
  cb.methods = static_cast<int>(methods.size());
  cb.sessions = static_cast<int>(batch.size());
  cb.views.reserve(views.size());
  for (const Session& view : views) {
    Var r = encode_session(tape, pv, enc_cfg, view);
    cb.views.push_back(project(r, pv));
  }
  Var cl = contrastive_loss(cb, pv, loss_cfg);

  // (c) weighted sum, (d) one backward + optimizer step
  Var total = total_loss(main, cl, loss_cfg.lambda);
  tape.backward(total);

  std::vector<Matrix> grads;
  grads.reserve(pv.ordered.size());
  for (Var leaf : pv.ordered) grads.push_back(tape.grad(leaf));
  adam_step(params, grads, state, train_cfg, epoch);

  return StepLosses{tape.value(main)(0, 0), tape.value(cl)(0, 0), tape.value(total)(0, 0)};
}

std::string format_log_csv(const std::vector<EpochLog>& log) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,loss_main,loss_cl,p_at_20,mrr_at_20,lr\n";
  for (const EpochLog& e : log)
    os << e.epoch << "," << e.loss_main << "," << e.loss_cl << "," << e.p_at_20 << ","
       << e.mrr_at_20 << "," << e.lr << "\n";
  return os.str();
}

FitResult fit(const Corpus& corpus, const EncoderConfig& enc_cfg, const LossConfig& loss_cfg,
              const AugmentConfig& aug_cfg, const TrainConfig& train_cfg,
              const SynonymSampler& sampler, const FitOptions& options, bool ln_affine) {
  enc_cfg.validate();
  loss_cfg.validate();
  train_cfg.validate();

  FitResult result;
  result.params = options.init_params != nullptr
                      ? *options.init_params
                      : ModelParams::init(enc_cfg, corpus.vocab.size(), train_cfg.seed,
                                          ln_affine);
  if (train_cfg.epochs == 0) return result;

  // Hold out the most recent fraction of train sessions for best-epoch
  // selection; sessions arrive in chronological order.
  auto n_holdout = static_cast<std::size_t>(
      std::floor(train_cfg.validation_fraction * static_cast<Real>(corpus.train.size())));
  std::vector<Session> train_raw(corpus.train.begin(),
                                 corpus.train.end() - static_cast<std::ptrdiff_t>(n_holdout));
  std::vector<Session> val_raw(corpus.train.end() - static_cast<std::ptrdiff_t>(n_holdout),
                               corpus.train.end());

  std::vector<Session> examples;
  for (Session& s : expand_subsequences(train_raw))
    examples.push_back(truncate_recent(std::move(s), enc_cfg.max_len));
  std::vector<Session> val_examples;
  for (Session& s : expand_subsequences(val_raw))
    val_examples.push_back(truncate_recent(std::move(s), enc_cfg.max_len));
  if (examples.empty()) throw std::runtime_error("fit: no training examples");

  OptimizerState state = make_optimizer_state(result.params);
  ModelParams best = result.params;
  Real best_mrr = -1.0;

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    Rng shuffle_rng = Rng::from_key({train_cfg.seed, static_cast<std::uint64_t>(epoch),
                                     0x53485546ULL});
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(
                                  shuffle_rng.next_int(static_cast<int>(i)))]);

    Real main_sum = 0.0, cl_sum = 0.0;
    std::int64_t n_seen = 0, batch_index = 0;
    std::size_t at = 0;
    while (at < order.size()) {
      std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(train_cfg.batch_size),
                                               order.size() - at);
      // a final ragged batch of one example degenerates the contrastive
      // loss; drop it
      if (take < 2 && order.size() > take) break;
      std::vector<Session> batch;
      batch.reserve(take);
      for (std::size_t i = 0; i < take; ++i) batch.push_back(examples[order[at + i]]);
      at += take;

      StepLosses losses =
          train_step(batch, result.params, state, enc_cfg, loss_cfg, aug_cfg, sampler,
                     train_cfg, epoch, batch_index++, &result.aug_stats);
      main_sum += losses.main * static_cast<Real>(take);
      cl_sum += losses.cl * static_cast<Real>(take);
      n_seen += static_cast<std::int64_t>(take);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.loss_main = n_seen > 0 ? main_sum / static_cast<Real>(n_seen) : 0.0;
    entry.loss_cl = n_seen > 0 ? cl_sum / static_cast<Real>(n_seen) : 0.0;
    entry.lr = effective_lr(train_cfg, epoch);
    if (!val_examples.empty()) {
      Metrics m = evaluate(result.params, enc_cfg, val_examples, options.metrics_k);
      entry.p_at_20 = m.p_at_k;
      entry.mrr_at_20 = m.mrr_at_k;
    }
    result.log.push_back(entry);

    if (options.progress != nullptr)
      *options.progress << "epoch " << epoch << " loss_main " << entry.loss_main << " loss_cl "
                        << entry.loss_cl << " val_p@" << options.metrics_k << " "
                        << entry.p_at_20 << " val_mrr@" << options.metrics_k << " "
                        << entry.mrr_at_20 << "\n";

    if (!options.checkpoint_dir.empty()) {
      std::filesystem::create_directories(options.checkpoint_dir);
      save_checkpoint(result.params, enc_cfg,
                      options.checkpoint_dir + "/epoch_" + std::to_string(epoch) + ".ckpt");
    }

    Real score = val_examples.empty() ? 0.0 : result.log.back().mrr_at_20;
    if (score > best_mrr) {
      best_mrr = score;
      best = result.params;
      result.best_epoch = epoch;
    }
  }

  result.params = std::move(best);
  if (!options.checkpoint_dir.empty())
    save_checkpoint(result.params, enc_cfg, options.checkpoint_dir + "/best.ckpt");
  return result;
}

}  // namespace sgcl
