#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sgcl/augment.hpp"
#include "sgcl/global_graph.hpp"
#include "sgcl/ingest.hpp"
#include "sgcl/model.hpp"
#include "sgcl/objectives.hpp"
#include "sgcl/types.hpp"

namespace sgcl {

struct TrainConfig {
  int batch_size = 100;  // N
  Real lr = 1e-3;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real adam_eps = 1e-8;
  Real l2 = 1e-5;
  Real decay_factor = 0.1;
  int decay_every_epochs = 3;
  int epochs = 10;
  std::uint64_t seed = 0;
  // Held-out tail of the train sessions used for best-epoch selection.
  Real validation_fraction = 0.1;

  void validate() const;
};

struct OptimizerState {
  std::vector<Matrix> m, v;  // first/second moments, parallel to entries()
  long step = 0;
};

OptimizerState make_optimizer_state(const ModelParams& params);

// lr * decay_factor^floor(epoch / decay_every_epochs)
Real effective_lr(const TrainConfig& cfg, int epoch);

// One Adam update for a single parameter block: bias-corrected moments,
// L2 folded into the gradient before the moment update. `step` is 1-based.
void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, long step, Real lr,
                 const TrainConfig& cfg);

// Standard Adam with bias correction; L2 enters as gradient += l2 * param
// before the moment updates. Aborts on a non-finite gradient, naming the
// parameter.
void adam_step(ModelParams& params, const std::vector<Matrix>& grads, OptimizerState& state,
               const TrainConfig& cfg, int epoch);

struct StepLosses {
  Real main = 0.0;
  Real cl = 0.0;
  Real total = 0.0;
};

// One joint step: anchors feed the prediction loss, augmented views feed the
// contrastive loss, one backward, one Adam update.
StepLosses train_step(const std::vector<Session>& batch, ModelParams& params,
                      OptimizerState& state, const EncoderConfig& enc_cfg,
                      const LossConfig& loss_cfg, const AugmentConfig& aug_cfg,
                      const SynonymSampler& sampler, const TrainConfig& train_cfg, int epoch,
                      std::int64_t batch_index, AugmentStats* aug_stats = nullptr);

struct EpochLog {
  int epoch = 0;
  Real loss_main = 0.0;
  Real loss_cl = 0.0;
  Real p_at_20 = 0.0;   // on the validation split
  Real mrr_at_20 = 0.0;
  Real lr = 0.0;
};

std::string format_log_csv(const std::vector<EpochLog>& log);

struct FitOptions {
  std::string checkpoint_dir;  // empty = keep checkpoints in memory only
  std::ostream* progress = nullptr;
  int metrics_k = 20;
  // Resume point: start from these parameters instead of a fresh init.
  const ModelParams* init_params = nullptr;
};

struct FitResult {
  ModelParams params;  // best-by-validation-MRR checkpoint
  std::vector<EpochLog> log;
  int best_epoch = -1;
  AugmentStats aug_stats;
};

// Full training loop: expands and truncates the corpus, holds out the most
// recent validation_fraction of train sessions, shuffles per epoch, logs
// per-epoch losses and validation metrics, and restores the best checkpoint.
FitResult fit(const Corpus& corpus, const EncoderConfig& enc_cfg, const LossConfig& loss_cfg,
              const AugmentConfig& aug_cfg, const TrainConfig& train_cfg,
              const SynonymSampler& sampler, const FitOptions& options = {},
              bool ln_affine = false);

}  // namespace sgcl
