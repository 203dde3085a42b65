#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sgcl/tape.hpp"
#include "sgcl/types.hpp"

namespace sgcl {

struct EncoderConfig {
  int d = 32;        // item embedding dimension (paper default 256)
  int layers = 1;    // L, number of GNN layers
  int max_len = 10;  // sessions are truncated to their most recent max_len items

  void validate() const;
};

// Every trainable matrix of the encoder, prediction layer and projection
// head. Shapes follow the displayed equations; the highway weight is named
// w_hw to keep it apart from the prediction layer's W_g.
struct ModelParams {
  Matrix item_embeddings;      // V x d, row 0 = [mask]
  Matrix position_embeddings;  // max_len x d

  Matrix w_in, w_out;  // d x d
  Matrix b_in, b_out;  // 1 x d

  Matrix w_z, w_r, w_h;  // d x 2d
  Matrix u_z, u_r, u_h;  // d x d

  Matrix w_q1, w_k1, w_q2, w_k2;  // d x d

  Matrix w_hw;  // d x 2d

  Matrix w_0;            // 1 x d
  Matrix w_1, w_2, w_3;  // d x d
  Matrix b_0;            // 1 x d

  Matrix w_pred;  // d x 2d
  Matrix b_pred;  // 1 x d

  Matrix w_h1;  // d x 2d
  Matrix b_h1;  // 1 x d
  Matrix w_h2;  // d x d
  Matrix b_h2;  // 1 x d

  // Optional learnable affine applied after layer normalization inside the
  // similarity; empty (0 x 0) unless enabled at init.
  Matrix ln_gain;  // 1 x d
  Matrix ln_bias;  // 1 x d

  int vocab_size() const { return static_cast<int>(item_embeddings.rows()); }
  int dim() const { return static_cast<int>(item_embeddings.cols()); }
  bool has_ln_affine() const { return ln_gain.size() > 0; }

  // All parameters in a fixed order (checkpoints, optimizer state, tests).
  std::vector<std::pair<std::string, Matrix*>> entries();
  std::vector<std::pair<std::string, const Matrix*>> entries() const;

  // Uniform init in [-1/sqrt(d), 1/sqrt(d)]; ln affine (when enabled) starts
  // at identity (gain 1, bias 0).
  static ModelParams init(const EncoderConfig& cfg, int vocab_size, std::uint64_t seed,
                          bool ln_affine = false);
};

// Tape leaves for one training/eval step, in entries() order.
struct ParamVars {
  Var item_embeddings, position_embeddings;
  Var w_in, w_out, b_in, b_out;
  Var w_z, w_r, w_h, u_z, u_r, u_h;
  Var w_q1, w_k1, w_q2, w_k2;
  Var w_hw;
  Var w_0, w_1, w_2, w_3, b_0;
  Var w_pred, b_pred;
  Var w_h1, b_h1, w_h2, b_h2;
  Var ln_gain, ln_bias;  // unset unless the model carries the affine

  std::vector<Var> ordered;  // parallel to ModelParams::entries()
  bool has_ln_affine = false;
};

ParamVars watch_params(Tape& tape, const ModelParams& params);

// Checkpoint: magic "SGCLCKPT", version, config block, then each parameter
// as (name, rows, cols, raw doubles). Bit-exact round trip.
void save_checkpoint(const ModelParams& params, const EncoderConfig& cfg,
                     const std::string& path);
struct Checkpoint {
  ModelParams params;
  EncoderConfig config;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sgcl
