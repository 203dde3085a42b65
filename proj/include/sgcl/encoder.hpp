#pragma once

#include "sgcl/model.hpp"
#include "sgcl/session_graph.hpp"
#include "sgcl/tape.hpp"
#include "sgcl/types.hpp"

namespace sgcl {

// SGNN-HN forward pass, stage by stage. All node-state matrices are N x d
// with one row per unique session item; the star state is 1 x d.

// m = [ A_in (H W_in + b_in) ; A_out (H W_out + b_out) ]  ->  N x 2d
Var propagate_messages(Var h, Var a_in, Var a_out, const ParamVars& pv);

// Gated update: z/r gates, candidate state, convex blend with the previous
// state. -> N x d
Var ggnn_cell(Var m, Var h_prev, const ParamVars& pv);

// Per-node scalar gate alpha_i = (W_q1 h_i)^T W_k1 star / sqrt(d), used raw
// (no clamping): h_i = (1 - alpha_i) h_i + alpha_i star. -> N x d
Var star_blend(Var h_hat, Var star_prev, const ParamVars& pv);

// beta = softmax over nodes of (W_k2 h_i)^T W_q2 star / sqrt(d);
// star' = sum_i beta_i h_i. -> 1 x d
Var star_update(Var h, Var star_prev, const ParamVars& pv);

// g = sigmoid(W_hw [h0; hL]); hf = g . h0 + (1 - g) . hL. -> N x d
Var highway(Var h0, Var hl, const ParamVars& pv);

// Soft-attention readout over session positions (alias-gathered node states
// plus position embeddings); returns r = [r_tilde ; u_last] of size 1 x 2d.
Var readout(Var hf, Var star, const SessionGraph& graph, int session_len,
            const ParamVars& pv);

// Full composition: session graph -> embeddings -> L x (messages, GGNN cell,
// star blend, star update) -> highway -> readout.
Var encode_session(Tape& tape, const ParamVars& pv, const EncoderConfig& cfg,
                   const Session& s);

}  // namespace sgcl
