#include "sgcl/encoder.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sgcl {

namespace {

int rows_of(Var v) { return static_cast<int>(v.tape->value(v).rows()); }
int cols_of(Var v) { return static_cast<int>(v.tape->value(v).cols()); }

}  // namespace

Var propagate_messages(Var h, Var a_in, Var a_out, const ParamVars& pv) {
  int n = rows_of(h);
  Var in_part = matmul(a_in, add(matmul(h, pv.w_in), broadcast_rows(pv.b_in, n)));
  Var out_part = matmul(a_out, add(matmul(h, pv.w_out), broadcast_rows(pv.b_out, n)));
  return concat({in_part, out_part}, 1);
}

Var ggnn_cell(Var m, Var h_prev, const ParamVars& pv) {
  Var z = sigmoid(add(matmul(m, transpose(pv.w_z)), matmul(h_prev, transpose(pv.u_z))));
  Var r = sigmoid(add(matmul(m, transpose(pv.w_r)), matmul(h_prev, transpose(pv.u_r))));
  Var h_cand =
      tanh(add(matmul(m, transpose(pv.w_h)), matmul(hadamard(r, h_prev), transpose(pv.u_h))));
  // (1 - z) . h_prev + z . h_cand
  return add(sub(h_prev, hadamard(z, h_prev)), hadamard(z, h_cand));
}

Var star_blend(Var h_hat, Var star_prev, const ParamVars& pv) {
  Real scale = 1.0 / std::sqrt(static_cast<Real>(cols_of(h_hat)));
  Var queries = matmul(h_hat, transpose(pv.w_q1));           // N x d
  Var key = matmul(star_prev, transpose(pv.w_k1));           // 1 x d
  Var alpha = scalar_mul(matmul(queries, transpose(key)), scale);  // N x 1
  // (1 - alpha_i) h_i + alpha_i star
  return add(sub(h_hat, scale_rows(h_hat, alpha)), matmul(alpha, star_prev));
}

Var star_update(Var h, Var star_prev, const ParamVars& pv) {
  Real scale = 1.0 / std::sqrt(static_cast<Real>(cols_of(h)));
  Var keys = matmul(h, transpose(pv.w_k2));         // N x d
  Var query = matmul(star_prev, transpose(pv.w_q2));  // 1 x d
  Var beta = softmax(scalar_mul(matmul(keys, transpose(query)), scale), 1.0);  // N x 1
  return matmul(transpose(beta), h);  // convex combination of node states
}

Var highway(Var h0, Var hl, const ParamVars& pv) {
  Var gate = sigmoid(matmul(concat({h0, hl}, 1), transpose(pv.w_hw)));
  return add(hadamard(gate, h0), sub(hl, hadamard(gate, hl)));
}

Var readout(Var hf, Var star, const SessionGraph& graph, int session_len,
            const ParamVars& pv) {
  Var u = row_gather(hf, graph.alias);  // one row per session position
  std::vector<int> positions(static_cast<std::size_t>(session_len));
  std::iota(positions.begin(), positions.end(), 0);
  Var u_pos = add(u, row_gather(pv.position_embeddings, positions));
  Var u_last = row_gather(u_pos, {session_len - 1});  // 1 x d

  Var pre = add(add(matmul(u_pos, transpose(pv.w_1)),
                    broadcast_rows(matmul(star, transpose(pv.w_2)), session_len)),
                add(broadcast_rows(matmul(u_last, transpose(pv.w_3)), session_len),
                    broadcast_rows(pv.b_0, session_len)));
  Var attention = matmul(sigmoid(pre), transpose(pv.w_0));  // N x 1 weights
  Var r_tilde = matmul(transpose(attention), u_pos);        // 1 x d
  return concat({r_tilde, u_last}, 1);                      // 1 x 2d
}

Var encode_session(Tape& tape, const ParamVars& pv, const EncoderConfig& cfg,
                   const Session& s) {
  if (s.items.empty()) throw std::invalid_argument("encode_session: empty session");
  if (s.size() > cfg.max_len)
    throw std::invalid_argument("encode_session: session longer than max_len");
  const int vocab = rows_of(pv.item_embeddings);
  for (ItemIndex item : s.items)
    if (item < 0 || item >= vocab)
      throw std::invalid_argument("encode_session: item index " + std::to_string(item) +
                                  " out of vocabulary");

  SessionGraph graph = build_session_graph(s);
  std::vector<int> node_rows(graph.nodes.begin(), graph.nodes.end());
  Var h0 = row_gather(pv.item_embeddings, node_rows);
  Var star = mean_rows(h0);
  Var a_in = tape.constant(graph.a_in);
  Var a_out = tape.constant(graph.a_out);

  Var h = h0;
  for (int layer = 0; layer < cfg.layers; ++layer) {
    Var m = propagate_messages(h, a_in, a_out, pv);
    Var h_hat = ggnn_cell(m, h, pv);
    Var blended = star_blend(h_hat, star, pv);
    star = star_update(blended, star, pv);
    h = blended;
  }
  Var hf = highway(h0, h, pv);
  return readout(hf, star, graph, s.size(), pv);
}

}  // namespace sgcl
