#pragma once

#include <functional>
#include <vector>

#include "sgcl/types.hpp"

namespace sgcl {

class Tape;

// Handle to a value recorded on a tape. Cheap to copy; valid until clear().
struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

// Define-by-run reverse-mode differentiation over dense matrices.
//
// Every operation records its forward value plus a pull-back closure that
// adds the exact vector-Jacobian product into its inputs' gradient buffers.
// backward() visits nodes in strict reverse record order exactly once.
// Gradients accumulate: a second backward() without clear() doubles them.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Untracked value; receives no gradient.
  Var constant(Matrix value);
  // Tracked leaf; grad() is populated by backward().
  Var leaf(Matrix value);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  // Gradient accumulated so far; zeros if the node was never reached.
  const Matrix& grad(Var v);

  // loss must be a recorded 1x1 value.
  void backward(Var loss);

  // Drops all nodes but keeps allocated capacity for reuse.
  void clear();
  int size() const { return static_cast<int>(nodes_.size()); }

  // -- recording machinery (used by the free-function ops) --
  int emplace(Matrix value, bool tracked);
  void set_pull(int id, std::function<void(Tape&)> pull);
  bool tracked(int id) const { return nodes_[id].tracked; }
  const Matrix& value_at(int id) const { return nodes_[id].value; }
  const Matrix& grad_at(int id) const { return nodes_[id].grad; }
  // Zero-initialized on first touch; shape follows the node's value.
  Matrix& grad_buffer(int id);

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // empty until grad_buffer() touches it
    bool tracked = false;
    std::function<void(Tape&)> pull;
  };
  std::vector<Node> nodes_;
};

// ---- core ops ----
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var scalar_mul(Var a, Real c);
Var concat(const std::vector<Var>& parts, int axis);  // axis 0 = rows, 1 = cols
Var row_gather(Var a, std::vector<int> rows);
Var scatter_add_rows(Var base, Var rows, std::vector<int> where);
Var broadcast_rows(Var row, int n);
Var scale_rows(Var m, Var col);  // row i scaled by col(i)
Var sum(Var a);
Var mean(Var a);
Var mean_rows(Var a);  // column-wise mean -> 1 x cols

// ---- nonlinearities ----
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);

// ---- normalized maps (vectors / per-row) ----
// softmax over a vector (1 x K or K x 1) with temperature tau > 0.
Var softmax(Var v, Real tau);
Var log_softmax(Var v, Real tau);
// Row-wise layer normalization, population variance, eps = 1e-12,
// no learnable affine. Requires at least 2 columns.
Var layer_norm(Var m);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Real c, Var a) { return scalar_mul(a, c); }

}  // namespace sgcl
