#include "sgcl/tape.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace sgcl {

namespace {

constexpr Real kLayerNormEps = 1e-12;

std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_str(a) +
                              " vs " + shape_str(b));
}

Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape)
    throw std::invalid_argument("ops require operands recorded on the same tape");
  return *a.tape;
}

bool is_vector(const Matrix& m) { return m.rows() == 1 || m.cols() == 1; }

}  // namespace

Var Tape::constant(Matrix value) { return Var{this, emplace(std::move(value), false)}; }

Var Tape::leaf(Matrix value) { return Var{this, emplace(std::move(value), true)}; }

const Matrix& Tape::grad(Var v) { return grad_buffer(v.id); }

int Tape::emplace(Matrix value, bool tracked) {
  Node n;
  n.value = std::move(value);
  n.tracked = tracked;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::set_pull(int id, std::function<void(Tape&)> pull) {
  nodes_[id].pull = std::move(pull);
}

Matrix& Tape::grad_buffer(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("backward: loss not on this tape");
  const Matrix& lv = nodes_[loss.id].value;
  if (lv.rows() != 1 || lv.cols() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got " + shape_str(lv));
  grad_buffer(loss.id)(0, 0) += 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.tracked || n.grad.size() == 0 || !n.pull) continue;
    n.pull(*this);
  }
  // Leaf gradients accumulate across backward() calls (a second identical
  // call doubles them exactly); intermediate buffers are dropped so stale
  // upstream values cannot be re-pushed.
  for (Node& n : nodes_)
    if (n.pull) n.grad.resize(0, 0);
}

void Tape::clear() { nodes_.clear(); }

namespace {

// Records `value` on t and wires the pull-back only if some input is tracked.
Var record(Tape& t, Matrix value, bool any_tracked, std::function<void(Tape&)> pull) {
  int id = t.emplace(std::move(value), any_tracked);
  if (any_tracked) t.set_pull(id, std::move(pull));
  return Var{&t, id};
}

}  // namespace

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Matrix& av = t.value_at(a.id);
  const Matrix& bv = t.value_at(b.id);
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error("add", av, bv);
  bool tracked = t.tracked(a.id) || t.tracked(b.id);
  int out = t.emplace(av + bv, tracked);
  if (tracked)
    t.set_pull(out, [a, b, out](Tape& tp) {
      const Matrix& g = tp.grad_at(out);
      if (tp.tracked(a.id)) tp.grad_buffer(a.id) += g;
      if (tp.tracked(b.id)) tp.grad_buffer(b.id) += g;
    });
  return Var{&t, out};
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Matrix& av = t.value_at(a.id);
  const Matrix& bv = t.value_at(b.id);
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error("sub", av, bv);
  bool tracked = t.tracked(a.id) || t.tracked(b.id);
  int out = t.emplace(av - bv, tracked);
  if (tracked)
    t.set_pull(out, [a, b, out](Tape& tp) {
      const Matrix& g = tp.grad_at(out);
      if (tp.tracked(a.id)) tp.grad_buffer(a.id) += g;
      if (tp.tracked(b.id)) tp.grad_buffer(b.id) -= g;
    });
  return Var{&t, out};
}

Var hadamard(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Matrix& av = t.value_at(a.id);
  const Matrix& bv = t.value_at(b.id);
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error("hadamard", av, bv);
  bool tracked = t.tracked(a.id) || t.tracked(b.id);
  int out = t.emplace(av.cwiseProduct(bv), tracked);
  if (tracked)
    t.set_pull(out, [a, b, out](Tape& tp) {
      const Matrix& g = tp.grad_at(out);
      if (tp.tracked(a.id)) tp.grad_buffer(a.id) += g.cwiseProduct(tp.value_at(b.id));
      if (tp.tracked(b.id)) tp.grad_buffer(b.id) += g.cwiseProduct(tp.value_at(a.id));
    });
  return Var{&t, out};
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Matrix& av = t.value_at(a.id);
  const Matrix& bv = t.value_at(b.id);
  if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
  bool tracked = t.tracked(a.id) || t.tracked(b.id);
  int out = t.emplace(av * bv, tracked);
  if (tracked)
    t.set_pull(out, [a, b, out](Tape& tp) {
      const Matrix& g = tp.grad_at(out);
      if (tp.tracked(a.id)) tp.grad_buffer(a.id) += g * tp.value_at(b.id).transpose();
      if (tp.tracked(b.id)) tp.grad_buffer(b.id) += tp.value_at(a.id).transpose() * g;
    });
  return Var{&t, out};
}

Var transpose(Var a) {
  Tape& t = *a.tape;
  bool tracked = t.tracked(a.id);
  int out = t.emplace(t.value_at(a.id).transpose(), tracked);
  if (tracked)
    t.set_pull(out, [a, out](Tape& tp) { tp.grad_buffer(a.id) += tp.grad_at(out).transpose(); });
  return Var{&t, out};
}

Var scalar_mul(Var a, Real c) {
  Tape& t = *a.tape;
  bool tracked = t.tracked(a.id);
  int out = t.emplace(t.value_at(a.id) * c, tracked);
  if (tracked)
    t.set_pull(out, [a, c, out](Tape& tp) { tp.grad_buffer(a.id) += c * tp.grad_at(out); });
  return Var{&t, out};
}

Var concat(const std::vector<Var>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  if (axis != 0 && axis != 1) throw std::invalid_argument("concat: axis must be 0 or 1");
  Tape& t = *parts.front().tape;
  Eigen::Index rows = t.value_at(parts[0].id).rows();
  Eigen::Index cols = t.value_at(parts[0].id).cols();
  bool tracked = false;
  for (Var p : parts) {
    if (p.tape != &t) throw std::invalid_argument("concat: inputs on different tapes");
    const Matrix& v = t.value_at(p.id);
    if (axis == 0 && v.cols() != cols) shape_error("concat", t.value_at(parts[0].id), v);
    if (axis == 1 && v.rows() != rows) shape_error("concat", t.value_at(parts[0].id), v);
    tracked = tracked || t.tracked(p.id);
  }
  Eigen::Index total = 0;
  for (Var p : parts) total += (axis == 0) ? t.value_at(p.id).rows() : t.value_at(p.id).cols();
  Matrix out_v(axis == 0 ? total : rows, axis == 0 ? cols : total);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& v = t.value_at(p.id);
    if (axis == 0) {
      out_v.middleRows(at, v.rows()) = v;
      at += v.rows();
    } else {
      out_v.middleCols(at, v.cols()) = v;
      at += v.cols();
    }
  }
  std::vector<Var> ps = parts;
  int out = t.emplace(std::move(out_v), tracked);
  if (tracked)
    t.set_pull(out, [ps, axis, out](Tape& tp) {
      const Matrix& g = tp.grad_at(out);
      Eigen::Index at = 0;
      for (Var p : ps) {
        const Matrix& v = tp.value_at(p.id);
        if (axis == 0) {
          if (tp.tracked(p.id)) tp.grad_buffer(p.id) += g.middleRows(at, v.rows());
          at += v.rows();
        } else {
          if (tp.tracked(p.id)) tp.grad_buffer(p.id) += g.middleCols(at, v.cols());
          at += v.cols();
        }
      }
    });
  return Var{&t, out};
}

Var row_gather(Var a, std::vector<int> rows) {
  Tape& t = *a.tape;
  const Matrix& av = t.value_at(a.id);
  Matrix out_v(static_cast<Eigen::Index>(rows.size()), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= av.rows())
      throw std::invalid_argument("row_gather: index " + std::to_string(rows[i]) +
                                  " out of range for " + shape_str(av));
    out_v.row(static_cast<Eigen::Index>(i)) = av.row(rows[i]);
  }
  bool tracked = t.tracked(a.id);
  int out = t.emplace(std::move(out_v), tracked);
  if (tracked)
    t.set_pull(out, [a, rows = std::move(rows), out](Tape& tp) {
      const Matrix& g = tp.grad_at(out);
      Matrix& ga = tp.grad_buffer(a.id);
      // Repeated indices accumulate; this is the embedding-gradient rule.
      for (std::size_t i = 0; i < rows.size(); ++i)
        ga.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
    });
  return Var{&t, out};
}

Var scatter_add_rows(Var base, Var rows, std::vector<int> where) {
  Tape& t = same_tape(base, rows);
  const Matrix& bv = t.value_at(base.id);
  const Matrix& rv = t.value_at(rows.id);
  if (bv.cols() != rv.cols() || rv.rows() != static_cast<Eigen::Index>(where.size()))
    shape_error("scatter_add_rows", bv, rv);
  Matrix out_v = bv;
  for (std::size_t i = 0; i < where.size(); ++i) {
    if (where[i] < 0 || where[i] >= bv.rows())
      throw std::invalid_argument("scatter_add_rows: index out of range");
    out_v.row(where[i]) += rv.row(static_cast<Eigen::Index>(i));
  }
  bool tracked = t.tracked(base.id) || t.tracked(rows.id);
  int out = t.emplace(std::move(out_v), tracked);
  if (tracked)
    t.set_pull(out, [base, rows, where = std::move(where), out](Tape& tp) {
      const Matrix& g = tp.grad_at(out);
      if (tp.tracked(base.id)) tp.grad_buffer(base.id) += g;
      if (tp.tracked(rows.id)) {
        Matrix& gr = tp.grad_buffer(rows.id);
        for (std::size_t i = 0; i < where.size(); ++i)
          gr.row(static_cast<Eigen::Index>(i)) += g.row(where[i]);
      }
    });
  return Var{&t, out};
}

Var broadcast_rows(Var row, int n) {
  Tape& t = *row.tape;
  const Matrix& rv = t.value_at(row.id);
  if (rv.rows() != 1) throw std::invalid_argument("broadcast_rows: input must be 1 x d");
  if (n < 1) throw std::invalid_argument("broadcast_rows: n must be positive");
  bool tracked = t.tracked(row.id);
  int out = t.emplace(rv.replicate(n, 1), tracked);
  if (tracked)
    t.set_pull(out, [row, out](Tape& tp) {
      tp.grad_buffer(row.id) += tp.grad_at(out).colwise().sum();
    });
  return Var{&t, out};
}

Var scale_rows(Var m, Var col) {
  Tape& t = same_tape(m, col);
  const Matrix& mv = t.value_at(m.id);
  const Matrix& cv = t.value_at(col.id);
  if (cv.cols() != 1 || cv.rows() != mv.rows()) shape_error("scale_rows", mv, cv);
  Matrix out_v = mv.array().colwise() * cv.col(0).array();
  bool tracked = t.tracked(m.id) || t.tracked(col.id);
  int out = t.emplace(std::move(out_v), tracked);
  if (tracked)
    t.set_pull(out, [m, col, out](Tape& tp) {
      const Matrix& g = tp.grad_at(out);
      if (tp.tracked(m.id))
        tp.grad_buffer(m.id) += (g.array().colwise() * tp.value_at(col.id).col(0).array()).matrix();
      if (tp.tracked(col.id))
        tp.grad_buffer(col.id) += (g.array() * tp.value_at(m.id).array()).rowwise().sum().matrix();
    });
  return Var{&t, out};
}

Var sum(Var a) {
  Tape& t = *a.tape;
  Matrix s(1, 1);
  s(0, 0) = t.value_at(a.id).sum();
  bool tracked = t.tracked(a.id);
  int out = t.emplace(std::move(s), tracked);
  if (tracked)
    t.set_pull(out, [a, out](Tape& tp) {
      tp.grad_buffer(a.id).array() += tp.grad_at(out)(0, 0);
    });
  return Var{&t, out};
}

Var mean(Var a) {
  Tape& t = *a.tape;
  const Matrix& av = t.value_at(a.id);
  Real n = static_cast<Real>(av.size());
  Matrix s(1, 1);
  s(0, 0) = av.sum() / n;
  bool tracked = t.tracked(a.id);
  int out = t.emplace(std::move(s), tracked);
  if (tracked)
    t.set_pull(out, [a, n, out](Tape& tp) {
      tp.grad_buffer(a.id).array() += tp.grad_at(out)(0, 0) / n;
    });
  return Var{&t, out};
}

Var mean_rows(Var a) {
  Tape& t = *a.tape;
  const Matrix& av = t.value_at(a.id);
  Real n = static_cast<Real>(av.rows());
  Matrix m = av.colwise().mean();
  bool tracked = t.tracked(a.id);
  int out = t.emplace(std::move(m), tracked);
  if (tracked)
    t.set_pull(out, [a, n, out](Tape& tp) {
      const Matrix& g = tp.grad_at(out);
      tp.grad_buffer(a.id) += (g / n).replicate(static_cast<Eigen::Index>(n), 1);
    });
  return Var{&t, out};
}

Var sigmoid(Var a) {
  Tape& t = *a.tape;
  Matrix y = t.value_at(a.id).unaryExpr([](Real x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  });
  bool tracked = t.tracked(a.id);
  int out = t.emplace(std::move(y), tracked);
  if (tracked)
    t.set_pull(out, [a, out](Tape& tp) {
      const Matrix& yv = tp.value_at(out);
      tp.grad_buffer(a.id).array() +=
          tp.grad_at(out).array() * yv.array() * (1.0 - yv.array());
    });
  return Var{&t, out};
}

Var tanh(Var a) {
  Tape& t = *a.tape;
  Matrix y = t.value_at(a.id).array().tanh();
  bool tracked = t.tracked(a.id);
  int out = t.emplace(std::move(y), tracked);
  if (tracked)
    t.set_pull(out, [a, out](Tape& tp) {
      const Matrix& yv = tp.value_at(out);
      tp.grad_buffer(a.id).array() +=
          tp.grad_at(out).array() * (1.0 - yv.array().square());
    });
  return Var{&t, out};
}

Var relu(Var a) {
  Tape& t = *a.tape;
  Matrix y = t.value_at(a.id).cwiseMax(0.0);
  bool tracked = t.tracked(a.id);
  int out = t.emplace(std::move(y), tracked);
  if (tracked)
    t.set_pull(out, [a, out](Tape& tp) {
      // Subgradient at 0 is taken as 0.
      const Matrix& xv = tp.value_at(a.id);
      tp.grad_buffer(a.id).array() +=
          tp.grad_at(out).array() * (xv.array() > 0.0).cast<Real>();
    });
  return Var{&t, out};
}

namespace {

// Shared softmax forward with max subtraction; works on either orientation.
Matrix softmax_probs(const Matrix& v, Real tau) {
  Matrix p = ((v.array() - v.maxCoeff()) / tau).exp();
  return p / p.sum();
}

void check_vector_tau(const Matrix& v, Real tau, const char* op) {
  if (!is_vector(v)) throw std::invalid_argument(std::string(op) + ": input must be a vector");
  if (!(tau > 0)) throw std::invalid_argument(std::string(op) + ": temperature must be positive");
}

}  // namespace

Var softmax(Var v, Real tau) {
  Tape& t = *v.tape;
  const Matrix& x = t.value_at(v.id);
  check_vector_tau(x, tau, "softmax");
  bool tracked = t.tracked(v.id);
  int out = t.emplace(softmax_probs(x, tau), tracked);
  if (tracked)
    t.set_pull(out, [v, tau, out](Tape& tp) {
      const Matrix& p = tp.value_at(out);
      const Matrix& g = tp.grad_at(out);
      Real dot = (g.array() * p.array()).sum();
      tp.grad_buffer(v.id).array() += p.array() * (g.array() - dot) / tau;
    });
  return Var{&t, out};
}

Var log_softmax(Var v, Real tau) {
  Tape& t = *v.tape;
  const Matrix& x = t.value_at(v.id);
  check_vector_tau(x, tau, "log_softmax");
  Real m = x.maxCoeff();
  Matrix scaled = (x.array() - m) / tau;
  Real lse = std::log(scaled.array().exp().sum());
  Matrix y = scaled.array() - lse;
  bool tracked = t.tracked(v.id);
  int out = t.emplace(std::move(y), tracked);
  if (tracked)
    t.set_pull(out, [v, tau, out](Tape& tp) {
      Matrix p = tp.value_at(out).array().exp();
      const Matrix& g = tp.grad_at(out);
      Real gs = g.sum();
      tp.grad_buffer(v.id).array() += (g.array() - p.array() * gs) / tau;
    });
  return Var{&t, out};
}

Var layer_norm(Var m) {
  Tape& t = *m.tape;
  const Matrix& x = t.value_at(m.id);
  if (x.cols() < 2) throw std::invalid_argument("layer_norm: needs at least 2 columns, got " +
                                                shape_str(x));
  Eigen::Index n = x.cols();
  Vector mu = x.rowwise().mean();
  Matrix centered = x.array().colwise() - mu.array();
  Vector inv_std =
      ((centered.array().square().rowwise().sum() / static_cast<Real>(n)) + kLayerNormEps)
          .sqrt()
          .inverse();
  Matrix y = centered.array().colwise() * inv_std.array();
  bool tracked = t.tracked(m.id);
  int out = t.emplace(std::move(y), tracked);
  if (tracked)
    t.set_pull(out, [m, inv_std = std::move(inv_std), n, out](Tape& tp) {
      const Matrix& yv = tp.value_at(out);
      const Matrix& g = tp.grad_at(out);
      Vector g_mean = g.rowwise().mean();
      Vector gy_mean = (g.array() * yv.array()).rowwise().sum() / static_cast<Real>(n);
      Matrix dx = ((g.array().colwise() - g_mean.array()) -
                   (yv.array().colwise() * gy_mean.array()))
                      .colwise() *
                  inv_std.array();
      tp.grad_buffer(m.id) += dx.matrix();
    });
  return Var{&t, out};
}

}  // namespace sgcl
