#pragma once

// Minimal reverse-mode differentiation over row-major double matrices. Covers
// exactly the operations the value networks need.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace qvp {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  std::size_t size() const { return data.size(); }
};

/// A trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  int rows() const { return value().rows; }
  int cols() const { return value().cols; }
};

class Tape {
 public:
  /// With recording off no backward closures are kept (inference only).
  explicit Tape(bool record = true) : record_(record) {}

  Var constant(Matrix m);
  /// Gradients flow into p.grad; the value is referenced, not copied, so p
  /// must not change while the tape is alive.
  Var param(Parameter& p);
  /// Read-only use of a parameter (no gradient).
  Var param(const Parameter& p);

  const Matrix& value(Var v) const { return value_at(v.id); }
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }
  bool recording() const { return record_; }

  /// Seeds d(out)/d(out) = 1 (out must be 1x1) and accumulates into parameters.
  void backward(Var out);

  // Used by the operations below. `back` is kept only when recording and some
  // input needs a gradient; it reads the node's grad and accumulates into inputs.
  Var push(Matrix value, const std::vector<Var>& inputs, std::function<void(Tape&, int self)> back);
  Matrix& grad_buffer(int id);
  const Matrix& value_at(int id) const { return nodes_[id].ref ? *nodes_[id].ref : nodes_[id].value; }
  const Matrix& grad_at(int id) const { return nodes_[id].grad; }
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&, int)> back;
    Parameter* param = nullptr;
    const Matrix* ref = nullptr;
    bool needs_grad = false;
  };
  bool record_;
  std::vector<Node> nodes_;
};

// x * W + b; W is (in x out), b is (1 x out) or absent.
Var linear(Var x, Var w);
Var linear(Var x, Var w, Var b);
Var add(Var a, Var b);
Var mish(Var x);
Var abs(Var x);
Var relu(Var x);
Var scale(Var x, double s);
/// x - c elementwise.
Var sub_const(Var x, const Matrix& c);
/// c - x elementwise.
Var const_sub(const Matrix& c, Var x);
Var sum_all(Var x);
/// out[i] = x[idx[i]].
Var gather_rows(Var x, std::vector<int> idx);
/// Row-major reinterpretation.
Var reshape(Var x, int rows, int cols);
Var concat_cols(Var a, Var b);
Var concat_rows(const std::vector<Var>& parts);
/// Per segment and column: reductions over the rows with that segment id.
/// Empty segments produce zeros.
Var segment_sum(Var x, std::vector<int> seg, int num_segments);
Var segment_max(Var x, std::vector<int> seg, int num_segments);
Var segment_logsumexp(Var x, std::vector<int> seg, int num_segments);

double mish_scalar(double x);

}  // namespace qvp
