#include "qvp/autodiff.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qvp/common.hpp"

namespace qvp {

const Matrix& Var::value() const { return tape->value(*this); }

Var Tape::constant(Matrix m) {
  nodes_.push_back(Node{std::move(m), {}, nullptr, nullptr, nullptr, false});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(Parameter& p) {
  nodes_.push_back(Node{{}, {}, nullptr, record_ ? &p : nullptr, &p.value, record_});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(const Parameter& p) {
  nodes_.push_back(Node{{}, {}, nullptr, nullptr, &p.value, false});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::push(Matrix value, const std::vector<Var>& inputs, std::function<void(Tape&, int)> back) {
  bool needs = false;
  for (Var v : inputs) needs = needs || nodes_[v.id].needs_grad;
  needs = needs && record_;
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(back) : nullptr, nullptr, nullptr, needs});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Matrix& Tape::grad_buffer(int id) {
  Node& n = nodes_[id];
  const Matrix& v = value_at(id);
  if (n.grad.size() != v.size()) n.grad = Matrix(v.rows, v.cols);
  return n.grad;
}

void Tape::backward(Var out) {
  if (!record_) throw Error("backward on a non-recording tape");
  const Matrix& v = value(out);
  if (v.rows != 1 || v.cols != 1) throw Error("backward needs a scalar output");
  grad_buffer(out.id).data[0] = 1.0;
  for (int id = out.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.back) n.back(*this, id);
    if (n.param) {
      Parameter& p = *n.param;
      if (p.grad.size() != p.value.size() || p.grad.rows != p.value.rows) p.grad = Matrix(p.value.rows, p.value.cols);
      for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad.data[i] += n.grad.data[i];
    }
  }
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(std::string("autodiff: ") + what);
}

// out += x * w   (x: n x i, w: i x o, out: n x o)
void matmul_acc(const Matrix& x, const Matrix& w, Matrix& out) {
  const int n = x.rows, in = x.cols, o = w.cols;
  for (int r = 0; r < n; ++r) {
    const double* xr = x.row(r);
    double* orow = out.row(r);
    for (int p = 0; p < in; ++p) {
      const double a = xr[p];
      if (a == 0.0) continue;
      const double* wr = w.row(p);
      for (int c = 0; c < o; ++c) orow[c] += a * wr[c];
    }
  }
}

Var linear_impl(Var x, Var w, const Var* b) {
  Tape& t = *x.tape;
  const Matrix& xv = x.value();
  const Matrix& wv = w.value();
  require(xv.cols == wv.rows, "linear: dimension mismatch");
  Matrix out(xv.rows, wv.cols);
  if (b) {
    const Matrix& bv = b->value();
    require(bv.rows == 1 && bv.cols == wv.cols, "linear: bias shape");
    for (int r = 0; r < out.rows; ++r) std::copy(bv.data.begin(), bv.data.end(), out.row(r));
  }
  matmul_acc(xv, wv, out);
  const int xi = x.id, wi = w.id, bi = b ? b->id : -1;
  std::vector<Var> inputs{x, w};
  if (b) inputs.push_back(*b);
  return t.push(std::move(out), inputs, [xi, wi, bi](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    const Matrix& xv = t.value_at(xi);
    const Matrix& wv = t.value_at(wi);
    const int n = xv.rows, in = xv.cols, o = wv.cols;
    if (t.needs_grad({&t, xi})) {
      Matrix& dx = t.grad_buffer(xi);
      for (int r = 0; r < n; ++r) {
        const double* gr = g.row(r);
        double* dr = dx.row(r);
        for (int p = 0; p < in; ++p) {
          const double* wr = wv.row(p);
          double s = 0.0;
          for (int c = 0; c < o; ++c) s += gr[c] * wr[c];
          dr[p] += s;
        }
      }
    }
    if (t.needs_grad({&t, wi})) {
      Matrix& dw = t.grad_buffer(wi);
      for (int r = 0; r < n; ++r) {
        const double* xr = xv.row(r);
        const double* gr = g.row(r);
        for (int p = 0; p < in; ++p) {
          const double a = xr[p];
          if (a == 0.0) continue;
          double* dwr = dw.row(p);
          for (int c = 0; c < o; ++c) dwr[c] += a * gr[c];
        }
      }
    }
    if (bi >= 0 && t.needs_grad({&t, bi})) {
      Matrix& db = t.grad_buffer(bi);
      for (int r = 0; r < n; ++r) {
        const double* gr = g.row(r);
        for (int c = 0; c < o; ++c) db.data[c] += gr[c];
      }
    }
  });
}

template <class Fwd, class Deriv>
Var elementwise(Var x, Fwd f, Deriv d) {
  const Matrix& xv = x.value();
  Matrix out(xv.rows, xv.cols);
  for (std::size_t i = 0; i < xv.size(); ++i) out.data[i] = f(xv.data[i]);
  const int xi = x.id;
  return x.tape->push(std::move(out), {x}, [xi, d](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    const Matrix& xv = t.value_at(xi);
    Matrix& dx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < xv.size(); ++i) dx.data[i] += g.data[i] * d(xv.data[i]);
  });
}

double softplus(double x) { return x > 20.0 ? x : std::log1p(std::exp(x)); }

double mish_derivative(double x) {
  const double sp = softplus(x);
  const double th = std::tanh(sp);
  const double sig = 1.0 / (1.0 + std::exp(-x));
  return th + x * (1.0 - th * th) * sig;
}

}  // namespace

double mish_scalar(double x) { return x * std::tanh(softplus(x)); }

Var linear(Var x, Var w) { return linear_impl(x, w, nullptr); }
Var linear(Var x, Var w, Var b) { return linear_impl(x, w, &b); }

Var add(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  require(av.rows == bv.rows && av.cols == bv.cols, "add: shape mismatch");
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
  const int ai = a.id, bi = b.id;
  return a.tape->push(std::move(out), {a, b}, [ai, bi](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    for (int id : {ai, bi}) {
      if (!t.needs_grad({&t, id})) continue;
      Matrix& d = t.grad_buffer(id);
      for (std::size_t i = 0; i < g.size(); ++i) d.data[i] += g.data[i];
    }
  });
}

Var mish(Var x) { return elementwise(x, mish_scalar, mish_derivative); }

Var abs(Var x) {
  return elementwise(
      x, [](double v) { return std::fabs(v); }, [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

Var relu(Var x) {
  return elementwise(
      x, [](double v) { return v > 0 ? v : 0.0; }, [](double v) { return v > 0 ? 1.0 : 0.0; });
}

Var scale(Var x, double s) {
  return elementwise(
      x, [s](double v) { return s * v; }, [s](double) { return s; });
}

Var sub_const(Var x, const Matrix& c) {
  const Matrix& xv = x.value();
  require(xv.size() == c.size(), "sub_const: shape mismatch");
  Matrix out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= c.data[i];
  const int xi = x.id;
  return x.tape->push(std::move(out), {x}, [xi](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    Matrix& dx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < g.size(); ++i) dx.data[i] += g.data[i];
  });
}

Var const_sub(const Matrix& c, Var x) {
  const Matrix& xv = x.value();
  require(xv.size() == c.size(), "const_sub: shape mismatch");
  Matrix out(xv.rows, xv.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = c.data[i] - xv.data[i];
  const int xi = x.id;
  return x.tape->push(std::move(out), {x}, [xi](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    Matrix& dx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < g.size(); ++i) dx.data[i] -= g.data[i];
  });
}

Var sum_all(Var x) {
  const Matrix& xv = x.value();
  Matrix out(1, 1);
  for (double v : xv.data) out.data[0] += v;
  const int xi = x.id;
  return x.tape->push(std::move(out), {x}, [xi](Tape& t, int self) {
    const double g = t.grad_at(self).data[0];
    Matrix& dx = t.grad_buffer(xi);
    for (double& d : dx.data) d += g;
  });
}

Var gather_rows(Var x, std::vector<int> idx) {
  const Matrix& xv = x.value();
  Matrix out(static_cast<int>(idx.size()), xv.cols);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] >= 0 && idx[i] < xv.rows, "gather_rows: index out of range");
    std::copy(xv.row(idx[i]), xv.row(idx[i]) + xv.cols, out.row(static_cast<int>(i)));
  }
  const int xi = x.id;
  return x.tape->push(std::move(out), {x}, [xi, idx = std::move(idx)](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    Matrix& dx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double* gr = g.row(static_cast<int>(i));
      double* dr = dx.row(idx[i]);
      for (int c = 0; c < g.cols; ++c) dr[c] += gr[c];
    }
  });
}

Var reshape(Var x, int rows, int cols) {
  const Matrix& xv = x.value();
  require(static_cast<std::size_t>(rows) * cols == xv.size(), "reshape: size mismatch");
  Matrix out;
  out.rows = rows;
  out.cols = cols;
  out.data = xv.data;
  const int xi = x.id;
  return x.tape->push(std::move(out), {x}, [xi](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    Matrix& dx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < g.size(); ++i) dx.data[i] += g.data[i];
  });
}

Var concat_cols(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  require(av.rows == bv.rows, "concat_cols: row mismatch");
  Matrix out(av.rows, av.cols + bv.cols);
  for (int r = 0; r < av.rows; ++r) {
    std::copy(av.row(r), av.row(r) + av.cols, out.row(r));
    std::copy(bv.row(r), bv.row(r) + bv.cols, out.row(r) + av.cols);
  }
  const int ai = a.id, bi = b.id;
  return a.tape->push(std::move(out), {a, b}, [ai, bi](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    const int ac = t.value_at(ai).cols;
    const int bc = t.value_at(bi).cols;
    if (t.needs_grad({&t, ai})) {
      Matrix& d = t.grad_buffer(ai);
      for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < ac; ++c) d(r, c) += g(r, c);
      }
    }
    if (t.needs_grad({&t, bi})) {
      Matrix& d = t.grad_buffer(bi);
      for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < bc; ++c) d(r, c) += g(r, ac + c);
      }
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  const int cols = parts[0].cols();
  int rows = 0;
  for (Var p : parts) {
    require(p.cols() == cols, "concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix& v = p.value();
    std::copy(v.data.begin(), v.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += v.size();
    ids.push_back(p.id);
  }
  return parts[0].tape->push(std::move(out), parts, [ids = std::move(ids)](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    std::size_t offset = 0;
    for (int id : ids) {
      const std::size_t n = t.value_at(id).size();
      if (t.needs_grad({&t, id})) {
        Matrix& d = t.grad_buffer(id);
        for (std::size_t i = 0; i < n; ++i) d.data[i] += g.data[offset + i];
      }
      offset += n;
    }
  });
}

Var segment_sum(Var x, std::vector<int> seg, int num_segments) {
  const Matrix& xv = x.value();
  require(static_cast<int>(seg.size()) == xv.rows, "segment_sum: segment ids");
  Matrix out(num_segments, xv.cols);
  for (int r = 0; r < xv.rows; ++r) {
    require(seg[r] >= 0 && seg[r] < num_segments, "segment_sum: segment out of range");
    const double* xr = xv.row(r);
    double* o = out.row(seg[r]);
    for (int c = 0; c < xv.cols; ++c) o[c] += xr[c];
  }
  const int xi = x.id;
  return x.tape->push(std::move(out), {x}, [xi, seg = std::move(seg)](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    Matrix& dx = t.grad_buffer(xi);
    for (int r = 0; r < dx.rows; ++r) {
      const double* gr = g.row(seg[r]);
      double* dr = dx.row(r);
      for (int c = 0; c < dx.cols; ++c) dr[c] += gr[c];
    }
  });
}

Var segment_max(Var x, std::vector<int> seg, int num_segments) {
  const Matrix& xv = x.value();
  require(static_cast<int>(seg.size()) == xv.rows, "segment_max: segment ids");
  Matrix out(num_segments, xv.cols);
  std::vector<int> arg(static_cast<std::size_t>(num_segments) * xv.cols, -1);
  for (int r = 0; r < xv.rows; ++r) {
    require(seg[r] >= 0 && seg[r] < num_segments, "segment_max: segment out of range");
    const double* xr = xv.row(r);
    double* o = out.row(seg[r]);
    int* a = arg.data() + static_cast<std::size_t>(seg[r]) * xv.cols;
    for (int c = 0; c < xv.cols; ++c) {
      if (a[c] < 0 || xr[c] > o[c]) {
        o[c] = xr[c];
        a[c] = r;
      }
    }
  }
  const int xi = x.id;
  return x.tape->push(std::move(out), {x}, [xi, arg = std::move(arg)](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    Matrix& dx = t.grad_buffer(xi);
    for (int s = 0; s < g.rows; ++s) {
      for (int c = 0; c < g.cols; ++c) {
        const int r = arg[static_cast<std::size_t>(s) * g.cols + c];
        if (r >= 0) dx(r, c) += g(s, c);
      }
    }
  });
}

Var segment_logsumexp(Var x, std::vector<int> seg, int num_segments) {
  const Matrix& xv = x.value();
  require(static_cast<int>(seg.size()) == xv.rows, "segment_logsumexp: segment ids");
  const double lowest = -std::numeric_limits<double>::infinity();
  Matrix peak(num_segments, xv.cols, lowest);
  for (int r = 0; r < xv.rows; ++r) {
    require(seg[r] >= 0 && seg[r] < num_segments, "segment_logsumexp: segment out of range");
    const double* xr = xv.row(r);
    double* m = peak.row(seg[r]);
    for (int c = 0; c < xv.cols; ++c) m[c] = std::max(m[c], xr[c]);
  }
  Matrix acc(num_segments, xv.cols);
  for (int r = 0; r < xv.rows; ++r) {
    const double* xr = xv.row(r);
    const double* m = peak.row(seg[r]);
    double* a = acc.row(seg[r]);
    for (int c = 0; c < xv.cols; ++c) a[c] += std::exp(xr[c] - m[c]);
  }
  Matrix out(num_segments, xv.cols);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data[i] = peak.data[i] == lowest ? 0.0 : peak.data[i] + std::log(acc.data[i]);
  }
  const int xi = x.id;
  return x.tape->push(std::move(out), {x}, [xi, seg = std::move(seg)](Tape& t, int self) {
    const Matrix& g = t.grad_at(self);
    const Matrix& y = t.value_at(self);
    const Matrix& xv = t.value_at(xi);
    Matrix& dx = t.grad_buffer(xi);
    for (int r = 0; r < xv.rows; ++r) {
      const double* xr = xv.row(r);
      const double* yr = y.row(seg[r]);
      const double* gr = g.row(seg[r]);
      double* dr = dx.row(r);
      for (int c = 0; c < xv.cols; ++c) dr[c] += gr[c] * std::exp(xr[c] - yr[c]);
    }
  });
}

}  // namespace qvp
