#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnnbench/matrix.hpp"
#include "gnnbench/rng.hpp"
#include "gnnbench/sparse.hpp"

namespace gnnbench {

class Tape;

/// Lightweight handle into a Tape node. Copying a Tensor copies the handle,
/// never the data.
struct Tensor {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Matrix& value() const;
  Matrix& value_mut();  // leaves only: params and gradcheck perturbation
  const Matrix& grad() const;
  Matrix& grad_mut();
  int rows() const;
  int cols() const;
};

/// Reverse-mode tape. Forward ops append a node (value) plus a backward
/// closure; backward() replays closures in reverse over a scratch adjoint
/// buffer and then accumulates into the .grad of requires_grad nodes, so
/// repeated backward calls sum leaf gradients.
///
/// Parameters are created as leaves before mark(); rewind(mark) drops the
/// per-iteration graph while keeping them alive.
class Tape {
 public:
  /// Per-pass adjoint storage, indexed by node id. Slots start unset; an op
  /// whose output was never reached contributes nothing.
  class Adjoints {
   public:
    explicit Adjoints(std::size_t n) : slots_(n) {}
    bool has(int id) const { return slots_[static_cast<std::size_t>(id)].size() != 0; }
    const Matrix& at(int id) const { return slots_[static_cast<std::size_t>(id)]; }
    void add(int id, const Matrix& g) {
      Matrix& slot = slots_[static_cast<std::size_t>(id)];
      if (slot.size() == 0) slot = Matrix(g.rows(), g.cols());
      axpy(slot, g);
    }
    /// Direct slot access for ops that scatter into their input adjoint.
    Matrix& accum_slot(int id, int rows, int cols) {
      Matrix& slot = slots_[static_cast<std::size_t>(id)];
      if (slot.size() == 0) slot = Matrix(rows, cols);
      return slot;
    }

   private:
    std::vector<Matrix> slots_;
  };

  using BackwardFn = std::function<void(Tape&, Adjoints&)>;

  struct Mark {
    std::size_t nodes = 0;
    std::size_t records = 0;
  };

  /// Dropout switch: draws and applies masks only while true.
  bool training = true;

  Tensor leaf(Matrix value, bool requires_grad) {
    if (!value.all_finite()) throw std::runtime_error("Tape::leaf: non-finite values");
    const int id = static_cast<int>(nodes_.size());
    Node n;
    if (requires_grad) n.grad = Matrix(value.rows(), value.cols());
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return {this, id};
  }
  Tensor constant(Matrix value) { return leaf(std::move(value), false); }

  /// Output node of an op; finite-checked so a diverging run fails at the
  /// op that produced the first NaN/inf, not at the loss.
  Tensor push(Matrix value, const char* op) {
    if (!value.all_finite()) throw std::runtime_error(std::string(op) + ": non-finite result");
    const int id = static_cast<int>(nodes_.size());
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, id};
  }

  /// Appends a backward closure. Public so tests can register a deliberately
  /// wrong rule and watch the gradient checker reject it.
  void record(BackwardFn fn) { records_.push_back(std::move(fn)); }

  Mark mark() const { return {nodes_.size(), records_.size()}; }
  void rewind(Mark m) {
    if (m.nodes > nodes_.size() || m.records > records_.size())
      throw std::invalid_argument("Tape::rewind: mark is ahead of the tape");
    nodes_.resize(m.nodes);
    records_.resize(m.records);
  }

  std::size_t num_nodes() const { return nodes_.size(); }

  const Matrix& value(int id) const { return at(id).value; }
  Matrix& value_mut(int id) { return at(id).value; }
  const Matrix& grad(int id) const {
    const Node& n = at(id);
    if (!n.requires_grad) throw std::invalid_argument("Tape::grad: node does not require grad");
    return n.grad;
  }
  Matrix& grad_mut(int id) {
    Node& n = at(id);
    if (!n.requires_grad) throw std::invalid_argument("Tape::grad: node does not require grad");
    return n.grad;
  }
  bool requires_grad(int id) const { return at(id).requires_grad; }

  void zero_grad() {
    for (Node& n : nodes_)
      if (n.requires_grad) n.grad.set_zero();
  }

  /// Accumulates d(loss)/d(leaf) into every requires_grad node. `loss` must
  /// be scalar (1x1).
  void backward(const Tensor& loss) {
    if (loss.tape != this) throw std::invalid_argument("Tape::backward: tensor from another tape");
    const Matrix& lv = value(loss.id);
    if (lv.rows() != 1 || lv.cols() != 1)
      throw std::invalid_argument("Tape::backward: loss must be 1x1, got " + shape_str(lv));
    Adjoints adj(nodes_.size());
    adj.add(loss.id, Matrix(1, 1, 1.0));
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)(*this, adj);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      Node& n = nodes_[i];
      if (n.requires_grad && adj.has(static_cast<int>(i))) {
        const Matrix& g = adj.at(static_cast<int>(i));
        if (!g.all_finite()) throw std::runtime_error("Tape::backward: non-finite gradient");
        axpy(n.grad, g);
      }
    }
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // allocated only when requires_grad
    bool requires_grad = false;
  };

  Node& at(int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
      throw std::invalid_argument("Tape: node id " + std::to_string(id) + " out of range");
    return nodes_[static_cast<std::size_t>(id)];
  }
  const Node& at(int id) const { return const_cast<Tape*>(this)->at(id); }

  std::vector<Node> nodes_;
  std::vector<BackwardFn> records_;
};

inline const Matrix& Tensor::value() const { return tape->value(id); }
inline Matrix& Tensor::value_mut() { return tape->value_mut(id); }
inline const Matrix& Tensor::grad() const { return tape->grad(id); }
inline Matrix& Tensor::grad_mut() { return tape->grad_mut(id); }
inline int Tensor::rows() const { return value().rows(); }
inline int Tensor::cols() const { return value().cols(); }

namespace detail {
inline Tape& same_tape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.valid() || !b.valid() || a.tape != b.tape)
    throw std::invalid_argument(std::string(op) + ": tensors must share one tape");
  return *a.tape;
}
inline double sigmoid_scalar(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Dense ops

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape& t = detail::same_tape(a, b, "matmul");
  Tensor out = t.push(matmul_nn(a.value(), b.value()), "matmul");
  t.record([ai = a.id, bi = b.id, oi = out.id](Tape& tp, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    adj.add(ai, matmul_nt(g, tp.value(bi)));
    adj.add(bi, matmul_tn(tp.value(ai), g));
  });
  return out;
}

/// out = s * h with a symmetric sparse matrix; symmetry lets the backward
/// pass reuse s itself in place of its transpose.
inline Tensor spmm(const SparseMatrix& s, const Tensor& h) {
  if (!s.symmetric) throw std::invalid_argument("spmm: matrix must be flagged symmetric");
  if (s.n != h.rows())
    throw std::invalid_argument("spmm: dimension mismatch: " + std::to_string(s.n) + " vs " +
                                shape_str(h.value()));
  Tape& t = *h.tape;
  Tensor out = t.push(spmm_value(s, h.value()), "spmm");
  // s is captured by pointer: it must outlive the record (until rewind)
  t.record([sp = &s, hi = h.id, oi = out.id](Tape&, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    adj.add(hi, spmm_value(*sp, adj.at(oi)));
  });
  return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  Tape& t = detail::same_tape(a, b, "add");
  if (!a.value().same_shape(b.value()))
    throw std::invalid_argument("add: shape mismatch: " + shape_str(a.value()) + " vs " +
                                shape_str(b.value()));
  Matrix v = a.value();
  axpy(v, b.value());
  Tensor out = t.push(std::move(v), "add");
  t.record([ai = a.id, bi = b.id, oi = out.id](Tape&, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    adj.add(ai, adj.at(oi));
    adj.add(bi, adj.at(oi));
  });
  return out;
}

inline Tensor scale(const Tensor& a, double c) {
  Tape& t = *a.tape;
  Matrix v = a.value();
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) v(i, j) *= c;
  Tensor out = t.push(std::move(v), "scale");
  t.record([ai = a.id, oi = out.id, c](Tape&, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    Matrix& slot = adj.accum_slot(ai, g.rows(), g.cols());
    axpy(slot, g, c);
  });
  return out;
}

/// Broadcast-add a 1xC bias row to every row of x.
inline Tensor add_bias(const Tensor& x, const Tensor& b) {
  Tape& t = detail::same_tape(x, b, "add_bias");
  if (b.rows() != 1 || b.cols() != x.cols())
    throw std::invalid_argument("add_bias: bias must be 1x" + std::to_string(x.cols()) + ", got " +
                                shape_str(b.value()));
  Matrix v = x.value();
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) v(i, j) += b.value()(0, j);
  Tensor out = t.push(std::move(v), "add_bias");
  t.record([xi = x.id, bi = b.id, oi = out.id](Tape&, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    adj.add(xi, g);
    Matrix& gb = adj.accum_slot(bi, 1, g.cols());
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
  });
  return out;
}

inline Tensor relu(const Tensor& x) {
  Tape& t = *x.tape;
  Matrix v = x.value();
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) v(i, j) = std::max(0.0, v(i, j));
  Tensor out = t.push(std::move(v), "relu");
  t.record([xi = x.id, oi = out.id](Tape& tp, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    const Matrix& xv = tp.value(xi);
    Matrix& gx = adj.accum_slot(xi, g.rows(), g.cols());
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j)
        if (xv(i, j) > 0.0) gx(i, j) += g(i, j);
  });
  return out;
}

/// Negative-side slope `slope`; the subgradient at exactly 0 is `slope`.
inline Tensor leaky_relu(const Tensor& x, double slope) {
  Tape& t = *x.tape;
  Matrix v = x.value();
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j)
      if (v(i, j) <= 0.0) v(i, j) *= slope;
  Tensor out = t.push(std::move(v), "leaky_relu");
  t.record([xi = x.id, oi = out.id, slope](Tape& tp, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    const Matrix& xv = tp.value(xi);
    Matrix& gx = adj.accum_slot(xi, g.rows(), g.cols());
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) gx(i, j) += g(i, j) * (xv(i, j) > 0.0 ? 1.0 : slope);
  });
  return out;
}

inline Tensor sigmoid(const Tensor& x) {
  Tape& t = *x.tape;
  Matrix v = x.value();
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) v(i, j) = detail::sigmoid_scalar(v(i, j));
  Tensor out = t.push(std::move(v), "sigmoid");
  t.record([xi = x.id, oi = out.id](Tape& tp, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    const Matrix& s = tp.value(oi);
    Matrix& gx = adj.accum_slot(xi, g.rows(), g.cols());
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) gx(i, j) += g(i, j) * s(i, j) * (1.0 - s(i, j));
  });
  return out;
}

inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
  Tape& t = detail::same_tape(a, b, "concat_cols");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows())
    throw std::invalid_argument("concat_cols: row mismatch: " + shape_str(av) + " vs " +
                                shape_str(bv));
  const int a_cols = av.cols(), b_cols = bv.cols();  // push below invalidates av/bv
  Matrix v(av.rows(), a_cols + b_cols);
  for (int i = 0; i < av.rows(); ++i) {
    for (int j = 0; j < a_cols; ++j) v(i, j) = av(i, j);
    for (int j = 0; j < b_cols; ++j) v(i, a_cols + j) = bv(i, j);
  }
  Tensor out = t.push(std::move(v), "concat_cols");
  t.record([ai = a.id, bi = b.id, oi = out.id, ac = a_cols, bc = b_cols](
               Tape&, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    Matrix& ga = adj.accum_slot(ai, g.rows(), ac);
    Matrix& gb = adj.accum_slot(bi, g.rows(), bc);
    for (int i = 0; i < g.rows(); ++i) {
      for (int j = 0; j < ac; ++j) ga(i, j) += g(i, j);
      for (int j = 0; j < bc; ++j) gb(i, j) += g(i, ac + j);
    }
  });
  return out;
}

/// out[k] = x[idx[k]]; rows may repeat. Backward scatter-adds.
inline Tensor row_gather(const Tensor& x, const std::vector<int>& idx) {
  Tape& t = *x.tape;
  const int x_rows = x.rows();  // push below invalidates references into the tape
  Matrix v(static_cast<int>(idx.size()), x.cols());
  {
    const Matrix& xv = x.value();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const int r = idx[k];
      if (r < 0 || r >= x_rows)
        throw std::invalid_argument("row_gather: index " + std::to_string(r) +
                                    " out of range for " + shape_str(xv));
      std::copy(xv.row(r), xv.row(r) + xv.cols(), v.row(static_cast<int>(k)));
    }
  }
  Tensor out = t.push(std::move(v), "row_gather");
  t.record([xi = x.id, oi = out.id, idx, rows = x_rows](Tape&, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    Matrix& gx = adj.accum_slot(xi, rows, g.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      double* dst = gx.row(idx[k]);
      const double* src = g.row(static_cast<int>(k));
      for (int j = 0; j < g.cols(); ++j) dst[j] += src[j];
    }
  });
  return out;
}

/// Per-row inner product of two MxD matrices, giving Mx1.
inline Tensor rowwise_dot(const Tensor& a, const Tensor& b) {
  Tape& t = detail::same_tape(a, b, "rowwise_dot");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (!av.same_shape(bv))
    throw std::invalid_argument("rowwise_dot: shape mismatch: " + shape_str(av) + " vs " +
                                shape_str(bv));
  Matrix v(av.rows(), 1);
  for (int i = 0; i < av.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < av.cols(); ++j) acc += av(i, j) * bv(i, j);
    v(i, 0) = acc;
  }
  Tensor out = t.push(std::move(v), "rowwise_dot");
  t.record([ai = a.id, bi = b.id, oi = out.id](Tape& tp, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    const Matrix& av2 = tp.value(ai);
    const Matrix& bv2 = tp.value(bi);
    Matrix& ga = adj.accum_slot(ai, av2.rows(), av2.cols());
    Matrix& gb = adj.accum_slot(bi, bv2.rows(), bv2.cols());
    for (int i = 0; i < av2.rows(); ++i)
      for (int j = 0; j < av2.cols(); ++j) {
        ga(i, j) += g(i, 0) * bv2(i, j);
        gb(i, j) += g(i, 0) * av2(i, j);
      }
  });
  return out;
}

/// out[i,j] = x[i,j] * s[i,0] with s of shape Mx1.
inline Tensor row_scale(const Tensor& x, const Tensor& s) {
  Tape& t = detail::same_tape(x, s, "row_scale");
  const Matrix& xv = x.value();
  const Matrix& sv = s.value();
  if (sv.cols() != 1 || sv.rows() != xv.rows())
    throw std::invalid_argument("row_scale: scale must be " + std::to_string(xv.rows()) +
                                "x1, got " + shape_str(sv));
  Matrix v = xv;
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) v(i, j) *= sv(i, 0);
  Tensor out = t.push(std::move(v), "row_scale");
  t.record([xi = x.id, si = s.id, oi = out.id](Tape& tp, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    const Matrix& xv2 = tp.value(xi);
    const Matrix& sv2 = tp.value(si);
    Matrix& gx = adj.accum_slot(xi, xv2.rows(), xv2.cols());
    Matrix& gs = adj.accum_slot(si, sv2.rows(), 1);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) {
        gx(i, j) += g(i, j) * sv2(i, 0);
        gs(i, 0) += g(i, j) * xv2(i, j);
      }
  });
  return out;
}

/// Softmax over contiguous segments of an Ex1 score column. seg_ptr has
/// S+1 entries with seg_ptr[0]=0 and seg_ptr[S]=E; empty segments are fine.
/// Uses max subtraction, so large scores stay finite.
inline Tensor segment_softmax(const Tensor& scores, const std::vector<int>& seg_ptr) {
  Tape& t = *scores.tape;
  const Matrix& sv = scores.value();
  if (sv.cols() != 1) throw std::invalid_argument("segment_softmax: scores must be Ex1");
  if (seg_ptr.empty() || seg_ptr.front() != 0 || seg_ptr.back() != sv.rows())
    throw std::invalid_argument("segment_softmax: bad segment pointer");
  Matrix v(sv.rows(), 1);
  for (std::size_t s = 0; s + 1 < seg_ptr.size(); ++s) {
    const int lo = seg_ptr[s], hi = seg_ptr[s + 1];
    if (hi < lo) throw std::invalid_argument("segment_softmax: segment pointer not monotone");
    if (hi == lo) continue;
    double mx = sv(lo, 0);
    for (int e = lo + 1; e < hi; ++e) mx = std::max(mx, sv(e, 0));
    double denom = 0.0;
    for (int e = lo; e < hi; ++e) {
      v(e, 0) = std::exp(sv(e, 0) - mx);
      denom += v(e, 0);
    }
    for (int e = lo; e < hi; ++e) v(e, 0) /= denom;
  }
  Tensor out = t.push(std::move(v), "segment_softmax");
  t.record([si = scores.id, oi = out.id, seg_ptr](Tape& tp, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    const Matrix& a = tp.value(oi);  // the softmax itself
    Matrix& gs = adj.accum_slot(si, g.rows(), 1);
    for (std::size_t s = 0; s + 1 < seg_ptr.size(); ++s) {
      const int lo = seg_ptr[s], hi = seg_ptr[s + 1];
      double dot = 0.0;
      for (int e = lo; e < hi; ++e) dot += a(e, 0) * g(e, 0);
      for (int e = lo; e < hi; ++e) gs(e, 0) += a(e, 0) * (g(e, 0) - dot);
    }
  });
  return out;
}

enum class Reduce { sum, mean };

/// Reduces contiguous row segments of an ExC matrix to one row each,
/// giving SxC. Empty segments reduce to zero rows (mean included).
inline Tensor segment_reduce(const Tensor& x, const std::vector<int>& seg_ptr, Reduce kind) {
  Tape& t = *x.tape;
  const int x_rows = x.rows();  // push below invalidates references into the tape
  if (seg_ptr.empty() || seg_ptr.front() != 0 || seg_ptr.back() != x_rows)
    throw std::invalid_argument("segment_reduce: bad segment pointer");
  const int S = static_cast<int>(seg_ptr.size()) - 1;
  Matrix v(S, x.cols());
  {
    const Matrix& xv = x.value();
    for (int s = 0; s < S; ++s) {
      const int lo = seg_ptr[s], hi = seg_ptr[s + 1];
      if (hi < lo) throw std::invalid_argument("segment_reduce: segment pointer not monotone");
      if (hi == lo) continue;
      for (int e = lo; e < hi; ++e)
        for (int j = 0; j < xv.cols(); ++j) v(s, j) += xv(e, j);
      if (kind == Reduce::mean)
        for (int j = 0; j < xv.cols(); ++j) v(s, j) /= (hi - lo);
    }
  }
  Tensor out = t.push(std::move(v), "segment_reduce");
  t.record([xi = x.id, oi = out.id, seg_ptr, kind, rows = x_rows](Tape&, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    Matrix& gx = adj.accum_slot(xi, rows, g.cols());
    for (std::size_t s = 0; s + 1 < seg_ptr.size(); ++s) {
      const int lo = seg_ptr[s], hi = seg_ptr[s + 1];
      if (hi == lo) continue;
      const double inv = kind == Reduce::mean ? 1.0 / (hi - lo) : 1.0;
      for (int e = lo; e < hi; ++e)
        for (int j = 0; j < g.cols(); ++j) gx(e, j) += g(static_cast<int>(s), j) * inv;
    }
  });
  return out;
}

/// Inverted dropout: while training, zeroes entries with probability p and
/// scales survivors by 1/(1-p) so the expectation is unchanged. Identity
/// (no node appended) when p == 0 or the tape is in eval mode.
inline Tensor dropout(const Tensor& x, double p, RngStream& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout: p must be in [0,1)");
  Tape& t = *x.tape;
  if (p == 0.0 || !t.training) return x;
  const Matrix& xv = x.value();
  Matrix mask(xv.rows(), xv.cols());
  const double inv_keep = 1.0 / (1.0 - p);
  for (int i = 0; i < mask.rows(); ++i)
    for (int j = 0; j < mask.cols(); ++j) mask(i, j) = rng.next_bernoulli(p) ? 0.0 : inv_keep;
  Matrix v = xv;
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) v(i, j) *= mask(i, j);
  Tensor out = t.push(std::move(v), "dropout");
  t.record([xi = x.id, oi = out.id, mask = std::move(mask)](Tape&, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const Matrix& g = adj.at(oi);
    Matrix& gx = adj.accum_slot(xi, g.rows(), g.cols());
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) gx(i, j) += g(i, j) * mask(i, j);
  });
  return out;
}

inline Tensor sum_all(const Tensor& x) {
  Tape& t = *x.tape;
  // Copy the dimensions before push: it may grow the node store and
  // invalidate references into it.
  const int rows = x.rows(), cols = x.cols();
  double acc = 0.0;
  {
    const Matrix& xv = x.value();
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) acc += xv(i, j);
  }
  Tensor out = t.push(Matrix(1, 1, acc), "sum_all");
  t.record([xi = x.id, oi = out.id, r = rows, c = cols](Tape&, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const double g = adj.at(oi)(0, 0);
    Matrix& gx = adj.accum_slot(xi, r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) gx(i, j) += g;
  });
  return out;
}

/// Class-weighted binary cross-entropy over masked rows of an Nx1 logit
/// column. Positives carry weight pos_weight, negatives 1; the sum is
/// normalized by the total masked weight. Uses the log1p(exp(-|z|)) form,
/// stable for logits of either sign and any magnitude.
inline Tensor weighted_bce_with_logits(const Tensor& logits, const std::vector<std::uint8_t>& labels,
                                       const std::vector<std::uint8_t>& mask, double pos_weight) {
  Tape& t = *logits.tape;
  const Matrix& z = logits.value();
  if (z.cols() != 1) throw std::invalid_argument("weighted_bce_with_logits: logits must be Nx1");
  if (labels.size() != static_cast<std::size_t>(z.rows()) || mask.size() != labels.size())
    throw std::invalid_argument("weighted_bce_with_logits: label/mask length mismatch");
  if (!(pos_weight > 0.0))
    throw std::invalid_argument("weighted_bce_with_logits: pos_weight must be positive");
  double total = 0.0, weight_sum = 0.0;
  for (int i = 0; i < z.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const double zi = z(i, 0);
    const double yi = labels[static_cast<std::size_t>(i)];
    const double wi = yi > 0.5 ? pos_weight : 1.0;
    total += wi * (std::max(zi, 0.0) - zi * yi + std::log1p(std::exp(-std::abs(zi))));
    weight_sum += wi;
  }
  if (weight_sum <= 0.0)
    throw std::invalid_argument("weighted_bce_with_logits: empty mask");
  Tensor out = t.push(Matrix(1, 1, total / weight_sum), "weighted_bce_with_logits");
  t.record([zi_id = logits.id, oi = out.id, labels, mask, pos_weight, weight_sum](
               Tape& tp, Tape::Adjoints& adj) {
    if (!adj.has(oi)) return;
    const double g = adj.at(oi)(0, 0);
    const Matrix& z2 = tp.value(zi_id);
    Matrix& gz = adj.accum_slot(zi_id, z2.rows(), 1);
    for (int i = 0; i < z2.rows(); ++i) {
      if (!mask[static_cast<std::size_t>(i)]) continue;
      const double yi = labels[static_cast<std::size_t>(i)];
      const double wi = yi > 0.5 ? pos_weight : 1.0;
      gz(i, 0) += g * wi * (detail::sigmoid_scalar(z2(i, 0)) - yi) / weight_sum;
    }
  });
  return out;
}

}  // namespace gnnbench
