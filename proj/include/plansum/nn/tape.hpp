#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "plansum/error.hpp"

namespace plansum::nn {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A named trainable array with its accumulated gradient.
template <class T>
struct Parameter {
  std::string name;
  Mat<T> value;
  Mat<T> grad;

  Parameter(std::string n, Mat<T> v) : name(std::move(n)), value(std::move(v)) {
    grad = Mat<T>::Zero(value.rows(), value.cols());
  }
  void zero_grad() { grad.setZero(); }
};

/// Owns parameters in registration order. Pointers handed out stay valid for
/// the lifetime of the store.
template <class T>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  Parameter<T>* add(const std::string& name, Mat<T> value) {
    if (index_.contains(name)) throw Error("duplicate parameter " + name);
    params_.push_back(std::make_unique<Parameter<T>>(name, std::move(value)));
    index_[name] = params_.size() - 1;
    return params_.back().get();
  }

  Parameter<T>* find(const std::string& name) {
    const auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }
  const Parameter<T>* find(const std::string& name) const {
    const auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  std::size_t num_values() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::map<std::string, std::size_t> index_;
};

template <class T>
class Tape;

/// Handle to a node on a tape. Cheap to copy; only valid while the tape lives.
template <class T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Mat<T>& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  T scalar() const { return value()(0, 0); }
};

/// Reverse-mode automatic differentiation over row-major matrices.
template <class T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Mat<T> value) { return push(std::move(value), nullptr); }

  /// Leaf bound to a parameter; gradients flow into `p.grad` on backward().
  Var<T> param(Parameter<T>& p) {
    if (const auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
    const auto v = push(p.value, nullptr);
    nodes_[v.id].param = &p;
    param_nodes_[&p] = v.id;
    return v;
  }

  Var<T> push(Mat<T> value, Backward backward) {
    nodes_.push_back(Node{std::move(value), {}, std::move(backward), nullptr, false});
    return {this, nodes_.size() - 1};
  }

  const Mat<T>& value(std::size_t id) const { return nodes_[id].value; }

  /// Gradient accumulator for node `id`, allocated on first use.
  Mat<T>& grad(std::size_t id) {
    auto& n = nodes_[id];
    if (!n.has_grad) {
      n.grad = Mat<T>::Zero(n.value.rows(), n.value.cols());
      n.has_grad = true;
    }
    return n.grad;
  }
  bool has_grad(std::size_t id) const { return nodes_[id].has_grad; }
  const Mat<T>& grad_of(std::size_t id) const { return nodes_[id].grad; }

  /// Seeds d(out)/d(out) = 1 for a 1x1 output and propagates to every leaf.
  void backward(Var<T> out) {
    if (out.rows() != 1 || out.cols() != 1) throw Error("backward() needs a scalar output");
    grad(out.id)(0, 0) += T(1);
    for (std::size_t i = out.id + 1; i-- > 0;) {
      auto& n = nodes_[i];
      if (!n.has_grad) continue;
      if (n.backward) n.backward(*this, i);
      if (n.param) n.param->grad += n.grad;
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat<T> value;
    Mat<T> grad;
    Backward backward;
    Parameter<T>* param;
    bool has_grad;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<T>*, std::size_t> param_nodes_;
};

template <class T>
const Mat<T>& Var<T>::value() const {
  return tape->value(id);
}

// ---------------------------------------------------------------------------
// Operations. Every op records its own backward closure; closures refer to
// inputs by node id because the node vector may reallocate.

template <class T>
Var<T> matmul(Var<T> a, Var<T> b) {
  if (a.cols() != b.rows()) throw Error("matmul shape mismatch");
  Mat<T> out = a.value() * b.value();
  return a.tape->push(std::move(out), [a = a.id, b = b.id](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    const Mat<T> ga = g * t.value(b).transpose();
    const Mat<T> gb = t.value(a).transpose() * g;
    t.grad(a) += ga;
    t.grad(b) += gb;
  });
}

/// Elementwise sum; `b` may also be a single row broadcast over `a`'s rows.
template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  const bool broadcast = b.rows() == 1 && a.rows() != 1 && b.cols() == a.cols();
  if (!broadcast && (a.rows() != b.rows() || a.cols() != b.cols())) throw Error("add shape mismatch");
  Mat<T> out = a.value();
  if (broadcast) {
    out.rowwise() += b.value().row(0);
  } else {
    out += b.value();
  }
  return a.tape->push(std::move(out), [a = a.id, b = b.id, broadcast](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    t.grad(a) += g;
    if (broadcast) {
      t.grad(b) += g.colwise().sum();
    } else {
      t.grad(b) += g;
    }
  });
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("sub shape mismatch");
  Mat<T> out = a.value() - b.value();
  return a.tape->push(std::move(out), [a = a.id, b = b.id](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    t.grad(a) += g;
    t.grad(b) -= g;
  });
}

template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("mul shape mismatch");
  Mat<T> out = a.value().cwiseProduct(b.value());
  return a.tape->push(std::move(out), [a = a.id, b = b.id](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    const Mat<T> ga = g.cwiseProduct(t.value(b));
    const Mat<T> gb = g.cwiseProduct(t.value(a));
    t.grad(a) += ga;
    t.grad(b) += gb;
  });
}

template <class T>
Var<T> scale(Var<T> a, T s) {
  Mat<T> out = a.value() * s;
  return a.tape->push(std::move(out), [a = a.id, s](Tape<T>& t, std::size_t self) {
    t.grad(a) += t.grad_of(self) * s;
  });
}

/// Multiplies every entry of `a` by the 1x1 variable `s`.
template <class T>
Var<T> scale_by(Var<T> a, Var<T> s) {
  if (s.rows() != 1 || s.cols() != 1) throw Error("scale_by needs a scalar");
  Mat<T> out = a.value() * s.scalar();
  return a.tape->push(std::move(out), [a = a.id, s = s.id](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    const T sv = t.value(s)(0, 0);
    const T gs = g.cwiseProduct(t.value(a)).sum();
    t.grad(a) += g * sv;
    t.grad(s)(0, 0) += gs;
  });
}

namespace detail {

template <class T, class F, class DF>
Var<T> unary(Var<T> a, F f, DF df_from_out_and_in) {
  Mat<T> out = a.value().unaryExpr(f);
  return a.tape->push(std::move(out), [a = a.id, df_from_out_and_in](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    const Mat<T>& y = t.value(self);
    const Mat<T>& x = t.value(a);
    Mat<T> d(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.size(); ++i) d.data()[i] = df_from_out_and_in(y.data()[i], x.data()[i]);
    t.grad(a) += g.cwiseProduct(d);
  });
}

template <class T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace detail

template <class T>
Var<T> sigmoid(Var<T> a) {
  return detail::unary(a, [](T x) { return detail::stable_sigmoid(x); },
                       [](T y, T) { return y * (T(1) - y); });
}

template <class T>
Var<T> tanh(Var<T> a) {
  return detail::unary(a, [](T x) { return std::tanh(x); }, [](T y, T) { return T(1) - y * y; });
}

template <class T>
Var<T> relu(Var<T> a) {
  return detail::unary(a, [](T x) { return x > T(0) ? x : T(0); },
                       [](T, T x) { return x > T(0) ? T(1) : T(0); });
}

template <class T>
Var<T> exp(Var<T> a) {
  return detail::unary(a, [](T x) { return std::exp(x); }, [](T y, T) { return y; });
}

template <class T>
Var<T> log(Var<T> a) {
  return detail::unary(a, [](T x) { return std::log(x); }, [](T, T x) { return T(1) / x; });
}

/// log(sigmoid(x)) without overflow.
template <class T>
Var<T> log_sigmoid(Var<T> a) {
  return detail::unary(
      a, [](T x) { return x >= T(0) ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); },
      [](T, T x) { return T(1) - detail::stable_sigmoid(x); });
}

/// Row-wise softmax. Entries equal to -infinity receive zero probability.
template <class T>
Var<T> softmax_rows(Var<T> a) {
  const Mat<T>& x = a.value();
  Mat<T> y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T m = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - m).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return a.tape->push(std::move(y), [a = a.id](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    const Mat<T>& y = t.value(self);
    Mat<T> gx(y.rows(), y.cols());
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const T dot = g.row(r).dot(y.row(r));
      gx.row(r) = y.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
    }
    t.grad(a) += gx;
  });
}

template <class T>
Var<T> log_softmax_rows(Var<T> a) {
  const Mat<T>& x = a.value();
  Mat<T> y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T m = x.row(r).maxCoeff();
    const T lse = m + std::log((x.row(r).array() - m).exp().sum());
    y.row(r) = (x.row(r).array() - lse).matrix();
  }
  return a.tape->push(std::move(y), [a = a.id](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    const Mat<T>& y = t.value(self);
    Mat<T> gx(y.rows(), y.cols());
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const T gsum = g.row(r).sum();
      gx.row(r) = g.row(r) - (y.row(r).array().exp() * gsum).matrix();
    }
    t.grad(a) += gx;
  });
}

template <class T>
Var<T> transpose(Var<T> a) {
  Mat<T> out = a.value().transpose();
  return a.tape->push(std::move(out), [a = a.id](Tape<T>& t, std::size_t self) {
    t.grad(a) += t.grad_of(self).transpose();
  });
}

template <class T>
Var<T> sum(Var<T> a) {
  Mat<T> out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape->push(std::move(out), [a = a.id](Tape<T>& t, std::size_t self) {
    t.grad(a).array() += t.grad_of(self)(0, 0);
  });
}

/// Column means over rows: (n x d) -> (1 x d).
template <class T>
Var<T> mean_rows(Var<T> a) {
  Mat<T> out = a.value().colwise().mean();
  const T inv = T(1) / static_cast<T>(a.rows());
  return a.tape->push(std::move(out), [a = a.id, inv](Tape<T>& t, std::size_t self) {
    t.grad(a).rowwise() += t.grad_of(self).row(0) * inv;
  });
}

template <class T>
Var<T> element(Var<T> a, Eigen::Index r, Eigen::Index c) {
  Mat<T> out(1, 1);
  out(0, 0) = a.value()(r, c);
  return a.tape->push(std::move(out), [a = a.id, r, c](Tape<T>& t, std::size_t self) {
    t.grad(a)(r, c) += t.grad_of(self)(0, 0);
  });
}

template <class T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw Error("concat_cols of nothing");
  const auto rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw Error("concat_cols row mismatch");
    cols += p.cols();
  }
  Mat<T> out(rows, cols);
  std::vector<std::pair<std::size_t, Eigen::Index>> layout;
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    layout.emplace_back(p.id, c);
    c += p.cols();
  }
  return parts[0].tape->push(std::move(out), [layout](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    for (const auto& [id, offset] : layout) {
      const auto w = t.value(id).cols();
      t.grad(id) += g.middleCols(offset, w);
    }
  });
}

template <class T>
Var<T> concat_cols(std::initializer_list<Var<T>> parts) {
  const std::vector<Var<T>> v(parts);
  return concat_cols<T>(std::span<const Var<T>>(v));
}

template <class T>
Var<T> concat_rows(std::span<const Var<T>> parts) {
  if (parts.empty()) throw Error("concat_rows of nothing");
  const auto cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw Error("concat_rows column mismatch");
    rows += p.rows();
  }
  Mat<T> out(rows, cols);
  std::vector<std::pair<std::size_t, Eigen::Index>> layout;
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    layout.emplace_back(p.id, r);
    r += p.rows();
  }
  return parts[0].tape->push(std::move(out), [layout](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    for (const auto& [id, offset] : layout) {
      const auto h = t.value(id).rows();
      t.grad(id) += g.middleRows(offset, h);
    }
  });
}

template <class T>
Var<T> slice_cols(Var<T> a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || begin + count > a.cols()) throw Error("slice_cols out of range");
  Mat<T> out = a.value().middleCols(begin, count);
  return a.tape->push(std::move(out), [a = a.id, begin, count](Tape<T>& t, std::size_t self) {
    t.grad(a).middleCols(begin, count) += t.grad_of(self);
  });
}

template <class T>
Var<T> slice_rows(Var<T> a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || begin + count > a.rows()) throw Error("slice_rows out of range");
  Mat<T> out = a.value().middleRows(begin, count);
  return a.tape->push(std::move(out), [a = a.id, begin, count](Tape<T>& t, std::size_t self) {
    t.grad(a).middleRows(begin, count) += t.grad_of(self);
  });
}

/// Selects rows by index (repeats allowed).
template <class T>
Var<T> gather_rows(Var<T> a, std::vector<Eigen::Index> idx) {
  Mat<T> out(static_cast<Eigen::Index>(idx.size()), a.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= a.rows()) throw Error("gather_rows index out of range");
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(idx[i]);
  }
  return a.tape->push(std::move(out), [a = a.id, idx = std::move(idx)](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    auto& ga = t.grad(a);
    for (std::size_t i = 0; i < idx.size(); ++i) ga.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

/// Row-wise layer normalization with learned gain and bias (both 1 x d).
template <class T>
Var<T> layer_norm_rows(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-5)) {
  const Mat<T>& xv = x.value();
  const auto n = xv.cols();
  Mat<T> xhat(xv.rows(), n);
  Mat<T> inv_std(xv.rows(), 1);
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const T mu = xv.row(r).mean();
    const T var = (xv.row(r).array() - mu).square().mean();
    inv_std(r, 0) = T(1) / std::sqrt(var + eps);
    xhat.row(r) = ((xv.row(r).array() - mu) * inv_std(r, 0)).matrix();
  }
  Mat<T> out = xhat.array().rowwise() * gain.value().row(0).array();
  out.rowwise() += bias.value().row(0);
  return x.tape->push(std::move(out), [x = x.id, gain = gain.id, bias = bias.id, xhat = std::move(xhat),
                                       inv_std = std::move(inv_std)](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    const Mat<T>& gv = t.value(gain);
    t.grad(gain) += g.cwiseProduct(xhat).colwise().sum();
    t.grad(bias) += g.colwise().sum();
    const auto n = static_cast<T>(g.cols());
    Mat<T> gx(g.rows(), g.cols());
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      const auto dxhat = (g.row(r).array() * gv.row(0).array()).eval();
      const T mean_d = dxhat.sum() / n;
      const T mean_dx = (dxhat * xhat.row(r).array()).sum() / n;
      gx.row(r) = ((dxhat - mean_d - xhat.row(r).array() * mean_dx) * inv_std(r, 0)).matrix();
    }
    t.grad(x) += gx;
  });
}

}  // namespace plansum::nn
