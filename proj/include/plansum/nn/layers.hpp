#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "plansum/nn/tape.hpp"
#include "plansum/rng.hpp"

namespace plansum::nn {

/// Per-forward-pass settings. Dropout is only applied when `training` is set.
template <class T>
struct Context {
  bool training = false;
  T dropout = T(0);
  Rng* rng = nullptr;
};

template <class T>
Mat<T> xavier(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat<T> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
  return m;
}

/// Inverted dropout with a fresh mask from the context's generator.
template <class T>
Var<T> dropout(Var<T> x, const Context<T>& ctx) {
  if (!ctx.training || ctx.dropout <= T(0) || ctx.rng == nullptr) return x;
  const T keep = T(1) - ctx.dropout;
  Mat<T> mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = ctx.rng->uniform() < keep ? T(1) / keep : T(0);
  return mul(x, x.tape->constant(std::move(mask)));
}

/// x * row, with the 1 x d `row` broadcast over x's rows.
template <class T>
Var<T> mul_row(Var<T> x, Var<T> row) {
  if (row.rows() != 1 || row.cols() != x.cols()) throw Error("mul_row shape mismatch");
  Mat<T> out = x.value().array().rowwise() * row.value().row(0).array();
  return x.tape->push(std::move(out), [x = x.id, row = row.id](Tape<T>& t, std::size_t self) {
    const Mat<T>& g = t.grad_of(self);
    const Mat<T> gx = g.array().rowwise() * t.value(row).row(0).array();
    const Mat<T> grow = g.cwiseProduct(t.value(x)).colwise().sum();
    t.grad(x) += gx;
    t.grad(row) += grow;
  });
}

template <class T>
struct Linear {
  Parameter<T>* weight = nullptr;  // in x out
  Parameter<T>* bias = nullptr;    // 1 x out

  Linear() = default;
  Linear(ParamStore<T>& store, const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng)
      : weight(store.add(name + ".weight", xavier<T>(rng, in, out))),
        bias(store.add(name + ".bias", Mat<T>::Zero(1, out))) {}

  Eigen::Index in_dim() const { return weight->value.rows(); }
  Eigen::Index out_dim() const { return weight->value.cols(); }

  Var<T> operator()(Tape<T>& tape, Var<T> x) const {
    return add(matmul(x, tape.param(*weight)), tape.param(*bias));
  }
};

template <class T>
struct LayerNorm {
  Parameter<T>* gain = nullptr;
  Parameter<T>* bias = nullptr;

  LayerNorm() = default;
  LayerNorm(ParamStore<T>& store, const std::string& name, Eigen::Index dim)
      : gain(store.add(name + ".gain", Mat<T>::Ones(1, dim))),
        bias(store.add(name + ".bias", Mat<T>::Zero(1, dim))) {}

  Var<T> operator()(Tape<T>& tape, Var<T> x) const {
    return layer_norm_rows(x, tape.param(*gain), tape.param(*bias));
  }
};

/// Unidirectional LSTM with gate order (input, forget, cell, output).
template <class T>
struct LstmLayer {
  Parameter<T>* input_weight = nullptr;      // in x 4h
  Parameter<T>* recurrent_weight = nullptr;  // h x 4h
  Parameter<T>* bias = nullptr;              // 1 x 4h

  LstmLayer() = default;
  LstmLayer(ParamStore<T>& store, const std::string& name, Eigen::Index in, Eigen::Index hidden, Rng& rng)
      : input_weight(store.add(name + ".input_weight", xavier<T>(rng, in, 4 * hidden))),
        recurrent_weight(store.add(name + ".recurrent_weight", xavier<T>(rng, hidden, 4 * hidden))),
        bias(store.add(name + ".bias", Mat<T>::Zero(1, 4 * hidden))) {}

  Eigen::Index hidden() const { return recurrent_weight->value.rows(); }
  Eigen::Index in_dim() const { return input_weight->value.rows(); }

  /// One step from precomputed input projection `xw` (B x 4h).
  std::pair<Var<T>, Var<T>> step(Tape<T>& tape, Var<T> xw, Var<T> h, Var<T> c) const {
    const auto hd = hidden();
    const auto gates = add(add(xw, matmul(h, tape.param(*recurrent_weight))), tape.param(*bias));
    const auto i = sigmoid(slice_cols(gates, 0, hd));
    const auto f = sigmoid(slice_cols(gates, hd, hd));
    const auto g = tanh(slice_cols(gates, 2 * hd, hd));
    const auto o = sigmoid(slice_cols(gates, 3 * hd, hd));
    const auto c_next = add(mul(f, c), mul(i, g));
    const auto h_next = mul(o, tanh(c_next));
    return {h_next, c_next};
  }

  /// A full cell application: x (B x in), h and c (B x hidden).
  std::pair<Var<T>, Var<T>> cell(Tape<T>& tape, Var<T> x, Var<T> h, Var<T> c) const {
    return step(tape, matmul(x, tape.param(*input_weight)), h, c);
  }

  /// Runs over `steps` (each B x in). Row b is active while t < lengths[b];
  /// inactive rows carry their state through unchanged. Returns hidden states.
  std::vector<Var<T>> run(Tape<T>& tape, const std::vector<Var<T>>& steps,
                          const std::vector<std::size_t>& lengths, bool reverse) const {
    const auto n_steps = steps.size();
    const auto batch = steps.front().rows();
    const auto hd = hidden();
    const auto all = concat_rows<T>(std::span<const Var<T>>(steps));
    const auto projected = matmul(all, tape.param(*input_weight));

    bool ragged = false;
    for (auto len : lengths) ragged |= len != n_steps;

    auto h = tape.constant(Mat<T>::Zero(batch, hd));
    auto c = tape.constant(Mat<T>::Zero(batch, hd));
    std::vector<Var<T>> out(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
      const std::size_t t = reverse ? n_steps - 1 - k : k;
      const auto xw = slice_rows(projected, static_cast<Eigen::Index>(t) * batch, batch);
      auto [h_new, c_new] = step(tape, xw, h, c);
      if (ragged) {
        Mat<T> keep(batch, hd);
        for (Eigen::Index b = 0; b < batch; ++b) keep.row(b).setConstant(t < lengths[b] ? T(1) : T(0));
        const auto on = tape.constant(keep);
        const auto off = tape.constant(Mat<T>::Ones(batch, hd) - keep);
        h_new = add(mul(on, h_new), mul(off, h));
        c_new = add(mul(on, c_new), mul(off, c));
      }
      h = h_new;
      c = c_new;
      out[t] = h;
    }
    return out;
  }
};

/// Stacked bidirectional LSTM; each position's output is [forward ; backward].
template <class T>
struct BiLstm {
  std::vector<LstmLayer<T>> forward_layers;
  std::vector<LstmLayer<T>> backward_layers;

  BiLstm() = default;
  BiLstm(ParamStore<T>& store, const std::string& name, Eigen::Index in, Eigen::Index hidden,
         std::size_t layers, Rng& rng) {
    for (std::size_t l = 0; l < layers; ++l) {
      const auto layer_in = l == 0 ? in : 2 * hidden;
      const auto prefix = name + ".layer" + std::to_string(l);
      forward_layers.emplace_back(store, prefix + ".fwd", layer_in, hidden, rng);
      backward_layers.emplace_back(store, prefix + ".bwd", layer_in, hidden, rng);
    }
  }

  Eigen::Index out_dim() const { return 2 * forward_layers.front().hidden(); }
  Eigen::Index in_dim() const { return forward_layers.front().in_dim(); }

  /// Batched form: steps[t] is (B x in); returns steps[t] as (B x 2h).
  std::vector<Var<T>> run(Tape<T>& tape, std::vector<Var<T>> steps, const std::vector<std::size_t>& lengths) const {
    if (steps.empty()) throw Error("BiLSTM needs a nonempty sequence");
    if (steps.front().cols() != in_dim()) {
      throw Error("BiLSTM input has " + std::to_string(steps.front().cols()) + " features, expected " +
                  std::to_string(in_dim()));
    }
    for (std::size_t l = 0; l < forward_layers.size(); ++l) {
      const auto fwd = forward_layers[l].run(tape, steps, lengths, false);
      const auto bwd = backward_layers[l].run(tape, steps, lengths, true);
      for (std::size_t t = 0; t < steps.size(); ++t) steps[t] = concat_cols<T>({fwd[t], bwd[t]});
    }
    return steps;
  }

  /// Single sequence (n x in) -> (n x 2h).
  Var<T> operator()(Tape<T>& tape, Var<T> sequence) const {
    std::vector<Var<T>> steps;
    for (Eigen::Index t = 0; t < sequence.rows(); ++t) steps.push_back(slice_rows(sequence, t, 1));
    const auto out = run(tape, std::move(steps), {static_cast<std::size_t>(sequence.rows())});
    return concat_rows<T>(std::span<const Var<T>>(out));
  }
};

/// Multi-head attentive pooling: each head scores positions with a learned
/// vector over its slice of the features, softmax-normalizes over positions
/// and takes the weighted sum of that slice; heads are concatenated and
/// linearly projected.
template <class T>
struct MultiHeadPool {
  Parameter<T>* scorer = nullptr;  // 1 x in, head h uses its slice
  Linear<T> projection;
  std::size_t heads = 1;

  MultiHeadPool() = default;
  MultiHeadPool(ParamStore<T>& store, const std::string& name, Eigen::Index in, Eigen::Index out,
                std::size_t n_heads, Rng& rng)
      : scorer(store.add(name + ".scorer", xavier<T>(rng, 1, in))),
        projection(store, name + ".proj", in, out, rng),
        heads(n_heads) {
    if (in % static_cast<Eigen::Index>(n_heads) != 0) throw Error("pool width must be divisible by heads");
  }

  Eigen::Index in_dim() const { return scorer->value.cols(); }
  Eigen::Index head_dim() const { return in_dim() / static_cast<Eigen::Index>(heads); }

  /// Per-head weights over positions (heads x n).
  Var<T> weights(Tape<T>& tape, Var<T> x) const {
    const auto d = in_dim();
    const auto hd = head_dim();
    const auto h = static_cast<Eigen::Index>(heads);
    Mat<T> selector = Mat<T>::Zero(d, h);
    for (Eigen::Index j = 0; j < d; ++j) selector(j, j / hd) = T(1);
    const auto logits = matmul(mul_row(x, tape.param(*scorer)), tape.constant(selector));  // n x heads
    return softmax_rows(transpose(logits));
  }

  /// Pooled (1 x in) vector before the projection.
  Var<T> pool(Tape<T>& tape, Var<T> x) const {
    const auto d = in_dim();
    const auto hd = head_dim();
    const auto h = static_cast<Eigen::Index>(heads);
    const auto mixed = matmul(weights(tape, x), x);  // heads x d
    Mat<T> block = Mat<T>::Zero(h, d);
    for (Eigen::Index j = 0; j < d; ++j) block(j / hd, j) = T(1);
    const auto diag = mul(mixed, tape.constant(block));
    return matmul(tape.constant(Mat<T>::Ones(1, h)), diag);
  }

  Var<T> operator()(Tape<T>& tape, Var<T> x) const { return projection(tape, pool(tape, x)); }
};

/// Scaled dot-product attention with per-head slices and an output
/// projection. Returns the pre-residual output.
template <class T>
struct MultiHeadAttention {
  Linear<T> query;
  Linear<T> key;
  Linear<T> value;
  Linear<T> output;
  std::size_t heads = 1;

  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore<T>& store, const std::string& name, Eigen::Index dim, std::size_t n_heads,
                     Rng& rng)
      : query(store, name + ".query", dim, dim, rng),
        key(store, name + ".key", dim, dim, rng),
        value(store, name + ".value", dim, dim, rng),
        output(store, name + ".output", dim, dim, rng),
        heads(n_heads) {
    if (dim % static_cast<Eigen::Index>(n_heads) != 0) throw Error("attention width must be divisible by heads");
  }

  Var<T> operator()(Tape<T>& tape, Var<T> queries, Var<T> keys_values, const Context<T>& ctx = {}) const {
    if (keys_values.rows() == 0) throw Error("attention over an empty key set");
    const auto q = query(tape, queries);
    const auto k = key(tape, keys_values);
    const auto v = value(tape, keys_values);
    const auto hd = q.cols() / static_cast<Eigen::Index>(heads);
    const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(hd));
    std::vector<Var<T>> per_head;
    per_head.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
      const auto off = static_cast<Eigen::Index>(h) * hd;
      const auto scores = scale(matmul(slice_cols(q, off, hd), transpose(slice_cols(k, off, hd))), inv_sqrt);
      const auto attn = dropout(softmax_rows(scores), ctx);
      per_head.push_back(matmul(attn, slice_cols(v, off, hd)));
    }
    return output(tape, concat_cols<T>(std::span<const Var<T>>(per_head)));
  }
};

/// LayerNorm(x + Dropout(Attention(x, memory))).
template <class T>
struct AttentionSublayer {
  MultiHeadAttention<T> attention;
  LayerNorm<T> norm;

  AttentionSublayer() = default;
  AttentionSublayer(ParamStore<T>& store, const std::string& name, Eigen::Index dim, std::size_t heads, Rng& rng)
      : attention(store, name + ".attn", dim, heads, rng), norm(store, name + ".norm", dim) {}

  Var<T> operator()(Tape<T>& tape, Var<T> x, Var<T> memory, const Context<T>& ctx = {}) const {
    return norm(tape, add(x, dropout(attention(tape, x, memory, ctx), ctx)));
  }
};

/// LayerNorm(x + Dropout(W2 relu(W1 x))).
template <class T>
struct FeedForwardSublayer {
  Linear<T> inner;
  Linear<T> outer;
  LayerNorm<T> norm;

  FeedForwardSublayer() = default;
  FeedForwardSublayer(ParamStore<T>& store, const std::string& name, Eigen::Index dim, Eigen::Index ff, Rng& rng)
      : inner(store, name + ".inner", dim, ff, rng),
        outer(store, name + ".outer", ff, dim, rng),
        norm(store, name + ".norm", dim) {}

  Var<T> operator()(Tape<T>& tape, Var<T> x, const Context<T>& ctx = {}) const {
    const auto hidden = relu(inner(tape, x));
    return norm(tape, add(x, dropout(outer(tape, hidden), ctx)));
  }
};

}  // namespace plansum::nn
