#pragma once

// Finite-difference checks of every differentiable block in double precision.
// Each function returns the largest relative error found.

#include <string>
#include <utility>
#include <vector>

#include "plansum/nn/grad_check.hpp"
#include "plansum/nn/layers.hpp"
#include "plansum/rng.hpp"
#include "plansum/selector_net.hpp"

namespace gradcheck {

using plansum::Rng;
using namespace plansum::nn;

inline constexpr double kEps = 1e-5;

inline Mat<double> random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Mat<double> m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

// Weighted sum with fixed random weights so every output coordinate matters.
inline Var<double> weighted_sum(Tape<double>& tape, Var<double> x, std::uint64_t seed) {
  Rng rng(seed);
  return sum(mul(x, tape.constant(random_mat(rng, x.rows(), x.cols()))));
}

inline double linear() {
  Rng rng(1);
  ParamStore<double> store;
  const Linear<double> lin(store, "lin", 5, 3, rng);
  const auto x = random_mat(rng, 2, 5);
  auto block = [&](Tape<double>& t, Var<double> in) { return weighted_sum(t, lin(t, in), 11); };
  double worst = grad_check(block, x, kEps);
  worst = std::max(worst, grad_check_params([&](Tape<double>& t) { return block(t, t.constant(x)); }, store, kEps));
  return worst;
}

inline double softmax_dot() {
  Rng rng(2);
  const auto v = random_mat(rng, 6, 1);
  auto block = [&](Tape<double>& t, Var<double> in) { return matmul(softmax_rows(in), t.constant(v)); };
  return grad_check(block, random_mat(rng, 1, 6), kEps);
}

inline double lstm_cell() {
  Rng rng(3);
  ParamStore<double> store;
  const LstmLayer<double> cell(store, "cell", 4, 3, rng);
  const auto x = random_mat(rng, 1, 4);
  const auto h0 = random_mat(rng, 1, 3, 0.5);
  const auto c0 = random_mat(rng, 1, 3, 0.5);
  auto block = [&](Tape<double>& t, Var<double> in) {
    auto [h, c] = cell.cell(t, in, t.constant(h0), t.constant(c0));
    return add(weighted_sum(t, h, 12), weighted_sum(t, c, 13));
  };
  double worst = grad_check(block, x, kEps);
  worst = std::max(worst, grad_check_params([&](Tape<double>& t) { return block(t, t.constant(x)); }, store, kEps));
  return worst;
}

inline double bilstm() {
  Rng rng(4);
  ParamStore<double> store;
  const BiLstm<double> net(store, "bi", 3, 2, 2, rng);
  const auto x = random_mat(rng, 4, 3);
  auto block = [&](Tape<double>& t, Var<double> in) { return weighted_sum(t, net(t, in), 14); };
  double worst = grad_check(block, x, kEps);
  worst = std::max(worst, grad_check_params([&](Tape<double>& t) { return block(t, t.constant(x)); }, store, kEps));
  return worst;
}

inline double attention() {
  Rng rng(5);
  ParamStore<double> store;
  const MultiHeadAttention<double> mha(store, "mha", 4, 2, rng);
  const auto q = random_mat(rng, 3, 4);
  const auto kv = random_mat(rng, 5, 4);
  auto block = [&](Tape<double>& t, Var<double> in) { return weighted_sum(t, mha(t, in, t.constant(kv)), 15); };
  auto block_kv = [&](Tape<double>& t, Var<double> in) { return weighted_sum(t, mha(t, t.constant(q), in), 15); };
  double worst = std::max(grad_check(block, q, kEps), grad_check(block_kv, kv, kEps));
  worst = std::max(worst, grad_check_params([&](Tape<double>& t) { return block(t, t.constant(q)); }, store, kEps));
  return worst;
}

inline double attention_sublayers() {
  Rng rng(6);
  ParamStore<double> store;
  const AttentionSublayer<double> att(store, "att", 4, 2, rng);
  const FeedForwardSublayer<double> ff(store, "ff", 4, 6, rng);
  const auto x = random_mat(rng, 3, 4);
  const auto memory = random_mat(rng, 2, 4);
  auto block = [&](Tape<double>& t, Var<double> in) {
    return weighted_sum(t, ff(t, att(t, in, t.constant(memory))), 16);
  };
  double worst = grad_check(block, x, kEps);
  worst = std::max(worst, grad_check_params([&](Tape<double>& t) { return block(t, t.constant(x)); }, store, kEps));
  return worst;
}

inline double pooling() {
  Rng rng(7);
  ParamStore<double> store;
  const MultiHeadPool<double> pool(store, "pool", 6, 4, 3, rng);
  const auto x = random_mat(rng, 5, 6);
  auto block = [&](Tape<double>& t, Var<double> in) { return weighted_sum(t, pool(t, in), 17); };
  double worst = grad_check(block, x, kEps);
  worst = std::max(worst, grad_check_params([&](Tape<double>& t) { return block(t, t.constant(x)); }, store, kEps));
  return worst;
}

inline plansum::SelectorConfig tiny_selector_config() {
  plansum::SelectorConfig cfg;
  cfg.embed_dim = 4;
  cfg.heads = 2;
  cfg.ff_dim = 6;
  cfg.local_layers = 1;
  cfg.global_layers = 1;
  cfg.history_layers = 2;
  cfg.dropout = 0.0;
  return cfg;
}

// Score and stop heads over given local/global encodings (no encoders).
inline double policy_heads() {
  Rng rng(8);
  const plansum::SelectorNet<double> net(tiny_selector_config(), 21);
  const auto global = random_mat(rng, 4, 4);
  auto block = [&](Tape<double>& t, Var<double> local) {
    plansum::PolicyState<double> state{local, t.constant(global), {1}, {0, 2, 3}};
    const auto out = net.policy_step(t, state);
    return add(weighted_sum(t, out.log_probs, 18), out.stop_logit);
  };
  return grad_check(block, random_mat(rng, 4, 4), kEps);
}

// log pi of a fixed two-step episode that then stops, through every encoder.
inline double policy_log_prob() {
  Rng rng(9);
  plansum::SelectorNet<double> net(tiny_selector_config(), 22);
  std::vector<Mat<double>> sentences;
  for (Eigen::Index len : {3, 1, 4, 2}) sentences.push_back(random_mat(rng, len, 4));
  const std::vector<std::size_t> actions = {2, 0};
  auto loss = [&](Tape<double>& t) {
    const auto local = net.encode_local(t, sentences);
    const auto global = net.encode_global(t, local);
    std::vector<std::size_t> extracted;
    std::vector<std::size_t> remaining = {0, 1, 2, 3};
    Var<double> total = t.constant(Mat<double>::Zero(1, 1));
    for (auto a : actions) {
      const auto out = net.policy_step(t, {local, global, extracted, remaining});
      const auto pos = static_cast<Eigen::Index>(std::find(remaining.begin(), remaining.end(), a) - remaining.begin());
      total = add(total, add(log_sigmoid(scale(out.stop_logit, -1.0)), element(out.log_probs, 0, pos)));
      extracted.push_back(a);
      remaining.erase(remaining.begin() + pos);
    }
    const auto last = net.policy_step(t, {local, global, extracted, remaining});
    return add(total, log_sigmoid(last.stop_logit));
  };
  return grad_check_params(loss, net.params(), kEps, 6);
}

inline std::vector<std::pair<std::string, double>> all_blocks() {
  return {{"linear", linear()},
          {"softmax-dot", softmax_dot()},
          {"lstm-cell", lstm_cell()},
          {"bilstm", bilstm()},
          {"multi-head-attention", attention()},
          {"attention+feed-forward sublayers", attention_sublayers()},
          {"multi-head-pool", pooling()},
          {"score/stop heads", policy_heads()},
          {"policy log-probability", policy_log_prob()}};
}

}  // namespace gradcheck
