#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "plansum/nn/tape.hpp"

namespace plansum::nn {

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moments aligned with a ParamStore's registration order.
template <class T>
struct AdamState {
  AdamHyper hyper;
  std::uint64_t step = 0;
  std::vector<Mat<T>> m;
  std::vector<Mat<T>> v;

  AdamState() = default;
  AdamState(const ParamStore<T>& params, AdamHyper h) : hyper(h) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m.push_back(Mat<T>::Zero(params[i].value.rows(), params[i].value.cols()));
      v.push_back(Mat<T>::Zero(params[i].value.rows(), params[i].value.cols()));
    }
  }
};

/// One bias-corrected Adam update from the gradients held in `params`.
/// Throws before touching anything if a gradient is non-finite.
template <class T>
void adam_step(ParamStore<T>& params, AdamState<T>& state) {
  if (state.m.size() != params.size()) throw Error("optimizer state does not match the parameter set");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].grad.allFinite()) throw Error("non-finite gradient in parameter block " + params[i].name);
    if (state.m[i].rows() != params[i].value.rows() || state.m[i].cols() != params[i].value.cols()) {
      throw Error("optimizer moment shape mismatch for " + params[i].name);
    }
  }
  state.step += 1;
  const auto& h = state.hyper;
  const double t = static_cast<double>(state.step);
  const T c1 = static_cast<T>(1.0 - std::pow(h.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(h.beta2, t));
  const T b1 = static_cast<T>(h.beta1);
  const T b2 = static_cast<T>(h.beta2);
  const T lr = static_cast<T>(h.lr);
  const T eps = static_cast<T>(h.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * p.grad;
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * p.grad.cwiseProduct(p.grad);
    const auto m_hat = (state.m[i] / c1).array();
    const auto v_hat = (state.v[i] / c2).array();
    p.value.array() -= lr * m_hat / (v_hat.sqrt() + eps);
  }
}

}  // namespace plansum::nn
