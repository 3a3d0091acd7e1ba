#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "plansum/nn/tape.hpp"

namespace plansum::nn {

// The 1e-6 floor keeps exactly-zero gradients (e.g. an attention key bias,
// which softmax cancels) from turning central-difference roundoff into a
// large relative error.
inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

/// Central-difference check of d(block)/d(input). `block` maps the input leaf
/// to a 1x1 output. Returns the largest per-coordinate relative error.
inline double grad_check(const std::function<Var<double>(Tape<double>&, Var<double>)>& block,
                         const Mat<double>& input, double eps) {
  if (!(eps > 0.0)) throw Error("grad_check eps must be positive");
  Tape<double> tape;
  const auto x = tape.constant(input);
  const auto out = block(tape, x);
  if (!std::isfinite(out.scalar())) throw Error("grad_check: non-finite output");
  tape.backward(out);
  const Mat<double> analytic = tape.has_grad(x.id) ? tape.grad_of(x.id) : Mat<double>::Zero(input.rows(), input.cols());

  auto eval = [&](const Mat<double>& at) {
    Tape<double> t;
    const double v = block(t, t.constant(at)).scalar();
    if (!std::isfinite(v)) throw Error("grad_check: non-finite output under perturbation");
    return v;
  };
  double worst = 0.0;
  Mat<double> probe = input;
  for (Eigen::Index i = 0; i < input.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + eps;
    const double up = eval(probe);
    probe.data()[i] = orig - eps;
    const double down = eval(probe);
    probe.data()[i] = orig;
    worst = std::max(worst, relative_error(analytic.data()[i], (up - down) / (2.0 * eps)));
  }
  return worst;
}

/// Same check against every parameter in `params`. `loss` builds the scalar
/// on a fresh tape. When `max_per_block` > 0 only that many evenly spaced
/// coordinates per block are probed.
inline double grad_check_params(const std::function<Var<double>(Tape<double>&)>& loss,
                                ParamStore<double>& params, double eps, Eigen::Index max_per_block = 0) {
  params.zero_grad();
  {
    Tape<double> tape;
    const auto out = loss(tape);
    if (!std::isfinite(out.scalar())) throw Error("grad_check: non-finite output");
    tape.backward(out);
  }
  double worst = 0.0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& p = params[b];
    const Mat<double> analytic = p.grad;
    const Eigen::Index n = p.value.size();
    const Eigen::Index stride = max_per_block > 0 && n > max_per_block ? n / max_per_block : 1;
    for (Eigen::Index i = 0; i < n; i += stride) {
      const double orig = p.value.data()[i];
      p.value.data()[i] = orig + eps;
      double up;
      {
        Tape<double> t;
        up = loss(t).scalar();
      }
      p.value.data()[i] = orig - eps;
      double down;
      {
        Tape<double> t;
        down = loss(t).scalar();
      }
      p.value.data()[i] = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) throw Error("grad_check: non-finite output under perturbation");
      worst = std::max(worst, relative_error(analytic.data()[i], (up - down) / (2.0 * eps)));
    }
  }
  params.zero_grad();
  return worst;
}

}  // namespace plansum::nn
