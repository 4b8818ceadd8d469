#pragma once

#include "semoran/nn/stack.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace semoran {

template <typename Scalar>
struct AdamaxHyper {
  Scalar alpha = Scalar(0.002);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);
};

/// Per-tensor Adamax moments. `u` is the exponentially weighted infinity norm.
template <typename Scalar>
struct AdamaxState {
  std::uint64_t step = 0;
  Matrix<Scalar> m;
  Matrix<Scalar> u;
  AdamaxHyper<Scalar> hyper;

  static AdamaxState zeros(Index rows, Index cols, AdamaxHyper<Scalar> hyper = {}) {
    return {0, Matrix<Scalar>::Zero(rows, cols), Matrix<Scalar>::Zero(rows, cols), hyper};
  }
};

/// One Adamax update, in place:
///   m <- b1 m + (1 - b1) g
///   u <- max(b2 u, |g|)
///   p <- p - alpha / (1 - b1^t) * m / (u + eps)
/// A non-finite gradient leaves both parameters and state untouched.
template <typename Scalar, typename PDerived, typename GDerived>
void adamax_step(Eigen::MatrixBase<PDerived>& params, const Eigen::MatrixBase<GDerived>& grads,
                 AdamaxState<Scalar>& state) {
  if (params.rows() != grads.rows() || params.cols() != grads.cols() ||
      state.m.rows() != params.rows() || state.m.cols() != params.cols() ||
      state.u.rows() != params.rows() || state.u.cols() != params.cols())
    throw ShapeError("adamax_step: parameter, gradient and state shapes differ");
  if (!grads.allFinite()) throw NumericError("adamax_step: non-finite gradient");

  const auto& h = state.hyper;
  state.step += 1;
  state.m = h.beta1 * state.m + (Scalar(1) - h.beta1) * grads;
  state.u = (h.beta2 * state.u).cwiseMax(grads.cwiseAbs());
  const Scalar lr = h.alpha / (Scalar(1) - std::pow(h.beta1, static_cast<Scalar>(state.step)));
  const auto denom = (state.u.array() + h.epsilon);
  // u == 0 implies every gradient so far was 0, hence m == 0 too.
  params -= (denom > Scalar(0)).select(lr * state.m.array() / denom, Scalar(0)).matrix();
}

/// Adamax over every tensor of a dense stack, one state per weight and bias.
template <typename Scalar>
class StackAdamax {
 public:
  StackAdamax() = default;
  StackAdamax(const DenseStack<Scalar>& stack, AdamaxHyper<Scalar> hyper) {
    for (const auto& l : stack.layers()) {
      weights_.push_back(AdamaxState<Scalar>::zeros(l.weights.rows(), l.weights.cols(), hyper));
      bias_.push_back(AdamaxState<Scalar>::zeros(l.bias.rows(), 1, hyper));
    }
  }

  void step(DenseStack<Scalar>& stack, const StackGradients<Scalar>& g) {
    auto& layers = stack.layers();
    if (layers.size() != weights_.size() || g.weights.size() != layers.size())
      throw ShapeError("optimizer state does not match the stack");
    for (const auto& w : g.weights)
      if (!w.allFinite()) throw NumericError("non-finite weight gradient");
    for (const auto& b : g.bias)
      if (!b.allFinite()) throw NumericError("non-finite bias gradient");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      adamax_step(layers[i].weights, g.weights[i], weights_[i]);
      adamax_step(layers[i].bias, g.bias[i], bias_[i]);
    }
  }

 private:
  std::vector<AdamaxState<Scalar>> weights_;
  std::vector<AdamaxState<Scalar>> bias_;
};

}  // namespace semoran
