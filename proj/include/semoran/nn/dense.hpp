#pragma once

#include "semoran/nn/types.hpp"

#include <cmath>
#include <random>
#include <string>

namespace semoran {

enum class Activation : std::uint8_t { identity = 0, relu = 1, tanh = 2 };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

/// Applies the activation elementwise, in place.
template <typename Derived>
void apply_activation(Activation act, Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  switch (act) {
    case Activation::identity: break;
    case Activation::relu: z = z.cwiseMax(Scalar(0)); break;
    case Activation::tanh: z = z.array().tanh().matrix(); break;
  }
}

/// Multiplies `grad` by the activation derivative, expressed through the
/// activation output `y` (relu' = [y > 0], tanh' = 1 - y^2).
template <typename Derived, typename OutDerived>
void scale_by_activation_derivative(Activation act, const Eigen::MatrixBase<OutDerived>& y,
                                    Eigen::MatrixBase<Derived>& grad) {
  using Scalar = typename Derived::Scalar;
  switch (act) {
    case Activation::identity: break;
    case Activation::relu:
      grad = (y.array() > Scalar(0)).select(grad, Scalar(0));
      break;
    case Activation::tanh:
      grad = (grad.array() * (Scalar(1) - y.array().square())).matrix();
      break;
  }
}

template <typename Scalar>
struct DenseLayer {
  Matrix<Scalar> weights;  // [out, in]
  Vector<Scalar> bias;     // [out]
  Activation activation = Activation::identity;

  Index in_width() const { return weights.cols(); }
  Index out_width() const { return weights.rows(); }

  void check() const {
    if (bias.size() != weights.rows())
      throw ShapeError("dense layer bias has " + std::to_string(bias.size()) +
                       " entries for " + std::to_string(weights.rows()) + " outputs");
  }

  template <typename Other>
  DenseLayer<Other> cast() const {
    return {weights.template cast<Other>(), bias.template cast<Other>(), activation};
  }

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.activation == b.activation && a.weights.rows() == b.weights.rows() &&
           a.weights.cols() == b.weights.cols() && a.weights == b.weights && a.bias == b.bias;
  }
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero bias.
template <typename Scalar, typename Rng>
DenseLayer<Scalar> glorot_layer(Index in, Index out, Activation act, Rng& rng) {
  if (in <= 0 || out <= 0) throw ShapeError("dense layer widths must be positive");
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer<Scalar> layer{Matrix<Scalar>(out, in), Vector<Scalar>::Zero(out), act};
  // Row-major fill order so the draw sequence matches the checkpoint layout.
  for (Index r = 0; r < out; ++r)
    for (Index c = 0; c < in; ++c) layer.weights(r, c) = static_cast<Scalar>(dist(rng));
  return layer;
}

/// y = activation(W x + b) for a batch whose columns are samples.
template <typename Scalar, typename Derived>
Matrix<Scalar> dense_forward(const DenseLayer<Scalar>& layer, const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != layer.in_width())
    throw ShapeError("dense_forward: input has " + std::to_string(x.rows()) +
                     " rows, layer expects " + std::to_string(layer.in_width()));
  Matrix<Scalar> y(layer.out_width(), x.cols());
  y.noalias() = layer.weights * x;
  y.colwise() += layer.bias;
  apply_activation(layer.activation, y);
  return y;
}

}  // namespace semoran
