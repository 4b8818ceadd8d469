#pragma once

#include "semoran/nn/dense.hpp"

#include <stdexcept>
#include <vector>

namespace semoran {

/// Records the per-layer inputs and outputs of one forward pass so that a
/// single backward pass can compute exact gradients.
template <typename Scalar>
class GradientTape {
 public:
  bool armed() const { return armed_; }

 private:
  template <typename>
  friend class DenseStack;

  std::vector<Matrix<Scalar>> inputs_;
  std::vector<Matrix<Scalar>> outputs_;
  bool armed_ = false;
};

template <typename Scalar>
struct StackGradients {
  std::vector<Matrix<Scalar>> weights;
  std::vector<Vector<Scalar>> bias;
  Matrix<Scalar> input;
};

/// Feed-forward chain of dense layers.
template <typename Scalar>
class DenseStack {
 public:
  DenseStack() = default;
  explicit DenseStack(std::vector<DenseLayer<Scalar>> layers) : layers_(std::move(layers)) {
    check();
  }

  /// Builds a stack with the given widths (input first, output last). Hidden
  /// layers use `hidden_act`, the final layer uses `output_act`.
  template <typename Rng>
  static DenseStack glorot(const std::vector<Index>& widths, Activation hidden_act,
                           Activation output_act, Rng& rng) {
    if (widths.size() < 2) throw ShapeError("a dense stack needs at least two widths");
    std::vector<DenseLayer<Scalar>> layers;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      const bool last = i + 2 == widths.size();
      layers.push_back(glorot_layer<Scalar>(widths[i], widths[i + 1],
                                            last ? output_act : hidden_act, rng));
    }
    return DenseStack(std::move(layers));
  }

  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }
  std::vector<DenseLayer<Scalar>>& layers() { return layers_; }
  bool empty() const { return layers_.empty(); }
  Index in_width() const { return layers_.front().in_width(); }
  Index out_width() const { return layers_.back().out_width(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
  }

  void check() const {
    if (layers_.empty()) throw ShapeError("dense stack has no layers");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      layers_[i].check();
      if (i > 0 && layers_[i].in_width() != layers_[i - 1].out_width())
        throw ShapeError("dense stack layer " + std::to_string(i) + " expects width " +
                         std::to_string(layers_[i].in_width()) + " but receives " +
                         std::to_string(layers_[i - 1].out_width()));
    }
  }

  template <typename Derived>
  Matrix<Scalar> forward(const Eigen::MatrixBase<Derived>& x) const {
    Matrix<Scalar> h = dense_forward(layers_.front(), x);
    for (std::size_t i = 1; i < layers_.size(); ++i) h = dense_forward(layers_[i], h);
    return h;
  }

  template <typename Derived>
  Matrix<Scalar> forward(const Eigen::MatrixBase<Derived>& x, GradientTape<Scalar>& tape) const {
    tape.inputs_.clear();
    tape.outputs_.clear();
    Matrix<Scalar> h = x;
    for (const auto& layer : layers_) {
      Matrix<Scalar> y = dense_forward(layer, h);
      tape.inputs_.push_back(std::move(h));
      tape.outputs_.push_back(y);
      h = std::move(y);
    }
    tape.armed_ = true;
    return h;
  }

  /// Backpropagates dLoss/dOutput through the recorded pass. The tape is
  /// consumed; calling backward twice without a new forward throws.
  template <typename Derived>
  StackGradients<Scalar> backward(GradientTape<Scalar>& tape,
                                  const Eigen::MatrixBase<Derived>& loss_grad) const {
    if (!tape.armed_) throw std::logic_error("backward called without a recorded forward pass");
    if (tape.outputs_.size() != layers_.size())
      throw std::logic_error("gradient tape was recorded on a different stack");
    const auto& top = tape.outputs_.back();
    if (loss_grad.rows() != top.rows() || loss_grad.cols() != top.cols())
      throw ShapeError("backward: loss gradient shape does not match the stack output");

    StackGradients<Scalar> g;
    g.weights.resize(layers_.size());
    g.bias.resize(layers_.size());
    Matrix<Scalar> delta = loss_grad;
    for (std::size_t k = layers_.size(); k-- > 0;) {
      scale_by_activation_derivative(layers_[k].activation, tape.outputs_[k], delta);
      g.weights[k].noalias() = delta * tape.inputs_[k].transpose();
      g.bias[k] = delta.rowwise().sum();
      Matrix<Scalar> next(layers_[k].in_width(), delta.cols());
      next.noalias() = layers_[k].weights.transpose() * delta;
      delta = std::move(next);
    }
    g.input = std::move(delta);
    tape.armed_ = false;
    tape.inputs_.clear();
    tape.outputs_.clear();
    return g;
  }

  template <typename Other>
  DenseStack<Other> cast() const {
    std::vector<DenseLayer<Other>> out;
    for (const auto& l : layers_) out.push_back(l.template cast<Other>());
    return DenseStack<Other>(std::move(out));
  }

  friend bool operator==(const DenseStack& a, const DenseStack& b) { return a.layers_ == b.layers_; }

 private:
  std::vector<DenseLayer<Scalar>> layers_;
};

}  // namespace semoran
