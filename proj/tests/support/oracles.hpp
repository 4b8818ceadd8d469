#pragma once
// Independent reference computations shared by the unit and acceptance suites.

#include "semoran/codec/elbo.hpp"
#include "semoran/nn/finite_difference.hpp"
#include "semoran/nn/stack.hpp"
#include "semoran/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using semoran::Index;
using semoran::Matrix;
using semoran::Vector;
using Stack = semoran::DenseStack<double>;

inline Vector<double> flatten(const Stack& s) {
  std::vector<double> v;
  for (const auto& l : s.layers()) {
    for (Index r = 0; r < l.weights.rows(); ++r)
      for (Index c = 0; c < l.weights.cols(); ++c) v.push_back(l.weights(r, c));
    for (Index r = 0; r < l.bias.size(); ++r) v.push_back(l.bias(r));
  }
  return Eigen::Map<Vector<double>>(v.data(), static_cast<Index>(v.size()));
}

inline void assign(Stack& s, const Vector<double>& v) {
  Index k = 0;
  for (auto& l : s.layers()) {
    for (Index r = 0; r < l.weights.rows(); ++r)
      for (Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = v(k++);
    for (Index r = 0; r < l.bias.size(); ++r) l.bias(r) = v(k++);
  }
}

inline Vector<double> flatten(const semoran::StackGradients<double>& g) {
  std::vector<double> v;
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    for (Index r = 0; r < g.weights[i].rows(); ++r)
      for (Index c = 0; c < g.weights[i].cols(); ++c) v.push_back(g.weights[i](r, c));
    for (Index r = 0; r < g.bias[i].size(); ++r) v.push_back(g.bias[i](r));
  }
  return Eigen::Map<Vector<double>>(v.data(), static_cast<Index>(v.size()));
}

/// ||a - n|| / (||a|| + ||n||), zero when both vanish.
inline double relative_error(const Vector<double>& a, const Vector<double>& n) {
  const double denom = a.norm() + n.norm();
  return denom == 0 ? 0.0 : (a - n).norm() / denom;
}

inline semoran::Activation random_activation(semoran::Rng& rng) {
  return static_cast<semoran::Activation>(rng() % 3);
}

inline Stack random_stack(semoran::Rng& rng, Index in, Index out, int hidden_layers) {
  std::vector<Index> widths{in};
  for (int i = 0; i < hidden_layers; ++i) widths.push_back(1 + static_cast<Index>(rng() % 8));
  widths.push_back(out);
  Stack s = Stack::glorot(widths, random_activation(rng), random_activation(rng), rng);
  std::normal_distribution<double> n(0.0, 0.3);
  for (auto& l : s.layers())
    for (Index i = 0; i < l.bias.size(); ++i) l.bias(i) = n(rng);
  return s;
}

inline Matrix<double> random_matrix(semoran::Rng& rng, Index r, Index c, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Matrix<double> m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

struct GradCheck {
  double params = 0;
  double input = 0;
  double worst() const { return std::max(params, input); }
};

/// Dense stack with the scalar loss sum(weighting .* forward(x)).
inline GradCheck check_stack(std::uint64_t seed) {
  semoran::Rng rng(seed);
  const Index in = 1 + static_cast<Index>(rng() % 8), out = 1 + static_cast<Index>(rng() % 8);
  const Index batch = 1 + static_cast<Index>(rng() % 4);
  Stack s = random_stack(rng, in, out, static_cast<int>(rng() % 3));
  const Matrix<double> x = random_matrix(rng, in, batch);
  const Matrix<double> w = random_matrix(rng, out, batch);

  semoran::GradientTape<double> tape;
  s.forward(x, tape);
  const auto g = s.backward(tape, w);

  const Vector<double> theta = flatten(s);
  auto loss_params = [&](const Vector<double>& p) {
    Stack t = s;
    assign(t, p);
    return t.forward(x).cwiseProduct(w).sum();
  };
  auto loss_input = [&](const Vector<double>& v) {
    const Matrix<double> xi = Eigen::Map<const Matrix<double>>(v.data(), in, batch);
    return s.forward(xi).cwiseProduct(w).sum();
  };
  const Vector<double> x_flat = Eigen::Map<const Vector<double>>(x.data(), x.size());
  const Vector<double> gi = Eigen::Map<const Vector<double>>(g.input.data(), g.input.size());
  GradCheck r;
  r.params = relative_error(flatten(g), semoran::finite_difference_grad<double>(loss_params, theta, 1e-6));
  r.input = relative_error(gi, semoran::finite_difference_grad<double>(loss_input, x_flat, 1e-6));
  return r;
}

/// Encoder + reparameterization + decoder under the total ELBO.
inline GradCheck check_elbo(std::uint64_t seed) {
  semoran::Rng rng(seed);
  const Index in = 1 + static_cast<Index>(rng() % 8);
  const Index b = 1 + static_cast<Index>(rng() % 4);
  const Index batch = 1 + static_cast<Index>(rng() % 4);
  const double beta = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
  Stack enc = random_stack(rng, in, 2 * b, static_cast<int>(rng() % 2));
  Stack dec = random_stack(rng, b, in, static_cast<int>(rng() % 2));
  // keep logvar moderate
  for (auto& l : enc.layers()) l.weights *= 0.5;
  const Matrix<double> x = random_matrix(rng, in, batch);
  const Matrix<double> noise = random_matrix(rng, b, batch);

  semoran::codec::VaeGradients<double> g;
  semoran::codec::vae_objective(enc, dec, x, noise, beta, &g);

  const Vector<double> pe = flatten(enc), pd = flatten(dec);
  Vector<double> theta(pe.size() + pd.size());
  theta << pe, pd;
  auto loss = [&](const Vector<double>& p) {
    Stack e = enc, d = dec;
    assign(e, p.head(pe.size()));
    assign(d, p.tail(pd.size()));
    return semoran::codec::vae_objective<double>(e, d, x, noise, beta, nullptr).total;
  };
  Vector<double> analytic(theta.size());
  analytic << flatten(g.encoder), flatten(g.decoder);
  GradCheck r;
  r.params = relative_error(analytic, semoran::finite_difference_grad<double>(loss, theta, 1e-6));
  return r;
}

/// Plain element-by-element Adamax, written independently of the library.
struct ReferenceAdamax {
  double alpha = 0.002, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<double> m, u;
  long t = 0;

  void step(std::vector<double>& theta, const std::vector<double>& g) {
    if (m.empty()) {
      m.assign(theta.size(), 0.0);
      u.assign(theta.size(), 0.0);
    }
    ++t;
    double b1t = 1.0;
    for (long i = 0; i < t; ++i) b1t *= beta1;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      u[i] = std::max(beta2 * u[i], std::fabs(g[i]));
      theta[i] -= (alpha / (1.0 - b1t)) * m[i] / (u[i] + eps);
    }
  }
};

}  // namespace oracle
