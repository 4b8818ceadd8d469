#pragma once

#include "semoran/nn/types.hpp"

#include <cmath>
#include <functional>

namespace semoran {

/// Central-difference gradient of a scalar function, one coordinate at a time.
template <typename Scalar>
Vector<Scalar> finite_difference_grad(const std::function<Scalar(const Vector<Scalar>&)>& f,
                                      const Vector<Scalar>& x, Scalar eps) {
  if (!(eps > Scalar(0))) throw std::invalid_argument("finite_difference_grad: eps must be positive");
  Vector<Scalar> grad(x.size());
  Vector<Scalar> probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const Scalar saved = probe(i);
    probe(i) = saved + eps;
    const Scalar up = f(probe);
    probe(i) = saved - eps;
    const Scalar down = f(probe);
    probe(i) = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("finite_difference_grad: non-finite evaluation at coordinate " +
                         std::to_string(i));
    grad(i) = (up - down) / (Scalar(2) * eps);
  }
  return grad;
}

}  // namespace semoran
