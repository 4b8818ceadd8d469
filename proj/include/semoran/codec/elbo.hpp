#pragma once

#include "semoran/nn/stack.hpp"

#include <cmath>

namespace semoran::codec {

template <typename Scalar>
struct ElboTerms {
  Scalar reconstruction = 0;
  Scalar kl = 0;
  Scalar total = 0;
};

/// Batch ELBO terms. Columns are samples; each term is averaged over the batch.
///   reconstruction = mean over features of (x - x_hat)^2
///   kl             = 1/2 sum(mu^2 + exp(logvar) - 1 - logvar)
///   total          = reconstruction + beta * kl
template <typename Scalar, typename XD, typename YD, typename MD, typename LD>
ElboTerms<Scalar> elbo_loss(const Eigen::MatrixBase<XD>& x, const Eigen::MatrixBase<YD>& x_hat,
                            const Eigen::MatrixBase<MD>& mu, const Eigen::MatrixBase<LD>& logvar,
                            Scalar beta = Scalar(1)) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols() || mu.rows() != logvar.rows() ||
      mu.cols() != logvar.cols() || mu.cols() != x.cols())
    throw ShapeError("elbo_loss: inconsistent shapes");
  if (x.size() == 0 || mu.size() == 0) throw ShapeError("elbo_loss: empty input");
  if (!x.allFinite() || !x_hat.allFinite() || !mu.allFinite() || !logvar.allFinite())
    throw NumericError("elbo_loss: non-finite input");
  const auto batch = static_cast<Scalar>(x.cols());
  ElboTerms<Scalar> t;
  t.reconstruction = (x - x_hat).squaredNorm() / static_cast<Scalar>(x.size());
  t.kl = Scalar(0.5) *
         (mu.array().square() + (logvar.array().unaryExpr([](Scalar v) { return std::expm1(v); }) - logvar.array()))
             .sum() /
         batch;
  t.total = t.reconstruction + beta * t.kl;
  if (!std::isfinite(t.reconstruction) || !std::isfinite(t.kl) || !std::isfinite(t.total))
    throw NumericError("elbo_loss: non-finite result");
  return t;
}

template <typename Scalar>
struct VaeGradients {
  StackGradients<Scalar> encoder;
  StackGradients<Scalar> decoder;
};

/// Forward pass of encoder -> reparameterization -> decoder on a batch, with
/// the exact gradient of the total ELBO when `grads` is non-null. The encoder
/// emits [mu; logvar] stacked along rows; `noise` is the standard-normal draw
/// used for z = mu + exp(logvar / 2) * noise.
template <typename Scalar>
ElboTerms<Scalar> vae_objective(const DenseStack<Scalar>& encoder, const DenseStack<Scalar>& decoder,
                                const Matrix<Scalar>& x, const Matrix<Scalar>& noise, Scalar beta,
                                VaeGradients<Scalar>* grads) {
  const Index b = decoder.in_width();
  if (encoder.out_width() != 2 * b) throw ShapeError("vae_objective: encoder must emit 2 * bottleneck values");
  if (noise.rows() != b || noise.cols() != x.cols()) throw ShapeError("vae_objective: noise shape mismatch");

  GradientTape<Scalar> enc_tape, dec_tape;
  const Matrix<Scalar> stats = encoder.forward(x, enc_tape);
  const auto mu = stats.topRows(b);
  const auto logvar = stats.bottomRows(b);
  const Matrix<Scalar> sigma = (logvar.array() * Scalar(0.5)).exp().matrix();
  const Matrix<Scalar> z = mu + sigma.cwiseProduct(noise);
  const Matrix<Scalar> x_hat = decoder.forward(z, dec_tape);
  const ElboTerms<Scalar> terms = elbo_loss(x, x_hat, mu, logvar, beta);
  if (!grads) return terms;

  const auto batch = static_cast<Scalar>(x.cols());
  const Matrix<Scalar> d_xhat = (x_hat - x) * (Scalar(2) / static_cast<Scalar>(x.size()));
  grads->decoder = decoder.backward(dec_tape, d_xhat);
  const Matrix<Scalar>& d_z = grads->decoder.input;

  Matrix<Scalar> d_stats(2 * b, x.cols());
  d_stats.topRows(b) = d_z + (beta / batch) * mu;
  d_stats.bottomRows(b) =
      (d_z.array() * noise.array() * sigma.array() * Scalar(0.5) +
       (beta / batch) * Scalar(0.5) * (logvar.array().exp() - Scalar(1)))
          .matrix();
  grads->encoder = encoder.backward(enc_tape, d_stats);
  return terms;
}

}  // namespace semoran::codec
