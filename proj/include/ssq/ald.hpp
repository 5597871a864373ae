#pragma once

#include <cstddef>
#include <vector>

#include "ssq/rng.hpp"

namespace ssq {

// Quantile level restricted to the open interval (0, 1).
class QuantileLevel {
 public:
  explicit QuantileLevel(double tau);
  double value() const { return tau_; }

 private:
  double tau_;
};

// Constants of the normal-exponential mixture representation of the
// asymmetric Laplace: zeta1 = (1 - 2 tau) / (tau (1 - tau)),
// zeta2 = sqrt(2 / (tau (1 - tau))).
struct MixtureConstants {
  double zeta1;
  double zeta2;
};

MixtureConstants mixture_constants(QuantileLevel tau);

// rho_tau(eps) = eps * (tau - 1{eps < 0}). Nonnegative, zero only at 0.
double check_loss(double eps, QuantileLevel tau);

struct AldParams {
  AldParams(double mu, double sigma, QuantileLevel tau);
  double mu;
  double sigma;  // > 0
  QuantileLevel tau;
};

// log f(y) = log(tau (1 - tau) / sigma) - rho_tau((y - mu) / sigma).
double ald_log_density(double y, const AldParams& params);

// Posterior moments of a generalized inverse Gaussian with index 1/2 and
// kernel v^{-1/2} exp(-(w1^2 / v + w2^2 v) / 2). Half-order Bessel functions
// reduce the moment ratios to closed form:
//   E[1/v] = w2 / w1,   E[v] = w1 / w2 + 1 / w2^2.
struct GigMoments {
  double e_inv_v;
  double e_v;
};

GigMoments gig_moments_half(double w1, double w2);

// Draw n variates through the mixture: v ~ Exp(mean sigma), u ~ N(0, 1),
// y = mu + zeta1 v + zeta2 sqrt(sigma v) u. One v then one u per variate.
std::vector<double> sample_ald(std::size_t n, const AldParams& params, Rng& rng);

}  // namespace ssq
