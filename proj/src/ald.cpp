#include "ssq/ald.hpp"

#include <cmath>
#include <stdexcept>

namespace ssq {

QuantileLevel::QuantileLevel(double tau) : tau_(tau) {
  if (!(tau > 0.0) || !(tau < 1.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("quantile level must lie in (0, 1)");
  }
}

MixtureConstants mixture_constants(QuantileLevel tau) {
  const double t = tau.value();
  const double tt = t * (1.0 - t);
  return {(1.0 - 2.0 * t) / tt, std::sqrt(2.0 / tt)};
}

double check_loss(double eps, QuantileLevel tau) {
  return eps * (tau.value() - (eps < 0.0 ? 1.0 : 0.0));
}

AldParams::AldParams(double mu_, double sigma_, QuantileLevel tau_)
    : mu(mu_), sigma(sigma_), tau(tau_) {
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
    throw std::invalid_argument("ALD requires finite mu and sigma > 0");
  }
}

double ald_log_density(double y, const AldParams& params) {
  const double t = params.tau.value();
  return std::log(t * (1.0 - t) / params.sigma) -
         check_loss((y - params.mu) / params.sigma, params.tau);
}

GigMoments gig_moments_half(double w1, double w2) {
  if (!(w1 > 0.0) || !(w2 > 0.0) || !std::isfinite(w1) || !std::isfinite(w2)) {
    throw std::invalid_argument("gig_moments_half requires w1 > 0 and w2 > 0");
  }
  return {w2 / w1, w1 / w2 + 1.0 / (w2 * w2)};
}

std::vector<double> sample_ald(std::size_t n, const AldParams& params, Rng& rng) {
  if (n == 0) {
    throw std::invalid_argument("sample_ald requires n > 0");
  }
  const MixtureConstants mc = mixture_constants(params.tau);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = rng.exponential(params.sigma);
    const double u = rng.normal();
    out[i] = params.mu + mc.zeta1 * v + mc.zeta2 * std::sqrt(params.sigma * v) * u;
  }
  return out;
}

}  // namespace ssq
