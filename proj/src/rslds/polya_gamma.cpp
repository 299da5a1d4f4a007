#include "polya_gamma.hpp"

#include <cmath>
#include <stdexcept>

namespace rslds {
namespace {

// Devroye-style exact sampler for J*(1, z); PG(1, c) = J*(1, |c|/2) / 4.
// The proposal splits at t: an inverse-Gaussian body and an exponential
// tail, and the alternating series decides acceptance exactly.
constexpr double kTrunc = 0.64;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P(X <= t) for X ~ InverseGaussian(mu = 1/z, lambda = 1), valid at z = 0.
double inverse_gaussian_cdf(double t, double z) {
  double rt = std::sqrt(t);
  double a = normal_cdf((t * z - 1.0) / rt);
  double b = std::exp(2.0 * z + std::log(normal_cdf(-(t * z + 1.0) / rt)));
  return a + b;
}

// InverseGaussian(1/z, 1) truncated to (0, t].
double sample_truncated_inverse_gaussian(double z, double t, RandomStream& rng) {
  double x = t + 1.0;
  if (z < 1.0 / t) {
    // mean above the truncation point: rejection from the z = 0 law
    double alpha = 0.0;
    do {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      alpha = std::exp(-0.5 * z * z * x);
    } while (rng.uniform() > alpha);
  } else {
    double mu = 1.0 / z;
    while (x > t) {
      double y = rng.normal();
      y *= y;
      double muy = mu * y;
      x = mu + 0.5 * mu * muy - 0.5 * mu * std::sqrt(4.0 * muy + muy * muy);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

// Series coefficients a_n(x) of the J*(1, 0) density, piecewise in x.
double series_coef(int n, double x) {
  double h = n + 0.5;
  if (x <= kTrunc) {
    return M_PI * h * std::pow(2.0 / (M_PI * x), 1.5) *
           std::exp(-2.0 * h * h / x);
  }
  return M_PI * h * std::exp(-0.5 * h * h * M_PI * M_PI * x);
}

double sample_jacobi(double z, RandomStream& rng) {
  z = std::fabs(z);
  double k = M_PI * M_PI / 8.0 + z * z / 2.0;
  double log_tail = std::log(M_PI / (2.0 * k)) - k * kTrunc;
  double log_body = std::log(2.0) - z +
                    std::log(inverse_gaussian_cdf(kTrunc, z));
  double p_tail = 1.0 / (1.0 + std::exp(log_body - log_tail));
  while (true) {
    double x;
    if (rng.uniform() < p_tail) {
      x = kTrunc + rng.exponential() / k;
    } else {
      x = sample_truncated_inverse_gaussian(z, kTrunc, rng);
    }
    double s = series_coef(0, x);
    double y = rng.uniform() * s;
    int n = 0;
    while (true) {
      ++n;
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (y <= s) return x;
      } else {
        s += series_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

}  // namespace

double sample_pg(const PolyaGammaParams& params, RandomStream& rng) {
  if (params.b < 0) throw std::invalid_argument("sample_pg: b must be >= 0");
  if (!std::isfinite(params.c))
    throw std::invalid_argument("sample_pg: non-finite tilt c");
  if (params.b == 0) return 0.0;  // I[z >= k] = 0: the factor is absent
  double z = 0.5 * std::fabs(params.c);
  double total = 0.0;
  for (int i = 0; i < params.b; ++i) total += sample_jacobi(z, rng);
  return 0.25 * total;
}

double pg_mean(const PolyaGammaParams& params) {
  double b = params.b;
  double c = std::fabs(params.c);
  if (c < 1e-6) {
    // tanh(c/2)/(2c) = 1/4 - c^2/48 + O(c^4)
    return b * (0.25 - c * c / 48.0);
  }
  return b / (2.0 * c) * std::tanh(0.5 * c);
}

double pg_variance(const PolyaGammaParams& params) {
  double b = params.b;
  double c = std::fabs(params.c);
  if (c < 1e-3) return b / 24.0 - b * c * c / 120.0;
  // (sinh c - c) / cosh^2(c/2) = 2 tanh(c/2) - c sech^2(c/2)
  double em = std::exp(-c);
  double sech2 = 4.0 * em / ((1.0 + em) * (1.0 + em));
  return b * (2.0 * std::tanh(0.5 * c) - c * sech2) / (4.0 * c * c * c);
}

}  // namespace rslds
