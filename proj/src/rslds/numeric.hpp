#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace rslds {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log sigma(x), stable for large |x|.
inline double log_sigmoid(double x) {
  if (x > 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

inline double logsumexp(const Eigen::VectorXd& v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double s = (v.array() - m).exp().sum();
  return m + std::log(s);
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Cholesky with one jitter retry (1e-8 * trace/p on the diagonal).
inline Eigen::LLT<Eigen::MatrixXd> robust_llt(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd s = symmetrize(m);
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() == Eigen::Success) return llt;
  double jitter = 1e-8 * s.trace() / static_cast<double>(s.rows());
  if (jitter <= 0.0) jitter = 1e-12;
  s.diagonal().array() += jitter;
  llt.compute(s);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("matrix not positive definite after jitter retry");
  return llt;
}

inline double log_det_spd(const Eigen::MatrixXd& m) {
  auto llt = robust_llt(m);
  return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

// log N(x | mu, Sigma) for SPD Sigma.
inline double gaussian_log_density(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& mu,
                                   const Eigen::MatrixXd& sigma) {
  const int d = static_cast<int>(x.size());
  auto llt = robust_llt(sigma);
  Eigen::VectorXd r = llt.matrixL().solve(x - mu);
  double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  return -0.5 * (d * std::log(2.0 * M_PI) + logdet + r.squaredNorm());
}

}  // namespace rslds
