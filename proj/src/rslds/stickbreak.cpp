#include "stickbreak.hpp"

#include <cmath>
#include <stdexcept>

#include "numeric.hpp"
#include "polya_gamma.hpp"

namespace rslds {

Eigen::VectorXd pi_sb(const Eigen::VectorXd& nu) {
  const int K = static_cast<int>(nu.size()) + 1;
  Eigen::VectorXd pi(K);
  double remaining = 1.0;
  for (int k = 0; k < K - 1; ++k) {
    double s = sigmoid(nu(k));
    pi(k) = s * remaining;
    remaining *= 1.0 - s;
  }
  pi(K - 1) = remaining;  // product of sigma(-nu), not 1 - sum
  return pi;
}

double sb_log_pmf(int z, const Eigen::VectorXd& nu) {
  const int K = static_cast<int>(nu.size()) + 1;
  if (z < 0 || z >= K) throw std::invalid_argument("sb_log_pmf: z out of range");
  double lp = 0.0;
  for (int k = 0; k < z; ++k) lp += log_sigmoid(-nu(k));
  if (z < K - 1) lp += log_sigmoid(nu(z));
  return lp;
}

Eigen::VectorXd sb_log_pmf_grad(int z, const Eigen::VectorXd& nu) {
  const int K = static_cast<int>(nu.size()) + 1;
  if (z < 0 || z >= K)
    throw std::invalid_argument("sb_log_pmf_grad: z out of range");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(nu.size());
  for (int k = 0; k < z; ++k) g(k) = -sigmoid(nu(k));
  if (z < K - 1) g(z) = sigmoid(-nu(z));
  return g;
}

Eigen::VectorXd sb_kappa(int z, int K) {
  Eigen::VectorXd kappa = Eigen::VectorXd::Zero(K - 1);
  for (int k = 0; k < K - 1; ++k) {
    double eq = (z == k) ? 1.0 : 0.0;
    double geq = (z >= k) ? 1.0 : 0.0;
    kappa(k) = eq - 0.5 * geq;
  }
  return kappa;
}

TransitionAug sample_transition_aug(int z_next, const Eigen::VectorXd& nu,
                                    RandomStream& rng) {
  const int K = static_cast<int>(nu.size()) + 1;
  if (z_next < 0 || z_next >= K)
    throw std::invalid_argument("sample_transition_aug: z out of range");
  TransitionAug aug;
  aug.omega = Eigen::VectorXd::Zero(K - 1);
  aug.kappa = sb_kappa(z_next, K);
  for (int k = 0; k < K - 1; ++k) {
    if (z_next >= k) aug.omega(k) = sample_pg({1, nu(k)}, rng);
  }
  return aug;
}

GaussianInfo transition_potential(const TransitionAug& aug,
                                  const Eigen::MatrixXd& R,
                                  const Eigen::VectorXd& r) {
  const int M = static_cast<int>(R.cols());
  if (aug.omega.size() != R.rows() || r.size() != R.rows())
    throw std::invalid_argument("transition_potential: dimension mismatch");
  GaussianInfo g = GaussianInfo::zero(M);
  for (int k = 0; k < R.rows(); ++k) {
    Eigen::VectorXd row = R.row(k).transpose();
    double w = aug.omega(k);
    if (w > 0.0) g.J.noalias() += w * row * row.transpose();
    g.h.noalias() += (aug.kappa(k) - w * r(k)) * row;
    g.log_normalizer += aug.kappa(k) * r(k) - 0.5 * w * r(k) * r(k);
  }
  return g;
}

EmissionAug sample_emission_aug(const Eigen::VectorXd& y,
                                const Eigen::VectorXd& nu_y, RandomStream& rng) {
  if (y.size() != nu_y.size())
    throw std::invalid_argument("sample_emission_aug: length mismatch");
  EmissionAug aug;
  aug.xi = Eigen::VectorXd::Zero(y.size());
  aug.kappa_y = y.array() - 0.5;
  for (int n = 0; n < y.size(); ++n) aug.xi(n) = sample_pg({1, nu_y(n)}, rng);
  return aug;
}

GaussianInfo bernoulli_emission_potential(const EmissionAug& aug,
                                          const Eigen::MatrixXd& C,
                                          const Eigen::VectorXd& d) {
  const int M = static_cast<int>(C.cols());
  if (aug.xi.size() != C.rows() || d.size() != C.rows())
    throw std::invalid_argument("bernoulli_emission_potential: dimension mismatch");
  GaussianInfo g = GaussianInfo::zero(M);
  for (int n = 0; n < C.rows(); ++n) {
    Eigen::VectorXd row = C.row(n).transpose();
    double w = aug.xi(n);
    g.J.noalias() += w * row * row.transpose();
    g.h.noalias() += (aug.kappa_y(n) - w * d(n)) * row;
    g.log_normalizer += aug.kappa_y(n) * d(n) - 0.5 * w * d(n) * d(n);
  }
  return g;
}

}  // namespace rslds
