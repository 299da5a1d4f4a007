#pragma once

#include <Eigen/Dense>

#include "gaussian_info.hpp"
#include "rng.hpp"

namespace rslds {

// nu is the (K-1)-vector of stick logits; K = nu.size() + 1.

// Stick-breaking link: pi_k = sigma(nu_k) prod_{j<k} sigma(-nu_j),
// pi_K = prod_k sigma(-nu_k). Sums to one by construction.
Eigen::VectorXd pi_sb(const Eigen::VectorXd& nu);

// log p(z | nu) for z in 0..K-1, computed with log-sigmoids (no overflow).
double sb_log_pmf(int z, const Eigen::VectorXd& nu);

// d/dnu of sb_log_pmf.
Eigen::VectorXd sb_log_pmf_grad(int z, const Eigen::VectorXd& nu);

// Polya-gamma augmentation of one transition: omega_k paired with
// kappa_k = I[z = k] - 1/2 I[z >= k]. omega_k = 0 exactly when the
// indicator I[z >= k] is zero.
struct TransitionAug {
  Eigen::VectorXd omega;  // K-1
  Eigen::VectorXd kappa;  // K-1, entries in {-1/2, 0, +1/2}
};

Eigen::VectorXd sb_kappa(int z, int K);

TransitionAug sample_transition_aug(int z_next, const Eigen::VectorXd& nu,
                                    RandomStream& rng);

// Augmented transition factor on x: precision R' Omega R, linear term
// R'(kappa - Omega r). Sticks with omega = 0 contribute only kappa.
GaussianInfo transition_potential(const TransitionAug& aug,
                                  const Eigen::MatrixXd& R,
                                  const Eigen::VectorXd& r);

// Bernoulli-emission augmentation: xi_n paired with kappa_n = y_n - 1/2.
struct EmissionAug {
  Eigen::VectorXd xi;       // N, positive
  Eigen::VectorXd kappa_y;  // N
};

EmissionAug sample_emission_aug(const Eigen::VectorXd& y,
                                const Eigen::VectorXd& nu_y, RandomStream& rng);

// Augmented Bernoulli evidence factor on x: precision C' Xi C, linear
// term C'(kappa_y - Xi d).
GaussianInfo bernoulli_emission_potential(const EmissionAug& aug,
                                          const Eigen::MatrixXd& C,
                                          const Eigen::VectorXd& d);

}  // namespace rslds
