#pragma once

#include <Eigen/Dense>

#include "rng.hpp"

namespace rslds {

// Matrix-normal-inverse-Wishart prior for a p x q regression matrix W
// (responses y = W u + noise, noise covariance Sigma):
//   Sigma ~ IW(S0, n0),  W | Sigma ~ MN(M0, Sigma, V0).
struct MNIWParams {
  Eigen::MatrixXd M0;  // p x q
  Eigen::MatrixXd V0;  // q x q column covariance, SPD
  Eigen::MatrixXd S0;  // p x p inverse-Wishart scale, SPD
  double n0 = 0.0;     // dof, > p - 1

  int p() const { return static_cast<int>(M0.rows()); }
  int q() const { return static_cast<int>(M0.cols()); }
  void validate() const;
};

struct DirichletParams {
  Eigen::VectorXd alpha;
  void validate() const;
};

// Conjugate posterior given regressor rows xs (n x q) and response rows
// ys (n x p). Zero rows return the prior unchanged.
MNIWParams mniw_posterior(const MNIWParams& prior, const Eigen::MatrixXd& xs,
                          const Eigen::MatrixXd& ys);

// Same update expressed on accumulated sufficient statistics
// (syy = Y'Y, syx = Y'X, sxx = X'X, n rows).
MNIWParams mniw_posterior_from_stats(const MNIWParams& prior,
                                     const Eigen::MatrixXd& syy,
                                     const Eigen::MatrixXd& syx,
                                     const Eigen::MatrixXd& sxx, double n);

// Draw (W, Sigma) with Sigma ~ IW(S0, n0), W | Sigma ~ MN(M0, Sigma, V0).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_mniw(const MNIWParams& params,
                                                        RandomStream& rng);

Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& scale, double dof,
                                       RandomStream& rng);

DirichletParams dirichlet_posterior(const DirichletParams& prior,
                                    const Eigen::VectorXi& counts);

Eigen::VectorXd sample_dirichlet(const DirichletParams& params, RandomStream& rng);

}  // namespace rslds
