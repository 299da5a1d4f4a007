#pragma once

#include <Eigen/Dense>

#include "rng.hpp"

namespace rslds {

// Canonical (information-form) Gaussian factor:
//   exp{ -1/2 x' J x + h' x + log_normalizer }.
struct GaussianInfo {
  Eigen::MatrixXd J;
  Eigen::VectorXd h;
  double log_normalizer = 0.0;

  static GaussianInfo zero(int dim) {
    GaussianInfo g;
    g.J = Eigen::MatrixXd::Zero(dim, dim);
    g.h = Eigen::VectorXd::Zero(dim);
    return g;
  }

  static GaussianInfo from_moments(const Eigen::VectorXd& mean,
                                   const Eigen::MatrixXd& cov);

  int dim() const { return static_cast<int>(h.size()); }

  Eigen::VectorXd mean() const;  // requires PD J
  Eigen::MatrixXd cov() const;

  // log integral of the factor over x (requires PD J).
  double log_partition() const;

  Eigen::VectorXd sample(RandomStream& rng) const;
};

// Pointwise product: add (J, h, log_normalizer).
GaussianInfo gaussian_info_multiply(const GaussianInfo& a, const GaussianInfo& b);

// Factor on (x_head, x_tail); integrate out x_tail via Schur complement.
// tail_dim counts from the end of the vector.
GaussianInfo gaussian_info_marginalize(const GaussianInfo& joint, int tail_dim);

// Condition a joint factor on x_tail = value, returning a factor on x_head.
GaussianInfo gaussian_info_condition(const GaussianInfo& joint,
                                     const Eigen::VectorXd& tail_value);

}  // namespace rslds
