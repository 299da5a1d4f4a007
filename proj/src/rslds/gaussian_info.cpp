#include "gaussian_info.hpp"

#include <cmath>
#include <stdexcept>

#include "numeric.hpp"

namespace rslds {

GaussianInfo GaussianInfo::from_moments(const Eigen::VectorXd& mean,
                                        const Eigen::MatrixXd& cov) {
  GaussianInfo g;
  auto llt = robust_llt(cov);
  g.J = llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
  g.J = symmetrize(g.J);
  g.h = g.J * mean;
  g.log_normalizer = 0.0;
  return g;
}

Eigen::VectorXd GaussianInfo::mean() const { return robust_llt(J).solve(h); }

Eigen::MatrixXd GaussianInfo::cov() const {
  return symmetrize(robust_llt(J).solve(
      Eigen::MatrixXd::Identity(J.rows(), J.cols())));
}

double GaussianInfo::log_partition() const {
  auto llt = robust_llt(J);
  Eigen::VectorXd v = llt.matrixL().solve(h);
  double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  return 0.5 * dim() * std::log(2.0 * M_PI) - 0.5 * logdet +
         0.5 * v.squaredNorm() + log_normalizer;
}

Eigen::VectorXd GaussianInfo::sample(RandomStream& rng) const {
  // x = mu + L^-T z with J = L L'
  auto llt = robust_llt(J);
  Eigen::VectorXd mu = llt.solve(h);
  Eigen::VectorXd z = rng.normal_vector(dim());
  return mu + llt.matrixL().transpose().solve(z);
}

GaussianInfo gaussian_info_multiply(const GaussianInfo& a, const GaussianInfo& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("gaussian_info_multiply: dimension mismatch");
  GaussianInfo g;
  g.J = a.J + b.J;
  g.h = a.h + b.h;
  g.log_normalizer = a.log_normalizer + b.log_normalizer;
  return g;
}

GaussianInfo gaussian_info_marginalize(const GaussianInfo& joint, int tail_dim) {
  int n = joint.dim();
  int head = n - tail_dim;
  if (head < 0 || tail_dim <= 0)
    throw std::invalid_argument("gaussian_info_marginalize: bad block split");
  Eigen::MatrixXd Jaa = joint.J.topLeftCorner(head, head);
  Eigen::MatrixXd Jab = joint.J.topRightCorner(head, tail_dim);
  Eigen::MatrixXd Jbb = joint.J.bottomRightCorner(tail_dim, tail_dim);
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(Jbb));
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "gaussian_info_marginalize: eliminated block is not positive definite");
  Eigen::VectorXd ha = joint.h.head(head);
  Eigen::VectorXd hb = joint.h.tail(tail_dim);
  GaussianInfo g;
  g.J = symmetrize(Jaa - Jab * llt.solve(Jab.transpose()));
  g.h = ha - Jab * llt.solve(hb);
  Eigen::VectorXd v = llt.matrixL().solve(hb);
  double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  g.log_normalizer = joint.log_normalizer +
                     0.5 * tail_dim * std::log(2.0 * M_PI) - 0.5 * logdet +
                     0.5 * v.squaredNorm();
  return g;
}

GaussianInfo gaussian_info_condition(const GaussianInfo& joint,
                                     const Eigen::VectorXd& tail_value) {
  int n = joint.dim();
  int tail_dim = static_cast<int>(tail_value.size());
  int head = n - tail_dim;
  if (head < 0)
    throw std::invalid_argument("gaussian_info_condition: bad block split");
  GaussianInfo g;
  g.J = joint.J.topLeftCorner(head, head);
  g.h = joint.h.head(head) - joint.J.topRightCorner(head, tail_dim) * tail_value;
  Eigen::MatrixXd Jbb = joint.J.bottomRightCorner(tail_dim, tail_dim);
  g.log_normalizer = joint.log_normalizer -
                     0.5 * tail_value.dot(Jbb * tail_value) +
                     joint.h.tail(tail_dim).dot(tail_value);
  return g;
}

}  // namespace rslds
