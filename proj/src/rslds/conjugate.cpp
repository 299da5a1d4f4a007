#include "conjugate.hpp"

#include <stdexcept>

#include "numeric.hpp"

namespace rslds {

void MNIWParams::validate() const {
  if (V0.rows() != q() || V0.cols() != q())
    throw std::invalid_argument("MNIW: V0 shape mismatch");
  if (S0.rows() != p() || S0.cols() != p())
    throw std::invalid_argument("MNIW: S0 shape mismatch");
  if (n0 <= p() - 1) throw std::invalid_argument("MNIW: n0 must exceed p - 1");
  Eigen::LLT<Eigen::MatrixXd> lv(symmetrize(V0)), ls(symmetrize(S0));
  if (lv.info() != Eigen::Success || ls.info() != Eigen::Success)
    throw std::invalid_argument("MNIW: V0 and S0 must be SPD");
}

void DirichletParams::validate() const {
  if ((alpha.array() <= 0.0).any())
    throw std::invalid_argument("Dirichlet: concentrations must be positive");
}

MNIWParams mniw_posterior(const MNIWParams& prior, const Eigen::MatrixXd& xs,
                          const Eigen::MatrixXd& ys) {
  if (xs.rows() != ys.rows())
    throw std::invalid_argument("mniw_posterior: row count mismatch");
  if (xs.rows() == 0) return prior;
  if (xs.cols() != prior.q() || ys.cols() != prior.p())
    throw std::invalid_argument("mniw_posterior: dimension mismatch");
  return mniw_posterior_from_stats(prior, ys.transpose() * ys,
                                   ys.transpose() * xs, xs.transpose() * xs,
                                   static_cast<double>(xs.rows()));
}

MNIWParams mniw_posterior_from_stats(const MNIWParams& prior,
                                     const Eigen::MatrixXd& syy,
                                     const Eigen::MatrixXd& syx,
                                     const Eigen::MatrixXd& sxx, double n) {
  prior.validate();
  Eigen::MatrixXd v0inv = robust_llt(prior.V0).solve(
      Eigen::MatrixXd::Identity(prior.q(), prior.q()));
  Eigen::MatrixXd vninv = symmetrize(v0inv + sxx);
  Eigen::MatrixXd vn = symmetrize(robust_llt(vninv).solve(
      Eigen::MatrixXd::Identity(prior.q(), prior.q())));
  Eigen::MatrixXd mn = (prior.M0 * v0inv + syx) * vn;
  MNIWParams post;
  post.M0 = mn;
  post.V0 = vn;
  post.S0 = symmetrize(prior.S0 + syy + prior.M0 * v0inv * prior.M0.transpose() -
                       mn * vninv * mn.transpose());
  post.n0 = prior.n0 + n;
  return post;
}

Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& scale, double dof,
                                       RandomStream& rng) {
  const int p = static_cast<int>(scale.rows());
  if (dof <= p - 1) throw std::invalid_argument("IW: dof must exceed p - 1");
  // Bartlett: W ~ Wishart(scale^-1, dof), return W^-1.
  Eigen::MatrixXd scale_inv = robust_llt(scale).solve(
      Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd L = Eigen::MatrixXd(robust_llt(scale_inv).matrixL());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    A(i, i) = std::sqrt(rng.chisq(dof - i));
    for (int j = 0; j < i; ++j) A(i, j) = rng.normal();
  }
  Eigen::MatrixXd LA = L * A;
  Eigen::MatrixXd W = LA * LA.transpose();
  return symmetrize(robust_llt(W).solve(Eigen::MatrixXd::Identity(p, p)));
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_mniw(const MNIWParams& params,
                                                        RandomStream& rng) {
  params.validate();
  Eigen::MatrixXd sigma = sample_inverse_wishart(params.S0, params.n0, rng);
  Eigen::MatrixXd Lr = Eigen::MatrixXd(robust_llt(sigma).matrixL());
  Eigen::MatrixXd Lc = Eigen::MatrixXd(robust_llt(params.V0).matrixL());
  Eigen::MatrixXd Z = rng.normal_matrix(params.p(), params.q());
  Eigen::MatrixXd W = params.M0 + Lr * Z * Lc.transpose();
  return {W, sigma};
}

DirichletParams dirichlet_posterior(const DirichletParams& prior,
                                    const Eigen::VectorXi& counts) {
  prior.validate();
  if (counts.size() != prior.alpha.size())
    throw std::invalid_argument("dirichlet_posterior: length mismatch");
  if ((counts.array() < 0).any())
    throw std::invalid_argument("dirichlet_posterior: negative counts");
  DirichletParams post;
  post.alpha = prior.alpha + counts.cast<double>();
  return post;
}

Eigen::VectorXd sample_dirichlet(const DirichletParams& params, RandomStream& rng) {
  params.validate();
  Eigen::VectorXd g(params.alpha.size());
  for (int i = 0; i < g.size(); ++i) g(i) = rng.gamma(params.alpha(i), 1.0);
  return g / g.sum();
}

}  // namespace rslds
