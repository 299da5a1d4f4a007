#include "messages.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "numeric.hpp"

namespace rslds {
namespace {

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& m, int t,
                                        const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(m));
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) +
                             ": indefinite precision at time index " +
                             std::to_string(t));
  return llt;
}

double llt_logdet(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

// Forward filtered factors alpha[t]; alpha[t] includes all potentials in
// x_1..x_t and the unary at t.
std::vector<GaussianInfo> forward_filter(const GaussianChainSpec& spec,
                                         double* logdet_accum) {
  std::vector<GaussianInfo> alpha(spec.T);
  alpha[0] = spec.unary[0];
  if (logdet_accum) *logdet_accum = 0.0;
  for (int t = 0; t + 1 < spec.T; ++t) {
    const PairwisePotential& pw = spec.pairwise[t];
    Eigen::MatrixXd Ja = alpha[t].J + pw.J11;
    auto llt = checked_llt(Ja, t, "ffbs_continuous");
    if (logdet_accum) *logdet_accum += llt_logdet(llt);
    Eigen::VectorXd ha = alpha[t].h + pw.h1;
    GaussianInfo msg;
    msg.J = symmetrize(pw.J22 - pw.J12.transpose() * llt.solve(pw.J12));
    msg.h = pw.h2 - pw.J12.transpose() * llt.solve(ha);
    Eigen::VectorXd v = llt.matrixL().solve(ha);
    msg.log_normalizer = alpha[t].log_normalizer + pw.log_normalizer +
                         0.5 * spec.M * std::log(2.0 * M_PI) -
                         0.5 * llt_logdet(llt) + 0.5 * v.squaredNorm();
    alpha[t + 1] = gaussian_info_multiply(msg, spec.unary[t + 1]);
  }
  return alpha;
}

}  // namespace

PairwisePotential dynamics_potential(const Eigen::MatrixXd& A,
                                     const Eigen::VectorXd& b,
                                     const Eigen::MatrixXd& Q) {
  const int M = static_cast<int>(A.rows());
  Eigen::MatrixXd Qi = robust_llt(Q).solve(Eigen::MatrixXd::Identity(M, M));
  Qi = symmetrize(Qi);
  PairwisePotential pw;
  pw.J11 = symmetrize(A.transpose() * Qi * A);
  pw.J12 = -A.transpose() * Qi;
  pw.J22 = Qi;
  pw.h1 = -A.transpose() * Qi * b;
  pw.h2 = Qi * b;
  pw.log_normalizer = -0.5 * (M * std::log(2.0 * M_PI) + log_det_spd(Q) +
                              b.dot(Qi * b));
  return pw;
}

GaussianChainSpec GaussianChainSpec::empty(int T, int M) {
  GaussianChainSpec spec;
  spec.T = T;
  spec.M = M;
  spec.unary.assign(T, GaussianInfo::zero(M));
  if (T > 1) {
    PairwisePotential pw;
    pw.J11 = pw.J12 = pw.J22 = Eigen::MatrixXd::Zero(M, M);
    pw.h1 = pw.h2 = Eigen::VectorXd::Zero(M);
    spec.pairwise.assign(T - 1, pw);
  }
  return spec;
}

void GaussianChainSpec::add_unary(int t, const GaussianInfo& g) {
  unary[t] = gaussian_info_multiply(unary[t], g);
}

std::vector<Eigen::VectorXd> ffbs_continuous(const GaussianChainSpec& spec,
                                             RandomStream& rng) {
  auto alpha = forward_filter(spec, nullptr);
  std::vector<Eigen::VectorXd> x(spec.T);
  {
    auto llt = checked_llt(alpha[spec.T - 1].J, spec.T - 1, "ffbs_continuous");
    Eigen::VectorXd mu = llt.solve(alpha[spec.T - 1].h);
    x[spec.T - 1] = mu + llt.matrixL().transpose().solve(rng.normal_vector(spec.M));
  }
  for (int t = spec.T - 2; t >= 0; --t) {
    const PairwisePotential& pw = spec.pairwise[t];
    auto llt = checked_llt(alpha[t].J + pw.J11, t, "ffbs_continuous");
    Eigen::VectorXd h = alpha[t].h + pw.h1 - pw.J12 * x[t + 1];
    Eigen::VectorXd mu = llt.solve(h);
    x[t] = mu + llt.matrixL().transpose().solve(rng.normal_vector(spec.M));
  }
  return x;
}

SmootherMoments smoother_moments(const GaussianChainSpec& spec) {
  double logdet = 0.0;
  auto alpha = forward_filter(spec, &logdet);

  // Backward messages beta[t]: potentials strictly after t, marginalized
  // onto x_t.
  std::vector<GaussianInfo> beta(spec.T, GaussianInfo::zero(spec.M));
  for (int t = spec.T - 2; t >= 0; --t) {
    const PairwisePotential& pw = spec.pairwise[t];
    Eigen::MatrixXd Jb = pw.J22 + spec.unary[t + 1].J + beta[t + 1].J;
    auto llt = checked_llt(Jb, t + 1, "smoother_moments");
    Eigen::VectorXd hb = pw.h2 + spec.unary[t + 1].h + beta[t + 1].h;
    beta[t].J = symmetrize(pw.J11 - pw.J12 * llt.solve(pw.J12.transpose()));
    beta[t].h = pw.h1 - pw.J12 * llt.solve(hb);
  }

  SmootherMoments sm;
  sm.mean.resize(spec.T);
  sm.cov.resize(spec.T);
  sm.cross.resize(std::max(0, spec.T - 1));
  for (int t = 0; t < spec.T; ++t) {
    auto llt = checked_llt(alpha[t].J + beta[t].J, t, "smoother_moments");
    sm.mean[t] = llt.solve(alpha[t].h + beta[t].h);
    sm.cov[t] = symmetrize(llt.solve(Eigen::MatrixXd::Identity(spec.M, spec.M)));
  }
  for (int t = 0; t + 1 < spec.T; ++t) {
    const PairwisePotential& pw = spec.pairwise[t];
    Eigen::MatrixXd J(2 * spec.M, 2 * spec.M);
    J.topLeftCorner(spec.M, spec.M) = alpha[t].J + pw.J11;
    J.topRightCorner(spec.M, spec.M) = pw.J12;
    J.bottomLeftCorner(spec.M, spec.M) = pw.J12.transpose();
    J.bottomRightCorner(spec.M, spec.M) =
        pw.J22 + spec.unary[t + 1].J + beta[t + 1].J;
    Eigen::VectorXd h(2 * spec.M);
    h.head(spec.M) = alpha[t].h + pw.h1;
    h.tail(spec.M) = pw.h2 + spec.unary[t + 1].h + beta[t + 1].h;
    auto llt = checked_llt(J, t, "smoother_moments");
    Eigen::VectorXd mu = llt.solve(h);
    Eigen::MatrixXd cov =
        llt.solve(Eigen::MatrixXd::Identity(2 * spec.M, 2 * spec.M));
    sm.cross[t] = cov.topRightCorner(spec.M, spec.M) +
                  mu.head(spec.M) * mu.tail(spec.M).transpose();
  }
  {
    auto llt = checked_llt(alpha[spec.T - 1].J, spec.T - 1, "smoother_moments");
    logdet += llt_logdet(llt);
    Eigen::VectorXd v = llt.matrixL().solve(alpha[spec.T - 1].h);
    sm.log_partition = alpha[spec.T - 1].log_normalizer +
                       0.5 * spec.M * std::log(2.0 * M_PI) -
                       0.5 * llt_logdet(llt) + 0.5 * v.squaredNorm();
  }
  sm.logdet_precision = logdet;
  return sm;
}

DiscreteChainSpec DiscreteChainSpec::uniform(int T, int K) {
  DiscreteChainSpec spec;
  spec.T = T;
  spec.K = K;
  spec.log_init = Eigen::VectorXd::Constant(K, -std::log(double(K)));
  spec.log_trans.assign(std::max(0, T - 1), Eigen::MatrixXd::Zero(K, K));
  spec.log_unary = Eigen::MatrixXd::Zero(T, K);
  return spec;
}

std::vector<int> ffbs_discrete(const DiscreteChainSpec& spec, RandomStream& rng) {
  const int T = spec.T, K = spec.K;
  // Backward pass: bmsg(t, i) = log sum over z_{t+1:T}.
  Eigen::MatrixXd bmsg = Eigen::MatrixXd::Zero(T, K);
  for (int t = T - 2; t >= 0; --t) {
    for (int i = 0; i < K; ++i) {
      Eigen::VectorXd v = spec.log_trans[t].row(i).transpose() +
                          spec.log_unary.row(t + 1).transpose() +
                          bmsg.row(t + 1).transpose();
      bmsg(t, i) = logsumexp(v);
    }
  }
  std::vector<int> z(T);
  {
    Eigen::VectorXd lp = spec.log_init + spec.log_unary.row(0).transpose() +
                         bmsg.row(0).transpose();
    double norm = logsumexp(lp);
    if (!std::isfinite(norm))
      throw std::runtime_error("ffbs_discrete: all-zero likelihood at time index 0");
    z[0] = rng.categorical((lp.array() - norm).exp().matrix());
  }
  for (int t = 1; t < T; ++t) {
    Eigen::VectorXd lp = spec.log_trans[t - 1].row(z[t - 1]).transpose() +
                         spec.log_unary.row(t).transpose() +
                         bmsg.row(t).transpose();
    double norm = logsumexp(lp);
    if (!std::isfinite(norm))
      throw std::runtime_error("ffbs_discrete: all-zero likelihood at time index " +
                               std::to_string(t));
    z[t] = rng.categorical((lp.array() - norm).exp().matrix());
  }
  return z;
}

HmmMarginals hmm_marginals(const DiscreteChainSpec& spec) {
  const int T = spec.T, K = spec.K;
  Eigen::MatrixXd fwd(T, K), bwd = Eigen::MatrixXd::Zero(T, K);
  fwd.row(0) = (spec.log_init + spec.log_unary.row(0).transpose()).transpose();
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < K; ++j) {
      Eigen::VectorXd v = fwd.row(t - 1).transpose() + spec.log_trans[t - 1].col(j);
      fwd(t, j) = logsumexp(v) + spec.log_unary(t, j);
    }
  }
  for (int t = T - 2; t >= 0; --t) {
    for (int i = 0; i < K; ++i) {
      Eigen::VectorXd v = spec.log_trans[t].row(i).transpose() +
                          spec.log_unary.row(t + 1).transpose() +
                          bwd.row(t + 1).transpose();
      bwd(t, i) = logsumexp(v);
    }
  }
  HmmMarginals m;
  m.log_partition = logsumexp(fwd.row(T - 1).transpose());
  if (!std::isfinite(m.log_partition))
    throw std::runtime_error("hmm_marginals: chain has zero total mass");
  m.unary.resize(T, K);
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd lp = fwd.row(t).transpose() + bwd.row(t).transpose();
    double norm = logsumexp(lp);
    if (!std::isfinite(norm))
      throw std::runtime_error("hmm_marginals: all-zero likelihood at time index " +
                               std::to_string(t));
    m.unary.row(t) = (lp.array() - norm).exp().transpose();
  }
  m.pairwise.resize(std::max(0, T - 1));
  for (int t = 0; t + 1 < T; ++t) {
    Eigen::MatrixXd lp(K, K);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j)
        lp(i, j) = fwd(t, i) + spec.log_trans[t](i, j) +
                   spec.log_unary(t + 1, j) + bwd(t + 1, j);
    Eigen::Map<Eigen::VectorXd> flat(lp.data(), K * K);
    double norm = logsumexp(flat);
    m.pairwise[t] = (lp.array() - norm).exp();
  }
  return m;
}

}  // namespace rslds
