#include "svi.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

#include "conjugate.hpp"
#include "gibbs.hpp"
#include "numeric.hpp"
#include "polya_gamma.hpp"
#include "stickbreak.hpp"

namespace rslds {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double digamma(double x) { return boost::math::digamma(x); }

Eigen::MatrixXd euu(const SmootherMoments& qx, int t) {
  const int M = static_cast<int>(qx.mean[t].size());
  Eigen::MatrixXd out(M + 1, M + 1);
  out.topLeftCorner(M, M) =
      qx.cov[t] + qx.mean[t] * qx.mean[t].transpose();
  out.topRightCorner(M, 1) = qx.mean[t];
  out.bottomLeftCorner(1, M) = qx.mean[t].transpose();
  out(M, M) = 1.0;
  return out;
}

Eigen::VectorXd eu(const SmootherMoments& qx, int t) {
  const int M = static_cast<int>(qx.mean[t].size());
  Eigen::VectorXd u(M + 1);
  u.head(M) = qx.mean[t];
  u(M) = 1.0;
  return u;
}

}  // namespace

FactorStats FactorStats::zero(int p, int q) {
  FactorStats s;
  s.syy = Eigen::MatrixXd::Zero(p, p);
  s.syx = Eigen::MatrixXd::Zero(p, q);
  s.sxx = Eigen::MatrixXd::Zero(q, q);
  s.n = 0.0;
  return s;
}

FactorStats& FactorStats::operator+=(const FactorStats& o) {
  syy += o.syy;
  syx += o.syx;
  sxx += o.sxx;
  n += o.n;
  return *this;
}

void FactorStats::scale_into(double a) {
  syy *= a;
  syx *= a;
  sxx *= a;
  n *= a;
}

RowStats RowStats::zero(int dim) {
  RowStats s;
  s.J = Eigen::MatrixXd::Zero(dim, dim);
  s.h = Eigen::VectorXd::Zero(dim);
  return s;
}

RowStats& RowStats::operator+=(const RowStats& o) {
  J += o.J;
  h += o.h;
  return *this;
}

void RowStats::scale_into(double a) {
  J *= a;
  h *= a;
}

MniwMoments mniw_moments(const MNIWParams& post) {
  MniwMoments m;
  const int p = post.p();
  m.EW = post.M0;
  m.Einv = post.n0 * robust_llt(post.S0).solve(
                         Eigen::MatrixXd::Identity(p, p));
  m.EWtEinvW = post.M0.transpose() * m.Einv * post.M0 + p * post.V0;
  double logdetS = log_det_spd(post.S0);
  m.Elogdetinv = p * std::log(2.0) - logdetS;
  for (int i = 1; i <= p; ++i) m.Elogdetinv += digamma(0.5 * (post.n0 + 1 - i));
  return m;
}

int VariationalState::rec_groups() const {
  switch (variant) {
    case VariantTag::RecurrentSLDS:
      return K;
    case VariantTag::RecurrenceOnly:
    case VariantTag::RecurrentARHMM:
      return 1;
    default:
      return 0;
  }
}

MNIWParams VariationalState::q_dyn(int k) const {
  return mniw_posterior_from_stats(hypers.lambda, dyn[k].syy, dyn[k].syx,
                                   dyn[k].sxx, dyn[k].n);
}

MNIWParams VariationalState::q_obs() const {
  return mniw_posterior_from_stats(hypers.eta, obs.syy, obs.syx, obs.sxx,
                                   obs.n);
}

void VariationalState::q_rec_row(int group, int stick, Eigen::MatrixXd* J,
                                 Eigen::VectorXd* h) const {
  Eigen::MatrixXd V0inv = robust_llt(hypers.rec.V0).solve(
      Eigen::MatrixXd::Identity(M + 1, M + 1));
  *J = V0inv + rec[group][stick].J;
  *h = V0inv * hypers.rec.M0.row(stick).transpose() + rec[group][stick].h;
}

void VariationalState::q_obs_row(int n, Eigen::MatrixXd* J,
                                 Eigen::VectorXd* h) const {
  Eigen::MatrixXd V0inv = robust_llt(hypers.eta.V0).solve(
      Eigen::MatrixXd::Identity(M + 1, M + 1));
  *J = V0inv + obs_rows[n].J;
  *h = V0inv * hypers.eta.M0.row(n).transpose() + obs_rows[n].h;
}

Eigen::MatrixXd VariationalState::q_pi_mean() const {
  Eigen::MatrixXd pi(K, K);
  for (int i = 0; i < K; ++i) {
    Eigen::VectorXd a =
        hypers.alpha.alpha + trans_counts.row(i).transpose();
    pi.row(i) = (a / a.sum()).transpose();
  }
  return pi;
}

ModelParams VariationalState::point_estimate() const {
  ModelParams p;
  p.K = K;
  p.M = M;
  p.N = N;
  p.variant = variant;
  p.emission_family = family;
  for (int k = 0; k < K; ++k) {
    MNIWParams q = q_dyn(k);
    p.A.push_back(q.M0.leftCols(M));
    p.b.push_back(q.M0.col(M));
    p.Q.push_back(symmetrize(q.S0 / std::max(q.n0 - M - 1.0, 1.0)));
  }
  if (variant == VariantTag::RecurrentARHMM) {
    p.C = Eigen::MatrixXd::Identity(M, M);
    p.d = Eigen::VectorXd::Zero(M);
    p.S = Eigen::MatrixXd::Zero(M, M);
  } else if (family == EmissionFamily::Gaussian) {
    MNIWParams q = q_obs();
    p.C = q.M0.leftCols(M);
    p.d = q.M0.col(M);
    p.S = symmetrize(q.S0 / std::max(q.n0 - N - 1.0, 1.0));
  } else {
    p.C = Eigen::MatrixXd(N, M);
    p.d = Eigen::VectorXd(N);
    for (int n = 0; n < N; ++n) {
      Eigen::MatrixXd J;
      Eigen::VectorXd h;
      q_obs_row(n, &J, &h);
      Eigen::VectorXd w = robust_llt(J).solve(h);
      p.C.row(n) = w.head(M).transpose();
      p.d(n) = w(M);
    }
  }
  if (variant == VariantTag::StandardSLDS) {
    p.pi = q_pi_mean();
  } else {
    const int G = rec_groups();
    for (int g = 0; g < G; ++g) {
      Eigen::MatrixXd R(K - 1, M);
      Eigen::VectorXd r(K - 1);
      for (int k = 0; k < K - 1; ++k) {
        Eigen::MatrixXd J;
        Eigen::VectorXd h;
        q_rec_row(g, k, &J, &h);
        Eigen::VectorXd w = robust_llt(J).solve(h);
        R.row(k) = w.head(M).transpose();
        r(k) = w(M);
      }
      p.R.push_back(R);
      p.r.push_back(r);
    }
  }
  p.validate();
  return p;
}

VariationalState make_variational(const Hyperparams& hypers, int K, int M,
                                  int N, VariantTag variant,
                                  EmissionFamily family) {
  if (variant == VariantTag::SharedRSLDS ||
      variant == VariantTag::RecurrentSticky)
    throw std::invalid_argument(
        "make_variational: variant not supported by the mean-field family");
  VariationalState vs;
  vs.K = K;
  vs.M = M;
  vs.N = (variant == VariantTag::RecurrentARHMM) ? M : N;
  vs.variant = variant;
  vs.family = family;
  vs.hypers = hypers;
  vs.dyn.assign(K, FactorStats::zero(M, M + 1));
  vs.obs = FactorStats::zero(vs.N, M + 1);
  if (family == EmissionFamily::Bernoulli)
    vs.obs_rows.assign(vs.N, RowStats::zero(M + 1));
  const int G = vs.rec_groups();
  vs.rec.assign(G, std::vector<RowStats>(std::max(K - 1, 0),
                                         RowStats::zero(M + 1)));
  if (variant == VariantTag::StandardSLDS)
    vs.trans_counts = Eigen::MatrixXd::Zero(K, K);
  return vs;
}

namespace {

int group_of(const VariationalState& vs, int state) {
  return vs.rec_groups() == 1 ? 0 : state;
}

// First two moments of recurrence row (group, stick).
void rec_row_moments(const VariationalState& vs, int g, int k,
                     Eigen::VectorXd* mean, Eigen::MatrixXd* second) {
  Eigen::MatrixXd J;
  Eigen::VectorXd h;
  vs.q_rec_row(g, k, &J, &h);
  auto llt = robust_llt(J);
  *mean = llt.solve(h);
  Eigen::MatrixXd cov =
      llt.solve(Eigen::MatrixXd::Identity(J.rows(), J.cols()));
  *second = cov + (*mean) * mean->transpose();
}

void obs_row_moments(const VariationalState& vs, int n, Eigen::VectorXd* mean,
                     Eigen::MatrixXd* second) {
  Eigen::MatrixXd J;
  Eigen::VectorXd h;
  vs.q_obs_row(n, &J, &h);
  auto llt = robust_llt(J);
  *mean = llt.solve(h);
  Eigen::MatrixXd cov =
      llt.solve(Eigen::MatrixXd::Identity(J.rows(), J.cols()));
  *second = cov + (*mean) * mean->transpose();
}

// Degenerate q(x) for the AR-HMM (continuous states observed).
SmootherMoments observed_qx(const Dataset& data) {
  const int T = data.T(), M = data.N();
  SmootherMoments qx;
  qx.mean.resize(T);
  qx.cov.assign(T, Eigen::MatrixXd::Zero(M, M));
  qx.cross.resize(T - 1);
  for (int t = 0; t < T; ++t) qx.mean[t] = data.y.row(t).transpose();
  for (int t = 0; t + 1 < T; ++t)
    qx.cross[t] = qx.mean[t] * qx.mean[t + 1].transpose();
  qx.logdet_precision = 0.0;
  return qx;
}

}  // namespace

void update_qz(const VariationalState& vs, const Dataset& data, LocalState& ls,
               int mc_pisb, RandomStream& rng) {
  const int T = data.T(), K = vs.K, M = vs.M;
  DiscreteChainSpec spec = DiscreteChainSpec::uniform(T, K);
  if (K == 1) {
    ls.zspec = spec;
    ls.qz = hmm_marginals(spec);
    ls.zhat.assign(T, 0);
    return;
  }

  std::vector<MniwMoments> dynm;
  for (int k = 0; k < K; ++k) dynm.push_back(mniw_moments(vs.q_dyn(k)));

  Eigen::MatrixXd elogpi;
  if (vs.variant == VariantTag::StandardSLDS) {
    elogpi = Eigen::MatrixXd(K, K);
    for (int i = 0; i < K; ++i) {
      Eigen::VectorXd a =
          vs.hypers.alpha.alpha + vs.trans_counts.row(i).transpose();
      double total = digamma(a.sum());
      for (int j = 0; j < K; ++j) elogpi(i, j) = digamma(a(j)) - total;
    }
  }

  for (int t = 0; t + 1 < T; ++t) {
    Eigen::MatrixXd Euu = euu(ls.qx, t);
    Eigen::MatrixXd Exn_u(M, M + 1);  // E[x_{t+1} u_t']
    Exn_u.leftCols(M) = ls.qx.cross[t].transpose();
    Exn_u.col(M) = ls.qx.mean[t + 1];
    Eigen::MatrixXd Exnxn =
        ls.qx.cov[t + 1] + ls.qx.mean[t + 1] * ls.qx.mean[t + 1].transpose();

    Eigen::VectorXd psi_dyn(K);
    for (int j = 0; j < K; ++j)
      psi_dyn(j) = -0.5 * (dynm[j].EWtEinvW.cwiseProduct(Euu)).sum() +
                   (dynm[j].Einv * dynm[j].EW).cwiseProduct(Exn_u).sum() -
                   0.5 * (dynm[j].Einv.cwiseProduct(Exnxn)).sum() +
                   0.5 * dynm[j].Elogdetinv - 0.5 * M * kLog2Pi;

    if (vs.variant == VariantTag::StandardSLDS) {
      for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
          spec.log_trans[t](i, j) = elogpi(i, j) + psi_dyn(j);
      continue;
    }

    // Monte Carlo E[ln piSB(nu)] over x_t and the recurrence rows
    Eigen::LLT<Eigen::MatrixXd> xllt =
        robust_llt(ls.qx.cov[t] +
                   1e-12 * Eigen::MatrixXd::Identity(M, M));
    Eigen::MatrixXd xL = xllt.matrixL();
    for (int i = 0; i < K; ++i) {
      int g = group_of(vs, i);
      Eigen::VectorXd psi_rec = Eigen::VectorXd::Zero(K);
      for (int s = 0; s < mc_pisb; ++s) {
        Eigen::VectorXd xs = ls.qx.mean[t] + xL * rng.normal_vector(M);
        Eigen::VectorXd u(M + 1);
        u.head(M) = xs;
        u(M) = 1.0;
        Eigen::VectorXd nu(K - 1);
        for (int k = 0; k < K - 1; ++k) {
          Eigen::MatrixXd J;
          Eigen::VectorXd h;
          vs.q_rec_row(g, k, &J, &h);
          auto llt = robust_llt(J);
          Eigen::VectorXd mean = llt.solve(h);
          // draw the row from its Gaussian factor
          Eigen::MatrixXd L = Eigen::MatrixXd(llt.matrixL());
          Eigen::VectorXd w =
              mean + L.transpose()
                         .triangularView<Eigen::Upper>()
                         .solve(rng.normal_vector(M + 1));
          nu(k) = w.dot(u);
        }
        for (int j = 0; j < K; ++j) psi_rec(j) += sb_log_pmf(j, nu);
      }
      psi_rec /= mc_pisb;
      for (int j = 0; j < K; ++j)
        spec.log_trans[t](i, j) = psi_rec(j) + psi_dyn(j);
    }
  }

  ls.zspec = spec;
  ls.qz = hmm_marginals(spec);
  ls.zhat = ffbs_discrete(spec, rng);
}

void update_qomega(const VariationalState& vs, const Dataset& data,
                   LocalState& ls) {
  const int T = data.T(), K = vs.K, M = vs.M;
  if (vs.variant == VariantTag::StandardSLDS) {
    ls.eomega.resize(T - 1, 0);
  } else {
    ls.eomega = Eigen::MatrixXd::Zero(T - 1, K - 1);
    for (int t = 0; t + 1 < T; ++t) {
      int g = group_of(vs, ls.zhat[t]);
      Eigen::MatrixXd Euu = euu(ls.qx, t);
      for (int k = 0; k < K - 1; ++k) {
        if (ls.zhat[t + 1] < k) continue;  // inactive stick
        Eigen::VectorXd mean;
        Eigen::MatrixXd second;
        rec_row_moments(vs, g, k, &mean, &second);
        double enu2 = (second.cwiseProduct(Euu)).sum();
        if (enu2 < -1e-9)
          throw std::runtime_error("update_qomega: negative E[nu^2]");
        ls.eomega(t, k) =
            pg_mean(PolyaGammaParams{1, std::sqrt(std::max(enu2, 0.0))});
      }
    }
  }
  if (vs.family == EmissionFamily::Bernoulli) {
    ls.exi = Eigen::MatrixXd::Zero(T, vs.N);
    for (int t = 0; t < T; ++t) {
      if (!data.observed(t)) continue;
      Eigen::MatrixXd Euu = euu(ls.qx, t);
      for (int n = 0; n < vs.N; ++n) {
        Eigen::VectorXd mean;
        Eigen::MatrixXd second;
        obs_row_moments(vs, n, &mean, &second);
        double enu2 = (second.cwiseProduct(Euu)).sum();
        ls.exi(t, n) =
            pg_mean(PolyaGammaParams{1, std::sqrt(std::max(enu2, 0.0))});
      }
    }
  }
  (void)M;
}

void update_qx(const VariationalState& vs, const Dataset& data,
               LocalState& ls) {
  const int T = data.T(), K = vs.K, M = vs.M;
  if (vs.variant == VariantTag::RecurrentARHMM) {
    ls.qx = observed_qx(data);
    return;
  }
  GaussianChainSpec spec = GaussianChainSpec::empty(T, M);
  spec.add_unary(0, GaussianInfo{Eigen::MatrixXd::Identity(M, M),
                                 Eigen::VectorXd::Zero(M), 0.0});

  // emissions
  if (vs.family == EmissionFamily::Gaussian) {
    MniwMoments em = mniw_moments(vs.q_obs());
    Eigen::MatrixXd Jx = em.EWtEinvW.topLeftCorner(M, M);
    for (int t = 0; t < T; ++t) {
      if (!data.observed(t)) continue;
      Eigen::VectorXd y = data.y.row(t).transpose();
      Eigen::VectorXd h = (y.transpose() * em.Einv * em.EW)
                              .transpose()
                              .head(M) -
                          em.EWtEinvW.block(0, M, M, 1);
      spec.add_unary(t, GaussianInfo{Jx, h, 0.0});
    }
  } else {
    for (int t = 0; t < T; ++t) {
      if (!data.observed(t)) continue;
      GaussianInfo g = GaussianInfo::zero(M);
      for (int n = 0; n < vs.N; ++n) {
        Eigen::VectorXd mean;
        Eigen::MatrixXd second;
        obs_row_moments(vs, n, &mean, &second);
        double xi = ls.exi(t, n);
        g.J += xi * second.topLeftCorner(M, M);
        g.h += (data.y(t, n) - 0.5) * mean.head(M) -
               xi * second.block(0, M, M, 1);
      }
      spec.add_unary(t, g);
    }
  }

  // recurrence potentials mixed over q(z)
  if (vs.variant != VariantTag::StandardSLDS && K > 1) {
    for (int t = 0; t + 1 < T; ++t) {
      GaussianInfo g = GaussianInfo::zero(M);
      for (int i = 0; i < K; ++i) {
        double qi = ls.qz.unary(t, i);
        if (qi < 1e-12) continue;
        int grp = group_of(vs, i);
        for (int k = 0; k < K - 1; ++k) {
          Eigen::VectorXd mean;
          Eigen::MatrixXd second;
          rec_row_moments(vs, grp, k, &mean, &second);
          double om = ls.eomega(t, k);
          double kap = 0.0;  // E[kappa_k(z_{t+1}) | z_t = i]
          for (int j = 0; j < K; ++j)
            kap += ls.qz.pairwise[t](i, j) / qi * sb_kappa(j, K)(k);
          g.J += qi * om * second.topLeftCorner(M, M);
          g.h += qi * (kap * mean.head(M) - om * second.block(0, M, M, 1));
        }
      }
      spec.add_unary(t, g);
    }
  }

  // dynamics pairwise potentials mixed over q(z_{t+1})
  std::vector<MniwMoments> dynm;
  for (int k = 0; k < K; ++k) dynm.push_back(mniw_moments(vs.q_dyn(k)));
  for (int t = 0; t + 1 < T; ++t) {
    PairwisePotential pw;
    pw.J11 = Eigen::MatrixXd::Zero(M, M);
    pw.J12 = Eigen::MatrixXd::Zero(M, M);
    pw.J22 = Eigen::MatrixXd::Zero(M, M);
    pw.h1 = Eigen::VectorXd::Zero(M);
    pw.h2 = Eigen::VectorXd::Zero(M);
    for (int j = 0; j < K; ++j) {
      double gj = ls.qz.unary(t + 1, j);
      if (gj < 1e-15) continue;
      const MniwMoments& m = dynm[j];
      pw.J11 += gj * m.EWtEinvW.topLeftCorner(M, M);
      pw.J12 += -gj * m.EW.leftCols(M).transpose() * m.Einv;
      pw.J22 += gj * m.Einv;
      pw.h1 += -gj * m.EWtEinvW.block(0, M, M, 1);
      pw.h2 += gj * m.Einv * m.EW.col(M);
      pw.log_normalizer +=
          gj * (0.5 * m.Elogdetinv - 0.5 * M * kLog2Pi -
                0.5 * m.EWtEinvW(M, M));
    }
    spec.pairwise[t] = pw;
  }

  ls.xspec = spec;
  ls.qx = smoother_moments(spec);
}

SequenceStats collect_stats(const VariationalState& vs, const Dataset& data,
                            const LocalState& ls) {
  const int T = data.T(), K = vs.K, M = vs.M;
  SequenceStats st;
  st.dyn.assign(K, FactorStats::zero(M, M + 1));
  st.obs = FactorStats::zero(vs.N, M + 1);
  if (vs.family == EmissionFamily::Bernoulli)
    st.obs_rows.assign(vs.N, RowStats::zero(M + 1));
  const int G = vs.rec_groups();
  st.rec.assign(G, std::vector<RowStats>(std::max(K - 1, 0),
                                         RowStats::zero(M + 1)));
  if (vs.variant == VariantTag::StandardSLDS)
    st.trans_counts = Eigen::MatrixXd::Zero(K, K);

  for (int t = 0; t + 1 < T; ++t) {
    Eigen::MatrixXd Euu = euu(ls.qx, t);
    Eigen::MatrixXd Exn_u(M, M + 1);
    Exn_u.leftCols(M) = ls.qx.cross[t].transpose();
    Exn_u.col(M) = ls.qx.mean[t + 1];
    Eigen::MatrixXd Exnxn =
        ls.qx.cov[t + 1] + ls.qx.mean[t + 1] * ls.qx.mean[t + 1].transpose();
    for (int j = 0; j < K; ++j) {
      double gj = ls.qz.unary(t + 1, j);
      st.dyn[j].sxx += gj * Euu;
      st.dyn[j].syx += gj * Exn_u;
      st.dyn[j].syy += gj * Exnxn;
      st.dyn[j].n += gj;
    }
    if (vs.variant == VariantTag::StandardSLDS) {
      st.trans_counts += ls.qz.pairwise[t];
    } else if (K > 1) {
      for (int i = 0; i < K; ++i) {
        double qi = ls.qz.unary(t, i);
        if (qi < 1e-12) continue;
        int g = group_of(vs, i);
        for (int k = 0; k < K - 1; ++k) {
          double kap = 0.0;
          for (int j = 0; j < K; ++j)
            kap += ls.qz.pairwise[t](i, j) / qi * sb_kappa(j, K)(k);
          st.rec[g][k].J += qi * ls.eomega(t, k) * Euu;
          st.rec[g][k].h += qi * kap * eu(ls.qx, t);
        }
      }
    }
  }

  if (vs.variant != VariantTag::RecurrentARHMM) {
    for (int t = 0; t < T; ++t) {
      if (!data.observed(t)) continue;
      Eigen::MatrixXd Euu = euu(ls.qx, t);
      Eigen::VectorXd Eu = eu(ls.qx, t);
      if (vs.family == EmissionFamily::Gaussian) {
        Eigen::VectorXd y = data.y.row(t).transpose();
        st.obs.sxx += Euu;
        st.obs.syx += y * Eu.transpose();
        st.obs.syy += y * y.transpose();
        st.obs.n += 1.0;
      } else {
        for (int n = 0; n < vs.N; ++n) {
          st.obs_rows[n].J += ls.exi(t, n) * Euu;
          st.obs_rows[n].h += (data.y(t, n) - 0.5) * Eu;
        }
      }
    }
  }
  return st;
}

void update_qtheta(VariationalState& vs, const SequenceStats& batch,
                   double rho, double scale) {
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("update_qtheta: step size outside [0, 1]");
  auto blend_f = [&](FactorStats& cur, const FactorStats& in) {
    cur.syy = (1.0 - rho) * cur.syy + rho * scale * in.syy;
    cur.syx = (1.0 - rho) * cur.syx + rho * scale * in.syx;
    cur.sxx = (1.0 - rho) * cur.sxx + rho * scale * in.sxx;
    cur.n = (1.0 - rho) * cur.n + rho * scale * in.n;
  };
  auto blend_r = [&](RowStats& cur, const RowStats& in) {
    cur.J = (1.0 - rho) * cur.J + rho * scale * in.J;
    cur.h = (1.0 - rho) * cur.h + rho * scale * in.h;
  };
  for (int k = 0; k < vs.K; ++k) blend_f(vs.dyn[k], batch.dyn[k]);
  if (vs.family == EmissionFamily::Gaussian &&
      vs.variant != VariantTag::RecurrentARHMM)
    blend_f(vs.obs, batch.obs);
  for (std::size_t n = 0; n < vs.obs_rows.size(); ++n)
    blend_r(vs.obs_rows[n], batch.obs_rows[n]);
  for (int g = 0; g < vs.rec_groups(); ++g)
    for (int k = 0; k + 1 < vs.K; ++k) blend_r(vs.rec[g][k], batch.rec[g][k]);
  if (vs.variant == VariantTag::StandardSLDS)
    vs.trans_counts = (1.0 - rho) * vs.trans_counts +
                      rho * scale * batch.trans_counts;
}

double elbo_estimate(const VariationalState& vs, const Dataset& data,
                     const LocalState& ls, int n_samples, RandomStream& rng) {
  const int T = data.T(), K = vs.K, M = vs.M;
  ModelParams point = vs.point_estimate();

  double hz = 0.0;
  auto xlogx = [](double p) { return p > 1e-300 ? p * std::log(p) : 0.0; };
  for (int k = 0; k < K; ++k) hz -= xlogx(ls.qz.unary(0, k));
  for (int t = 0; t + 1 < T; ++t)
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) {
        double p = ls.qz.pairwise[t](i, j);
        if (p > 1e-300)
          hz -= p * std::log(p / std::max(ls.qz.unary(t, i), 1e-300));
      }

  double hx = 0.0;
  if (!point.observes_x())
    hx = 0.5 * (T * M * (kLog2Pi + 1.0) - ls.qx.logdet_precision);

  double mean_score = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    LatentPath path;
    path.z = ffbs_discrete(ls.zspec, rng);
    if (point.observes_x()) {
      path.x = data.y;
    } else {
      auto xs = ffbs_continuous(ls.xspec, rng);
      path.x = Eigen::MatrixXd(T, M);
      for (int t = 0; t < T; ++t) path.x.row(t) = xs[t].transpose();
    }
    mean_score += score_joint(point, path, data);
  }
  mean_score /= n_samples;
  return mean_score + hx + hz;
}

LocalState local_pass(const VariationalState& vs, const Dataset& data,
                      const SviConfig& config, RandomStream& rng) {
  const int T = data.T(), K = vs.K;
  LocalState ls;
  // neutral starting point: uniform q(z), PG(1, 0) expectations
  ls.qz.unary = Eigen::MatrixXd::Constant(T, K, 1.0 / K);
  ls.qz.pairwise.assign(T - 1, Eigen::MatrixXd::Constant(K, K, 1.0 / (K * K)));
  ls.zhat.assign(T, 0);
  for (int t = 0; t < T; ++t) ls.zhat[t] = rng.uniform_int(K);
  ls.eomega = Eigen::MatrixXd::Constant(T - 1, std::max(K - 1, 0), 0.25);
  if (vs.family == EmissionFamily::Bernoulli)
    ls.exi = Eigen::MatrixXd::Constant(T, vs.N, 0.25);

  for (int it = 0; it < config.inner_iters; ++it) {
    update_qx(vs, data, ls);
    update_qz(vs, data, ls, config.mc_pisb, rng);
    update_qomega(vs, data, ls);
  }
  update_qx(vs, data, ls);
  return ls;
}

std::vector<double> run_svi(VariationalState& vs,
                            const std::vector<Dataset>& sequences,
                            const SviConfig& config) {
  if (sequences.empty())
    throw std::invalid_argument("run_svi: no sequences");
  RandomStream rng(config.seed);
  const int S = static_cast<int>(sequences.size());
  int B = config.minibatch > 0 ? std::min(config.minibatch, S) : S;

  std::ofstream trace;
  if (!config.elbo_trace.empty()) {
    trace.open(config.elbo_trace);
    if (!trace)
      throw std::runtime_error("run_svi: cannot open " + config.elbo_trace);
    trace << "iteration,elbo,step_size,minibatch_ids\n";
  }

  std::vector<double> elbos;
  for (int it = 0; it < config.n_iters; ++it) {
    double rho = config.forced_rate > 0.0
                     ? config.forced_rate
                     : std::pow(it + 1.0, -config.decay);
    std::vector<int> ids;
    if (B == S) {
      ids.resize(S);
      std::iota(ids.begin(), ids.end(), 0);
    } else {
      for (int i = 0; i < B; ++i) ids.push_back(rng.uniform_int(S));
    }

    SequenceStats batch;
    double elbo = 0.0;
    bool first = true;
    for (int id : ids) {
      LocalState ls = local_pass(vs, sequences[id], config, rng);
      SequenceStats st = collect_stats(vs, sequences[id], ls);
      elbo += elbo_estimate(vs, sequences[id], ls, config.elbo_samples, rng) *
              (double(S) / B);
      if (first) {
        batch = std::move(st);
        first = false;
      } else {
        for (int k = 0; k < vs.K; ++k) batch.dyn[k] += st.dyn[k];
        batch.obs += st.obs;
        for (std::size_t n = 0; n < batch.obs_rows.size(); ++n)
          batch.obs_rows[n] += st.obs_rows[n];
        for (std::size_t g = 0; g < batch.rec.size(); ++g)
          for (std::size_t k = 0; k < batch.rec[g].size(); ++k)
            batch.rec[g][k] += st.rec[g][k];
        if (vs.variant == VariantTag::StandardSLDS)
          batch.trans_counts += st.trans_counts;
      }
    }
    update_qtheta(vs, batch, rho, double(S) / B);
    elbos.push_back(elbo);
    if (trace.is_open()) {
      trace << it << "," << elbo << "," << rho << ",";
      for (std::size_t i = 0; i < ids.size(); ++i)
        trace << (i ? ";" : "") << ids[i];
      trace << "\n";
    }
  }
  return elbos;
}

}  // namespace rslds
