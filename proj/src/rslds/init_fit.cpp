#include "init_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "messages.hpp"
#include "numeric.hpp"
#include "serialize.hpp"
#include "stickbreak.hpp"

namespace rslds {

namespace {

// Window-5 moving-average rates mapped through the logit, centered later
// by the PPCA mean estimate.
Eigen::MatrixXd bernoulli_surrogate(const Eigen::MatrixXd& y) {
  const int T = static_cast<int>(y.rows()), N = static_cast<int>(y.cols());
  const int half = 2;
  Eigen::MatrixXd out(T, N);
  for (int t = 0; t < T; ++t) {
    int lo = std::max(0, t - half), hi = std::min(T - 1, t + half);
    for (int n = 0; n < N; ++n) {
      double rate = y.block(lo, n, hi - lo + 1, 1).mean();
      double eps = 1.0 / (hi - lo + 2);
      rate = std::min(std::max(rate, eps), 1.0 - eps);
      out(t, n) = std::log(rate / (1.0 - rate));
    }
  }
  return out;
}

}  // namespace

PpcaResult ppca_init(const Dataset& data, int M) {
  const int T = data.T(), N = data.N();
  if (T < M) throw std::invalid_argument("ppca_init: fewer steps than factors");
  if (M > N) throw std::invalid_argument("ppca_init: more factors than outputs");
  Eigen::MatrixXd Y = data.emission_family == EmissionFamily::Bernoulli
                          ? bernoulli_surrogate(data.y)
                          : data.y;

  std::vector<int> obs;
  for (int t = 0; t < T; ++t)
    if (data.observed(t)) obs.push_back(t);
  if (static_cast<int>(obs.size()) < M + 1)
    throw std::invalid_argument("ppca_init: too few observed rows");

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(N);
  for (int t : obs) mean += Y.row(t).transpose();
  mean /= obs.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(N, N);
  for (int t : obs) {
    Eigen::VectorXd r = Y.row(t).transpose() - mean;
    cov += r * r.transpose();
  }
  cov /= obs.size();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  // eigenvalues ascending; take the top M
  Eigen::VectorXd evals = es.eigenvalues().reverse();
  Eigen::MatrixXd evecs = es.eigenvectors().rowwise().reverse();
  double sigma2 = 0.0;
  if (M < N) sigma2 = evals.tail(N - M).mean();
  sigma2 = std::max(sigma2, 1e-12);

  PpcaResult res;
  res.d = mean;
  res.C = Eigen::MatrixXd(N, M);
  for (int j = 0; j < M; ++j)
    res.C.col(j) =
        evecs.col(j) * std::sqrt(std::max(evals(j) - sigma2, 1e-12));
  res.S = sigma2 * Eigen::MatrixXd::Identity(N, N);

  // posterior means: (C'C + sigma2 I)^-1 C' (y - d)
  Eigen::MatrixXd G =
      res.C.transpose() * res.C + sigma2 * Eigen::MatrixXd::Identity(M, M);
  Eigen::LDLT<Eigen::MatrixXd> solver(G);
  res.x = Eigen::MatrixXd::Zero(T, M);
  for (int t : obs)
    res.x.row(t) =
        solver.solve(res.C.transpose() * (Y.row(t).transpose() - mean))
            .transpose();

  // masked rows: linear interpolation between the nearest observed latents
  int prev = -1;
  for (std::size_t i = 0; i <= obs.size(); ++i) {
    int next = (i < obs.size()) ? obs[i] : T;
    for (int t = prev + 1; t < next && t < T; ++t) {
      if (prev < 0)
        res.x.row(t) = res.x.row(next);
      else if (next >= T)
        res.x.row(t) = res.x.row(prev);
      else {
        double a = double(t - prev) / (next - prev);
        res.x.row(t) = (1.0 - a) * res.x.row(prev) + a * res.x.row(next);
      }
    }
    prev = next;
  }
  return res;
}

namespace {

// Weighted least squares of x_{t+1} on [x_t; 1] with responsibilities w.
void weighted_dynamics(const Eigen::MatrixXd& x, const Eigen::VectorXd& w,
                       Eigen::MatrixXd* A, Eigen::VectorXd* b,
                       Eigen::MatrixXd* Q) {
  const int T = static_cast<int>(x.rows()), M = static_cast<int>(x.cols());
  Eigen::MatrixXd sxx = 1e-8 * Eigen::MatrixXd::Identity(M + 1, M + 1);
  Eigen::MatrixXd syx = Eigen::MatrixXd::Zero(M, M + 1);
  double wsum = 0.0;
  for (int t = 0; t + 1 < T; ++t) {
    Eigen::VectorXd u(M + 1);
    u.head(M) = x.row(t).transpose();
    u(M) = 1.0;
    sxx += w(t) * (u * u.transpose());
    syx += w(t) * (x.row(t + 1).transpose() * u.transpose());
    wsum += w(t);
  }
  Eigen::MatrixXd W = sxx.ldlt().solve(syx.transpose()).transpose();
  *A = W.leftCols(M);
  *b = W.col(M);
  Eigen::MatrixXd resid = 1e-9 * Eigen::MatrixXd::Identity(M, M);
  for (int t = 0; t + 1 < T; ++t) {
    Eigen::VectorXd u(M + 1);
    u.head(M) = x.row(t).transpose();
    u(M) = 1.0;
    Eigen::VectorXd r = x.row(t + 1).transpose() - W * u;
    resid += w(t) * (r * r.transpose());
  }
  *Q = symmetrize(resid / std::max(wsum, 1e-12));
  Q->diagonal().array() += 1e-9;
}

std::vector<int> viterbi(const DiscreteChainSpec& spec) {
  const int T = spec.T, K = spec.K;
  Eigen::MatrixXd delta(T, K);
  Eigen::MatrixXi arg = Eigen::MatrixXi::Zero(T, K);
  delta.row(0) = (spec.log_init + spec.log_unary.row(0).transpose()).transpose();
  for (int t = 1; t < T; ++t)
    for (int j = 0; j < K; ++j) {
      int best = 0;
      double bestv = -1e300;
      for (int i = 0; i < K; ++i) {
        double v = delta(t - 1, i) + spec.log_trans[t - 1](i, j);
        if (v > bestv) {
          bestv = v;
          best = i;
        }
      }
      delta(t, j) = bestv + spec.log_unary(t, j);
      arg(t, j) = best;
    }
  std::vector<int> z(T);
  int cur;
  delta.row(T - 1).maxCoeff(&cur);
  z[T - 1] = cur;
  for (int t = T - 1; t > 0; --t) z[t - 1] = cur = arg(t, cur);
  return z;
}

}  // namespace

namespace {

ArhmmResult arhmm_em(const Eigen::MatrixXd& x, int K, int n_iters,
                     Eigen::MatrixXd gamma, const Eigen::VectorXd& w) {
  const int T = static_cast<int>(x.rows());
  ArhmmResult res;
  res.A.resize(K);
  res.b.resize(K);
  res.Q.resize(K);
  // Sticky start and sticky pseudo-counts: without a persistence bias EM
  // reliably converges to chattering states that differ only in noise
  // scale, a local optimum with *lower* likelihood than the persistent
  // segmentation it can no longer reach. The bias is 1% of the
  // transition count so long sequences stay data-dominated.
  const double diag_pseudo = std::max(1.0, 0.01 * (T - 1));
  res.pi = K > 1 ? Eigen::MatrixXd::Constant(K, K, 0.1 / (K - 1))
                 : Eigen::MatrixXd::Ones(1, 1);
  res.pi.diagonal().setConstant(K > 1 ? 0.9 : 1.0);

  for (int iter = 0; iter < n_iters; ++iter) {
    // M-step
    for (int k = 0; k < K; ++k)
      weighted_dynamics(x, gamma.col(k).cwiseProduct(w), &res.A[k],
                        &res.b[k], &res.Q[k]);

    // E-step
    DiscreteChainSpec spec = DiscreteChainSpec::uniform(T - 1, K);
    for (int t = 0; t + 2 < T; ++t)
      for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
          spec.log_trans[t](i, j) = std::log(res.pi(i, j));
    // node t of the chain is z_{t+1}, whose likelihood factor is the
    // step x_t -> x_{t+1}; down-weighted steps carry no evidence
    for (int t = 0; t + 1 < T; ++t)
      for (int k = 0; k < K; ++k)
        spec.log_unary(t, k) =
            w(t) * gaussian_log_density(
                       x.row(t + 1).transpose(),
                       res.A[k] * x.row(t).transpose() + res.b[k], res.Q[k]);
    HmmMarginals marg = hmm_marginals(spec);
    res.loglik.push_back(marg.log_partition);
    gamma = marg.unary;

    Eigen::MatrixXd counts = Eigen::MatrixXd::Constant(K, K, 1e-3);
    counts.diagonal().array() += diag_pseudo;
    for (const auto& pw : marg.pairwise) counts += pw;
    for (int i = 0; i < K; ++i) res.pi.row(i) = counts.row(i) / counts.row(i).sum();

    if (res.loglik.size() > 1 &&
        std::fabs(res.loglik.back() - res.loglik[res.loglik.size() - 2]) <
            1e-10 * (1.0 + std::fabs(res.loglik.back())))
      break;
  }

  // Viterbi over the same chain with the final parameters
  DiscreteChainSpec spec = DiscreteChainSpec::uniform(T - 1, K);
  for (int t = 0; t + 2 < T; ++t)
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j)
        spec.log_trans[t](i, j) = std::log(res.pi(i, j));
  for (int t = 0; t + 1 < T; ++t)
    for (int k = 0; k < K; ++k)
      spec.log_unary(t, k) =
          w(t) * gaussian_log_density(
                     x.row(t + 1).transpose(),
                     res.A[k] * x.row(t).transpose() + res.b[k], res.Q[k]);
  std::vector<int> ztail = viterbi(spec);
  res.z.resize(T);
  res.z[0] = ztail.empty() ? 0 : ztail[0];
  for (int t = 0; t + 1 < T; ++t) res.z[t + 1] = ztail[t];
  return res;
}

// Labels each transition t -> t+1 by k-means over the coefficients of
// local linear regressions fit on sliding windows of length L. Windows
// summarize the local dynamics law rather than the position, so the
// clusters track the true regimes and give EM a start in the right
// basin (plain random responsibilities tend to converge to states that
// differ only in noise scale).
std::vector<int> window_regression_labels(const Eigen::MatrixXd& x, int K,
                                          int L, RandomStream& rng) {
  const int T = static_cast<int>(x.rows()), M = static_cast<int>(x.cols());
  const int n = T - L;  // window starting at s covers steps s..s+L
  const int P = M * (M + 1);
  Eigen::MatrixXd F(n, P);
  for (int s = 0; s < n; ++s) {
    Eigen::MatrixXd sxx = 1e-8 * Eigen::MatrixXd::Identity(M + 1, M + 1);
    Eigen::MatrixXd syx = Eigen::MatrixXd::Zero(M, M + 1);
    for (int t = s; t < s + L; ++t) {
      Eigen::VectorXd u(M + 1);
      u.head(M) = x.row(t).transpose();
      u(M) = 1.0;
      sxx += u * u.transpose();
      syx += x.row(t + 1).transpose() * u.transpose();
    }
    Eigen::MatrixXd W = sxx.ldlt().solve(syx.transpose()).transpose();
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M + 1; ++j) F(s, i * (M + 1) + j) = W(i, j);
  }
  for (int j = 0; j < P; ++j) {
    double mu = F.col(j).mean();
    double sd = std::sqrt((F.col(j).array() - mu).square().mean()) + 1e-12;
    F.col(j) = (F.col(j).array() - mu) / sd;
  }

  // k-means++ with a handful of restarts
  std::vector<int> bestlab(n, 0);
  double bestcost = std::numeric_limits<double>::infinity();
  for (int rs = 0; rs < 10; ++rs) {
    Eigen::MatrixXd C(K, P);
    C.row(0) = F.row(rng.uniform_int(n));
    for (int k = 1; k < K; ++k) {
      Eigen::VectorXd d2(n);
      for (int s = 0; s < n; ++s) {
        double b = std::numeric_limits<double>::infinity();
        for (int q = 0; q < k; ++q)
          b = std::min(b, (F.row(s) - C.row(q)).squaredNorm());
        d2(s) = b;
      }
      double u = rng.uniform() * d2.sum(), acc = 0.0;
      int pick = n - 1;
      for (int s = 0; s < n; ++s) {
        acc += d2(s);
        if (acc >= u) {
          pick = s;
          break;
        }
      }
      C.row(k) = F.row(pick);
    }
    std::vector<int> lab(n);
    double cost = 0.0;
    for (int it = 0; it < 50; ++it) {
      cost = 0.0;
      for (int s = 0; s < n; ++s) {
        double b = std::numeric_limits<double>::infinity();
        int bi = 0;
        for (int k = 0; k < K; ++k) {
          double v = (F.row(s) - C.row(k)).squaredNorm();
          if (v < b) {
            b = v;
            bi = k;
          }
        }
        lab[s] = bi;
        cost += b;
      }
      Eigen::MatrixXd nc = Eigen::MatrixXd::Zero(K, P);
      Eigen::VectorXd cnt = Eigen::VectorXd::Zero(K);
      for (int s = 0; s < n; ++s) {
        nc.row(lab[s]) += F.row(s);
        cnt(lab[s]) += 1.0;
      }
      for (int k = 0; k < K; ++k)
        if (cnt(k) > 0) C.row(k) = nc.row(k) / cnt(k);
    }
    if (cost < bestcost) {
      bestcost = cost;
      bestlab = lab;
    }
  }

  // transition t belongs to the window centered closest to it
  std::vector<int> z(T - 1);
  for (int t = 0; t + 1 < T; ++t)
    z[t] = bestlab[std::clamp(t - L / 2, 0, n - 1)];
  return z;
}

}  // namespace

ArhmmResult arhmm_init(const Eigen::MatrixXd& x, int K, int n_iters,
                       const std::vector<double>& trans_weight) {
  const int T = static_cast<int>(x.rows()), M = static_cast<int>(x.cols());
  if (K < 1 || T < 2) throw std::invalid_argument("arhmm_init: bad input");
  if (!trans_weight.empty() &&
      static_cast<int>(trans_weight.size()) != T - 1)
    throw std::invalid_argument("arhmm_init: trans_weight length");
  Eigen::VectorXd w = Eigen::VectorXd::Ones(T - 1);
  for (std::size_t t = 0; t < trans_weight.size(); ++t)
    w(static_cast<int>(t)) = trans_weight[t];

  // EM is sensitive to the responsibility init; try window-regression
  // clustering at a few window lengths, the deterministic contiguous
  // chunks, and a few seeded random assignments, keeping the best final
  // likelihood
  std::vector<std::vector<int>> seeds;
  if (K > 1) {
    RandomStream km_rng(2000);
    for (int L : {6, 10, 14})
      if (T - L > K * (M + 2))
        seeds.push_back(window_regression_labels(x, K, L, km_rng));
  }
  const int kRestarts = (K > 1) ? 5 : 1;
  ArhmmResult best;
  for (int rs = 0; rs < kRestarts + static_cast<int>(seeds.size()); ++rs) {
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Constant(T - 1, K, 1e-3);
    if (rs < static_cast<int>(seeds.size())) {
      for (int t = 0; t + 1 < T; ++t) gamma(t, seeds[rs][t]) = 1.0;
    } else if (rs == static_cast<int>(seeds.size())) {
      for (int t = 0; t + 1 < T; ++t)
        gamma(t, std::min(K - 1, t * K / std::max(T - 1, 1))) = 1.0;
    } else {
      RandomStream rng(1000 + rs - static_cast<int>(seeds.size()));
      // random contiguous segments of mean length ~ T / (4K)
      int k = rng.uniform_int(K);
      for (int t = 0; t + 1 < T; ++t) {
        if (rng.uniform() < 4.0 * K / T) k = rng.uniform_int(K);
        gamma(t, k) = 1.0;
      }
    }
    ArhmmResult cand = arhmm_em(x, K, n_iters, std::move(gamma), w);
    if (best.loglik.empty() || cand.loglik.back() > best.loglik.back())
      best = std::move(cand);
  }
  return best;
}

Eigen::VectorXd map_logistic(const Eigen::MatrixXd& x, const std::vector<int>& y,
                             double tau, int max_iters, double tol) {
  const int n = static_cast<int>(x.rows()), p = static_cast<int>(x.cols()) + 1;
  Eigen::MatrixXd U(n, p);
  U.leftCols(p - 1) = x;
  U.col(p - 1).setOnes();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd g = -tau * w;
    Eigen::MatrixXd H = tau * Eigen::MatrixXd::Identity(p, p);
    for (int i = 0; i < n; ++i) {
      double mu = sigmoid(U.row(i).dot(w));
      g += (y[i] - mu) * U.row(i).transpose();
      double v = std::max(mu * (1.0 - mu), 1e-10);
      H += v * (U.row(i).transpose() * U.row(i));
    }
    Eigen::VectorXd step = H.ldlt().solve(g);
    // halving keeps saturated steps from overshooting
    double lim = step.cwiseAbs().maxCoeff();
    if (lim > 10.0) step *= 10.0 / lim;
    w += step;
    if (g.norm() < tol) break;
  }
  return w;
}

namespace {

double logistic_objective(const Eigen::MatrixXd& x, const std::vector<int>& y,
                          const Eigen::VectorXd& w, double tau) {
  double obj = -0.5 * tau * w.squaredNorm();
  for (int i = 0; i < static_cast<int>(x.rows()); ++i) {
    double nu = x.row(i).dot(w.head(x.cols())) + w(x.cols());
    obj += y[i] ? log_sigmoid(nu) : log_sigmoid(-nu);
  }
  return obj;
}

}  // namespace

DecisionList fit_decision_list(const Eigen::MatrixXd& x,
                               const std::vector<int>& labels, int K) {
  const int M = static_cast<int>(x.cols());
  DecisionList list;
  std::vector<int> remaining;
  for (int k = 0; k < K; ++k) remaining.push_back(k);
  std::vector<int> rows;
  for (int i = 0; i < static_cast<int>(x.rows()); ++i) {
    if (labels[i] < 0 || labels[i] >= K)
      throw std::invalid_argument("fit_decision_list: label out of range");
    rows.push_back(i);
  }

  const double tau = 1e-2;
  while (static_cast<int>(remaining.size()) > 1) {
    Eigen::MatrixXd xs(rows.size(), M);
    for (std::size_t i = 0; i < rows.size(); ++i) xs.row(i) = x.row(rows[i]);

    int best_state = remaining[0];
    double best_obj = -1e300;
    Eigen::VectorXd best_w = Eigen::VectorXd::Zero(M + 1);
    bool single_class = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (labels[rows[i]] != labels[rows[0]]) single_class = false;

    if (rows.empty() || single_class) {
      // degenerate level: fix the majority (or first remaining) output
      // with the constant-true predicate
      int out = remaining[0];
      if (!rows.empty()) {
        int lab = labels[rows[0]];
        if (std::find(remaining.begin(), remaining.end(), lab) !=
            remaining.end())
          out = lab;
      }
      best_state = out;
      best_w = Eigen::VectorXd::Zero(M + 1);
      best_w(M) = 20.0;
    } else {
      for (int cand : remaining) {
        std::vector<int> yv(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
          yv[i] = labels[rows[i]] == cand ? 1 : 0;
        Eigen::VectorXd w = map_logistic(xs, yv, tau);
        double obj = logistic_objective(xs, yv, w, tau);
        if (obj > best_obj) {
          best_obj = obj;
          best_state = cand;
          best_w = w;
        }
      }
    }

    list.outputs.push_back(best_state);
    list.predicates.push_back(best_w);
    remaining.erase(
        std::find(remaining.begin(), remaining.end(), best_state));
    std::vector<int> kept;
    for (int i : rows)
      if (labels[i] != best_state) kept.push_back(i);
    rows = kept;
  }
  list.outputs.push_back(remaining[0]);
  return list;
}

InitResult assemble_init(const Dataset& data, int K, int M, VariantTag variant,
                         EmissionFamily family, int em_iters) {
  InitResult res;
  const int T = data.T();

  Eigen::MatrixXd x_init;
  PpcaResult ppca;
  if (variant == VariantTag::RecurrentARHMM) {
    x_init = data.y;
  } else {
    ppca = ppca_init(data, M);
    x_init = ppca.x;
  }

  // transitions touching a masked step carry no real evidence: the
  // latents there are interpolated, and EM would otherwise fit a
  // spurious near-noiseless state to the fabricated straight line
  std::vector<double> trans_weight(T - 1, 1.0);
  for (int t = 0; t + 1 < T; ++t)
    if (!data.observed(t) || !data.observed(t + 1)) trans_weight[t] = 0.0;
  ArhmmResult ar = arhmm_init(x_init, K, em_iters, trans_weight);

  // decision list on (x_t, z_{t+1}) pairs
  Eigen::MatrixXd feats(T - 1, M);
  std::vector<int> next(T - 1);
  for (int t = 0; t + 1 < T; ++t) {
    feats.row(t) = x_init.row(t);
    next[t] = ar.z[t + 1];
  }
  DecisionList list = fit_decision_list(feats, next, K);

  // new label of old state list.outputs[j] is j
  std::vector<int> newlab(K);
  for (int j = 0; j < K; ++j) newlab[list.outputs[j]] = j;

  ModelParams& p = res.params;
  p.K = K;
  p.M = M;
  p.N = (variant == VariantTag::RecurrentARHMM) ? M : data.N();
  p.variant = variant;
  p.emission_family = family;
  p.A.resize(K);
  p.b.resize(K);
  p.Q.resize(K);
  for (int k = 0; k < K; ++k) {
    p.A[newlab[k]] = ar.A[k];
    p.b[newlab[k]] = ar.b[k];
    p.Q[newlab[k]] = ar.Q[k];
  }

  if (variant == VariantTag::RecurrentARHMM) {
    p.C = Eigen::MatrixXd::Identity(M, M);
    p.d = Eigen::VectorXd::Zero(M);
    p.S = Eigen::MatrixXd::Zero(M, M);
  } else {
    p.C = ppca.C;
    p.d = ppca.d;
    p.S = ppca.S;
    if (family == EmissionFamily::Gaussian)
      p.S.diagonal().array() += 1e-6;
  }

  // recurrence from the decision-list predicates: stick j separates the
  // j-th output from everything later in the order
  Eigen::MatrixXd R(K - 1, M);
  Eigen::VectorXd r(K - 1);
  for (int j = 0; j < K - 1; ++j) {
    R.row(j) = list.predicates[j].head(M).transpose();
    r(j) = list.predicates[j](M);
  }
  Eigen::MatrixXd counts = Eigen::MatrixXd::Constant(K, K, 1.0);
  for (int t = 0; t + 1 < T; ++t)
    counts(newlab[ar.z[t]], newlab[ar.z[t + 1]]) += 1.0;
  switch (variant) {
    case VariantTag::StandardSLDS: {
      p.pi = Eigen::MatrixXd(K, K);
      for (int i = 0; i < K; ++i) p.pi.row(i) = counts.row(i) / counts.row(i).sum();
      break;
    }
    case VariantTag::RecurrentSticky: {
      p.stay.assign(K, Eigen::VectorXd::Zero(M));
      p.pi_tilde = Eigen::MatrixXd::Zero(K, K);
      for (int i = 0; i < K; ++i) {
        double tot = counts.row(i).sum() - counts(i, i);
        for (int j = 0; j < K; ++j)
          if (j != i) p.pi_tilde(i, j) = counts(i, j) / tot;
      }
      break;
    }
    case VariantTag::RecurrentSLDS:
      p.R.assign(K, R);
      p.r.assign(K, r);
      break;
    case VariantTag::SharedRSLDS:
      p.R.assign(1, R);
      p.r.assign(K, r);
      break;
    case VariantTag::RecurrenceOnly:
    case VariantTag::RecurrentARHMM:
      p.R.assign(1, R);
      p.r.assign(1, r);
      break;
  }
  p.validate();

  res.path.x = x_init;
  res.path.z.resize(T);
  for (int t = 0; t < T; ++t) res.path.z[t] = newlab[ar.z[t]];
  res.permutation = list.outputs;
  return res;
}

nlohmann::json init_to_json(const InitResult& init) {
  nlohmann::json j = model_to_json(init.params);
  j["x_init"] = matrix_to_json(init.path.x);
  nlohmann::json z = nlohmann::json::array();
  for (int v : init.path.z) z.push_back(v + 1);
  j["z_init"] = z;
  nlohmann::json perm = nlohmann::json::array();
  for (int v : init.permutation) perm.push_back(v + 1);
  j["permutation"] = perm;
  return j;
}

}  // namespace rslds
