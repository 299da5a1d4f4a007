#include "model.hpp"

#include <cmath>
#include <stdexcept>

#include "numeric.hpp"
#include "stickbreak.hpp"

namespace rslds {

std::string variant_name(VariantTag v) {
  switch (v) {
    case VariantTag::StandardSLDS: return "slds";
    case VariantTag::RecurrentSLDS: return "rslds";
    case VariantTag::SharedRSLDS: return "rslds-s";
    case VariantTag::RecurrenceOnly: return "rslds-ro";
    case VariantTag::RecurrentSticky: return "rslds-sticky";
    case VariantTag::RecurrentARHMM: return "rarhmm";
  }
  throw std::logic_error("variant_name: bad tag");
}

VariantTag variant_from_name(const std::string& name) {
  if (name == "slds") return VariantTag::StandardSLDS;
  if (name == "rslds") return VariantTag::RecurrentSLDS;
  if (name == "rslds-s") return VariantTag::SharedRSLDS;
  if (name == "rslds-ro") return VariantTag::RecurrenceOnly;
  if (name == "rslds-sticky") return VariantTag::RecurrentSticky;
  if (name == "rarhmm") return VariantTag::RecurrentARHMM;
  throw std::invalid_argument("unknown model variant: " + name);
}

Eigen::VectorXd ModelParams::stick_logits(int z_prev,
                                          const Eigen::VectorXd& x_prev) const {
  return R_for(z_prev) * x_prev + r_for(z_prev);
}

void ModelParams::validate() const {
  if (K < 1 || M < 1) throw std::invalid_argument("ModelParams: bad dimensions");
  if (static_cast<int>(A.size()) != K || static_cast<int>(b.size()) != K ||
      static_cast<int>(Q.size()) != K)
    throw std::invalid_argument("ModelParams: dynamics size mismatch");
  for (int k = 0; k < K; ++k) {
    if (A[k].rows() != M || A[k].cols() != M || b[k].size() != M ||
        Q[k].rows() != M || Q[k].cols() != M)
      throw std::invalid_argument("ModelParams: dynamics shape mismatch");
  }
  if (!observes_x()) {
    if (C.rows() != N || C.cols() != M || d.size() != N)
      throw std::invalid_argument("ModelParams: emission shape mismatch");
    if (emission_family == EmissionFamily::Gaussian &&
        (S.rows() != N || S.cols() != N))
      throw std::invalid_argument("ModelParams: emission noise shape mismatch");
  }
  if (variant == VariantTag::StandardSLDS) {
    if (pi.rows() != K || pi.cols() != K)
      throw std::invalid_argument("ModelParams: pi shape mismatch");
  } else if (variant == VariantTag::RecurrentSticky) {
    if (static_cast<int>(stay.size()) != K || pi_tilde.rows() != K ||
        pi_tilde.cols() != K)
      throw std::invalid_argument("ModelParams: sticky fields missing");
    for (int k = 0; k < K; ++k)
      if (stay[k].size() != M)
        throw std::invalid_argument("ModelParams: stay-vector shape mismatch");
  } else {
    if (R.empty() || r.empty())
      throw std::invalid_argument("ModelParams: recurrence fields missing");
    bool shared_R = R.size() == 1, shared_r = r.size() == 1;
    if (!shared_R && static_cast<int>(R.size()) != K)
      throw std::invalid_argument("ModelParams: recurrence weight count");
    if (!shared_r && static_cast<int>(r.size()) != K)
      throw std::invalid_argument("ModelParams: recurrence bias count");
    for (const auto& Rk : R)
      if (Rk.rows() != K - 1 || Rk.cols() != M)
        throw std::invalid_argument("ModelParams: recurrence weight shape");
    for (const auto& rk : r)
      if (rk.size() != K - 1)
        throw std::invalid_argument("ModelParams: recurrence bias shape");
  }
}

Eigen::VectorXd uniform_stick_logits(int K) {
  Eigen::VectorXd r(K - 1);
  for (int k = 0; k < K - 1; ++k) r(k) = -std::log(double(K - 1 - k));
  return r;
}

Hyperparams default_hypers(int K, int M, int N) {
  Hyperparams h;
  h.alpha.alpha = Eigen::VectorXd::Ones(K);

  h.lambda.M0 = Eigen::MatrixXd::Zero(M, M + 1);
  h.lambda.M0.leftCols(M) = 0.99 * Eigen::MatrixXd::Identity(M, M);
  // unit column covariance = a ridge worth ~1 pseudo-observation; a
  // tighter ridge visibly shrinks the drift term on sequences of a few
  // thousand steps, which inflates the fitted process noise and blurs
  // the switching boundaries downstream
  h.lambda.V0 = Eigen::MatrixXd::Identity(M + 1, M + 1);
  h.lambda.S0 = 0.01 * Eigen::MatrixXd::Identity(M, M);
  h.lambda.n0 = M + 2;

  h.eta.M0 = Eigen::MatrixXd::Zero(N, M + 1);
  h.eta.V0 = Eigen::MatrixXd::Identity(M + 1, M + 1);
  h.eta.S0 = 0.1 * Eigen::MatrixXd::Identity(N, N);
  h.eta.n0 = N + 2;

  h.rec.M0 = Eigen::MatrixXd::Zero(K - 1, M + 1);
  if (K > 1) h.rec.M0.col(M) = uniform_stick_logits(K);
  // weakly informative: regime boundaries in real systems are often much
  // sharper than a unit-scale logistic slope allows, and an over-tight
  // prior here blurs the fitted switching boundaries enough to distort
  // both segmentation and generated dwell times
  h.rec.V0 = 100.0 * Eigen::MatrixXd::Identity(M + 1, M + 1);
  h.rec.S0 = Eigen::MatrixXd::Identity(K - 1, K - 1);  // unused (rows Gaussian)
  h.rec.n0 = K + 1;
  return h;
}

namespace {

// One row of [R r] for stick j: N(rec.M0.row(j), rec.V0).
Eigen::VectorXd sample_rec_row(const MNIWParams& rec, int j, RandomStream& rng) {
  Eigen::MatrixXd L = Eigen::MatrixXd(robust_llt(rec.V0).matrixL());
  return rec.M0.row(j).transpose() + L * rng.normal_vector(rec.V0.rows());
}

}  // namespace

ModelParams sample_prior(const Hyperparams& hypers, int K, int M, int N,
                         VariantTag variant, EmissionFamily family,
                         RandomStream& rng) {
  if (K < 1 || M < 1) throw std::invalid_argument("sample_prior: bad dimensions");
  ModelParams p;
  p.K = K;
  p.M = M;
  p.N = (variant == VariantTag::RecurrentARHMM) ? M : N;
  p.variant = variant;
  p.emission_family = family;

  for (int k = 0; k < K; ++k) {
    auto [W, Q] = sample_mniw(hypers.lambda, rng);
    p.A.push_back(W.leftCols(M));
    p.b.push_back(W.col(M));
    p.Q.push_back(Q);
  }

  if (variant == VariantTag::RecurrentARHMM) {
    p.C = Eigen::MatrixXd::Identity(M, M);
    p.d = Eigen::VectorXd::Zero(M);
    p.S = Eigen::MatrixXd::Zero(M, M);
  } else if (family == EmissionFamily::Gaussian) {
    auto [W, S] = sample_mniw(hypers.eta, rng);
    p.C = W.leftCols(M);
    p.d = W.col(M);
    p.S = S;
  } else {
    // Bernoulli GLM rows (c_n, d_n) ~ N(eta.M0 row, eta.V0)
    p.C = Eigen::MatrixXd(N, M);
    p.d = Eigen::VectorXd(N);
    Eigen::MatrixXd L = Eigen::MatrixXd(robust_llt(hypers.eta.V0).matrixL());
    for (int n = 0; n < N; ++n) {
      Eigen::VectorXd row =
          hypers.eta.M0.row(n).transpose() + L * rng.normal_vector(M + 1);
      p.C.row(n) = row.head(M).transpose();
      p.d(n) = row(M);
    }
  }

  switch (variant) {
    case VariantTag::StandardSLDS: {
      p.pi = Eigen::MatrixXd(K, K);
      for (int k = 0; k < K; ++k)
        p.pi.row(k) = sample_dirichlet(hypers.alpha, rng).transpose();
      break;
    }
    case VariantTag::RecurrentSticky: {
      for (int k = 0; k < K; ++k) {
        Eigen::MatrixXd L = Eigen::MatrixXd(robust_llt(
            hypers.rec.V0.topLeftCorner(M, M)).matrixL());
        p.stay.push_back(L * rng.normal_vector(M));
      }
      p.pi_tilde = Eigen::MatrixXd::Zero(K, K);
      if (K > 1) {
        DirichletParams unit{Eigen::VectorXd::Ones(K - 1)};
        for (int k = 0; k < K; ++k) {
          Eigen::VectorXd row = sample_dirichlet(unit, rng);
          int idx = 0;
          for (int j = 0; j < K; ++j)
            if (j != k) p.pi_tilde(k, j) = row(idx++);
        }
      }
      break;
    }
    case VariantTag::RecurrentSLDS: {
      for (int k = 0; k < K; ++k) {
        Eigen::MatrixXd Rk(K - 1, M);
        Eigen::VectorXd rk(K - 1);
        for (int j = 0; j < K - 1; ++j) {
          Eigen::VectorXd row = sample_rec_row(hypers.rec, j, rng);
          Rk.row(j) = row.head(M).transpose();
          rk(j) = row(M);
        }
        p.R.push_back(Rk);
        p.r.push_back(rk);
      }
      break;
    }
    case VariantTag::SharedRSLDS: {
      Eigen::MatrixXd Rs(K - 1, M);
      for (int j = 0; j < K - 1; ++j)
        Rs.row(j) = sample_rec_row(hypers.rec, j, rng).head(M).transpose();
      p.R.push_back(Rs);
      for (int k = 0; k < K; ++k) {
        Eigen::VectorXd rk(K - 1);
        for (int j = 0; j < K - 1; ++j)
          rk(j) = hypers.rec.M0(j, M) +
                  std::sqrt(hypers.rec.V0(M, M)) * rng.normal();
        p.r.push_back(rk);
      }
      break;
    }
    case VariantTag::RecurrenceOnly:
    case VariantTag::RecurrentARHMM: {
      Eigen::MatrixXd Rs(K - 1, M);
      Eigen::VectorXd rs(K - 1);
      for (int j = 0; j < K - 1; ++j) {
        Eigen::VectorXd row = sample_rec_row(hypers.rec, j, rng);
        Rs.row(j) = row.head(M).transpose();
        rs(j) = row(M);
      }
      p.R.push_back(Rs);
      p.r.push_back(rs);
      break;
    }
  }
  return p;
}

Eigen::VectorXd transition_probs(const ModelParams& params, int z_prev,
                                 const Eigen::VectorXd& x_prev) {
  if (params.K == 1) return Eigen::VectorXd::Ones(1);
  switch (params.variant) {
    case VariantTag::StandardSLDS:
      return params.pi.row(z_prev).transpose();
    case VariantTag::RecurrentSticky: {
      double stay_p = sigmoid(params.stay[z_prev].dot(x_prev));
      Eigen::VectorXd probs =
          (1.0 - stay_p) * params.pi_tilde.row(z_prev).transpose();
      probs(z_prev) = stay_p;
      return probs;
    }
    default:
      return pi_sb(params.stick_logits(z_prev, x_prev));
  }
}

double transition_log_pmf(const ModelParams& params, int z_prev,
                          const Eigen::VectorXd& x_prev, int z_next) {
  if (params.K == 1) return 0.0;
  switch (params.variant) {
    case VariantTag::StandardSLDS:
      return std::log(params.pi(z_prev, z_next));
    case VariantTag::RecurrentSticky: {
      double nu = params.stay[z_prev].dot(x_prev);
      if (z_next == z_prev) return log_sigmoid(nu);
      return log_sigmoid(-nu) + std::log(params.pi_tilde(z_prev, z_next));
    }
    default:
      return sb_log_pmf(z_next, params.stick_logits(z_prev, x_prev));
  }
}

int step_discrete(const ModelParams& params, int z_prev,
                  const Eigen::VectorXd& x_prev, RandomStream& rng) {
  if (z_prev < 0 || z_prev >= params.K)
    throw std::invalid_argument("step_discrete: state out of range");
  return rng.categorical(transition_probs(params, z_prev, x_prev));
}

Eigen::VectorXd step_continuous(const ModelParams& params, int z_t,
                                const Eigen::VectorXd& x_prev, RandomStream& rng) {
  if (z_t < 0 || z_t >= params.K)
    throw std::invalid_argument("step_continuous: state out of range");
  Eigen::VectorXd mean = params.A[z_t] * x_prev + params.b[z_t];
  if (params.Q[z_t].isZero(0.0)) return mean;
  Eigen::MatrixXd L = Eigen::MatrixXd(robust_llt(params.Q[z_t]).matrixL());
  return mean + L * rng.normal_vector(params.M);
}

Eigen::VectorXd emit(const ModelParams& params, int z_t,
                     const Eigen::VectorXd& x_t, RandomStream& rng) {
  (void)z_t;
  if (params.observes_x()) return x_t;
  Eigen::VectorXd mean = params.C * x_t + params.d;
  if (params.emission_family == EmissionFamily::Gaussian) {
    if (params.S.isZero(0.0)) return mean;
    Eigen::MatrixXd L = Eigen::MatrixXd(robust_llt(params.S).matrixL());
    return mean + L * rng.normal_vector(params.N);
  }
  Eigen::VectorXd y(params.N);
  for (int n = 0; n < params.N; ++n)
    y(n) = (rng.uniform() < sigmoid(mean(n))) ? 1.0 : 0.0;
  return y;
}

std::pair<LatentPath, Dataset> simulate(const ModelParams& params, int T,
                                        RandomStream& rng,
                                        const Eigen::VectorXd* x1_init) {
  if (T < 1) throw std::invalid_argument("simulate: T must be >= 1");
  LatentPath path;
  path.z.resize(T);
  path.x.resize(T, params.M);
  Dataset data;
  data.y.resize(T, params.N);
  data.mask.assign(T, true);
  data.emission_family = params.emission_family;

  path.z[0] = rng.uniform_int(params.K);
  Eigen::VectorXd x =
      x1_init ? *x1_init : Eigen::VectorXd(rng.normal_vector(params.M));
  path.x.row(0) = x.transpose();
  data.y.row(0) = emit(params, path.z[0], x, rng).transpose();
  for (int t = 1; t < T; ++t) {
    int z = step_discrete(params, path.z[t - 1], x, rng);
    x = step_continuous(params, z, x, rng);
    path.z[t] = z;
    path.x.row(t) = x.transpose();
    data.y.row(t) = emit(params, z, x, rng).transpose();
  }
  return {path, data};
}

}  // namespace rslds
