#include "gibbs.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "messages.hpp"
#include "numeric.hpp"
#include "polya_gamma.hpp"
#include "serialize.hpp"
#include "stickbreak.hpp"

namespace rslds {

namespace {

int stick_count(const ModelParams& params) {
  switch (params.variant) {
    case VariantTag::StandardSLDS:
      return 0;
    case VariantTag::RecurrentSticky:
      return 1;  // one stay/leave stick per transition
    default:
      return params.K - 1;
  }
}

Eigen::VectorXd regressor(const Eigen::VectorXd& x) {
  Eigen::VectorXd u(x.size() + 1);
  u.head(x.size()) = x;
  u(x.size()) = 1.0;
  return u;
}

// Draw one coefficient vector from exp{-1/2 w'Jw + h'w}.
Eigen::VectorXd draw_gaussian_row(const Eigen::MatrixXd& J,
                                  const Eigen::VectorXd& h, RandomStream& rng) {
  GaussianInfo g{J, h, 0.0};
  return g.sample(rng);
}

}  // namespace

void sample_transition_omegas(GibbsState& state, RandomStream& rng) {
  const ModelParams& params = state.params;
  const LatentPath& path = state.path;
  const int T = path.T();
  const int S = stick_count(params);
  state.aug.omega.resize(std::max(T - 1, 0), S);
  if (S == 0) return;
  for (int t = 0; t + 1 < T; ++t) {
    Eigen::VectorXd x = path.x.row(t).transpose();
    if (params.variant == VariantTag::RecurrentSticky) {
      double nu = params.stay[path.z[t]].dot(x);
      state.aug.omega(t, 0) = sample_pg(PolyaGammaParams{1, nu}, rng);
    } else {
      Eigen::VectorXd nu = params.stick_logits(path.z[t], x);
      TransitionAug aug = sample_transition_aug(path.z[t + 1], nu, rng);
      state.aug.omega.row(t) = aug.omega.transpose();
    }
  }
}

void sample_emission_xis(GibbsState& state, const Dataset& data,
                         RandomStream& rng) {
  const ModelParams& params = state.params;
  if (data.emission_family != EmissionFamily::Bernoulli) {
    state.aug.xi.resize(0, 0);
    return;
  }
  const int T = data.T(), N = data.N();
  state.aug.xi = Eigen::MatrixXd::Zero(T, N);
  for (int t = 0; t < T; ++t) {
    if (!data.observed(t)) continue;
    Eigen::VectorXd nu =
        params.C * state.path.x.row(t).transpose() + params.d;
    EmissionAug aug = sample_emission_aug(data.y.row(t).transpose(), nu, rng);
    state.aug.xi.row(t) = aug.xi.transpose();
  }
}

void sample_continuous_states(GibbsState& state, const Dataset& data,
                              RandomStream& rng) {
  const ModelParams& params = state.params;
  if (params.observes_x()) return;
  LatentPath& path = state.path;
  const int T = path.T(), M = params.M;
  GaussianChainSpec spec = GaussianChainSpec::empty(T, M);
  spec.add_unary(0, GaussianInfo{Eigen::MatrixXd::Identity(M, M),
                                 Eigen::VectorXd::Zero(M), 0.0});
  const bool gaussian = data.emission_family == EmissionFamily::Gaussian;
  Eigen::MatrixXd Sinv;
  if (gaussian) Sinv = robust_llt(params.S).solve(
      Eigen::MatrixXd::Identity(params.N, params.N));
  for (int t = 0; t < T; ++t) {
    if (data.observed(t)) {
      if (gaussian) {
        Eigen::VectorXd resid = data.y.row(t).transpose() - params.d;
        spec.add_unary(t, GaussianInfo{params.C.transpose() * Sinv * params.C,
                                       params.C.transpose() * (Sinv * resid),
                                       0.0});
      } else {
        EmissionAug aug{
            state.aug.xi.row(t).transpose(),
            (data.y.row(t).transpose().array() - 0.5).matrix()};
        spec.add_unary(t, bernoulli_emission_potential(aug, params.C, params.d));
      }
    }
    if (t + 1 < T) {
      int zt = path.z[t], zn = path.z[t + 1];
      if (params.variant == VariantTag::RecurrentSticky) {
        const Eigen::VectorXd& s = params.stay[zt];
        double omega = state.aug.omega(t, 0);
        double kappa = (zn == zt ? 0.5 : -0.5);
        spec.add_unary(t, GaussianInfo{omega * (s * s.transpose()), kappa * s,
                                       0.0});
      } else if (params.has_stick_recurrence()) {
        TransitionAug aug{state.aug.omega.row(t).transpose(),
                          sb_kappa(zn, params.K)};
        spec.add_unary(t, transition_potential(aug, params.R_for(zt),
                                               params.r_for(zt)));
      }
      spec.pairwise[t] = dynamics_potential(params.A[zn], params.b[zn],
                                            params.Q[zn]);
    }
  }
  std::vector<Eigen::VectorXd> xs = ffbs_continuous(spec, rng);
  for (int t = 0; t < T; ++t) path.x.row(t) = xs[t].transpose();
}

void sample_discrete_states(GibbsState& state, const Dataset& data,
                            RandomStream& rng) {
  const ModelParams& params = state.params;
  LatentPath& path = state.path;
  const int T = path.T(), K = params.K;
  if (K == 1) return;
  (void)data;  // emissions are state-independent; z sees only the dynamics
  DiscreteChainSpec spec = DiscreteChainSpec::uniform(T, K);
  for (int t = 0; t + 1 < T; ++t) {
    Eigen::VectorXd x = path.x.row(t).transpose();
    Eigen::VectorXd xn = path.x.row(t + 1).transpose();
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j)
        spec.log_trans[t](i, j) =
            transition_log_pmf(params, i, x, j) +
            gaussian_log_density(xn, params.A[j] * x + params.b[j],
                                 params.Q[j]);
  }
  path.z = ffbs_discrete(spec, rng);
}

void update_dynamics(GibbsState& state, const MNIWParams& prior,
                     RandomStream& rng) {
  const LatentPath& path = state.path;
  const int K = state.params.K, M = state.params.M, T = path.T();
  for (int k = 0; k < K; ++k) {
    std::vector<int> idx;
    for (int t = 0; t + 1 < T; ++t)
      if (path.z[t + 1] == k) idx.push_back(t);
    Eigen::MatrixXd X(idx.size(), M + 1), Y(idx.size(), M);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      X.row(i) = regressor(path.x.row(idx[i]).transpose()).transpose();
      Y.row(i) = path.x.row(idx[i] + 1);
    }
    auto [W, Sigma] = sample_mniw(mniw_posterior(prior, X, Y), rng);
    state.params.A[k] = W.leftCols(M);
    state.params.b[k] = W.col(M);
    state.params.Q[k] = Sigma;
  }
}

void update_emissions(GibbsState& state, const Dataset& data,
                      const MNIWParams& prior, RandomStream& rng) {
  ModelParams& params = state.params;
  if (params.observes_x()) return;
  const LatentPath& path = state.path;
  const int T = path.T(), M = params.M, N = params.N;
  std::vector<int> idx;
  for (int t = 0; t < T; ++t)
    if (data.observed(t)) idx.push_back(t);

  if (data.emission_family == EmissionFamily::Gaussian) {
    Eigen::MatrixXd X(idx.size(), M + 1), Y(idx.size(), N);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      X.row(i) = regressor(path.x.row(idx[i]).transpose()).transpose();
      Y.row(i) = data.y.row(idx[i]);
    }
    auto [W, Sigma] = sample_mniw(mniw_posterior(prior, X, Y), rng);
    params.C = W.leftCols(M);
    params.d = W.col(M);
    params.S = Sigma;
    return;
  }

  // Bernoulli rows: Gaussian conditional given the xi augmentation.
  Eigen::MatrixXd V0inv = robust_llt(prior.V0).solve(
      Eigen::MatrixXd::Identity(M + 1, M + 1));
  for (int n = 0; n < N; ++n) {
    Eigen::MatrixXd J = V0inv;
    Eigen::VectorXd h = V0inv * prior.M0.row(n).transpose();
    for (int t : idx) {
      Eigen::VectorXd u = regressor(path.x.row(t).transpose());
      J += state.aug.xi(t, n) * (u * u.transpose());
      h += (data.y(t, n) - 0.5) * u;
    }
    Eigen::VectorXd w = draw_gaussian_row(J, h, rng);
    params.C.row(n) = w.head(M).transpose();
    params.d(n) = w(M);
  }
}

void update_recurrence(GibbsState& state, const MNIWParams& prior,
                       RandomStream& rng) {
  ModelParams& params = state.params;
  const LatentPath& path = state.path;
  const int K = params.K, M = params.M, T = path.T();
  if (K == 1 || params.variant == VariantTag::StandardSLDS) return;

  if (params.variant == VariantTag::RecurrentSticky) {
    // Stay-vectors: one Bernoulli stick per transition, no bias term,
    // prior N(0, V0[0:M, 0:M]) per vector.
    Eigen::MatrixXd P0 = robust_llt(prior.V0.topLeftCorner(M, M))
                             .solve(Eigen::MatrixXd::Identity(M, M));
    for (int j = 0; j < K; ++j) {
      Eigen::MatrixXd J = P0;
      Eigen::VectorXd h = Eigen::VectorXd::Zero(M);
      for (int t = 0; t + 1 < T; ++t) {
        if (path.z[t] != j) continue;
        Eigen::VectorXd x = path.x.row(t).transpose();
        J += state.aug.omega(t, 0) * (x * x.transpose());
        h += (path.z[t + 1] == j ? 0.5 : -0.5) * x;
      }
      params.stay[j] = draw_gaussian_row(J, h, rng);
    }
    return;
  }

  Eigen::MatrixXd V0inv = robust_llt(prior.V0).solve(
      Eigen::MatrixXd::Identity(M + 1, M + 1));

  auto row_update = [&](int stick, const std::vector<int>& ts) {
    Eigen::MatrixXd J = V0inv;
    Eigen::VectorXd h = V0inv * prior.M0.row(stick).transpose();
    for (int t : ts) {
      if (state.aug.omega(t, stick) == 0.0 && path.z[t + 1] < stick) continue;
      Eigen::VectorXd u = regressor(path.x.row(t).transpose());
      J += state.aug.omega(t, stick) * (u * u.transpose());
      h += sb_kappa(path.z[t + 1], K)(stick) * u;
    }
    return draw_gaussian_row(J, h, rng);
  };

  switch (params.variant) {
    case VariantTag::RecurrentSLDS:
    case VariantTag::RecurrentARHMM: {
      bool per_state = params.R.size() > 1;
      if (!per_state) {
        // recurrence-only AR-HMM: fall through to pooled update below
        std::vector<int> all;
        for (int t = 0; t + 1 < T; ++t) all.push_back(t);
        for (int k = 0; k < K - 1; ++k) {
          Eigen::VectorXd w = row_update(k, all);
          params.R[0].row(k) = w.head(M).transpose();
          params.r[0](k) = w(M);
        }
        return;
      }
      for (int j = 0; j < K; ++j) {
        std::vector<int> ts;
        for (int t = 0; t + 1 < T; ++t)
          if (path.z[t] == j) ts.push_back(t);
        for (int k = 0; k < K - 1; ++k) {
          Eigen::VectorXd w = row_update(k, ts);
          params.R[j].row(k) = w.head(M).transpose();
          params.r[j](k) = w(M);
        }
      }
      return;
    }
    case VariantTag::RecurrenceOnly: {
      std::vector<int> all;
      for (int t = 0; t + 1 < T; ++t) all.push_back(t);
      for (int k = 0; k < K - 1; ++k) {
        Eigen::VectorXd w = row_update(k, all);
        params.R[0].row(k) = w.head(M).transpose();
        params.r[0](k) = w(M);
      }
      return;
    }
    case VariantTag::SharedRSLDS: {
      // Two conditionally conjugate blocks: the shared weight rows given
      // the biases, then each per-state bias given the weights.
      Eigen::MatrixXd Pw = robust_llt(prior.V0.topLeftCorner(M, M))
                               .solve(Eigen::MatrixXd::Identity(M, M));
      double vb = prior.V0(M, M);
      for (int k = 0; k < K - 1; ++k) {
        Eigen::MatrixXd J = Pw;
        Eigen::VectorXd h = Pw * prior.M0.row(k).head(M).transpose();
        for (int t = 0; t + 1 < T; ++t) {
          if (path.z[t + 1] < k) continue;
          Eigen::VectorXd x = path.x.row(t).transpose();
          double om = state.aug.omega(t, k);
          double kap = sb_kappa(path.z[t + 1], K)(k);
          J += om * (x * x.transpose());
          h += (kap - om * params.r[path.z[t]](k)) * x;
        }
        params.R[0].row(k) = draw_gaussian_row(J, h, rng).transpose();
      }
      for (int j = 0; j < K; ++j) {
        for (int k = 0; k < K - 1; ++k) {
          double J = 1.0 / vb;
          double h = prior.M0(k, M) / vb;
          for (int t = 0; t + 1 < T; ++t) {
            if (path.z[t] != j || path.z[t + 1] < k) continue;
            Eigen::VectorXd x = path.x.row(t).transpose();
            double om = state.aug.omega(t, k);
            J += om;
            h += sb_kappa(path.z[t + 1], K)(k) -
                 om * params.R[0].row(k).dot(x);
          }
          double sd = 1.0 / std::sqrt(J);
          params.r[j](k) = h / J + sd * rng.normal();
        }
      }
      return;
    }
    default:
      return;
  }
}

void update_markov(GibbsState& state, const DirichletParams& prior,
                   RandomStream& rng) {
  ModelParams& params = state.params;
  const LatentPath& path = state.path;
  const int K = params.K, T = path.T();
  if (params.variant == VariantTag::StandardSLDS) {
    for (int j = 0; j < K; ++j) {
      Eigen::VectorXi counts = Eigen::VectorXi::Zero(K);
      for (int t = 0; t + 1 < T; ++t)
        if (path.z[t] == j) counts(path.z[t + 1]) += 1;
      params.pi.row(j) =
          sample_dirichlet(dirichlet_posterior(prior, counts), rng).transpose();
    }
  } else if (params.variant == VariantTag::RecurrentSticky) {
    // pi_tilde rows are distributions over the other K-1 states.
    for (int j = 0; j < K; ++j) {
      Eigen::VectorXi counts = Eigen::VectorXi::Zero(K - 1);
      DirichletParams rowprior;
      rowprior.alpha.resize(K - 1);
      int slot = 0;
      for (int i = 0; i < K; ++i) {
        if (i == j) continue;
        rowprior.alpha(slot) = prior.alpha(i);
        for (int t = 0; t + 1 < T; ++t)
          if (path.z[t] == j && path.z[t + 1] == i) counts(slot) += 1;
        ++slot;
      }
      Eigen::VectorXd p =
          sample_dirichlet(dirichlet_posterior(rowprior, counts), rng);
      slot = 0;
      for (int i = 0; i < K; ++i)
        params.pi_tilde(j, i) = (i == j) ? 0.0 : p(slot++);
    }
  }
}

void sweep(GibbsState& state, const Dataset& data, const SamplerConfig& config,
           RandomStream& rng) {
  if (config.update_aug) {
    sample_transition_omegas(state, rng);
    sample_emission_xis(state, data, rng);
  }
  if (config.update_continuous) sample_continuous_states(state, data, rng);
  if (config.update_discrete) {
    sample_discrete_states(state, data, rng);
    // z moved with omega marginalized out; redraw omega so every later
    // block sees augmentation whose zero pattern matches the new z.
    if (config.update_aug) sample_transition_omegas(state, rng);
  }
  if (config.update_dynamics)
    update_dynamics(state, config.hypers.lambda, rng);
  if (config.update_emissions)
    update_emissions(state, data, config.hypers.eta, rng);
  if (config.update_recurrence)
    update_recurrence(state, config.hypers.rec, rng);
  if (config.update_recurrence || config.update_dynamics)
    update_markov(state, config.hypers.alpha, rng);
  state.iteration += 1;
}

double score_joint(const ModelParams& params, const LatentPath& path,
                   const Dataset& data) {
  const int T = path.T(), M = params.M;
  double score = -std::log(double(params.K));  // z_1 uniform
  score += gaussian_log_density(path.x.row(0).transpose(),
                                Eigen::VectorXd::Zero(M),
                                Eigen::MatrixXd::Identity(M, M));
  for (int t = 0; t + 1 < T; ++t) {
    Eigen::VectorXd x = path.x.row(t).transpose();
    int zn = path.z[t + 1];
    score += transition_log_pmf(params, path.z[t], x, zn);
    score += gaussian_log_density(path.x.row(t + 1).transpose(),
                                  params.A[zn] * x + params.b[zn],
                                  params.Q[zn]);
  }
  if (!params.observes_x()) {
    for (int t = 0; t < T; ++t) {
      if (!data.observed(t)) continue;
      Eigen::VectorXd x = path.x.row(t).transpose();
      if (data.emission_family == EmissionFamily::Gaussian) {
        score += gaussian_log_density(data.y.row(t).transpose(),
                                      params.C * x + params.d, params.S);
      } else {
        Eigen::VectorXd nu = params.C * x + params.d;
        for (int n = 0; n < params.N; ++n)
          score += data.y(t, n) > 0.5 ? log_sigmoid(nu(n))
                                      : log_sigmoid(-nu(n));
      }
    }
  }
  return score;
}

AugmentationState make_augmentation(const ModelParams& params,
                                    const LatentPath& path, const Dataset& data,
                                    RandomStream& rng) {
  GibbsState tmp;
  tmp.params = params;
  tmp.path = path;
  sample_transition_omegas(tmp, rng);
  sample_emission_xis(tmp, data, rng);
  return tmp.aug;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

nlohmann::json rle_encode(const std::vector<int>& z) {
  nlohmann::json runs = nlohmann::json::array();
  std::size_t i = 0;
  while (i < z.size()) {
    std::size_t j = i;
    while (j < z.size() && z[j] == z[i]) ++j;
    runs.push_back({z[i] + 1, j - i});  // 1-based state, run length
    i = j;
  }
  return runs;
}

}  // namespace

void run_gibbs(GibbsState& state, const Dataset& data,
               const SamplerConfig& config, RandomStream& rng) {
  if (config.n_iters < 1)
    throw std::invalid_argument("run_gibbs: n_iters must be >= 1");
  std::ofstream trace;
  if (!config.trace_file.empty()) {
    trace.open(config.trace_file);
    if (!trace)
      throw std::runtime_error("run_gibbs: cannot open trace file " +
                               config.trace_file);
  }
  for (int it = 0; it < config.n_iters; ++it) {
    sweep(state, data, config, rng);
    if (trace.is_open()) {
      nlohmann::json rec;
      rec["iteration"] = state.iteration;
      rec["z_rle"] = rle_encode(state.path.z);
      rec["log_joint"] = score_joint(state.params, state.path, data);
      std::string blob = model_to_json(state.params).dump();
      rec["params_digest"] = fnv1a(blob);
      if (config.thinning > 0 && state.iteration % config.thinning == 0)
        rec["params"] = model_to_json(state.params);
      trace << rec.dump() << "\n";
    }
  }
}

}  // namespace rslds
