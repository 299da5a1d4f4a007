#pragma once

#include <string>

#include <Eigen/Dense>

#include "model.hpp"
#include "rng.hpp"

namespace rslds {

// Polya-gamma augmentation attached to the current path. omega row t
// belongs to the transition t -> t+1: for stick variants it holds the
// K-1 stick draws of nu(z_t, x_t) (zero exactly where z_{t+1} < k); for
// the sticky variant it is a single column of stay/leave draws. xi is
// the T x N emission augmentation, Bernoulli data only.
struct AugmentationState {
  Eigen::MatrixXd omega;  // (T-1) x n_sticks, empty for StandardSLDS
  Eigen::MatrixXd xi;     // T x N or empty
};

struct GibbsState {
  ModelParams params;
  LatentPath path;
  AugmentationState aug;
  int iteration = 0;
};

struct SamplerConfig {
  int n_iters = 1000;
  int thinning = 10;
  Hyperparams hypers;
  // Block switches let tests freeze parts of the sweep.
  bool update_aug = true;
  bool update_continuous = true;
  bool update_discrete = true;
  bool update_dynamics = true;
  bool update_emissions = true;
  bool update_recurrence = true;
  std::string trace_file;  // newline-delimited JSON, empty = no trace
};

// Draw the augmentation variables from their exact conditionals.
void sample_transition_omegas(GibbsState& state, RandomStream& rng);
void sample_emission_xis(GibbsState& state, const Dataset& data,
                         RandomStream& rng);

// x | z, omega, xi, theta, y via the information-form Kalman FFBS.
void sample_continuous_states(GibbsState& state, const Dataset& data,
                              RandomStream& rng);

// z | x, theta, y with omega marginalized out (exact stick-breaking pmf);
// the caller must refresh omega before any update that consumes it.
void sample_discrete_states(GibbsState& state, const Dataset& data,
                            RandomStream& rng);

void update_dynamics(GibbsState& state, const MNIWParams& prior,
                     RandomStream& rng);
void update_emissions(GibbsState& state, const Dataset& data,
                      const MNIWParams& prior, RandomStream& rng);
void update_recurrence(GibbsState& state, const MNIWParams& prior,
                       RandomStream& rng);
void update_markov(GibbsState& state, const DirichletParams& prior,
                   RandomStream& rng);

// One full sweep: omega -> xi -> x -> z -> omega (refreshed so the
// zero pattern matches the new z) -> theta.
void sweep(GibbsState& state, const Dataset& data, const SamplerConfig& config,
           RandomStream& rng);

// log p(z, x, y | theta); throws on degenerate covariances.
double score_joint(const ModelParams& params, const LatentPath& path,
                   const Dataset& data);

// Fresh augmentation consistent with (params, path).
AugmentationState make_augmentation(const ModelParams& params,
                                    const LatentPath& path, const Dataset& data,
                                    RandomStream& rng);

// Driver: n_iters sweeps with optional NDJSON trace
// {iteration, z_rle, log_joint, params_digest} and a full parameter
// snapshot every `thinning` iterations.
void run_gibbs(GibbsState& state, const Dataset& data,
               const SamplerConfig& config, RandomStream& rng);

}  // namespace rslds
