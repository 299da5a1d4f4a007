#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "messages.hpp"
#include "model.hpp"

namespace rslds {

// Data-side natural parameters of one MNIW regression factor, stored
// relative to the prior (so the prior corresponds to all zeros).
struct FactorStats {
  Eigen::MatrixXd syy, syx, sxx;
  double n = 0.0;

  static FactorStats zero(int p, int q);
  FactorStats& operator+=(const FactorStats& o);
  void scale_into(double a);
};

// Data-side natural parameters of a Gaussian coefficient row.
struct RowStats {
  Eigen::MatrixXd J;
  Eigen::VectorXd h;

  static RowStats zero(int dim);
  RowStats& operator+=(const RowStats& o);
  void scale_into(double a);
};

// Posterior expectations of one MNIW factor needed by the chain updates.
struct MniwMoments {
  Eigen::MatrixXd EW;          // p x q
  Eigen::MatrixXd Einv;        // p x p, E[Sigma^-1]
  Eigen::MatrixXd EWtEinvW;    // q x q, E[W' Sigma^-1 W]
  double Elogdetinv = 0.0;     // E[ln det Sigma^-1]
};

MniwMoments mniw_moments(const MNIWParams& post);

// Mean-field state over the global parameters. Recurrence rows are
// grouped by conditioning state (one group for the shared variants);
// Bernoulli emissions use Gaussian rows instead of the MNIW block.
struct VariationalState {
  int K = 0, M = 0, N = 0;
  VariantTag variant = VariantTag::RecurrentSLDS;
  EmissionFamily family = EmissionFamily::Gaussian;
  Hyperparams hypers;

  std::vector<FactorStats> dyn;              // K
  FactorStats obs;                           // Gaussian emissions
  std::vector<RowStats> obs_rows;            // Bernoulli emissions, N rows
  std::vector<std::vector<RowStats>> rec;    // group x stick
  Eigen::MatrixXd trans_counts;              // StandardSLDS, K x K

  int rec_groups() const;

  MNIWParams q_dyn(int k) const;
  MNIWParams q_obs() const;
  // Natural parameters (prior + stats) of recurrence row (group, stick).
  void q_rec_row(int group, int stick, Eigen::MatrixXd* J,
                 Eigen::VectorXd* h) const;
  void q_obs_row(int n, Eigen::MatrixXd* J, Eigen::VectorXd* h) const;
  Eigen::MatrixXd q_pi_mean() const;  // E[pi] rows (StandardSLDS)

  // Posterior-mean point estimate of every parameter (for scoring).
  ModelParams point_estimate() const;
};

VariationalState make_variational(const Hyperparams& hypers, int K, int M,
                                  int N, VariantTag variant,
                                  EmissionFamily family);

// Per-sequence local factors.
struct LocalState {
  HmmMarginals qz;              // discrete chain marginals
  std::vector<int> zhat;        // sampled path for the omega update
  SmootherMoments qx;           // Gaussian chain moments
  Eigen::MatrixXd eomega;       // (T-1) x (K-1) expected PG draws
  Eigen::MatrixXd exi;          // T x N (Bernoulli)
  DiscreteChainSpec zspec;      // chains behind qz / qx, kept for sampling
  GaussianChainSpec xspec;
};

// q(z) marginals: closed-form expected dynamics factors plus a Monte
// Carlo estimate (mc_pisb draws) of the stick-breaking factor.
void update_qz(const VariationalState& vs, const Dataset& data, LocalState& ls,
               int mc_pisb, RandomStream& rng);

// E[omega_{t,k}] with tilt sqrt(E[nu^2]) under the sampled zhat; also
// the Bernoulli emission tilts when applicable.
void update_qomega(const VariationalState& vs, const Dataset& data,
                   LocalState& ls);

// q(x) from expected potentials mixed over the q(z) marginals.
void update_qx(const VariationalState& vs, const Dataset& data,
               LocalState& ls);

// Expected sufficient statistics of one sequence.
struct SequenceStats {
  std::vector<FactorStats> dyn;
  FactorStats obs;
  std::vector<RowStats> obs_rows;
  std::vector<std::vector<RowStats>> rec;
  Eigen::MatrixXd trans_counts;
};

SequenceStats collect_stats(const VariationalState& vs, const Dataset& data,
                            const LocalState& ls);

// Natural-gradient step eta <- (1-rho) eta + rho (prior + scale * batch).
void update_qtheta(VariationalState& vs, const SequenceStats& batch,
                   double rho, double scale);

// Monte Carlo ELBO with theta at its posterior mean: mean joint score of
// sampled (z, x) plus the entropies of both chain factors.
double elbo_estimate(const VariationalState& vs, const Dataset& data,
                     const LocalState& ls, int n_samples, RandomStream& rng);

struct SviConfig {
  int n_iters = 100;
  int minibatch = 0;        // 0 = full batch
  double decay = 0.6;       // rho_i = (i + 1)^-decay
  double forced_rate = -1;  // in (0, 1] overrides the schedule
  int inner_iters = 2;      // local qz / qomega / qx passes
  int mc_pisb = 10;
  int elbo_samples = 10;
  std::uint64_t seed = 0;
  std::string elbo_trace;   // CSV: iteration, elbo, step_size, batch ids
};

// One full local pass over a sequence (qz -> qomega -> qx, repeated).
LocalState local_pass(const VariationalState& vs, const Dataset& data,
                      const SviConfig& config, RandomStream& rng);

// Minibatch SVI over independent sequences; returns the ELBO trace.
std::vector<double> run_svi(VariationalState& vs,
                            const std::vector<Dataset>& sequences,
                            const SviConfig& config);

}  // namespace rslds
