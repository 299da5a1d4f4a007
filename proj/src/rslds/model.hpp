#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conjugate.hpp"
#include "rng.hpp"

namespace rslds {

enum class VariantTag {
  StandardSLDS,
  RecurrentSLDS,
  SharedRSLDS,
  RecurrenceOnly,
  RecurrentSticky,
  RecurrentARHMM,
};

enum class EmissionFamily { Gaussian, Bernoulli };

std::string variant_name(VariantTag v);
VariantTag variant_from_name(const std::string& name);

// Full parameter set. Discrete states are 0-based throughout the code;
// serialized state sequences are 1-based.
//
// Recurrence storage convention: R.size() == 1 means the weight matrix is
// shared across the conditioning state (SharedRSLDS, RecurrenceOnly, and
// the recurrence-only AR-HMM); likewise r.size() == 1 shares the bias.
struct ModelParams {
  int K = 0, M = 0, N = 0;
  VariantTag variant = VariantTag::RecurrentSLDS;
  EmissionFamily emission_family = EmissionFamily::Gaussian;

  std::vector<Eigen::MatrixXd> A;  // K, M x M
  std::vector<Eigen::VectorXd> b;  // K, M
  std::vector<Eigen::MatrixXd> Q;  // K, M x M SPD

  Eigen::MatrixXd C;  // N x M (unused for RecurrentARHMM)
  Eigen::VectorXd d;  // N
  Eigen::MatrixXd S;  // N x N SPD (Gaussian emissions only)

  std::vector<Eigen::MatrixXd> R;  // (K-1) x M, per state or shared
  std::vector<Eigen::VectorXd> r;  // K-1, per state or shared

  Eigen::MatrixXd pi;  // K x K rows (StandardSLDS only)

  std::vector<Eigen::VectorXd> stay;  // K stay-vectors, M (sticky only)
  Eigen::MatrixXd pi_tilde;  // K x K, zero diagonal, rows sum to 1 (sticky)

  const Eigen::MatrixXd& R_for(int z_prev) const {
    return R[R.size() == 1 ? 0 : z_prev];
  }
  const Eigen::VectorXd& r_for(int z_prev) const {
    return r[r.size() == 1 ? 0 : z_prev];
  }

  bool has_stick_recurrence() const {
    return variant != VariantTag::StandardSLDS &&
           variant != VariantTag::RecurrentSticky;
  }
  bool observes_x() const { return variant == VariantTag::RecurrentARHMM; }

  // Stick logits nu = R_{z_prev} x_prev + r_{z_prev} (stick variants only).
  Eigen::VectorXd stick_logits(int z_prev, const Eigen::VectorXd& x_prev) const;

  void validate() const;
};

struct LatentPath {
  std::vector<int> z;  // 0-based states
  Eigen::MatrixXd x;   // T x M
  int T() const { return static_cast<int>(z.size()); }
};

struct Dataset {
  Eigen::MatrixXd y;        // T x N
  std::vector<bool> mask;   // true = observed
  EmissionFamily emission_family = EmissionFamily::Gaussian;
  int T() const { return static_cast<int>(y.rows()); }
  int N() const { return static_cast<int>(y.cols()); }
  bool observed(int t) const { return mask.empty() ? true : mask[t]; }
};

struct Hyperparams {
  DirichletParams alpha;  // transition rows (StandardSLDS / sticky)
  MNIWParams lambda;      // dynamics (A_k, b_k), Q_k
  MNIWParams eta;         // emissions (C, d), S; Bernoulli uses M0/V0 only
  MNIWParams rec;         // recurrence rows of [R r]: matrix normal via M0/V0
};

// Stick logits of the uniform distribution over K states.
Eigen::VectorXd uniform_stick_logits(int K);

// Defaults: dynamics mean [0.99 I | 0] with small column covariance so
// draws are typically stable, recurrence bias mean at the uniform-stick
// logits so states are equiprobable in expectation, Dirichlet alpha = 1.
Hyperparams default_hypers(int K, int M, int N);

ModelParams sample_prior(const Hyperparams& hypers, int K, int M, int N,
                         VariantTag variant, EmissionFamily family,
                         RandomStream& rng);

// Transition pmf p(z_next | z_prev, x_prev) as a K-vector.
Eigen::VectorXd transition_probs(const ModelParams& params, int z_prev,
                                 const Eigen::VectorXd& x_prev);

double transition_log_pmf(const ModelParams& params, int z_prev,
                          const Eigen::VectorXd& x_prev, int z_next);

int step_discrete(const ModelParams& params, int z_prev,
                  const Eigen::VectorXd& x_prev, RandomStream& rng);

Eigen::VectorXd step_continuous(const ModelParams& params, int z_t,
                                const Eigen::VectorXd& x_prev, RandomStream& rng);

Eigen::VectorXd emit(const ModelParams& params, int z_t,
                     const Eigen::VectorXd& x_t, RandomStream& rng);

// Roll the generative model forward. x1 ~ N(0, I) and z1 ~ uniform unless
// x1_init is given. For the AR-HMM, x is emitted directly as y.
std::pair<LatentPath, Dataset> simulate(const ModelParams& params, int T,
                                        RandomStream& rng,
                                        const Eigen::VectorXd* x1_init = nullptr);

}  // namespace rslds
