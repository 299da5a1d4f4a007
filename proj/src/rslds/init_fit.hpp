#pragma once

#include <vector>

#include <json.hpp>

#include "model.hpp"

namespace rslds {

// Probabilistic PCA with isotropic noise, fit in closed form from the
// eigendecomposition of the sample covariance of the observed rows.
struct PpcaResult {
  Eigen::MatrixXd x;  // T x M posterior-mean latents (masked rows imputed
                      // by interpolating neighboring latents)
  Eigen::MatrixXd C;  // N x M loadings
  Eigen::VectorXd d;  // N data mean
  Eigen::MatrixXd S;  // N x N isotropic noise estimate
};

// Bernoulli data is first mapped to centered logits of window-5 smoothed
// rates, then fit with the same Gaussian machinery.
PpcaResult ppca_init(const Dataset& data, int M);

struct ArhmmResult {
  std::vector<int> z;  // Viterbi path
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::VectorXd> b;
  std::vector<Eigen::MatrixXd> Q;
  Eigen::MatrixXd pi;           // K x K Markov transitions
  std::vector<double> loglik;   // per EM iteration, nondecreasing
};

// EM for a K-state AR(1)-HMM on the latent trajectory, restarted from
// window-regression clusters plus chunked and random responsibilities.
// trans_weight (length T-1, optional) down-weights transitions in both
// the E- and M-step; pass 0 for transitions whose endpoints were filled
// in rather than estimated (e.g. interpolated latents under a mask), so
// EM cannot carve a spurious low-noise state out of fabricated data.
ArhmmResult arhmm_init(const Eigen::MatrixXd& x, int K, int n_iters,
                       const std::vector<double>& trans_weight = {});

// Greedy stick-breaking order search: at each level pick the output state
// whose one-vs-rest MAP logistic regression fits best, fix its predicate,
// and drop the matched rows.
struct DecisionList {
  std::vector<int> outputs;                 // permutation of 0..K-1
  std::vector<Eigen::VectorXd> predicates;  // K-1 weight vectors over [x; 1]
};

// rows of x paired with next-state labels in 0..K-1.
DecisionList fit_decision_list(const Eigen::MatrixXd& x,
                               const std::vector<int>& labels, int K);

// MAP logistic regression (Gaussian prior, precision tau) by Newton's
// method; returns weights over [x; 1]. Exposed for testing.
Eigen::VectorXd map_logistic(const Eigen::MatrixXd& x,
                             const std::vector<int>& y, double tau = 1e-2,
                             int max_iters = 50, double tol = 1e-8);

struct InitResult {
  ModelParams params;
  LatentPath path;               // z_init (relabeled) and x_init
  std::vector<int> permutation;  // decision-list output order
};

// Full three-stage initialization for any variant.
InitResult assemble_init(const Dataset& data, int K, int M,
                         VariantTag variant, EmissionFamily family,
                         int em_iters = 50);

nlohmann::json init_to_json(const InitResult& init);

}  // namespace rslds
