#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gaussian_info.hpp"
#include "rng.hpp"

namespace rslds {

// Gaussian factor on an adjacent pair (x_t, x_{t+1}):
//   exp{-1/2 [x_t; x_{t+1}]' [J11 J12; J12' J22] [x_t; x_{t+1}]
//       + h1' x_t + h2' x_{t+1} + log_normalizer}.
struct PairwisePotential {
  Eigen::MatrixXd J11, J12, J22;
  Eigen::VectorXd h1, h2;
  double log_normalizer = 0.0;
};

// Pairwise factor of the linear dynamics x' = A x + b + N(0, Q).
PairwisePotential dynamics_potential(const Eigen::MatrixXd& A,
                                     const Eigen::VectorXd& b,
                                     const Eigen::MatrixXd& Q);

// Chain of T nodes of dimension M. unary[t] collects the prior (t = 0),
// evidence, and recurrence potentials at t; a missing observation simply
// contributes nothing there.
struct GaussianChainSpec {
  int T = 0;
  int M = 0;
  std::vector<GaussianInfo> unary;           // size T
  std::vector<PairwisePotential> pairwise;   // size T-1

  static GaussianChainSpec empty(int T, int M);
  void add_unary(int t, const GaussianInfo& g);
};

struct SmootherMoments {
  std::vector<Eigen::VectorXd> mean;    // T
  std::vector<Eigen::MatrixXd> cov;     // T
  std::vector<Eigen::MatrixXd> cross;   // T-1, E[x_t x_{t+1}']
  double log_partition = 0.0;           // log of the chain's normalizer
  double logdet_precision = 0.0;        // of the joint TM x TM precision
};

// Exact joint draw from the chain posterior in O(T M^3).
std::vector<Eigen::VectorXd> ffbs_continuous(const GaussianChainSpec& spec,
                                             RandomStream& rng);

SmootherMoments smoother_moments(const GaussianChainSpec& spec);

// Discrete chain with time-varying transitions, all in log space.
struct DiscreteChainSpec {
  int T = 0;
  int K = 0;
  Eigen::VectorXd log_init;                 // K
  std::vector<Eigen::MatrixXd> log_trans;   // T-1, K x K, [from, to]
  Eigen::MatrixXd log_unary;                // T x K (zeros when z does not
                                            // enter the emission)
  static DiscreteChainSpec uniform(int T, int K);
};

struct HmmMarginals {
  Eigen::MatrixXd unary;                    // T x K
  std::vector<Eigen::MatrixXd> pairwise;    // T-1, K x K
  double log_partition = 0.0;
};

std::vector<int> ffbs_discrete(const DiscreteChainSpec& spec, RandomStream& rng);

HmmMarginals hmm_marginals(const DiscreteChainSpec& spec);

}  // namespace rslds
