#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "model.hpp"

namespace rslds {

// Constants of the synthetic oval-track generator: two translation
// states on the straightaways and two rotation states around the track
// ends, selected by hyperplanes at the quadrant boundaries.
struct NascarConfig {
  double turn_angle = M_PI / 24;   // per-step rotation at the track ends
  double turn_center = 2.0;        // end centers at (+-turn_center, 0)
  double speed = 0.25;             // straightaway translation per step
  double sharpness = 25.0;         // recurrence hyperplane scale
  double process_noise = 1e-4;     // isotropic Q
  double emission_noise = 1e-2;    // isotropic S
  int N = 10;                      // observation dimension
};

struct NascarTruth {
  ModelParams params;
  LatentPath path;
  Dataset data;
};

NascarTruth gen_nascar(int T, std::uint64_t seed,
                       const NascarConfig& config = NascarConfig());

struct LorenzConfig {
  double alpha = 10.0;
  double beta = 28.0;
  double gamma = 8.0 / 3.0;
  double dt = 0.01;
  int substeps = 10;  // RK4 steps per emitted sample
  int N = 20;         // Bernoulli output dimension
  int burnin = 100;   // discarded leading samples
};

struct LorenzTruth {
  Eigen::MatrixXd x;    // T x 3 standardized path
  std::vector<int> z;   // lobe indicator, x1 > 0
  Eigen::MatrixXd rho;  // T x N true event probabilities
  Eigen::MatrixXd C;    // GLM weights
  Eigen::VectorXd d;
  Dataset data;         // Bernoulli draws with the mask applied
};

// One step of the Lorenz vector field under fixed-step RK4.
Eigen::Vector3d lorenz_rk4_step(const Eigen::Vector3d& x,
                                const LorenzConfig& config, double dt);

LorenzTruth gen_lorenz(int T, int mask_start, int mask_end, std::uint64_t seed,
                       const LorenzConfig& config = LorenzConfig());

// Posterior summaries of a fitted model: the final parameter sample (or
// variational point estimate), per-step discrete marginals and their
// argmax, the mean continuous path, and for Bernoulli data the mean
// event probabilities, all averaged over the kept samples.
struct FitResult {
  ModelParams model;
  std::vector<int> z_mode;
  Eigen::MatrixXd z_prob;  // T x K
  Eigen::MatrixXd x_mean;  // T x M
  Eigen::MatrixXd rho_mean;  // T x N, Bernoulli only
  std::vector<double> objective;  // log-joint trace (Gibbs) or ELBO (SVI)
  std::vector<int> z_init;        // initializer's path, for diagnostics
};

struct FitConfig {
  int K = 2;
  int M = 1;
  VariantTag variant = VariantTag::RecurrentSLDS;
  EmissionFamily family = EmissionFamily::Gaussian;
  std::string inference = "gibbs";  // or "svi"
  int n_iters = 300;
  double burnin_frac = 0.5;  // Gibbs samples discarded before averaging
  int init_em_iters = 50;
  std::uint64_t seed = 0;
  std::string trace_file;
};

// Runs the full pipeline; pass a precomputed initializer result to
// skip the internal initialization stage.
struct InitResult;
FitResult fit_dataset(const Dataset& data, const FitConfig& config,
                      const InitResult* init = nullptr);

// Best label alignment of an estimated path against the truth: returns
// accuracy after the accuracy-maximizing permutation (exhaustive over
// K! for the small K used here) and the permutation itself.
double aligned_accuracy(const std::vector<int>& z_est,
                        const std::vector<int>& z_true, int K,
                        std::vector<int>* perm = nullptr);

// Run lengths of a discrete sequence.
std::vector<int> state_durations(const std::vector<int>& z);
double duration_mean(const std::vector<int>& durations);
double duration_cv(const std::vector<int>& durations);

// Least-squares affine map x_est -> x_true; returns the relative
// residual norm (continuous states are identified only up to an
// invertible affine transformation).
double affine_alignment_error(const Eigen::MatrixXd& x_est,
                              const Eigen::MatrixXd& x_true);

// Mean absolute gap between estimated and true event probabilities over
// the given steps (first column only when channel >= 0).
double calibration_error(const Eigen::MatrixXd& rho_est,
                         const Eigen::MatrixXd& rho_true, int t_begin,
                         int t_end, int channel = -1);

// Full metrics report for a fit against ground truth.
nlohmann::json evaluate_fit(const FitResult& fit,
                            const std::vector<int>& z_true,
                            const Eigen::MatrixXd& x_true);

// Geweke coupling check at desk scale; returns the KS statistics of the
// three probe statistics and writes them under {"ks": {...}}.
nlohmann::json geweke_report(int n_samples, std::uint64_t seed);

}  // namespace rslds
