#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace rslds {

// Every sampler in the library takes an explicit stream; a seed fully
// determines a run.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  std::mt19937_64& gen() { return gen_; }

  double uniform() { return unif_(gen_); }
  double normal() { return norm_(gen_); }
  double exponential() { return expo_(gen_); }

  double gamma(double shape, double scale) {
    std::gamma_distribution<double> d(shape, scale);
    return d(gen_);
  }

  double chisq(double dof) { return gamma(0.5 * dof, 2.0); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    std::uniform_int_distribution<int> d(0, n - 1);
    return d(gen_);
  }

  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  Eigen::MatrixXd normal_matrix(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  // Index draw from unnormalized nonnegative weights.
  int categorical(const Eigen::VectorXd& w) {
    double total = w.sum();
    double u = uniform() * total;
    double acc = 0.0;
    for (int i = 0; i < w.size(); ++i) {
      acc += w(i);
      if (u <= acc) return i;
    }
    return static_cast<int>(w.size()) - 1;
  }

  // Derive an independent stream (for parallel chains).
  RandomStream split() {
    std::uint64_t s = gen_();
    return RandomStream(s ^ 0x9e3779b97f4a7c15ull);
  }

 private:
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
  std::exponential_distribution<double> expo_{1.0};
};

}  // namespace rslds
