#include <doctest.h>

#include <cmath>

#include <rslds/conjugate.hpp>
#include <rslds/gaussian_info.hpp>
#include <rslds/numeric.hpp>
#include <rslds/polya_gamma.hpp>
#include <rslds/rng.hpp>

using namespace rslds;

namespace {

struct MomentStats {
  double mean, var;
};

MomentStats pg_moments(int b, double c, int n, RandomStream& rng) {
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = sample_pg({b, c}, rng);
    s += x;
    s2 += x * x;
  }
  double mean = s / n;
  return {mean, s2 / n - mean * mean};
}

}  // namespace

TEST_CASE("PG sampler matches closed-form means") {
  RandomStream rng(11);
  const int n = 1000000;
  CHECK(std::fabs(pg_moments(1, 0.0, n, rng).mean - 0.25) < 0.002);
  CHECK(std::fabs(pg_moments(1, 2.0, n, rng).mean - std::tanh(1.0) / 4.0) < 0.002);
  CHECK(std::fabs(pg_moments(3, 0.0, n, rng).mean - 0.75) < 0.005);
}

TEST_CASE("PG sampler mean and variance over the (b, c) grid") {
  RandomStream rng(12);
  const int n = 200000;
  for (int b : {1, 2, 3}) {
    for (double c : {0.0, 0.5, -0.5, 2.0, -2.0, 8.0, -8.0}) {
      auto st = pg_moments(b, c, n, rng);
      double mean = pg_mean({b, c});
      double var = pg_variance({b, c});
      double se_mean = std::sqrt(var / n);
      // Var of the sample variance ~ (mu4 - var^2)/n; bound mu4 loosely.
      double se_var = var * std::sqrt(10.0 / n);
      CAPTURE(b);
      CAPTURE(c);
      CHECK(std::fabs(st.mean - mean) < 4.0 * se_mean);
      CHECK(std::fabs(st.var - var) < 4.0 * se_var);
    }
  }
}

TEST_CASE("sample_pg rejects invalid input and handles b = 0") {
  RandomStream rng(1);
  CHECK_THROWS(sample_pg({1, std::nan("")}, rng));
  CHECK(sample_pg({0, 3.0}, rng) == 0.0);
}

TEST_CASE("pg_mean closed form") {
  CHECK(pg_mean({1, 0.0}) == doctest::Approx(0.25));
  CHECK(pg_mean({1, 2.0}) == doctest::Approx(0.190398).epsilon(1e-6));
  CHECK(pg_mean({2, 1.0}) == doctest::Approx(std::tanh(0.5)).epsilon(1e-9));
  // even in c, continuous at 0
  CHECK(pg_mean({1, 3.0}) == pg_mean({1, -3.0}));
  CHECK(std::fabs(pg_mean({1, 1e-8}) - 0.25) < 1e-9);
}

TEST_CASE("MNIW posterior: empty update returns the prior") {
  MNIWParams prior;
  prior.M0 = Eigen::MatrixXd::Zero(1, 2);
  prior.V0 = Eigen::MatrixXd::Identity(2, 2);
  prior.S0 = Eigen::MatrixXd::Identity(1, 1);
  prior.n0 = 3.0;
  auto post = mniw_posterior(prior, Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 1));
  CHECK(post.M0.isApprox(prior.M0));
  CHECK(post.n0 == prior.n0);
}

TEST_CASE("MNIW posterior recovers a noiseless line") {
  RandomStream rng(3);
  const int n = 10000;
  Eigen::MatrixXd xs(n, 2), ys(n, 1);
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    xs(i, 0) = x;
    xs(i, 1) = 1.0;
    ys(i, 0) = 2.0 * x + 1.0;
  }
  MNIWParams prior;
  prior.M0 = Eigen::MatrixXd::Zero(1, 2);
  prior.V0 = 10.0 * Eigen::MatrixXd::Identity(2, 2);
  prior.S0 = 0.1 * Eigen::MatrixXd::Identity(1, 1);
  prior.n0 = 3.0;
  auto post = mniw_posterior(prior, xs, ys);
  // oracle: ordinary least squares on the same rows
  Eigen::VectorXd ols =
      (xs.transpose() * xs).ldlt().solve(xs.transpose() * ys.col(0));
  CHECK(std::fabs(post.M0(0, 0) - 2.0) < 1e-3);
  CHECK(std::fabs(post.M0(0, 1) - 1.0) < 1e-3);
  CHECK(std::fabs(post.M0(0, 0) - ols(0)) < 1e-3);
}

TEST_CASE("MNIW posterior matches dense textbook formulas on 5 rows") {
  RandomStream rng(4);
  const int n = 5, p = 2, q = 2;
  Eigen::MatrixXd xs = rng.normal_matrix(n, q), ys = rng.normal_matrix(n, p);
  MNIWParams prior;
  prior.M0 = rng.normal_matrix(p, q);
  prior.V0 = Eigen::MatrixXd::Identity(q, q) * 2.0;
  prior.S0 = Eigen::MatrixXd::Identity(p, p) * 0.5;
  prior.n0 = p + 2;
  auto post = mniw_posterior(prior, xs, ys);

  // Independent dense evaluation of the update.
  Eigen::MatrixXd v0inv = prior.V0.inverse();
  Eigen::MatrixXd vninv = v0inv + xs.transpose() * xs;
  Eigen::MatrixXd vn = vninv.inverse();
  Eigen::MatrixXd mn = (prior.M0 * v0inv + ys.transpose() * xs) * vn;
  Eigen::MatrixXd sn = prior.S0 + ys.transpose() * ys +
                       prior.M0 * v0inv * prior.M0.transpose() -
                       mn * vninv * mn.transpose();
  CHECK(post.M0.isApprox(mn, 1e-10));
  CHECK(post.V0.isApprox(vn, 1e-10));
  CHECK(post.S0.isApprox(sn, 1e-10));
  CHECK(post.n0 == doctest::Approx(prior.n0 + n));

  SUBCASE("two batches compose to the concatenated update") {
    auto half1 = mniw_posterior(prior, xs.topRows(2), ys.topRows(2));
    auto both = mniw_posterior(half1, xs.bottomRows(3), ys.bottomRows(3));
    CHECK(both.M0.isApprox(post.M0, 1e-10));
    CHECK(both.S0.isApprox(post.S0, 1e-10));
    CHECK(both.V0.isApprox(post.V0, 1e-10));
  }
}

TEST_CASE("MNIW posterior rejects mismatched dimensions") {
  MNIWParams prior;
  prior.M0 = Eigen::MatrixXd::Zero(1, 2);
  prior.V0 = Eigen::MatrixXd::Identity(2, 2);
  prior.S0 = Eigen::MatrixXd::Identity(1, 1);
  prior.n0 = 3.0;
  CHECK_THROWS(mniw_posterior(prior, Eigen::MatrixXd::Ones(3, 3),
                              Eigen::MatrixXd::Ones(3, 1)));
  CHECK_THROWS(mniw_posterior(prior, Eigen::MatrixXd::Ones(3, 2),
                              Eigen::MatrixXd::Ones(2, 1)));
}

TEST_CASE("sample_mniw moments") {
  const int p = 2, q = 2;
  MNIWParams params;
  params.M0 = (Eigen::MatrixXd(p, q) << 1.0, -0.5, 0.25, 2.0).finished();
  params.V0 = (Eigen::MatrixXd(q, q) << 1.0, 0.3, 0.3, 0.5).finished();
  params.S0 = (Eigen::MatrixXd(p, p) << 2.0, 0.4, 0.4, 1.0).finished();
  params.n0 = p + 3;
  RandomStream rng(5);
  const int n = 100000;
  Eigen::MatrixXd wsum = Eigen::MatrixXd::Zero(p, q);
  Eigen::MatrixXd ssum = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd vecw_sum = Eigen::MatrixXd::Zero(p * q, 1);
  Eigen::MatrixXd vecw_outer = Eigen::MatrixXd::Zero(p * q, p * q);
  for (int i = 0; i < n; ++i) {
    auto [W, S] = sample_mniw(params, rng);
    wsum += W;
    ssum += S;
    Eigen::Map<Eigen::VectorXd> vw(W.data(), p * q);
    vecw_sum += vw;
    vecw_outer += vw * vw.transpose();
  }
  Eigen::MatrixXd wmean = wsum / n;
  Eigen::MatrixXd smean = ssum / n;
  Eigen::MatrixXd sexp = params.S0 / (params.n0 - p - 1);
  CHECK((wmean - params.M0).cwiseAbs().maxCoeff() < 0.05);
  CHECK((smean - sexp).cwiseAbs().maxCoeff() < 0.06);

  // vec(W) covariance equals V0 (x) E[Sigma] (column-major vec).
  Eigen::VectorXd mu = vecw_sum / n;
  Eigen::MatrixXd cov = vecw_outer / n - mu * mu.transpose();
  Eigen::MatrixXd kron(p * q, p * q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      kron.block(i * p, j * p, p, p) = params.V0(i, j) * sexp;
  CHECK((cov - kron).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("sample_mniw rejects non-PD inputs") {
  MNIWParams params;
  params.M0 = Eigen::MatrixXd::Zero(2, 2);
  params.V0 = -Eigen::MatrixXd::Identity(2, 2);
  params.S0 = Eigen::MatrixXd::Identity(2, 2);
  params.n0 = 5.0;
  RandomStream rng(1);
  CHECK_THROWS(sample_mniw(params, rng));
}

TEST_CASE("Dirichlet posterior") {
  DirichletParams prior{(Eigen::VectorXd(3) << 1, 2, 3).finished()};
  auto same = dirichlet_posterior(prior, Eigen::VectorXi::Zero(3));
  CHECK(same.alpha.isApprox(prior.alpha));
  auto post = dirichlet_posterior(prior, (Eigen::VectorXi(3) << 4, 0, 1).finished());
  CHECK(post.alpha.isApprox((Eigen::VectorXd(3) << 5, 2, 4).finished()));

  DirichletParams unit{Eigen::VectorXd::Ones(3)};
  auto heavy = dirichlet_posterior(unit, (Eigen::VectorXi(3) << 100, 0, 0).finished());
  CHECK(heavy.alpha(0) / heavy.alpha.sum() == doctest::Approx(101.0 / 103.0));

  CHECK_THROWS(dirichlet_posterior(prior, (Eigen::VectorXi(3) << -1, 0, 0).finished()));
  CHECK_THROWS(dirichlet_posterior(prior, Eigen::VectorXi::Zero(2)));
}

TEST_CASE("Gaussian information-form algebra") {
  GaussianInfo std1 = GaussianInfo::from_moments(Eigen::VectorXd::Zero(1),
                                                 Eigen::MatrixXd::Identity(1, 1));
  auto prod = gaussian_info_multiply(std1, std1);
  CHECK(prod.J(0, 0) == doctest::Approx(2.0));
  CHECK(prod.mean()(0) == doctest::Approx(0.0));

  SUBCASE("marginalizing an independent block leaves the rest unchanged") {
    GaussianInfo joint = GaussianInfo::zero(2);
    joint.J << 3.0, 0.0, 0.0, 5.0;
    joint.h << 1.5, -1.0;
    auto marg = gaussian_info_marginalize(joint, 1);
    CHECK(marg.J(0, 0) == doctest::Approx(3.0));
    CHECK(marg.h(0) == doctest::Approx(1.5));
  }

  SUBCASE("3-node chain marginal vs dense joint inversion") {
    RandomStream rng(7);
    Eigen::MatrixXd raw = rng.normal_matrix(3, 3);
    Eigen::MatrixXd J = raw * raw.transpose() + 3.0 * Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd h = rng.normal_vector(3);
    GaussianInfo joint{J, h, 0.0};
    auto marg = gaussian_info_marginalize(joint, 2);
    // dense oracle: moment-form marginal
    Eigen::MatrixXd cov = J.inverse();
    Eigen::VectorXd mean = cov * h;
    CHECK(std::fabs(marg.mean()(0) - mean(0)) < 1e-12);
    CHECK(std::fabs(marg.cov()(0, 0) - cov(0, 0)) < 1e-12);
  }

  SUBCASE("info-form results match dense moment computations up to dim 6") {
    RandomStream rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      int n = 2 + rng.uniform_int(5);
      Eigen::MatrixXd raw = rng.normal_matrix(n, n);
      Eigen::MatrixXd J = raw * raw.transpose() + n * Eigen::MatrixXd::Identity(n, n);
      Eigen::VectorXd h = rng.normal_vector(n);
      GaussianInfo g{J, h, 0.0};
      Eigen::MatrixXd cov = J.inverse();
      Eigen::VectorXd mean = cov * h;
      CHECK((g.mean() - mean).norm() < 1e-9 * (1.0 + mean.norm()));
      CHECK((g.cov() - cov).norm() < 1e-9 * (1.0 + cov.norm()));
      int tail = 1 + rng.uniform_int(n - 1);
      auto marg = gaussian_info_marginalize(g, tail);
      Eigen::MatrixXd covh = cov.topLeftCorner(n - tail, n - tail);
      CHECK((marg.cov() - covh).norm() < 1e-9 * (1.0 + covh.norm()));
      CHECK((marg.mean() - mean.head(n - tail)).norm() < 1e-9 * (1.0 + mean.norm()));
    }
  }

  SUBCASE("conditioning matches dense conditional") {
    RandomStream rng(9);
    Eigen::MatrixXd raw = rng.normal_matrix(3, 3);
    Eigen::MatrixXd J = raw * raw.transpose() + 3.0 * Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd h = rng.normal_vector(3);
    GaussianInfo g{J, h, 0.0};
    Eigen::VectorXd xb = rng.normal_vector(1);
    auto cond = gaussian_info_condition(g, xb);
    Eigen::MatrixXd Jaa = J.topLeftCorner(2, 2);
    Eigen::VectorXd ha = h.head(2) - J.topRightCorner(2, 1) * xb;
    CHECK((cond.mean() - Jaa.inverse() * ha).norm() < 1e-12);
  }

  SUBCASE("marginalization requires a PD eliminated block") {
    GaussianInfo g = GaussianInfo::zero(2);
    g.J << 1.0, 0.0, 0.0, 0.0;
    CHECK_THROWS(gaussian_info_marginalize(g, 1));
  }

  SUBCASE("log_partition matches the dense Gaussian integral") {
    RandomStream rng(10);
    Eigen::MatrixXd raw = rng.normal_matrix(2, 2);
    Eigen::MatrixXd J = raw * raw.transpose() + 2.0 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd h = rng.normal_vector(2);
    GaussianInfo g{J, h, 0.7};
    Eigen::MatrixXd cov = J.inverse();
    double expect = 0.7 + 0.5 * 2 * std::log(2 * M_PI) +
                    0.5 * std::log(cov.determinant()) +
                    0.5 * h.dot(cov * h);
    CHECK(g.log_partition() == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("samples from GaussianInfo match the target moments") {
  GaussianInfo g = GaussianInfo::from_moments(
      (Eigen::VectorXd(2) << 1.0, -2.0).finished(),
      (Eigen::MatrixXd(2, 2) << 2.0, 0.6, 0.6, 1.0).finished());
  RandomStream rng(21);
  const int n = 50000;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = g.sample(rng);
    s += x;
    s2 += x * x.transpose();
  }
  Eigen::VectorXd mean = s / n;
  Eigen::MatrixXd cov = s2 / n - mean * mean.transpose();
  CHECK((mean - g.mean()).cwiseAbs().maxCoeff() < 0.03);
  CHECK((cov - g.cov()).cwiseAbs().maxCoeff() < 0.06);
}
