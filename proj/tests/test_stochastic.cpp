#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "lobforge/error.hpp"
#include "lobforge/stochastic.hpp"
#include "test_support.hpp"

using namespace lobforge;

namespace {

struct Moments {
  double mean;
  double se;
  double var;
};

Moments moments(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / (n - 1.0);
  return {mean, std::sqrt(var / n), var};
}

}  // namespace

TEST(TruncatedPoisson, ZeroCapIsZero) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_truncated_poisson(3.0, 0, rng), 0);
}

TEST(TruncatedPoisson, FourPointPmf) {
  const auto pmf = lobforge::testing::truncated_poisson_pmf(2.0, 3);
  EXPECT_NEAR(pmf[0], 3.0 / 19, 1e-15);
  EXPECT_NEAR(pmf[1], 6.0 / 19, 1e-15);
  EXPECT_NEAR(pmf[2], 6.0 / 19, 1e-15);
  EXPECT_NEAR(pmf[3], 4.0 / 19, 1e-15);
  Rng rng(2);
  constexpr int n = 100000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample_truncated_poisson(2.0, 3, rng))];
  for (int j = 0; j < 4; ++j) {
    const double p = pmf[static_cast<std::size_t>(j)];
    EXPECT_NEAR(counts[static_cast<std::size_t>(j)] / double(n), p, 3.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(TruncatedPoisson, LooseCapKeepsMean) {
  Rng rng(3);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = static_cast<double>(sample_truncated_poisson(2.0, 1000, rng));
  const Moments m = moments(xs);
  EXPECT_NEAR(m.mean, 2.0, 3.0 * m.se);
}

TEST(Poisson, Moments) {
  Rng rng(4);
  EXPECT_EQ(sample_poisson_vector(Eigen::VectorXd::Zero(1), rng)[0], 0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = static_cast<double>(sample_poisson_vector(Eigen::VectorXd::Constant(1, 5.0), rng)[0]);
  const Moments m = moments(xs);
  EXPECT_NEAR(m.mean, 5.0, 3.0 * m.se);
  // Var of the sample variance of Poisson(5) is about (mu4 - sigma^4)/n = (5 + 2*25)/n.
  EXPECT_NEAR(m.var, 5.0, 3.0 * std::sqrt(55.0 / xs.size()));
}

TEST(Poisson, IndependentComponents) {
  Rng rng(5);
  const Eigen::Vector3d lambda(1, 2, 3);
  constexpr int n = 20000;
  std::vector<std::vector<double>> c(3, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    const auto v = sample_poisson_vector(lambda, rng);
    for (int k = 0; k < 3; ++k) c[k][i] = static_cast<double>(v[k]);
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const Moments ma = moments(c[a]);
      const Moments mb = moments(c[b]);
      double cov = 0.0;
      for (int i = 0; i < n; ++i) cov += (c[a][i] - ma.mean) * (c[b][i] - mb.mean);
      const double r = cov / (n - 1) / std::sqrt(ma.var * mb.var);
      EXPECT_NEAR(r, 0.0, 3.0 / std::sqrt(double(n)));
    }
}

TEST(Intensity, Transform) {
  const Eigen::VectorXd mu0 = Eigen::VectorXd::Constant(1, 10.0);
  EXPECT_DOUBLE_EQ(intensity_transform(Eigen::VectorXd::Zero(1), mu0)(0), 5.0);
  EXPECT_NEAR(intensity_transform(Eigen::VectorXd::Constant(1, 40.0), mu0)(0), 10.0, 1e-12);
  EXPECT_NEAR(intensity_transform(Eigen::VectorXd::Constant(1, -40.0), mu0)(0), 0.0, 1e-12);
  EXPECT_NEAR(intensity_transform(Eigen::VectorXd::Constant(1, -1.6449), mu0)(0), 0.5, 1e-4);
  EXPECT_THROW(intensity_transform(Eigen::VectorXd::Zero(2), mu0), Error);
}

TEST(SkewT, ComposeIsScaleMixture) {
  SkewTParams p{Eigen::Vector2d(1.0, -2.0), Eigen::Vector2d(0.5, 0.25), 6.0, Eigen::Matrix2d::Identity()};
  const Eigen::Vector2d z(0.3, -0.7);
  const Eigen::VectorXd x = skew_t_compose(p, 1.0, z);
  EXPECT_NEAR(x(0), 1.0 + 0.5 + 0.3, 1e-15);
  EXPECT_NEAR(x(1), -2.0 + 0.25 - 0.7, 1e-15);
}

TEST(SkewT, StudentMoments) {
  SkewTParams p{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 6.0, Eigen::Matrix2d::Identity()};
  SkewTSampler s(p);
  Rng rng(6);
  constexpr int n = 100000;
  std::vector<double> x0(n), x1(n), sq0(n), cross(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd v = s.sample(rng);
    x0[i] = v(0);
    x1[i] = v(1);
    sq0[i] = v(0) * v(0);
    cross[i] = v(0) * v(1);
  }
  for (const auto* xs : {&x0, &x1, &cross}) {
    const Moments m = moments(*xs);
    EXPECT_NEAR(m.mean, 0.0, 3.0 * m.se);
  }
  const Moments m = moments(sq0);
  EXPECT_NEAR(m.mean, 1.5, 3.0 * m.se);
}

TEST(SkewT, SkewedMean) {
  SkewTParams p{Eigen::Vector2d::Zero(), Eigen::Vector2d(1.0, 0.0), 6.0, Eigen::Matrix2d::Identity()};
  Rng rng(7);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_skew_t(p, rng)(0);
  const Moments m = moments(xs);
  EXPECT_NEAR(m.mean, 1.5, 3.0 * m.se);
}

TEST(SkewT, SymmetricDensityIsStudentT) {
  SkewTParams p{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 5.0, Eigen::MatrixXd::Identity(1, 1)};
  const double nu = 5.0;
  const double expected = std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5 * std::log(nu * M_PI);
  EXPECT_NEAR(skew_t_log_density(Eigen::VectorXd::Zero(1), p), expected, 1e-10);
  Eigen::VectorXd x(1);
  x << 1.7;
  EXPECT_NEAR(skew_t_log_density(x, p), expected - (nu + 1) / 2 * std::log1p(1.7 * 1.7 / nu), 1e-10);
}

TEST(SkewT, DeterministicSeed) {
  SkewTParams p{Eigen::Vector2d::Zero(), Eigen::Vector2d(0.2, 0.1), 6.0, Eigen::Matrix2d::Identity()};
  Rng a(9);
  Rng b(9);
  EXPECT_EQ(sample_skew_t(p, a), sample_skew_t(p, b));
}

TEST(SkewT, RejectsBadParameters) {
  SkewTParams p{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 6.0, Eigen::Matrix2d::Identity()};
  p.sigma(0, 1) = p.sigma(1, 0) = 2.0;
  EXPECT_THROW(SkewTSampler{p}, Error);
}

TEST(OrderSize, Constant) {
  Rng rng(10);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_order_size(ConstantSize{1}, rng), 1);
}

TEST(OrderSize, CeilExponentialMean) {
  // Oracle: E ceil(X) for X ~ Exp(mean 100) is 1 / (1 - exp(-1/100)).
  const double expected = 1.0 / (1.0 - std::exp(-0.01));
  Rng rng(11);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = static_cast<double>(sample_order_size(GammaMixtureSize{1.0, 1.0, 100.0, 2.0, 1.0}, rng));
  const Moments m = moments(xs);
  EXPECT_NEAR(m.mean, expected, 3.0 * m.se);
}

TEST(OrderSize, GammaMode) {
  Rng rng(12);
  std::vector<int> hist(400, 0);
  for (int i = 0; i < 100000; ++i) {
    const Shares s = sample_order_size(GammaMixtureSize{0.0, 1.0, 1.0, 2.0, 50.0}, rng);
    if (s < 400) ++hist[static_cast<std::size_t>(s / 10)];
  }
  const auto mode = std::max_element(hist.begin(), hist.end()) - hist.begin();
  EXPECT_NEAR(static_cast<double>(mode) * 10.0 + 5.0, 50.0, 15.0);
}

TEST(InverseWishart, Mean) {
  Rng rng(13);
  constexpr int n = 10000;
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd s = sample_inverse_wishart(Eigen::Matrix2d::Identity(), 10.0, rng);
    a[i] = s(0, 0);
    b[i] = s(0, 1);
    EXPECT_NEAR(s(0, 1), s(1, 0), 1e-12);
  }
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  EXPECT_NEAR(ma.mean, 1.0 / 7.0, 3.0 * ma.se);
  EXPECT_NEAR(mb.mean, 0.0, 3.0 * mb.se);
}

TEST(InverseWishart, Deterministic) {
  Rng a(14);
  Rng b(14);
  EXPECT_EQ(sample_inverse_wishart(Eigen::Matrix3d::Identity(), 8.0, a),
            sample_inverse_wishart(Eigen::Matrix3d::Identity(), 8.0, b));
}
