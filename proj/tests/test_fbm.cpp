#include "fracvol/fbm.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace fracvol;

namespace {

struct Moments {
  double mean;
  double var;
};

Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return {m, s / (n - 1)};
}

}  // namespace

TEST(FbmCovariance, Examples) {
  EXPECT_DOUBLE_EQ(fbm_covariance(1, 1, 0.8), 1.0);
  EXPECT_DOUBLE_EQ(fbm_covariance(1, 2, 0.5), 1.0);
  EXPECT_NEAR(fbm_covariance(1, 2, 0.8), 1.5157165665103980, 1e-15);
}

TEST(FbmCovariance, HurstOutOfRange) {
  EXPECT_THROW(fbm_covariance(1, 1, 0.0), std::invalid_argument);
  EXPECT_THROW(fbm_covariance(1, 1, 1.2), std::invalid_argument);
  EXPECT_NO_THROW(fbm_covariance(1, 1, 1.0));
}

TEST(FbmCovariance, LongRangeDependenceSign) {
  for (double h : {0.6, 0.8, 0.95}) {
    for (int n = 1; n <= 1000; ++n) {
      const double c = fbm_covariance(1, n + 1, h) - fbm_covariance(1, n, h);
      ASSERT_GT(c, 0.0) << "H=" << h << " n=" << n;
    }
  }
  for (double h : {0.2, 0.4}) {
    for (int n = 1; n <= 1000; ++n) {
      const double c = fbm_covariance(1, n + 1, h) - fbm_covariance(1, n, h);
      ASSERT_LT(c, 0.0) << "H=" << h << " n=" << n;
    }
  }
}

TEST(GenerateFbm, SingleStepIsStandardNormal) {
  for (FbmMethod method : {FbmMethod::circulant, FbmMethod::cholesky}) {
    const FbmGenerator gen(1, 0.7, method);
    const std::size_t paths = 100000;
    std::vector<double> x(paths);
    for (std::size_t i = 0; i < paths; ++i) {
      const FbmPath p = gen.path(1.0, RngSeed{i});
      ASSERT_EQ(p.values[0], 0.0);
      x[i] = p.values[1];
    }
    const auto m = moments(x);
    const double n = static_cast<double>(paths);
    EXPECT_LT(std::abs(m.mean), 4.0 / std::sqrt(n));
    EXPECT_LT(std::abs(m.var - 1.0), 4.0 * std::sqrt(2.0 / n));
  }
}

TEST(GenerateFbm, BrownianIncrementsUncorrelated) {
  const std::size_t n = 1 << 14;
  const FbmPath p = generate_fbm(n, 0.5, 1.0, RngSeed{77});
  std::vector<double> inc(n);
  for (std::size_t i = 0; i < n; ++i) inc[i] = p.values[i + 1] - p.values[i];
  const auto m = moments(inc);
  double c = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) c += (inc[i] - m.mean) * (inc[i + 1] - m.mean);
  const double rho = c / (static_cast<double>(n - 1) * m.var);
  EXPECT_LT(std::abs(rho), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(GenerateFbm, CovarianceOfOneAndTwo) {
  const FbmGenerator gen(1 << 12, 0.8);
  const std::size_t paths = 10000;
  std::vector<double> prod(paths);
  std::vector<double> b1(paths);
  std::vector<double> b2(paths);
  for (std::size_t i = 0; i < paths; ++i) {
    const FbmPath p = gen.path(1.0, RngSeed{1000 + i});
    b1[i] = p.values[1];
    b2[i] = p.values[2];
  }
  const double m1 = std::accumulate(b1.begin(), b1.end(), 0.0) / paths;
  const double m2 = std::accumulate(b2.begin(), b2.end(), 0.0) / paths;
  for (std::size_t i = 0; i < paths; ++i) prod[i] = (b1[i] - m1) * (b2[i] - m2);
  const auto m = moments(prod);
  const double cov = m.mean * paths / (paths - 1.0);
  const double se = std::sqrt(m.var / paths);
  EXPECT_LT(std::abs(cov - 1.5157165665103980), 4 * se) << "cov " << cov << " se " << se;
}

TEST(GenerateFbm, DeterministicGivenSeed) {
  for (FbmMethod method : {FbmMethod::circulant, FbmMethod::cholesky}) {
    const auto a = generate_fbm(300, 0.75, 0.1, RngSeed{42}, method);
    const auto b = generate_fbm(300, 0.75, 0.1, RngSeed{42}, method);
    const auto c = generate_fbm(300, 0.75, 0.1, RngSeed{43}, method);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
  }
}

TEST(GenerateFbm, PathwiseSelfSimilarity) {
  for (FbmMethod method : {FbmMethod::cholesky, FbmMethod::circulant}) {
    const double h = 0.7;
    const double a = 3.7;
    const auto unit = generate_fbm(200, h, 1.0, RngSeed{8}, method);
    const auto scaled = generate_fbm(200, h, a, RngSeed{8}, method);
    for (std::size_t i = 0; i < unit.values.size(); ++i) {
      EXPECT_NEAR(scaled.values[i], std::pow(a, h) * unit.values[i], 1e-10);
    }
  }
}

TEST(GenerateFbm, MethodsAgreeInLaw) {
  const std::size_t n = 256;
  const FbmGenerator chol(n, 0.8, FbmMethod::cholesky);
  const FbmGenerator circ(n, 0.8, FbmMethod::circulant);
  std::vector<double> x(10000);
  std::vector<double> y(10000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = chol.path(1.0, RngSeed{i}).values[n];
    y[i] = circ.path(1.0, RngSeed{500000 + i}).values[n];
  }
  EXPECT_GT(oracle::ks_two_sample_pvalue(x, y), 1e-3);
}

TEST(GenerateFbm, HurstOneIsALine) {
  const auto p = generate_fbm(50, 1.0, 1.0, RngSeed{3}, FbmMethod::cholesky);
  for (std::size_t i = 0; i < p.values.size(); ++i) EXPECT_NEAR(p.values[i], i * p.values[1], 1e-9);
  const auto q = generate_fbm(50, 1.0, 1.0, RngSeed{3}, FbmMethod::circulant);
  for (std::size_t i = 0; i < q.values.size(); ++i) EXPECT_NEAR(q.values[i], i * q.values[1], 1e-9);
}

TEST(GenerateFbm, InvalidArguments) {
  EXPECT_THROW(generate_fbm(0, 0.5, 1.0, RngSeed{}), std::invalid_argument);
  EXPECT_THROW(generate_fbm(10, 0.0, 1.0, RngSeed{}), std::invalid_argument);
  EXPECT_THROW(generate_fbm(10, 0.5, 0.0, RngSeed{}), std::invalid_argument);
  EXPECT_THROW(generate_fbm(5000, 0.5, 1.0, RngSeed{}, FbmMethod::cholesky), std::invalid_argument);
  FbmLimits small;
  small.cholesky_max_n = 10;
  EXPECT_THROW(FbmGenerator(11, 0.5, FbmMethod::cholesky, small), std::invalid_argument);
}

TEST(GenerateFbm, CirculantEmbeddingSize) {
  const FbmGenerator gen(1000, 0.8);
  EXPECT_EQ(gen.embedding_size(), 2048u);
  EXPECT_EQ(FbmGenerator(10, 0.8, FbmMethod::cholesky).embedding_size(), 0u);
}

TEST(FractionalNoise, FirstDifferences) {
  const FbmPath p{0.5, 1.0, {0.0, 1.0, 3.0}};
  const auto n = fractional_noise(p, 1.0);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0], 1.0);
  EXPECT_EQ(n[1], 2.0);
  const auto whole = fractional_noise(p, 2.0);
  ASSERT_EQ(whole.size(), 1u);
  EXPECT_EQ(whole[0], 3.0);
}

TEST(FractionalNoise, Errors) {
  const FbmPath p{0.5, 0.5, {0.0, 1.0, 3.0}};
  EXPECT_THROW(fractional_noise(p, 0.75), std::invalid_argument);
  EXPECT_THROW(fractional_noise(p, 1.5), std::invalid_argument);
  EXPECT_THROW(fractional_noise(p, 0.0), std::invalid_argument);
}

TEST(FractionalNoise, StationaryVariance) {
  const FbmGenerator gen(40, 0.8);
  std::vector<double> x(10000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto noise = fractional_noise(gen.path(0.25, RngSeed{i}), 1.0);
    x[i] = noise[20];
  }
  const auto m = moments(x);
  EXPECT_LT(std::abs(m.var - 1.0), 4.0 * std::sqrt(2.0 / x.size()));
}

TEST(LogvolCovariance, Examples) {
  EXPECT_NEAR(logvol_covariance(3, 3, 0.59, 2.0, 0.83), 0.59 * 0.59 * std::pow(2.0, 2 * 0.83 - 2), 1e-15);
  EXPECT_NEAR(logvol_covariance(0, 1, 0.7, 1.0, 0.5), 0.0, 1e-15);
  EXPECT_NEAR(logvol_covariance(0, 5, 0.7, 1.0, 0.5), 0.0, 1e-15);
  EXPECT_EQ(logvol_covariance(0.3, 1.1, 0.0, 1.0, 0.8), 0.0);
  EXPECT_THROW(logvol_covariance(0, 1, -1.0, 1.0, 0.8), std::invalid_argument);
  EXPECT_THROW(logvol_covariance(0, 1, 1.0, 0.0, 0.8), std::invalid_argument);
}

TEST(LogvolCovariance, MatchesFbmCovarianceOfNoise) {
  const double h = 0.8;
  const double k = 0.6;
  const double d = 1.5;
  const auto noise_cov = [&](double s, double u) {
    return oracle::fbm_cov(s, u, h) - oracle::fbm_cov(s, u - d, h) - oracle::fbm_cov(s - d, u, h) +
           oracle::fbm_cov(s - d, u - d, h);
  };
  for (double s : {0.0, 0.4, 2.0})
    for (double u : {0.0, 1.0, 3.5}) EXPECT_NEAR(logvol_covariance(s, u, k, d, h), k * k / (d * d) * noise_cov(s, u), 1e-12);
}
