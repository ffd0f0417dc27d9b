#include "fracvol/timeseries_io.hpp"
#include "fracvol/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

using namespace fracvol;

namespace {

LoadResult parse(const std::string& text, CsvFormat f = {}) {
  std::istringstream in(text);
  return parse_price_series(in, f);
}

double variance(const std::vector<double>& x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST(LoadPriceSeries, ThreeRows) {
  const auto r = parse("1,10\n2,11\n3,12");
  ASSERT_EQ(r.series.size(), 3u);
  EXPECT_DOUBLE_EQ(r.series.resolution(), 1.0);
  EXPECT_DOUBLE_EQ(r.series.prices()[2], 12.0);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(LoadPriceSeries, NegativePriceRowRejectedWithLineNumber) {
  const auto r = parse("1,10\n2,-5\n3,12\n");
  ASSERT_EQ(r.series.size(), 2u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].line, 2u);
  EXPECT_NE(r.warnings[0].message.find("non-positive"), std::string::npos);
}

TEST(LoadPriceSeries, EmptyInputHasNoValidRows) {
  try {
    parse("");
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "no valid rows");
  }
}

TEST(LoadPriceSeries, MissingPriceAndBadTimeRejected) {
  const auto r = parse("t,p\n1,10\n2,\nx,3\n4,12\n5,13\n");
  EXPECT_EQ(r.series.size(), 3u);
  ASSERT_EQ(r.warnings.size(), 2u);
  EXPECT_EQ(r.warnings[0].line, 3u);
  EXPECT_EQ(r.warnings[1].line, 4u);
}

TEST(LoadPriceSeries, HeaderDetectionAndComments) {
  const auto r = parse("# exported prices\ndate,close\n\n0,1.5\n1,1.6\n");
  EXPECT_EQ(r.series.size(), 2u);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(LoadPriceSeries, SortsAndKeepsFirstDuplicate) {
  const auto r = parse("3,30\n1,10\n2,20\n2,99\n");
  ASSERT_EQ(r.series.size(), 3u);
  EXPECT_DOUBLE_EQ(r.series.timestamps()[0], 1.0);
  EXPECT_DOUBLE_EQ(r.series.prices()[1], 20.0);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].line, 4u);
}

TEST(LoadPriceSeries, ConfigurableColumnsAndDelimiter) {
  CsvFormat f;
  f.time_column = 2;
  f.price_column = 0;
  f.delimiter = ';';
  f.resolution = 0.5;
  const auto r = parse("10;x;0\n11;y;1\n12;z;2\n", f);
  ASSERT_EQ(r.series.size(), 3u);
  EXPECT_DOUBLE_EQ(r.series.prices()[1], 11.0);
  EXPECT_DOUBLE_EQ(r.series.resolution(), 0.5);
}

TEST(LoadPriceSeries, SingleValidRowIsAnError) { EXPECT_THROW(parse("1,10\n2,0\n"), std::invalid_argument); }

TEST(LoadPriceSeries, UnreadableFile) {
  EXPECT_THROW(load_price_series("/nonexistent/prices.csv"), std::runtime_error);
}

TEST(LoadPriceSeries, ReadsFromDisk) {
  const auto path = std::filesystem::temp_directory_path() / "fracvol_ts_test.csv";
  {
    std::ofstream out(path);
    out << "time,price\n0,100\n1,101\n2,99.5\n";
  }
  const auto r = load_price_series(path);
  EXPECT_EQ(r.series.size(), 3u);
  std::filesystem::remove(path);
}

TEST(PriceSeries, RejectsInvalidInvariants) {
  EXPECT_THROW(PriceSeries({0, 1}, {1, -1}, 1.0), std::invalid_argument);
  EXPECT_THROW(PriceSeries({0, 0}, {1, 1}, 1.0), std::invalid_argument);
  EXPECT_THROW(PriceSeries({0}, {1}, 1.0), std::invalid_argument);
  EXPECT_THROW(PriceSeries({0, 1}, {1, 1}, 0.0), std::invalid_argument);
}

TEST(Detrend, LinearLogPriceLeavesZeroResidual) {
  std::vector<double> t(200);
  std::vector<double> p(200);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(i);
    p[i] = std::exp(0.3 + 0.002 * t[i]);
  }
  const auto d = detrend_logprice(PriceSeries(t, p, 1.0), 1e8);
  EXPECT_GE(d.degree, 1);
  EXPECT_EQ(static_cast<std::size_t>(d.degree) + 1, d.trend_coeffs.size());
  for (double r : d.detrended) EXPECT_NEAR(r, 0.0, 1e-10);
}

TEST(Detrend, RecoversQuadraticCoefficients) {
  std::vector<double> t(100);
  std::vector<double> y(100);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(i) / 10.0;
    y[i] = t[i] * t[i];
  }
  const auto d = detrend(t, y, 1e8);
  ASSERT_GE(d.trend_coeffs.size(), 3u);
  EXPECT_NEAR(d.trend_coeffs[0], 0.0, 1e-8);
  EXPECT_NEAR(d.trend_coeffs[1], 0.0, 1e-8);
  EXPECT_NEAR(d.trend_coeffs[2], 1.0, 1e-8);
  for (std::size_t j = 3; j < d.trend_coeffs.size(); ++j) EXPECT_NEAR(d.trend_coeffs[j], 0.0, 1e-8);
}

TEST(Detrend, NoiseSaturatesAndNeverIncreasesVariance) {
  GaussianStream g(RngSeed{11});
  std::vector<double> t(500);
  std::vector<double> y(500);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(i);
    y[i] = g.normal();
  }
  const auto d = detrend(t, y, 1e8);
  EXPECT_GE(d.degree, 3);
  EXPECT_LT(d.condition_number, 1e8);
  EXPECT_LE(variance(d.detrended), variance(y));
  // one more degree would have crossed the threshold
  const auto looser = detrend(t, y, d.condition_number * 1.0000001);
  EXPECT_EQ(looser.degree, d.degree);
}

TEST(Detrend, IdempotentOnResiduals) {
  GaussianStream g(RngSeed{5});
  std::vector<double> t(300);
  std::vector<double> y(300);
  double walk = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = 1000.0 + static_cast<double>(i);
    walk += g.normal();
    y[i] = walk + 0.01 * t[i];
  }
  const auto first = detrend(t, y, 1e8);
  const auto second = detrend(t, first.detrended, 1e8);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(second.detrended[i], first.detrended[i], 1e-9);
}

TEST(Detrend, TimeUnitsDoNotChangeDegree) {
  GaussianStream g(RngSeed{9});
  std::vector<double> t(300);
  std::vector<double> t_scaled(300);
  std::vector<double> y(300);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(i);
    t_scaled[i] = 86400.0 * t[i] + 1.7e9;
    y[i] = g.normal();
  }
  EXPECT_EQ(detrend(t, y).degree, detrend(t_scaled, y).degree);
}

TEST(Detrend, RescaleGivesUnitVariance) {
  GaussianStream g(RngSeed{3});
  std::vector<double> t(400);
  std::vector<double> y(400);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(i);
    y[i] = 0.05 * g.normal() + 1e-3 * t[i];
  }
  const auto d = detrend(t, y, 1e8, true);
  EXPECT_TRUE(d.rescaled);
  EXPECT_NEAR(variance(d.detrended), 1.0, 1e-12);
}

TEST(Detrend, DegenerateTimeIsAnError) {
  const std::vector<double> t{1, 1, 1};
  const std::vector<double> y{1, 2, 3};
  EXPECT_THROW(detrend(t, y), std::invalid_argument);
}

TEST(LogReturns, ExactLogs) {
  const PriceSeries s({0, 1, 2}, {1.0, std::exp(1.0), std::exp(2.0)}, 1.0);
  const auto r1 = log_returns(s, 1);
  ASSERT_EQ(r1.size(), 2u);
  EXPECT_NEAR(r1[0], 1.0, 1e-15);
  EXPECT_NEAR(r1[1], 1.0, 1e-15);
  const auto r2 = log_returns(s, 2);
  ASSERT_EQ(r2.size(), 1u);
  EXPECT_NEAR(r2[0], 2.0, 1e-15);
  EXPECT_THROW(log_returns(s, 3), std::invalid_argument);
}

TEST(LogReturns, ConstantPricesGiveZeros) {
  const PriceSeries s({0, 1, 2, 3}, {5, 5, 5, 5}, 1.0);
  for (double r : log_returns(s, 2)) EXPECT_EQ(r, 0.0);
}

TEST(LogReturns, AdditiveOverLags) {
  GaussianStream g(RngSeed{1});
  std::vector<double> x(100);
  for (double& v : x) v = g.normal();
  const auto r3 = log_returns(x, 3);
  const auto r5 = log_returns(x, 5);
  const auto r8 = log_returns(x, 8);
  for (std::size_t i = 0; i < r8.size(); ++i) {
    EXPECT_NEAR(r8[i], r3[i] + r5[i + 3], 1e-14);
  }
}

TEST(EmpiricalDensity, UniformWithinBinomialError) {
  GaussianStream g(RngSeed{21});
  std::vector<double> u(1000);
  for (double& v : u) v = g.uniform();
  const auto d = empirical_density(u, 10);
  const double n = 1000;
  for (double dens : d.densities) {
    // count ~ Binomial(n, width); density = count / (n * width)
    const double w = d.bin_width;
    const double se = std::sqrt(n * w * (1 - w)) / (n * w);
    EXPECT_NEAR(dens, 1.0, 5 * se);
  }
}

TEST(EmpiricalDensity, TwoSamplesOneBin) {
  const std::vector<double> x{0.0, 1.0};
  const auto d = empirical_density(x, 1);
  ASSERT_EQ(d.densities.size(), 1u);
  EXPECT_DOUBLE_EQ(d.densities[0], 1.0 / d.bin_width);
}

TEST(EmpiricalDensity, AllEqualIsAnError) {
  const std::vector<double> x{2.0, 2.0, 2.0};
  EXPECT_THROW(empirical_density(x, 4), std::invalid_argument);
}

TEST(EmpiricalDensity, IntegratesToOneAndEquallySpaced) {
  GaussianStream g(RngSeed{4});
  for (std::size_t bins : {1u, 7u, 50u, 333u}) {
    std::vector<double> x(2500);
    for (double& v : x) v = std::exp(g.normal());
    const auto d = empirical_density(x, bins);
    const double total = std::accumulate(d.densities.begin(), d.densities.end(), 0.0) * d.bin_width;
    EXPECT_NEAR(total, 1.0, 1e-9);
    for (std::size_t i = 1; i < d.bin_centers.size(); ++i) {
      EXPECT_NEAR(d.bin_centers[i] - d.bin_centers[i - 1], d.bin_width, 1e-12);
    }
  }
}
