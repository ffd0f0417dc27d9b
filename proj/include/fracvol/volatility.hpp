#pragma once

// Induced volatility: reconstruction of sigma_t from log-prices, the
// integrated log-volatility decomposition sum log sigma = beta t + R(t),
// structure-function scaling exponents and the calibration pipeline that
// chains them into model parameters (H, k, beta, delta).

#include "fracvol/fbm.hpp"
#include "fracvol/timeseries_io.hpp"

#include <boost/math/special_functions/trigamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracvol {

/// Parameters of the fractional volatility model
///   dS = mu S dt + sigma S dB,   log sigma_t = beta + (k/delta)(B_H(t) - B_H(t - delta)).
class VolatilityParams {
 public:
  VolatilityParams(double hurst, double k, double beta, double delta)
      : hurst_(hurst), k_(k), beta_(beta), delta_(delta) {
    check_hurst(hurst);
    if (!(k >= 0.0) || !std::isfinite(k)) throw std::invalid_argument("VolatilityParams: k must be >= 0");
    if (!std::isfinite(beta)) throw std::invalid_argument("VolatilityParams: beta must be finite");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("VolatilityParams: delta must be > 0");
  }

  double hurst() const noexcept { return hurst_; }
  double k() const noexcept { return k_; }
  double beta() const noexcept { return beta_; }
  double delta() const noexcept { return delta_; }
  double theta() const noexcept { return std::exp(beta_); }

  /// Variance of log sigma at a fixed time: k^2 delta^(2H-2).
  double logvol_variance() const noexcept { return k_ * k_ * std::pow(delta_, 2.0 * hurst_ - 2.0); }

  VolatilityParams with_hurst(double h) const { return {h, k_, beta_, delta_}; }
  VolatilityParams with_k(double k) const { return {hurst_, k, beta_, delta_}; }
  VolatilityParams with_beta(double b) const { return {hurst_, k_, b, delta_}; }
  VolatilityParams with_delta(double d) const { return {hurst_, k_, beta_, d}; }

  friend bool operator==(const VolatilityParams&, const VolatilityParams&) = default;

 private:
  double hurst_;
  double k_;
  double beta_;
  double delta_;
};

/// Published fit to daily NYSE index data (H=0.83, k=0.59, beta=-5, delta=1
/// day). A reference parameter set, not a statement about current markets.
inline VolatilityParams nyse_daily_preset() { return VolatilityParams(0.83, 0.59, -5.0, 1.0); }

/// Reconstructed volatility. Entries whose window had zero variance are NaN
/// and counted in `missing`.
struct VolatilitySeries {
  std::vector<double> timestamps;
  std::vector<double> sigma;
  double window = 0.0;  // |T0 - T1| in time units
  std::size_t missing = 0;
};

inline bool is_missing(double sigma) noexcept { return std::isnan(sigma); }

/// Trailing-window volatility estimate. The window ending at index t holds
/// the `window` log-price increments up to t and spans |T0 - T1| =
/// window * resolution; sigma_t^2 is the variance of log S accumulated over
/// the window (unbiased, from the centred increments) divided by |T0 - T1|.
inline VolatilitySeries induced_volatility(std::span<const double> log_price, std::span<const double> timestamps,
                                           double resolution, std::size_t window, std::size_t stride = 1) {
  if (window < 2) throw std::invalid_argument("induced_volatility: window must be >= 2");
  if (window >= log_price.size()) throw std::invalid_argument("induced_volatility: window exceeds series length");
  if (timestamps.size() != log_price.size()) throw std::invalid_argument("induced_volatility: length mismatch");
  if (!(resolution > 0.0)) throw std::invalid_argument("induced_volatility: resolution must be positive");
  if (stride == 0) throw std::invalid_argument("induced_volatility: stride must be positive");

  VolatilitySeries out;
  out.window = static_cast<double>(window) * resolution;
  const double w = static_cast<double>(window);
  std::vector<double> incr(window);
  for (std::size_t end = window; end < log_price.size(); end += stride) {
    double mean = 0.0;
    double max_sq = 0.0;
    for (std::size_t j = 0; j < window; ++j) {
      incr[j] = log_price[end - window + 1 + j] - log_price[end - window + j];
      mean += incr[j];
      max_sq = std::max(max_sq, incr[j] * incr[j]);
    }
    mean /= w;
    double ss = 0.0;
    for (double r : incr) ss += (r - mean) * (r - mean);
    const double sample_var = ss / (w - 1.0);
    out.timestamps.push_back(timestamps[end]);
    const double eps = 64.0 * std::numeric_limits<double>::epsilon();
    if (!(sample_var > eps * eps * max_sq)) {
      out.sigma.push_back(std::numeric_limits<double>::quiet_NaN());
      ++out.missing;
    } else {
      // accumulated variance w * s^2 over the window span w * resolution
      out.sigma.push_back(std::sqrt(w * sample_var / out.window));
    }
  }
  return out;
}

inline VolatilitySeries induced_volatility(std::span<const double> log_price, double resolution, std::size_t window,
                                           std::size_t stride = 1) {
  std::vector<double> t(log_price.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) * resolution;
  return induced_volatility(log_price, t, resolution, window, stride);
}

inline VolatilitySeries induced_volatility(const PriceSeries& series, std::size_t window, std::size_t stride = 1) {
  const std::vector<double> logp = series.log_prices();
  return induced_volatility(logp, series.timestamps(), series.resolution(), window, stride);
}

/// Integrated log-volatility split into a linear drift and a residual:
/// sum_{j<=n} log sigma_j = beta_hat * (n + 1) + residual_n.
struct LogVolDecomposition {
  double beta_hat = 0.0;
  std::vector<double> residual;
  std::vector<double> times;
  std::size_t skipped = 0;  // missing sigma entries left out of the sums
};

inline LogVolDecomposition integrated_logvol(const VolatilitySeries& vol) {
  LogVolDecomposition out;
  std::vector<double> cumulative;
  double running = 0.0;
  for (std::size_t i = 0; i < vol.sigma.size(); ++i) {
    if (is_missing(vol.sigma[i])) {
      ++out.skipped;
      continue;
    }
    if (!(vol.sigma[i] > 0.0)) throw std::invalid_argument("integrated_logvol: sigma must be positive");
    running += std::log(vol.sigma[i]);
    cumulative.push_back(running);
    out.times.push_back(vol.timestamps[i]);
  }
  if (cumulative.size() < 3) throw std::invalid_argument("integrated_logvol: too few points (need 3 valid sigma values)");

  // Least squares through the origin: the sum starts at zero.
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < cumulative.size(); ++j) {
    const double m = static_cast<double>(j + 1);
    num += m * cumulative[j];
    den += m * m;
  }
  out.beta_hat = num / den;
  out.residual.resize(cumulative.size());
  for (std::size_t j = 0; j < cumulative.size(); ++j) {
    out.residual[j] = cumulative[j] - out.beta_hat * static_cast<double>(j + 1);
  }
  return out;
}

enum class ScalingMode {
  increments,  // E|x(t+lag) - x(t)|
  relative,    // E|(x(t+lag) - x(t)) / x(t)|
};

struct ScalingRow {
  std::size_t lag = 0;
  double mean_abs_increment = 0.0;
};

struct ScalingFit {
  double hurst = 0.0;      // slope of log m(lag) against log lag
  double intercept = 0.0;  // log m at lag 1 on the fitted line
  double r_squared = 0.0;
  std::vector<ScalingRow> table;
};

inline const std::vector<std::size_t>& default_scaling_lags() {
  static const std::vector<std::size_t> lags{1, 2, 4, 8, 16, 32, 64};
  return lags;
}

/// Structure-function estimate of the scaling exponent of x.
inline ScalingFit scaling_exponent(std::span<const double> x, std::span<const std::size_t> lags,
                                   ScalingMode mode = ScalingMode::increments) {
  if (lags.size() < 3) throw std::invalid_argument("scaling_exponent: need at least 3 lags");
  std::vector<std::size_t> sorted(lags.begin(), lags.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("scaling_exponent: lags must be distinct");
  }
  if (sorted.front() == 0) throw std::invalid_argument("scaling_exponent: lags must be positive");
  if (sorted.back() * 4 > x.size()) throw std::invalid_argument("scaling_exponent: max lag exceeds length/4");

  ScalingFit fit;
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t lag : sorted) {
    double sum = 0.0;
    const std::size_t count = x.size() - lag;
    for (std::size_t t = 0; t < count; ++t) {
      double d = x[t + lag] - x[t];
      if (mode == ScalingMode::relative) {
        if (x[t] == 0.0) throw std::invalid_argument("scaling_exponent: relative mode needs nonzero values");
        d /= x[t];
      }
      sum += std::abs(d);
    }
    const double m = sum / static_cast<double>(count);
    if (!(m > 0.0)) {
      throw std::invalid_argument("scaling_exponent: zero mean increment at lag " + std::to_string(lag));
    }
    fit.table.push_back({lag, m});
    lx.push_back(std::log(static_cast<double>(lag)));
    ly.push_back(std::log(m));
  }

  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.hurst = sxy / sxx;
  fit.intercept = my - fit.hurst * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

struct CalibrationOptions {
  std::size_t window = 5;
  std::size_t stride = 1;
  std::vector<std::size_t> lags = default_scaling_lags();
  /// Remove the sampling variance of the window estimator from var(log sigma)
  /// and undo the window averaging before solving for k. Off by default.
  bool noise_correction = false;
};

struct CalibrationResult {
  VolatilityParams params;
  ScalingFit scaling;
  double logvol_mean = 0.0;
  double logvol_variance = 0.0;
  std::size_t samples = 0;
  std::size_t missing = 0;
};

namespace detail {

// Variance of the average of `window` consecutive unit-variance fGn values.
inline double window_averaging_factor(double hurst, std::size_t window) {
  double s = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    for (std::size_t j = 0; j < window; ++j) {
      s += fgn_autocovariance(static_cast<double>(i) - static_cast<double>(j), hurst);
    }
  }
  return s / static_cast<double>(window * window);
}

}  // namespace detail

/// induced_volatility -> integrated_logvol -> scaling_exponent on the
/// residual. H is the scaling slope, beta the drift of the integrated
/// log-volatility, and k solves var(log sigma) = k^2 delta^(2H-2) with
/// delta = resolution.
inline CalibrationResult calibrate(std::span<const double> log_price, double resolution,
                                   const CalibrationOptions& options = {}) {
  const VolatilitySeries vol = induced_volatility(log_price, resolution, options.window, options.stride);
  const LogVolDecomposition decomposition = integrated_logvol(vol);
  const ScalingFit scaling = scaling_exponent(decomposition.residual, options.lags);
  const double hurst = scaling.hurst;
  if (!(hurst > 0.0 && hurst <= 1.0)) {
    throw std::domain_error("calibrate: estimated Hurst index " + std::to_string(hurst) + " outside (0, 1]");
  }

  std::vector<double> logs;
  logs.reserve(vol.sigma.size());
  for (double s : vol.sigma) {
    if (!is_missing(s)) logs.push_back(std::log(s));
  }
  const double n = static_cast<double>(logs.size());
  const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : logs) ss += (v - mean) * (v - mean);
  const double variance = ss / (n - 1.0);

  double model_variance = variance;
  if (options.noise_correction) {
    // log of a scaled chi^2 with (window - 1) degrees of freedom, halved
    const double estimator_noise =
        0.25 * boost::math::trigamma(0.5 * static_cast<double>(options.window - 1));
    model_variance = std::max(variance - estimator_noise, 0.0) /
                     detail::window_averaging_factor(hurst, options.window);
  }
  const double k = std::sqrt(model_variance) * std::pow(resolution, 1.0 - hurst);

  return CalibrationResult{VolatilityParams(hurst, k, decomposition.beta_hat, resolution),
                           scaling,
                           mean,
                           variance,
                           logs.size(),
                           vol.missing};
}

inline CalibrationResult calibrate(std::span<const double> log_price, double resolution, std::size_t window,
                                   std::span<const std::size_t> lags) {
  CalibrationOptions options;
  options.window = window;
  options.lags.assign(lags.begin(), lags.end());
  return calibrate(log_price, resolution, options);
}

}  // namespace fracvol
