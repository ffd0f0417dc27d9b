#pragma once

// Sample paths of the coupled price / fractional-volatility system.
//
// The fBm driving the volatility and the Brownian price shocks come from
// independent sub-streams of the configured seed. The fBm grid starts one
// observation scale before t = 0 so that B_H(t) - B_H(t - delta) is defined
// from the first step. Volatility is held constant over each dt step and
// log S is advanced with the exact conditional lognormal step.

#include "fracvol/fbm.hpp"
#include "fracvol/rng.hpp"
#include "fracvol/timeseries_io.hpp"
#include "fracvol/volatility.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fracvol {

enum class VolatilityForm {
  /// log sigma = beta + (k/delta) * noise. Log-volatility has mean beta,
  /// which is the law the return distribution is built on.
  coupled,
  /// sigma = theta * exp((k/delta) * noise - (k/delta)^2 delta^(2H) / 2),
  /// normalized so that E[sigma] = theta.
  compensated,
};

struct SimulationConfig {
  VolatilityParams params = nyse_daily_preset();
  double mu = 0.0;   // drift per unit time
  double s0 = 1.0;   // initial price
  std::size_t n_steps = 0;
  double dt = 1.0;   // must divide params.delta()
  RngSeed seed{};
  VolatilityForm form = VolatilityForm::coupled;
  FbmMethod method = FbmMethod::circulant;
};

struct SimulatedPath {
  VolatilitySeries volatility;  // sigma on steps 0 .. n_steps-1
  PriceSeries price;            // n_steps + 1 prices
};

class Simulator {
 public:
  explicit Simulator(const SimulationConfig& config) : config_(config), steps_per_delta_(check(config)),
        generator_(config.n_steps + steps_per_delta_ - 1, config.params.hurst(), config.method) {}

  const SimulationConfig& config() const noexcept { return config_; }

  VolatilitySeries volatility(RngSeed seed) const {
    const FbmPath fbm = generator_.path(config_.dt, derive_seed(seed, 0));
    const VolatilityParams& p = config_.params;
    const double scale = p.k() / p.delta();
    const double shift = config_.form == VolatilityForm::compensated
                             ? -0.5 * scale * scale * std::pow(p.delta(), 2.0 * p.hurst())
                             : 0.0;
    VolatilitySeries out;
    out.window = p.delta();
    out.timestamps.resize(config_.n_steps);
    out.sigma.resize(config_.n_steps);
    for (std::size_t j = 0; j < config_.n_steps; ++j) {
      const double noise = fbm.values[j + steps_per_delta_] - fbm.values[j];
      out.timestamps[j] = static_cast<double>(j) * config_.dt;
      out.sigma[j] = std::exp(p.beta() + scale * noise + shift);
    }
    return out;
  }

  SimulatedPath run(RngSeed seed) const {
    VolatilitySeries vol = volatility(seed);
    GaussianStream shocks(derive_seed(seed, 1));
    const double dt = config_.dt;
    const double sqrt_dt = std::sqrt(dt);
    std::vector<double> times(config_.n_steps + 1);
    std::vector<double> prices(config_.n_steps + 1);
    double log_s = std::log(config_.s0);
    times[0] = 0.0;
    prices[0] = config_.s0;
    for (std::size_t j = 0; j < config_.n_steps; ++j) {
      const double sigma = vol.sigma[j];
      log_s += (config_.mu - 0.5 * sigma * sigma) * dt + sigma * sqrt_dt * shocks.normal();
      times[j + 1] = static_cast<double>(j + 1) * dt;
      prices[j + 1] = std::exp(log_s);
    }
    return SimulatedPath{std::move(vol), PriceSeries(std::move(times), std::move(prices), dt)};
  }

  PriceSeries price(RngSeed seed) const { return run(seed).price; }

 private:
  static std::size_t check(const SimulationConfig& c) {
    if (c.n_steps == 0) throw std::invalid_argument("simulation: n_steps must be >= 1");
    if (!(c.s0 > 0.0) || !std::isfinite(c.s0)) throw std::invalid_argument("simulation: s0 must be positive");
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw std::invalid_argument("simulation: dt must be positive");
    if (!std::isfinite(c.mu)) throw std::invalid_argument("simulation: mu must be finite");
    const double ratio = c.params.delta() / c.dt;
    const double m = std::round(ratio);
    if (m < 1.0 || std::abs(ratio - m) > 1e-9 * ratio) {
      throw std::invalid_argument("simulation: delta / dt must be a positive integer");
    }
    return static_cast<std::size_t>(m);
  }

  SimulationConfig config_;
  std::size_t steps_per_delta_;
  FbmGenerator generator_;
};

inline VolatilitySeries simulate_volatility(const SimulationConfig& config) {
  return Simulator(config).volatility(config.seed);
}

inline PriceSeries simulate_price(const SimulationConfig& config) { return Simulator(config).price(config.seed); }

}  // namespace fracvol
