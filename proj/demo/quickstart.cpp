// Simulate the model with the NYSE daily preset, calibrate it back from the
// simulated prices, and evaluate the return density at a few points.

#include "fracvol/fracvol.hpp"

#include <cstdio>

int main() {
  using namespace fracvol;

  SimulationConfig config;
  config.params = nyse_daily_preset();
  config.n_steps = 1 << 14;
  config.seed = RngSeed{2024};
  const PriceSeries prices = simulate_price(config);

  const CalibrationResult fit = calibrate(prices.log_prices(), prices.resolution());
  std::printf("generator:  H=%.3f k=%.3f beta=%.3f\n", config.params.hurst(), config.params.k(), config.params.beta());
  std::printf("calibrated: H=%.3f k=%.3f beta=%.3f (scaling R^2 %.4f)\n", fit.params.hurst(), fit.params.k(),
              fit.params.beta(), fit.scaling.r_squared);

  const ReturnDistSpec spec(config.params, 1.0);
  std::printf("\n%10s %14s %14s\n", "r", "pdf", "gaussian");
  for (double z : {0.0, 1.0, 2.0, 4.0, 8.0}) {
    const double r = spec.r0() + z * spec.theta();
    std::printf("%10.5f %14.6g %14.6g\n", r, return_pdf_quadrature(r, spec),
                conditional_return_density(r, spec.theta(), spec));
  }
}
