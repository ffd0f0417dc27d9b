// Implied volatility of the fractional call price: the smile flattens as
// maturity grows.

#include "fracvol/fracvol.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

int main() {
  using namespace fracvol;

  const VolatilityParams params(0.8, 1.0, std::log(0.01), 1.0);
  const std::vector<double> taus{5, 10, 20, 50, 100};
  const std::vector<double> moneyness{0.8, 0.9, 1.0, 1.1, 1.2};
  const auto surface = implied_vol_surface(params, 0.01, 0.001, taus, moneyness);

  std::printf("%6s", "tau");
  for (double m : moneyness) std::printf("   S/K=%.1f", m);
  std::printf("\n");
  std::size_t i = 0;
  for (double tau : taus) {
    std::printf("%6.0f", tau);
    for (std::size_t j = 0; j < moneyness.size(); ++j) std::printf("  %9.6f", surface[i++].implied_vol);
    std::printf("\n");
  }
}
