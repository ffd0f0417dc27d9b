#pragma once

// European option pricing under the fractional volatility model.
//
// Given log sigma_t, the time-averaged log-volatility up to maturity is
// Gaussian with mean log sigma_t and variance alpha^2. The option value is
// the Black-Scholes price averaged over that law, evaluated either by
// Gauss-Hermite quadrature or through the one-dimensional M-functions.
//
// Valuation is risk neutral. In a stochastic volatility model this is an
// approximation, so prices here are estimates of the deviation from
// Black-Scholes rather than arbitrage-free values.

#include "fracvol/quadrature.hpp"
#include "fracvol/volatility.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracvol {

struct OptionSpec {
  double spot = 1.0;
  double strike = 1.0;
  double rate = 0.0;
  double tau = 1.0;      // time to maturity T - t
  double sigma = 0.01;   // current volatility sigma_t

  void validate() const {
    if (!(spot > 0.0) || !std::isfinite(spot)) throw std::invalid_argument("option: spot must be positive");
    if (!(strike > 0.0) || !std::isfinite(strike)) throw std::invalid_argument("option: strike must be positive");
    if (!std::isfinite(rate)) throw std::invalid_argument("option: rate must be finite");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("option: tau must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("option: sigma must be positive");
  }

  OptionSpec with_sigma(double s) const {
    OptionSpec o = *this;
    o.sigma = s;
    return o;
  }
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// a = (log(S/K)/sqrt(tau) + r sqrt(tau)) / sigma,  b = sigma sqrt(tau) / 2.
struct BsCoefficients {
  double a;
  double b;
};

inline BsCoefficients bs_coefficients(const OptionSpec& o) {
  const double st = std::sqrt(o.tau);
  return {(std::log(o.spot / o.strike) / st + o.rate * st) / o.sigma, 0.5 * o.sigma * st};
}

/// S Phi(a + b) - K e^(-r tau) Phi(a - b).
inline double black_scholes_call(const OptionSpec& o) {
  o.validate();
  const auto [a, b] = bs_coefficients(o);
  return o.spot * normal_cdf(a + b) - o.strike * std::exp(-o.rate * o.tau) * normal_cdf(a - b);
}

inline double black_scholes_put(const OptionSpec& o) {
  o.validate();
  const auto [a, b] = bs_coefficients(o);
  return o.strike * std::exp(-o.rate * o.tau) * normal_cdf(b - a) - o.spot * normal_cdf(-a - b);
}

inline double black_scholes_vega(const OptionSpec& o) {
  const auto [a, b] = bs_coefficients(o);
  return o.spot * normal_pdf(a + b) * std::sqrt(o.tau);
}

/// N(a, b) = (1/sqrt(2 pi)) Int_{-1}^inf exp(-y^2 (a + b)^2 / 2) dy, by
/// direct quadrature. Equals Phi(a + b) / (a + b) when a + b > 0.
inline double n_function(double a, double b) {
  const double s = a + b;
  if (s == 0.0 || !std::isfinite(s)) throw std::domain_error("n_function: a + b must be nonzero");
  const double s2 = s * s;
  const auto f = [s2](double y) { return std::exp(-0.5 * s2 * y * y); };
  Integral total = integrate(f, -1.0, 0.0, 1e-14);
  total += integrate(f, 0.0, 40.0 / std::abs(s), 1e-14);
  require_converged(total, 1e-12, 0.0, "n_function");
  return total.value / std::sqrt(2.0 * std::numbers::pi);
}

/// S (a + b) N(a, b) - K e^(-r tau) (a - b) N(a, -b). Agrees with
/// black_scholes_call only when a + b > 0 and a - b > 0.
inline double black_scholes_call_integral(const OptionSpec& o) {
  o.validate();
  const auto [a, b] = bs_coefficients(o);
  return o.spot * (a + b) * n_function(a, b) - o.strike * std::exp(-o.rate * o.tau) * (a - b) * n_function(a, -b);
}

enum class AlphaMode { exact, approx };

struct AlphaParams {
  double k = 0.0;
  double delta = 1.0;
  double hurst = 0.5;
  double tau = 1.0;

  static AlphaParams from(const VolatilityParams& p, double tau) { return {p.k(), p.delta(), p.hurst(), tau}; }
};

/// Conditional variance alpha^2 of the mean log-volatility over [t, T].
/// exact: closed form of the covariance double integral, needs tau >= delta.
/// approx: k^2 delta^(2H-2) (1 - (2H-1)(delta/tau)^(2-2H)), needs tau >= 2 delta
/// and appends a warning below 10 delta.
inline double alpha_squared(const AlphaParams& p, AlphaMode mode = AlphaMode::approx,
                            std::vector<std::string>* warnings = nullptr) {
  check_hurst(p.hurst);
  if (!(p.k >= 0.0)) throw std::invalid_argument("alpha_squared: k must be >= 0");
  if (!(p.delta > 0.0)) throw std::invalid_argument("alpha_squared: delta must be positive");
  if (!(p.tau > 0.0)) throw std::invalid_argument("alpha_squared: tau must be positive");
  const double h = p.hurst;
  const double d = p.delta;
  const double t = p.tau;
  if (mode == AlphaMode::exact) {
    if (t < d) throw std::domain_error("alpha_squared: exact mode requires tau >= delta");
    if (p.k == 0.0) return 0.0;
    const double i1 = 2.0 / ((2.0 * h + 1.0) * (2.0 * h + 2.0)) *
                      (std::pow(t + d, 2.0 * h + 2.0) + std::pow(t - d, 2.0 * h + 2.0) -
                       2.0 * std::pow(t, 2.0 * h + 2.0) - 2.0 * std::pow(d, 2.0 * h + 2.0));
    const double i2 = 1.0 / (2.0 * h + 1.0) *
                      (2.0 * std::pow(t, 2.0 * h + 1.0) - std::pow(t + d, 2.0 * h + 1.0) -
                       std::pow(t - d, 2.0 * h + 1.0));
    return p.k * p.k / (d * d * t) * (i1 / (2.0 * t) + i2) + p.k * p.k * std::pow(d, 2.0 * h - 2.0);
  }
  if (t < 2.0 * d) throw std::domain_error("alpha_squared: approx mode requires tau >= 2 delta");
  if (t < 10.0 * d && warnings != nullptr) {
    warnings->push_back("alpha_squared: approx mode used with tau < 10 delta");
  }
  if (p.k == 0.0) return 0.0;
  return p.k * p.k * std::pow(d, 2.0 * h - 2.0) * (1.0 - (2.0 * h - 1.0) * std::pow(d / t, 2.0 - 2.0 * h));
}

/// Gaussian density of the mean log-volatility xi given log sigma_t.
inline double mean_vol_density(double xi, double log_sigma_t, double alpha2) {
  if (!(alpha2 > 0.0)) throw std::invalid_argument("mean_vol_density: alpha^2 must be positive");
  const double z = (xi - log_sigma_t) / std::sqrt(alpha2);
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi * alpha2);
}

struct PricingOptions {
  AlphaMode alpha_mode = AlphaMode::approx;
  std::size_t initial_nodes = 64;
  std::size_t max_nodes = 4096;
  double rel_tol = 1e-8;
};

namespace detail {

inline const GaussHermiteRule& hermite_rule(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(n);
  return *slot;
}

template <class Payoff>
double mean_vol_expectation(const OptionSpec& o, double alpha2, const PricingOptions& opt, Payoff&& price) {
  if (opt.initial_nodes == 0 || opt.max_nodes < opt.initial_nodes) {
    throw std::invalid_argument("pricing: invalid Gauss-Hermite node limits");
  }
  const double mean = std::log(o.sigma);
  const double sd = std::sqrt(alpha2);
  const auto f = [&](double xi) { return price(o.with_sigma(std::exp(xi))); };
  double previous = hermite_rule(opt.initial_nodes).expectation(f, mean, sd);
  for (std::size_t n = 2 * opt.initial_nodes; n <= opt.max_nodes; n *= 2) {
    const double current = hermite_rule(n).expectation(f, mean, sd);
    if (std::abs(current - previous) <= opt.rel_tol * std::abs(current)) return current;
    previous = current;
  }
  throw convergence_error("fractional price: Gauss-Hermite did not converge within the node cap",
                          std::abs(previous));
}

}  // namespace detail

/// Black-Scholes call averaged over the mean log-volatility law.
inline double fractional_call_price(const OptionSpec& o, const VolatilityParams& params,
                                    const PricingOptions& opt = {}) {
  o.validate();
  const double alpha2 = alpha_squared(AlphaParams::from(params, o.tau), opt.alpha_mode);
  if (alpha2 == 0.0) return black_scholes_call(o);
  return detail::mean_vol_expectation(o, alpha2, opt, [](const OptionSpec& x) { return black_scholes_call(x); });
}

inline double fractional_put_price(const OptionSpec& o, const VolatilityParams& params,
                                   const PricingOptions& opt = {}) {
  o.validate();
  const double alpha2 = alpha_squared(AlphaParams::from(params, o.tau), opt.alpha_mode);
  if (alpha2 == 0.0) return black_scholes_put(o);
  return detail::mean_vol_expectation(o, alpha2, opt, [](const OptionSpec& x) { return black_scholes_put(x); });
}

enum class MForm { erfc, double_integral };

struct MFunctionOptions {
  MForm form = MForm::erfc;
  /// When a and b have opposite signs, a x + b/x vanishes inside the domain
  /// and the erfc form has a simple pole there. true: take the Cauchy
  /// principal value. false: reject such arguments.
  bool principal_value = true;
  double rel_tol = 1e-12;
  double abs_tol = 1e-8;
};

namespace detail {

// Half-width of the u = log x range outside which the M integrands are negligible.
inline double m_range(double alpha) {
  return 2.0 * alpha * alpha + alpha * std::sqrt(4.0 * alpha * alpha + 80.0);
}

inline double m_erfc(double alpha, double a, double b, const MFunctionOptions& opt) {
  const double inv2a2 = 1.0 / (2.0 * alpha * alpha);
  const auto term = [&](double u, double c) {
    return std::exp(u - u * u * inv2a2) * std::erfc(-c / std::numbers::sqrt2) / c;
  };
  const auto f = [&](double u) { return term(u, a * std::exp(u) + b * std::exp(-u)); };
  const double range = m_range(alpha);
  Integral total;
  if (a * b < 0.0) {
    if (!opt.principal_value) {
      throw std::domain_error("m_function: a and b have opposite signs, a x + b/x crosses zero");
    }
    const double u0 = 0.5 * std::log(-b / a);
    const double h = 0.5;
    const double scale = 2.0 * a * std::exp(u0);
    // Symmetric pairs around the root: c(u0 +- t) = +-2 a e^u0 sinh t.
    const auto folded = [&](double t) {
      const double c = scale * std::sinh(t);
      return (std::exp(u0 + t - (u0 + t) * (u0 + t) * inv2a2) * std::erfc(-c / std::numbers::sqrt2) -
              std::exp(u0 - t - (u0 - t) * (u0 - t) * inv2a2) * std::erfc(c / std::numbers::sqrt2)) /
             c;
    };
    const double lo = std::min(-range, u0 - h - 1.0);
    const double hi = std::max(range, u0 + h + 1.0);
    // integrate piecewise, cut at the edges and center of the Gaussian factor
    const auto pieces = [&](const auto& fn, double x0, double x1, std::initializer_list<double> cuts) {
      std::vector<double> at{x0};
      for (double c : cuts) if (c > x0 && c < x1) at.push_back(c);
      at.push_back(x1);
      std::sort(at.begin(), at.end());
      Integral sum;
      for (std::size_t i = 1; i < at.size(); ++i) sum += integrate(fn, at[i - 1], at[i], opt.rel_tol);
      return sum;
    };
    const double t0 = std::abs(u0);
    total = pieces(f, lo, u0 - h, {-range, 0.0, range});
    total += pieces(folded, 0.0, h, {t0 - range, t0, t0 + range});
    total += pieces(f, u0 + h, hi, {-range, 0.0, range});
  } else {
    total = integrate(f, -range, range, opt.rel_tol);
  }
  const double pref = std::sqrt(2.0 / std::numbers::pi) / (4.0 * alpha);
  require_converged(total, 100.0 * opt.rel_tol, opt.abs_tol / pref, "m_function");
  return pref * total.value;
}

inline double m_double_integral(double alpha, double a, double b, const MFunctionOptions& opt) {
  if (a < 0.0 || b < 0.0) {
    throw std::domain_error("m_function: the double-integral form needs a >= 0 and b >= 0");
  }
  const double inv2a2 = 1.0 / (2.0 * alpha * alpha);
  const auto inner = [&](double c) {
    const double c2 = c * c;
    const auto g = [c2](double y) { return std::exp(-0.5 * c2 * y * y); };
    Integral r = integrate(g, -1.0, 0.0, opt.rel_tol);
    r += integrate(g, 0.0, 40.0 / c, opt.rel_tol);
    return r.value;
  };
  const auto f = [&](double u) {
    return std::exp(u - u * u * inv2a2) * inner(a * std::exp(u) + b * std::exp(-u));
  };
  const double range = m_range(alpha);
  const Integral total = integrate(f, -range, range, opt.rel_tol);
  const double pref = 1.0 / (2.0 * std::numbers::pi * alpha);
  require_converged(total, 100.0 * opt.rel_tol, opt.abs_tol / pref, "m_function");
  return pref * total.value;
}

}  // namespace detail

/// M(alpha, a, b) = (1/(2 pi alpha)) Int_{-1}^inf dy Int_0^inf dx
///   exp(-log^2 x / (2 alpha^2)) exp(-y^2 (a x + b/x)^2 / 2),
/// with the y integral done analytically in the erfc form.
inline double m_function(double alpha, double a, double b, const MFunctionOptions& opt = {}) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("m_function: alpha must be positive");
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("m_function: a and b must be finite");
  if (a == 0.0 && b == 0.0) throw std::domain_error("m_function: a = b = 0, the y integral diverges");
  return opt.form == MForm::erfc ? detail::m_erfc(alpha, a, b, opt) : detail::m_double_integral(alpha, a, b, opt);
}

/// S [a M(alpha,a,b) + b M(alpha,b,a)] - K e^(-r tau) [a M(alpha,a,-b) - b M(alpha,-b,a)]
/// with a, b at sigma = sigma_t.
inline double fractional_call_closed(const OptionSpec& o, const VolatilityParams& params,
                                     AlphaMode alpha_mode = AlphaMode::approx, const MFunctionOptions& mopt = {}) {
  o.validate();
  const double alpha2 = alpha_squared(AlphaParams::from(params, o.tau), alpha_mode);
  if (alpha2 == 0.0) return black_scholes_call(o);
  const double alpha = std::sqrt(alpha2);
  const auto [a, b] = bs_coefficients(o);
  // c * M(alpha, x, y), skipping M when its coefficient vanishes
  const auto term = [&](double c, double x, double y) { return c == 0.0 ? 0.0 : c * m_function(alpha, x, y, mopt); };
  return o.spot * (term(a, a, b) + term(b, b, a)) -
         o.strike * std::exp(-o.rate * o.tau) * (term(a, a, -b) - term(b, -b, a));
}

struct ImpliedVolOptions {
  double lower = 1e-6;
  double upper = 10.0;
  int max_iterations = 200;
};

struct ImpliedVol {
  double sigma = 0.0;
  int iterations = 0;
  double price_error = 0.0;  // BS(sigma) - price at return
};

/// Black-Scholes volatility reproducing `price`. The sigma field of
/// `option` is ignored.
inline ImpliedVol implied_volatility(double price, const OptionSpec& option, const ImpliedVolOptions& opt = {}) {
  OptionSpec o = option;
  o.sigma = 1.0;
  o.validate();
  const double intrinsic = std::max(0.0, o.spot - o.strike * std::exp(-o.rate * o.tau));
  if (!(price > intrinsic) || !(price < o.spot)) {
    throw std::domain_error("implied_volatility: price outside the no-arbitrage interval (max(0, S - K e^-r tau), S)");
  }
  const auto bs = [&](double s) { return black_scholes_call(o.with_sigma(s)); };

  double lo = opt.lower;
  double hi = opt.upper;
  while (bs(lo) > price && lo > 1e-300) lo *= 0.01;
  while (bs(hi) < price) {
    if (hi > 1e6) throw convergence_error("implied_volatility: could not bracket the price", bs(hi) - price);
    hi *= 2.0;
  }
  // Newton on log BS(sigma) - log price keeps its step size for tiny prices.
  const double log_price = std::log(price);
  double s = std::sqrt(lo * hi);
  ImpliedVol out;
  for (out.iterations = 1; out.iterations <= opt.max_iterations; ++out.iterations) {
    const double v = bs(s);
    if (v == price) break;
    if (v > price) hi = s; else lo = s;
    double next = 0.5 * (lo + hi);
    if (v > 0.0) {
      const double vega = black_scholes_vega(o.with_sigma(s));
      if (vega > 0.0) {
        const double step = (std::log(v) - log_price) * v / vega;
        const double candidate = s - step;
        if (candidate > lo && candidate < hi) next = candidate;
      }
    }
    const bool done = std::abs(next - s) <= 1e-15 * s || hi - lo <= 1e-15 * hi;
    s = next;
    if (done) break;
  }
  out.sigma = s;
  out.price_error = bs(s) - price;
  if (out.iterations > opt.max_iterations || !(std::abs(out.price_error) < 1e-10 * o.spot)) {
    throw convergence_error("implied_volatility: did not converge", std::abs(out.price_error));
  }
  return out;
}

struct SurfacePoint {
  double tau = 0.0;
  double moneyness = 0.0;  // S/K with K = 1
  double price = 0.0;
  double implied_vol = 0.0;
};

/// Fractional call prices and their Black-Scholes implied volatilities on a
/// (tau, S/K) grid, strike fixed at 1.
inline std::vector<SurfacePoint> implied_vol_surface(const VolatilityParams& params, double sigma_t, double rate,
                                                     std::span<const double> taus,
                                                     std::span<const double> moneyness,
                                                     const PricingOptions& opt = {}) {
  if (taus.empty() || moneyness.empty()) throw std::invalid_argument("implied_vol_surface: empty grid");
  std::vector<SurfacePoint> out;
  out.reserve(taus.size() * moneyness.size());
  for (double tau : taus) {
    for (double m : moneyness) {
      const OptionSpec o{m, 1.0, rate, tau, sigma_t};
      const double price = fractional_call_price(o, params, opt);
      out.push_back({tau, m, price, implied_volatility(price, o).sigma});
    }
  }
  return out;
}

}  // namespace fracvol
