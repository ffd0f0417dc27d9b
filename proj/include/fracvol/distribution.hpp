#pragma once

// Return distribution of the fractional volatility model.
//
// Mixing the conditional Gaussian of log(S_T/S_t) over the lognormal
// volatility marginal and substituting x = sigma^2 / theta^2 gives
//
//   P(r) = A * Int_0^inf x^(-1/2) exp(-(log x)^2 / C) exp(-lambda x) dx,
//   A = 1 / (4 pi theta k delta^(H-1) sqrt(Delta)),
//   lambda = (r - r0)^2 / (2 Delta theta^2),  C = 8 k^2 delta^(2H-2).
//
// The integral is evaluated in u = log x, where the log-integrand
// u/2 - u^2/C - lambda e^u is strictly concave.

#include "fracvol/quadrature.hpp"
#include "fracvol/volatility.hpp"

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace fracvol {

class ReturnDistSpec {
 public:
  ReturnDistSpec(const VolatilityParams& params, double lag, double mu = 0.0)
      : params_(params), lag_(lag), mu_(mu) {
    if (!(lag > 0.0) || !std::isfinite(lag)) throw std::invalid_argument("ReturnDistSpec: lag must be positive");
    if (!std::isfinite(mu)) throw std::invalid_argument("ReturnDistSpec: mu must be finite");
  }

  const VolatilityParams& params() const noexcept { return params_; }
  double lag() const noexcept { return lag_; }
  double mu() const noexcept { return mu_; }
  double theta() const noexcept { return params_.theta(); }

  /// Center (mu - theta^2/2) * Delta, with sigma = theta.
  double r0() const noexcept { return (mu_ - 0.5 * theta() * theta()) * lag_; }

  double c_const() const noexcept { return 8.0 * params_.logvol_variance(); }

  double prefactor() const {
    const VolatilityParams& p = params_;
    if (!(p.k() > 0.0)) throw std::domain_error("return pdf: k must be positive (k = 0 is a plain Gaussian)");
    return 1.0 / (4.0 * std::numbers::pi * p.theta() * p.k() * std::pow(p.delta(), p.hurst() - 1.0) *
                  std::sqrt(lag_));
  }

  double lambda(double r) const {
    const double d = r - r0();
    return d * d / (2.0 * lag_ * theta() * theta());
  }

 private:
  VolatilityParams params_;
  double lag_;
  double mu_;
};

/// Lognormal marginal of sigma: log-mean beta, log-variance k^2 delta^(2H-2).
inline double vol_marginal_density(double sigma, const VolatilityParams& params) {
  if (!(sigma > 0.0)) throw std::invalid_argument("vol_marginal_density: sigma must be positive");
  if (!(params.k() > 0.0)) {
    throw std::domain_error("vol_marginal_density: k = 0 is a point mass at theta");
  }
  const double s = std::sqrt(params.logvol_variance());
  const double z = (std::log(sigma) - params.beta()) / s;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * s * sigma);
}

/// Gaussian law of r = log(S_T/S_t) at fixed sigma: mean (mu - sigma^2/2) Delta,
/// variance sigma^2 Delta.
inline double conditional_return_density(double r, double sigma, const ReturnDistSpec& spec) {
  if (!(sigma > 0.0)) throw std::invalid_argument("conditional_return_density: sigma must be positive");
  const double var = sigma * sigma * spec.lag();
  const double mean = (spec.mu() - 0.5 * sigma * sigma) * spec.lag();
  const double d = r - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

struct PdfQuadratureOptions {
  double rel_tol = 1e-12;
  /// Integration stops where the integrand has fallen by exp(-tail_log_drop)
  /// from its peak.
  double tail_log_drop = 46.0;
};

namespace detail {

struct MixtureLogIntegrand {
  double lambda;
  double c;
  double operator()(double u) const { return 0.5 * u - u * u / c - lambda * std::exp(u); }
  double slope(double u) const { return 0.5 - 2.0 * u / c - lambda * std::exp(u); }
  double curvature(double u) const { return -2.0 / c - lambda * std::exp(u); }
  // g(m + t) - g(m) without the cancellation of two large values
  double drop(double m, double t) const {
    return 0.5 * t - (2.0 * m + t) * t / c - lambda * std::exp(m) * std::expm1(t);
  }
};

inline double mixture_mode(const MixtureLogIntegrand& g) {
  double hi = 0.25 * g.c;  // slope(hi) <= 0
  if (g.lambda == 0.0) return hi;
  double lo = hi - 1.0;
  for (double step = 1.0; g.slope(lo) <= 0.0; step *= 2.0) lo -= step;
  double u = std::min(hi, std::max(lo, -std::log(2.0 * g.lambda)));
  for (int iter = 0; iter < 200; ++iter) {
    const double s = g.slope(u);
    if (s > 0.0) lo = u; else hi = u;
    double next = u - s / g.curvature(u);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-14 * std::max(1.0, std::abs(u))) return next;
    u = next;
  }
  return u;
}

// Scaled integral: returns I * exp(-g(mode)) together with g(mode).
struct ScaledIntegral {
  Integral scaled;
  double log_scale;
};

inline ScaledIntegral mixture_integral(double lambda, double c, const PdfQuadratureOptions& opt) {
  const MixtureLogIntegrand g{lambda, c};
  const double mode = mixture_mode(g);
  const double peak = g(mode);
  const double width = std::min(1.0, 1.0 / std::sqrt(-g.curvature(mode)));
  double left = -width;
  for (double step = width; g.drop(mode, left) > -opt.tail_log_drop; step *= 2.0) left -= step;
  double right = width;
  for (double step = width; g.drop(mode, right) > -opt.tail_log_drop; step *= 2.0) right += step;
  const auto f = [&](double t) { return std::exp(g.drop(mode, t)); };
  Integral total = integrate(f, left, 0.0, opt.rel_tol);
  total += integrate(f, 0.0, right, opt.rel_tol);
  require_converged(total, 10.0 * opt.rel_tol, 0.0, "return_pdf_quadrature");
  return {total, peak};
}

}  // namespace detail

struct PdfValue {
  double value = 0.0;
  double error_estimate = 0.0;
  double log_value = 0.0;  // stays finite where value underflows
};

inline PdfValue return_pdf_quadrature_detailed(double r, const ReturnDistSpec& spec,
                                               const PdfQuadratureOptions& options = {}) {
  const double pref = spec.prefactor();
  const auto result = detail::mixture_integral(spec.lambda(r), spec.c_const(), options);
  const double scale = std::exp(result.log_scale);
  PdfValue out;
  out.value = pref * result.scaled.value * scale;
  out.error_estimate = pref * result.scaled.error * scale;
  out.log_value = std::log(pref) + std::log(result.scaled.value) + result.log_scale;
  return out;
}

inline double return_pdf_quadrature(double r, const ReturnDistSpec& spec, const PdfQuadratureOptions& options = {}) {
  return return_pdf_quadrature_detailed(r, spec, options).value;
}

/// Closed form of the density at r = r0: A sqrt(pi C) e^(C/16).
inline double return_pdf_peak(const ReturnDistSpec& spec) {
  const double c = spec.c_const();
  return spec.prefactor() * std::sqrt(std::numbers::pi * c) * std::exp(c / 16.0);
}

/// Closed form of E[(r - r0)^2]: Delta theta^2 e^(C/4).
inline double return_second_moment(const ReturnDistSpec& spec) {
  return spec.lag() * spec.theta() * spec.theta() * std::exp(spec.c_const() / 4.0);
}

struct SeriesReport {
  std::vector<double> terms;        // signed terms, n = 0 .. n_terms-1
  bool decreasing = true;           // |terms| strictly decreasing throughout
  std::size_t smallest_term = 0;    // index of the smallest |term|
};

struct SeriesValue {
  double value = 0.0;
  SeriesReport report;
};

inline std::size_t max_series_terms() { return 60; }

namespace detail {

// Derivatives Gamma^(j)(1/2), j = 0 .. order, from Gamma' = Gamma psi.
inline std::vector<double> gamma_derivatives_at_half(std::size_t order) {
  std::vector<double> psi(order + 1);
  for (std::size_t j = 0; j <= order; ++j) {
    psi[j] = j == 0 ? boost::math::digamma(0.5) : boost::math::polygamma(static_cast<int>(j), 0.5);
  }
  std::vector<double> gamma(order + 1);
  gamma[0] = std::sqrt(std::numbers::pi);
  for (std::size_t j = 0; j < order; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i <= j; ++i) {
      s += boost::math::binomial_coefficient<double>(static_cast<unsigned>(j), static_cast<unsigned>(i)) *
           gamma[i] * psi[j - i];
    }
    gamma[j + 1] = s;
  }
  return gamma;
}

}  // namespace detail

/// Partial sum of the expansion of exp(-(log x)^2 / C) under the integral:
///   P = A sum_n (-1/C)^n / n! * d^(2n)/dz^(2n) [lambda^(-z) Gamma(z)] at z = 1/2.
/// The derivatives are exact (Leibniz rule with polygamma values). The
/// series is asymptotic rather than convergent; the report exposes the term
/// magnitudes so callers can see where truncation stops helping.
inline SeriesValue return_pdf_series(double r, const ReturnDistSpec& spec, std::size_t n_terms) {
  if (n_terms == 0) throw std::invalid_argument("return_pdf_series: n_terms must be >= 1");
  if (n_terms > max_series_terms()) throw std::invalid_argument("return_pdf_series: n_terms too large");
  const double lambda = spec.lambda(r);
  if (!(lambda > 0.0)) throw std::domain_error("return_pdf_series: lambda = 0 (r = r0) is outside the series domain");
  const double pref = spec.prefactor();
  const double c = spec.c_const();
  const double log_lambda = std::log(lambda);
  const std::size_t order = 2 * (n_terms - 1);
  const std::vector<double> gamma = detail::gamma_derivatives_at_half(order);
  const double lambda_half = 1.0 / std::sqrt(lambda);

  SeriesValue out;
  double coeff = 1.0;  // (-1/C)^n / n!
  for (std::size_t n = 0; n < n_terms; ++n) {
    if (n > 0) coeff *= -1.0 / (c * static_cast<double>(n));
    const std::size_t m = 2 * n;
    double deriv = 0.0;
    double power = 1.0;  // (-log lambda)^(m-j), built from j = m downwards
    for (std::size_t jj = 0; jj <= m; ++jj) {
      const std::size_t j = m - jj;
      deriv += boost::math::binomial_coefficient<double>(static_cast<unsigned>(m), static_cast<unsigned>(j)) *
               power * gamma[j];
      power *= -log_lambda;
    }
    out.report.terms.push_back(pref * coeff * lambda_half * deriv);
  }
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < out.report.terms.size(); ++n) {
    const double mag = std::abs(out.report.terms[n]);
    if (n > 0 && !(mag < std::abs(out.report.terms[n - 1]))) out.report.decreasing = false;
    if (mag < smallest) {
      smallest = mag;
      out.report.smallest_term = n;
    }
    out.value += out.report.terms[n];
  }
  return out;
}

/// Large-return asymptote (1/sqrt(Delta lambda)) exp(-(log lambda)^2 / C),
/// as written, without normalizing constants.
inline double tail_asymptote(double r, const ReturnDistSpec& spec) {
  const double lambda = spec.lambda(r);
  if (!(lambda > 1.0)) throw std::domain_error("tail_asymptote: requires lambda > 1");
  const double c = spec.c_const();
  if (!(c > 0.0)) throw std::domain_error("tail_asymptote: requires k > 0");
  const double l = std::log(lambda);
  return std::exp(-l * l / c) / std::sqrt(spec.lag() * lambda);
}

struct ReturnPdfRow {
  double r = 0.0;
  double quadrature = 0.0;
  double series = std::numeric_limits<double>::quiet_NaN();     // NaN where undefined
  double asymptote = std::numeric_limits<double>::quiet_NaN();  // NaN for lambda <= 1
  double lambda = 0.0;
};

/// Evaluates all three forms on a grid of r values.
inline std::vector<ReturnPdfRow> return_pdf_table(std::span<const double> grid, const ReturnDistSpec& spec,
                                                  std::size_t series_terms = 4,
                                                  const PdfQuadratureOptions& options = {}) {
  std::vector<ReturnPdfRow> rows;
  rows.reserve(grid.size());
  for (double r : grid) {
    ReturnPdfRow row;
    row.r = r;
    row.lambda = spec.lambda(r);
    row.quadrature = return_pdf_quadrature(r, spec, options);
    if (row.lambda > 0.0) row.series = return_pdf_series(r, spec, series_terms).value;
    if (row.lambda > 1.0) row.asymptote = tail_asymptote(r, spec);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fracvol
