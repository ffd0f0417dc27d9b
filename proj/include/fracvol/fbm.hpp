#pragma once

// Exact fractional Brownian motion sampling and the covariance kernels of
// the volatility model.
//
// Both generators sample fractional Gaussian noise (unit-spacing increments)
// from its exact stationary Gaussian law and integrate it:
//   * cholesky  - factorization of the n x n Toeplitz covariance, O(n^3) setup
//   * circulant - Davies-Harte circulant embedding with FFT, O(n log n)
// Paths on a grid of spacing dt follow from self-similarity: the unit-spacing
// noise is multiplied by dt^H.

#include "fracvol/rng.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace fracvol {

enum class FbmMethod { cholesky, circulant };

struct FbmLimits {
  std::size_t cholesky_max_n = 4096;
  /// Embedding-size doublings tried when the circulant has significant
  /// negative eigenvalues.
  int max_padding_doublings = 6;
  /// Negative eigenvalues with |lambda| <= eigen_clamp * max(lambda) are set to zero.
  double eigen_clamp = 1e-12;
};

/// Sampled B_H on the grid 0, dt, ..., n*dt; values[0] = B_H(0) = 0.
struct FbmPath {
  double hurst = 0.5;
  double dt = 1.0;
  std::vector<double> values;
};

inline void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst <= 1.0)) throw std::invalid_argument("Hurst index must lie in (0, 1]");
}

/// E[B_H(s) B_H(t)] = (|t|^2H + |s|^2H - |t-s|^2H) / 2.
inline double fbm_covariance(double s, double t, double hurst) {
  check_hurst(hurst);
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(std::abs(t), h2) + std::pow(std::abs(s), h2) - std::pow(std::abs(t - s), h2));
}

/// Autocovariance of unit-spacing fractional Gaussian noise at lag k.
inline double fgn_autocovariance(double lag, double hurst) {
  const double h2 = 2.0 * hurst;
  const double k = std::abs(lag);
  return 0.5 * (std::pow(k + 1.0, h2) + std::pow(std::abs(k - 1.0), h2) - 2.0 * std::pow(k, h2));
}

/// Covariance psi(s, u) of the log-volatility process
/// log sigma_t = beta + (k/delta) (B_H(t) - B_H(t - delta)).
inline double logvol_covariance(double s, double u, double k, double delta, double hurst) {
  check_hurst(hurst);
  if (!(k >= 0.0)) throw std::invalid_argument("logvol_covariance: k must be non-negative");
  if (!(delta > 0.0)) throw std::invalid_argument("logvol_covariance: delta must be positive");
  const double h2 = 2.0 * hurst;
  const double d = s - u;
  return k * k / (2.0 * delta * delta) *
         (std::pow(std::abs(d + delta), h2) + std::pow(std::abs(-d + delta), h2) -
          2.0 * std::pow(std::abs(d), h2));
}

/// Reusable sampler for n-step fBm paths with a fixed Hurst index. The
/// factorization (or embedding spectrum) is computed once; generation is
/// const and may be called concurrently with distinct seeds.
class FbmGenerator {
 public:
  FbmGenerator(std::size_t n, double hurst, FbmMethod method = FbmMethod::circulant, FbmLimits limits = {})
      : n_(n), hurst_(hurst), method_(method) {
    check_hurst(hurst);
    if (n == 0) throw std::invalid_argument("FbmGenerator: need at least one step");
    if (method == FbmMethod::cholesky) {
      init_cholesky(limits);
    } else {
      init_circulant(limits);
    }
  }

  std::size_t steps() const noexcept { return n_; }
  double hurst() const noexcept { return hurst_; }
  FbmMethod method() const noexcept { return method_; }
  /// Size of the circulant embedding (0 for the Cholesky method).
  std::size_t embedding_size() const noexcept { return sqrt_eigs_.size(); }

  /// n increments of B_H at unit spacing.
  std::vector<double> unit_noise(RngSeed seed) const {
    GaussianStream gauss(seed);
    std::vector<double> out(n_);
    if (method_ == FbmMethod::cholesky) {
      Eigen::VectorXd z(static_cast<Eigen::Index>(n_));
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = gauss.normal();
      const Eigen::VectorXd x = factor_ * z;
      for (std::size_t i = 0; i < n_; ++i) out[i] = x[static_cast<Eigen::Index>(i)];
    } else {
      const std::size_t m = sqrt_eigs_.size();
      std::vector<std::complex<double>> w(m);
      for (std::size_t j = 0; j < m; ++j) {
        const double re = gauss.normal();
        const double im = gauss.normal();
        w[j] = sqrt_eigs_[j] * std::complex<double>(re, im);
      }
      Eigen::FFT<double> fft;
      std::vector<std::complex<double>> y;
      fft.fwd(y, w);
      for (std::size_t i = 0; i < n_; ++i) out[i] = y[i].real();
    }
    return out;
  }

  FbmPath path(double dt, RngSeed seed) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("fbm: dt must be positive");
    const std::vector<double> noise = unit_noise(seed);
    const double scale = std::pow(dt, hurst_);
    FbmPath p{hurst_, dt, std::vector<double>(n_ + 1, 0.0)};
    for (std::size_t i = 0; i < n_; ++i) p.values[i + 1] = p.values[i] + scale * noise[i];
    return p;
  }

 private:
  void init_cholesky(const FbmLimits& limits) {
    if (n_ > limits.cholesky_max_n) {
      std::ostringstream msg;
      msg << "fbm: cholesky method capped at n=" << limits.cholesky_max_n << " (requested " << n_ << ")";
      throw std::invalid_argument(msg.str());
    }
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        cov(i, j) = fgn_autocovariance(static_cast<double>(i - j), hurst_);
      }
    }
    // Pivoted LDL^T also covers the rank-deficient H = 1 case.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    Eigen::VectorXd d = ldlt.vectorD();
    for (Eigen::Index i = 0; i < n; ++i) d[i] = d[i] > 0.0 ? std::sqrt(d[i]) : 0.0;
    Eigen::MatrixXd lower = ldlt.matrixL();
    factor_ = lower * d.asDiagonal();
    factor_ = ldlt.transpositionsP().transpose() * factor_;
  }

  void init_circulant(const FbmLimits& limits) {
    std::size_t half = 1;
    while (half < n_) half <<= 1;
    for (int attempt = 0; attempt <= limits.max_padding_doublings; ++attempt, half <<= 1) {
      const std::size_t m = 2 * half;
      std::vector<std::complex<double>> row(m);
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t lag = j <= half ? j : m - j;
        row[j] = fgn_autocovariance(static_cast<double>(lag), hurst_);
      }
      Eigen::FFT<double> fft;
      std::vector<std::complex<double>> spectrum;
      fft.fwd(spectrum, row);
      double max_eig = 0.0;
      double min_eig = std::numeric_limits<double>::infinity();
      for (const auto& e : spectrum) {
        max_eig = std::max(max_eig, e.real());
        min_eig = std::min(min_eig, e.real());
      }
      if (min_eig < -limits.eigen_clamp * max_eig) continue;
      sqrt_eigs_.resize(m);
      for (std::size_t j = 0; j < m; ++j) {
        sqrt_eigs_[j] = std::sqrt(std::max(spectrum[j].real(), 0.0) / static_cast<double>(m));
      }
      return;
    }
    throw std::runtime_error("fbm: circulant embedding not non-negative definite within the padding cap");
  }

  std::size_t n_;
  double hurst_;
  FbmMethod method_;
  Eigen::MatrixXd factor_;
  std::vector<double> sqrt_eigs_;
};

inline FbmPath generate_fbm(std::size_t n, double hurst, double dt, RngSeed seed,
                            FbmMethod method = FbmMethod::circulant, FbmLimits limits = {}) {
  return FbmGenerator(n, hurst, method, limits).path(dt, seed);
}

/// B_H(t) - B_H(t - delta) for every grid point t >= delta. `delta` must be
/// a positive integer multiple of the path spacing.
inline std::vector<double> fractional_noise(const FbmPath& path, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("fractional_noise: delta must be positive");
  const double ratio = delta / path.dt;
  const double m_real = std::round(ratio);
  if (m_real < 1.0 || std::abs(ratio - m_real) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("fractional_noise: delta is not a multiple of the grid spacing");
  }
  const auto m = static_cast<std::size_t>(m_real);
  if (path.values.size() <= m) throw std::invalid_argument("fractional_noise: path shorter than delta");
  std::vector<double> out(path.values.size() - m);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = path.values[i + m] - path.values[i];
  return out;
}

}  // namespace fracvol
