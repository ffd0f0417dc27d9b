#pragma once

// Numerical integration used across the library: adaptive Gauss-Kronrod
// (Boost.Math nodes and weights) with an explicit convergence check, and Gauss-Hermite rules
// (Golub-Welsch nodes) for Gaussian expectations.

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fracvol {

/// Thrown when an iterative numerical method stops short of its tolerance.
/// Carries the best error estimate that was reached.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, double error_estimate)
      : std::runtime_error(what), error_estimate_(error_estimate) {}

  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

struct Integral {
  double value = 0.0;
  double error = 0.0;  // Kronrod error estimate
  double l1 = 0.0;     // integral of |f|, used for relative tolerances
};

inline Integral& operator+=(Integral& lhs, const Integral& rhs) {
  lhs.value += rhs.value;
  lhs.error += rhs.error;
  lhs.l1 += rhs.l1;
  return lhs;
}

namespace detail {

struct GkPiece {
  double a;
  double b;
  double value;
  double error;
  double l1;
  bool operator<(const GkPiece& o) const { return error < o.error; }
};

template <class F>
GkPiece gauss_kronrod_31(F& f, double a, double b) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
  using gauss = boost::math::quadrature::gauss<double, 15>;
  const auto& x = kronrod::abscissa();
  const auto& wk = kronrod::weights();
  const auto& wg = gauss::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(mid);
  double k = f0 * wk[0];
  double g = f0 * wg[0];
  double l1 = std::abs(f0) * wk[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fp = f(mid + half * x[i]);
    const double fm = f(mid - half * x[i]);
    k += (fp + fm) * wk[i];
    l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
    if (i % 2 == 0) g += (fp + fm) * wg[i / 2];
  }
  return {a, b, half * k, std::abs(half * (k - g)), std::abs(half) * l1};
}

}  // namespace detail

/// Globally adaptive 31-point Gauss-Kronrod on a finite [a, b]. The interval
/// with the largest error estimate is bisected until the summed estimate is
/// below rel_tol * L1 or max_intervals is reached.
template <class F>
Integral integrate(F&& f, double a, double b, double rel_tol = 1e-13, std::size_t max_intervals = 4000) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("integrate: limits must be finite");
  Integral out;
  if (a == b) return out;
  std::priority_queue<detail::GkPiece> heap;
  heap.push(detail::gauss_kronrod_31(f, a, b));
  out.value = heap.top().value;
  out.error = heap.top().error;
  out.l1 = heap.top().l1;
  while (out.error > rel_tol * out.l1 && heap.size() < max_intervals) {
    const detail::GkPiece worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b) break;
    heap.pop();
    const auto left = detail::gauss_kronrod_31(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_31(f, mid, worst.b);
    out.value += left.value + right.value - worst.value;
    out.error += left.error + right.error - worst.error;
    out.l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  Integral exact;
  while (!heap.empty()) {
    exact.value += heap.top().value;
    exact.error += heap.top().error;
    exact.l1 += heap.top().l1;
    heap.pop();
  }
  return exact;
}

/// Throws convergence_error unless the error estimate of `r` is within
/// max(rel_tol * L1, abs_tol).
inline const Integral& require_converged(const Integral& r, double rel_tol, double abs_tol,
                                         const char* what) {
  const double allowed = std::max(rel_tol * r.l1, abs_tol);
  if (!std::isfinite(r.value) || !(r.error <= allowed)) {
    std::ostringstream msg;
    msg << what << ": quadrature did not converge (error estimate " << r.error << ", allowed "
        << allowed << ")";
    throw convergence_error(msg.str(), r.error);
  }
  return r;
}

/// Gauss-Hermite rule for the weight exp(-x^2). Nodes are the eigenvalues of
/// the Jacobi matrix, polished by Newton steps on the orthonormal Hermite
/// recurrence, which also gives the weights.
class GaussHermiteRule {
 public:
  explicit GaussHermiteRule(std::size_t n) : nodes_(n), weights_(n) {
    if (n == 0) throw std::invalid_argument("GaussHermiteRule: need at least one node");
    const auto size = static_cast<Eigen::Index>(n);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(size);
    Eigen::VectorXd sub(std::max<Eigen::Index>(size - 1, 0));
    for (Eigen::Index j = 0; j + 1 < size; ++j) sub[j] = std::sqrt(0.5 * static_cast<double>(j + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw convergence_error("GaussHermiteRule: eigenvalue solver failed", 0.0);
    const Eigen::VectorXd& eig = solver.eigenvalues();

    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
      // symmetric pair, take the non-positive member
      double z = 0.5 * (eig[static_cast<Eigen::Index>(i)] - eig[static_cast<Eigen::Index>(n - 1 - i)]);
      if (2 * i + 1 == n) {
        z = 0.0;
      } else {
        for (int iter = 0; iter < 3; ++iter) z -= evaluate(z, n).first;
      }
      const double log_deriv = evaluate(z, n).second;
      nodes_[i] = z;
      nodes_[n - 1 - i] = -z;
      weights_[i] = std::exp(std::numbers::ln2 - 2.0 * log_deriv);
      weights_[n - 1 - i] = weights_[i];
    }
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// E[f(X)] for X ~ N(mean, sd^2).
  template <class F>
  double expectation(F&& f, double mean, double sd) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (weights_[i] == 0.0) continue;
      sum += weights_[i] * f(mean + std::numbers::sqrt2 * sd * nodes_[i]);
    }
    return sum / std::sqrt(std::numbers::pi);
  }

 private:
  // Returns (p_n / p_n', log |p_n'|) for the orthonormal polynomials times
  // pi^(-1/4), rescaling on the way to stay inside the double range.
  static std::pair<double, double> evaluate(double z, std::size_t n) {
    double p1 = 1.0 / std::pow(std::numbers::pi, 0.25);
    double p2 = 0.0;
    double log_scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p3 = p2;
      p2 = p1;
      const double dj = static_cast<double>(j);
      p1 = z * std::sqrt(2.0 / (dj + 1.0)) * p2 - std::sqrt(dj / (dj + 1.0)) * p3;
      if (std::abs(p1) > 1e150) {
        p1 *= 1e-150;
        p2 *= 1e-150;
        log_scale += 150.0 * std::numbers::ln10;
      }
    }
    const double deriv = std::sqrt(2.0 * static_cast<double>(n)) * p2;
    return {p1 / deriv, std::log(std::abs(deriv)) + log_scale};
  }

  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace fracvol
