#pragma once

// Price series ingestion and the preprocessing that precedes volatility
// reconstruction: CSV loading with row validation, polynomial detrending of
// the log-price, lagged log-returns and histogram densities.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fracvol {

/// Timestamped positive prices on a grid of spacing `resolution` (the
/// observation step, e.g. one day). Timestamps are in resolution units.
class PriceSeries {
 public:
  PriceSeries(std::vector<double> timestamps, std::vector<double> prices, double resolution)
      : timestamps_(std::move(timestamps)), prices_(std::move(prices)), resolution_(resolution) {
    if (timestamps_.size() != prices_.size()) {
      throw std::invalid_argument("PriceSeries: timestamps and prices differ in length");
    }
    if (timestamps_.size() < 2) throw std::invalid_argument("PriceSeries: need at least 2 points");
    if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
      throw std::invalid_argument("PriceSeries: resolution must be positive");
    }
    for (std::size_t i = 0; i < prices_.size(); ++i) {
      if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i])) {
        throw std::invalid_argument("PriceSeries: prices must be positive and finite");
      }
      if (!std::isfinite(timestamps_[i])) {
        throw std::invalid_argument("PriceSeries: timestamps must be finite");
      }
      if (i > 0 && !(timestamps_[i] > timestamps_[i - 1])) {
        throw std::invalid_argument("PriceSeries: timestamps must be strictly increasing");
      }
    }
  }

  std::size_t size() const noexcept { return prices_.size(); }
  double resolution() const noexcept { return resolution_; }
  std::span<const double> timestamps() const noexcept { return timestamps_; }
  std::span<const double> prices() const noexcept { return prices_; }

  std::vector<double> log_prices() const {
    std::vector<double> out(prices_.size());
    std::transform(prices_.begin(), prices_.end(), out.begin(), [](double p) { return std::log(p); });
    return out;
  }

 private:
  std::vector<double> timestamps_;
  std::vector<double> prices_;
  double resolution_;
};

// ---------------------------------------------------------------------------
// CSV ingestion

enum class HeaderMode { detect, present, absent };

struct CsvFormat {
  std::size_t time_column = 0;
  std::size_t price_column = 1;
  char delimiter = ',';
  HeaderMode header = HeaderMode::detect;
  /// Grid spacing; when unset, the median timestamp spacing is used.
  std::optional<double> resolution;
};

struct LoadWarning {
  std::size_t line = 0;  // 1-based line number in the input
  std::string message;
};

struct LoadResult {
  PriceSeries series;
  std::vector<LoadWarning> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline double median_spacing(const std::vector<double>& t) {
  std::vector<double> d(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) d[i - 1] = t[i] - t[i - 1];
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double m = *mid;
  if (d.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(d.begin(), mid));
  }
  return m;
}

}  // namespace detail

/// Parses a price CSV. Blank lines and lines starting with '#' are skipped.
/// Rows with a missing, unparsable or non-positive price are rejected and
/// reported as warnings; duplicate timestamps keep the first row. The
/// result is sorted by time.
inline LoadResult parse_price_series(std::istream& in, const CsvFormat& format = {}) {
  struct Row {
    double t;
    double p;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::vector<LoadWarning> warnings;
  std::string line;
  std::size_t line_no = 0;
  bool first_record = true;
  const std::size_t needed = std::max(format.time_column, format.price_column) + 1;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = detail::split(view, format.delimiter);
    const bool is_first = first_record;
    first_record = false;

    std::optional<double> t;
    std::optional<double> p;
    if (fields.size() >= needed) {
      t = detail::parse_double(fields[format.time_column]);
      p = detail::parse_double(fields[format.price_column]);
    }
    if (is_first) {
      if (format.header == HeaderMode::present) continue;
      if (format.header == HeaderMode::detect && fields.size() >= needed && !t && !p) continue;
    }
    if (fields.size() < needed) {
      warnings.push_back({line_no, "row rejected: expected at least " + std::to_string(needed) +
                                       " columns"});
      continue;
    }
    if (!t || !std::isfinite(*t)) {
      warnings.push_back({line_no, "row rejected: unparsable time"});
      continue;
    }
    if (!p) {
      warnings.push_back({line_no, "row rejected: missing or unparsable price"});
      continue;
    }
    if (!(*p > 0.0) || !std::isfinite(*p)) {
      warnings.push_back({line_no, "row rejected: non-positive price"});
      continue;
    }
    rows.push_back({*t, *p, line_no});
  }

  if (rows.empty()) throw std::invalid_argument("no valid rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  std::vector<double> times;
  std::vector<double> prices;
  times.reserve(rows.size());
  prices.reserve(rows.size());
  for (const Row& r : rows) {
    if (!times.empty() && r.t == times.back()) {
      warnings.push_back({r.line, "duplicate timestamp: row dropped, first occurrence kept"});
      continue;
    }
    times.push_back(r.t);
    prices.push_back(r.p);
  }
  if (times.size() < 2) throw std::invalid_argument("fewer than 2 valid rows");
  std::sort(warnings.begin(), warnings.end(),
            [](const LoadWarning& a, const LoadWarning& b) { return a.line < b.line; });

  const double resolution = format.resolution.value_or(detail::median_spacing(times));
  return LoadResult{PriceSeries(std::move(times), std::move(prices), resolution), std::move(warnings)};
}

inline LoadResult load_price_series(const std::filesystem::path& path, const CsvFormat& format = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read price file: " + path.string());
  return parse_price_series(in, format);
}

// ---------------------------------------------------------------------------
// Detrending

struct DetrendResult {
  std::vector<double> detrended;
  std::vector<double> trend_coeffs;  // in original time units, lowest degree first
  int degree = 0;
  double condition_number = 1.0;  // of the accepted normal equations
  bool rescaled = false;
  double scale = 1.0;  // residuals were divided by this
};

/// Least-squares polynomial detrending. Degrees 0, 1, 2, ... are tried on
/// time rescaled to [0, 1]; the largest degree whose normal-equation
/// condition number stays below `cond_threshold` is kept. With `rescale`,
/// residuals are divided by their sample standard deviation.
inline DetrendResult detrend(std::span<const double> times, std::span<const double> values,
                             double cond_threshold = 1e8, bool rescale = false) {
  const std::size_t n = values.size();
  if (times.size() != n) throw std::invalid_argument("detrend: length mismatch");
  if (n < 3) throw std::invalid_argument("detrend: need at least 3 points");
  if (!(cond_threshold > 1.0)) throw std::invalid_argument("detrend: cond_threshold must exceed 1");
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  const double t0 = *lo;
  const double span = *hi - *lo;
  if (!(span > 0.0)) throw std::invalid_argument("detrend: degenerate series (constant time)");

  Eigen::VectorXd s(n);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[static_cast<Eigen::Index>(i)] = (times[i] - t0) / span;
    y[static_cast<Eigen::Index>(i)] = values[i];
  }

  Eigen::VectorXd best_coeffs;
  double best_cond = 1.0;
  int best_degree = -1;
  for (int d = 0; d < static_cast<int>(n); ++d) {
    Eigen::MatrixXd v(n, d + 1);
    v.col(0).setOnes();
    for (int j = 1; j <= d; ++j) v.col(j) = v.col(j - 1).cwiseProduct(s);
    const Eigen::MatrixXd gram = v.transpose() * v;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double ev_min = eig.eigenvalues().minCoeff();
    const double ev_max = eig.eigenvalues().maxCoeff();
    const double cond = ev_min > 0.0 ? ev_max / ev_min : std::numeric_limits<double>::infinity();
    if (!(cond < cond_threshold)) break;
    best_coeffs = v.colPivHouseholderQr().solve(y);
    best_cond = cond;
    best_degree = d;
  }
  if (best_degree < 0) throw std::invalid_argument("detrend: even a constant fit is ill-conditioned");

  DetrendResult out;
  out.degree = best_degree;
  out.condition_number = best_cond;
  out.detrended.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (int j = best_degree; j >= 0; --j) fit = fit * s[static_cast<Eigen::Index>(i)] + best_coeffs[j];
    out.detrended[i] = values[i] - fit;
  }

  // Compose p(s) with s = (t - t0) / span to express the trend in time units.
  const double slope = 1.0 / span;
  const double shift = -t0 / span;
  std::vector<double> poly{best_coeffs[best_degree]};
  for (int j = best_degree - 1; j >= 0; --j) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i] * shift;
      next[i + 1] += poly[i] * slope;
    }
    next[0] += best_coeffs[j];
    poly = std::move(next);
  }
  out.trend_coeffs = std::move(poly);

  if (rescale) {
    const double mean = std::accumulate(out.detrended.begin(), out.detrended.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double r : out.detrended) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd > 0.0) {
      for (double& r : out.detrended) r /= sd;
      out.rescaled = true;
      out.scale = sd;
    }
  }
  return out;
}

/// Detrends log S_t of a price series.
inline DetrendResult detrend_logprice(const PriceSeries& series, double cond_threshold = 1e8,
                                      bool rescale = false) {
  const std::vector<double> logp = series.log_prices();
  return detrend(series.timestamps(), logp, cond_threshold, rescale);
}

// ---------------------------------------------------------------------------
// Returns and densities

/// r_i = x_{i+lag} - x_i for a log-price sequence x.
inline std::vector<double> log_returns(std::span<const double> log_prices, std::size_t lag) {
  if (lag == 0) throw std::invalid_argument("log_returns: lag must be positive");
  if (lag >= log_prices.size()) throw std::invalid_argument("log_returns: lag must be below the series length");
  std::vector<double> out(log_prices.size() - lag);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = log_prices[i + lag] - log_prices[i];
  return out;
}

inline std::vector<double> log_returns(const PriceSeries& series, std::size_t lag) {
  const std::vector<double> logp = series.log_prices();
  return log_returns(std::span<const double>(logp), lag);
}

struct EmpiricalDensity {
  std::vector<double> bin_centers;
  std::vector<double> densities;
  double bin_width = 0.0;
};

/// Histogram over the fixed range [lo, hi], normalized by the total sample
/// count; samples outside the range are counted in the normalization only,
/// so the result integrates to the in-range fraction.
inline EmpiricalDensity empirical_density(std::span<const double> samples, std::size_t n_bins,
                                          double lo, double hi) {
  if (n_bins == 0) throw std::invalid_argument("empirical_density: n_bins must be positive");
  if (!(hi > lo)) throw std::invalid_argument("empirical_density: empty range");
  if (samples.empty()) throw std::invalid_argument("empirical_density: no samples");
  EmpiricalDensity out;
  out.bin_width = (hi - lo) / static_cast<double>(n_bins);
  out.bin_centers.resize(n_bins);
  out.densities.assign(n_bins, 0.0);
  for (std::size_t b = 0; b < n_bins; ++b) out.bin_centers[b] = lo + (static_cast<double>(b) + 0.5) * out.bin_width;
  for (double x : samples) {
    if (!(x >= lo && x <= hi)) continue;
    auto b = static_cast<std::size_t>((x - lo) / out.bin_width);
    if (b >= n_bins) b = n_bins - 1;
    out.densities[b] += 1.0;
  }
  const double norm = static_cast<double>(samples.size()) * out.bin_width;
  for (double& d : out.densities) d /= norm;
  return out;
}

/// Equal-width histogram over [min, max] of the samples, normalized to unit
/// integral.
inline EmpiricalDensity empirical_density(std::span<const double> samples, std::size_t n_bins) {
  if (samples.empty()) throw std::invalid_argument("empirical_density: no samples");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (!(*hi > *lo)) throw std::invalid_argument("empirical_density: all samples identical");
  return empirical_density(samples, n_bins, *lo, *hi);
}

}  // namespace fracvol
