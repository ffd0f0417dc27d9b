#pragma once

// fracvol command-line front end. `run` parses argv, dispatches to one
// subcommand and reports failures as a single JSON line on the error stream.

#include "fracvol/fracvol.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fracvol::cli {

using Config = std::vector<std::pair<std::string, std::string>>;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// "a:b:n" -> n equally spaced points from a to b inclusive.
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw CliError("grid \"" + text + "\" must have the form start:stop:count");
  double a = 0.0;
  double b = 0.0;
  long n = 0;
  try {
    std::size_t pos = 0;
    a = std::stod(parts[0], &pos);
    if (pos != parts[0].size()) throw std::invalid_argument("");
    b = std::stod(parts[1], &pos);
    if (pos != parts[1].size()) throw std::invalid_argument("");
    n = std::stol(parts[2], &pos);
    if (pos != parts[2].size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw CliError("grid \"" + text + "\" is not numeric");
  }
  if (n < 1) throw CliError("grid \"" + text + "\" needs count >= 1");
  if (n == 1) {
    if (a != b) throw CliError("grid \"" + text + "\" with count 1 needs start == stop");
    return {a};
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

inline std::string num(double x) { return format_number(x); }

struct ParamOverrides {
  std::string source;
  std::optional<double> hurst;
  std::optional<double> k;
  std::optional<double> beta;
  std::optional<double> delta;

  void add(CLI::App* app, bool required) {
    auto* opt = app->add_option("--params", source, "parameter JSON file or preset name (nyse-daily)");
    if (required) opt->required();
    app->add_option("--hurst", hurst, "override H");
    app->add_option("--k", k, "override k");
    app->add_option("--beta", beta, "override beta");
    app->add_option("--delta", delta, "override delta");
  }

  VolatilityParams resolve() const {
    VolatilityParams p = load_params(source);
    if (hurst) p = p.with_hurst(*hurst);
    if (k) p = p.with_k(*k);
    if (beta) p = p.with_beta(*beta);
    if (delta) p = p.with_delta(*delta);
    return p;
  }
};

inline void describe(Config& c, const VolatilityParams& p) {
  c.emplace_back("hurst", num(p.hurst()));
  c.emplace_back("k", num(p.k()));
  c.emplace_back("beta", num(p.beta()));
  c.emplace_back("delta", num(p.delta()));
  c.emplace_back("theta", num(p.theta()));
}

struct InputOptions {
  std::string path;
  std::size_t time_column = 0;
  std::size_t price_column = 1;
  std::string delimiter = ",";
  std::string header = "detect";
  std::optional<double> resolution;

  void add(CLI::App* app) {
    app->add_option("--in", path, "input CSV")->required();
    app->add_option("--time-col", time_column, "0-based time column")->capture_default_str();
    app->add_option("--price-col", price_column, "0-based price column")->capture_default_str();
    app->add_option("--delimiter", delimiter, "field delimiter")->capture_default_str();
    app->add_option("--header", header, "detect | present | absent")
        ->check(CLI::IsMember({"detect", "present", "absent"}))
        ->capture_default_str();
    app->add_option("--resolution", resolution, "grid spacing (default: median timestamp spacing)");
  }

  LoadResult load(Config& c) const {
    if (delimiter.size() != 1) throw CliError("--delimiter must be a single character");
    CsvFormat f;
    f.time_column = time_column;
    f.price_column = price_column;
    f.delimiter = delimiter[0];
    f.header = header == "present" ? HeaderMode::present : header == "absent" ? HeaderMode::absent : HeaderMode::detect;
    f.resolution = resolution;
    LoadResult r = load_price_series(path, f);
    c.emplace_back("input", path);
    c.emplace_back("time_column", std::to_string(time_column));
    c.emplace_back("price_column", std::to_string(price_column));
    c.emplace_back("resolution", num(r.series.resolution()));
    c.emplace_back("rows", std::to_string(r.series.size()));
    c.emplace_back("rejected_rows", std::to_string(r.warnings.size()));
    return r;
  }
};

class Output {
 public:
  Output(const std::string& out_flag, const std::string& default_name, std::ostream& fallback) {
    const char* dir = std::getenv("FRACVOL_OUTPUT_DIR");
    std::filesystem::path target;
    if (!out_flag.empty()) {
      target = out_flag;
      if (target.is_relative() && dir != nullptr && *dir != '\0') target = std::filesystem::path(dir) / target;
    } else if (dir != nullptr && *dir != '\0') {
      target = std::filesystem::path(dir) / default_name;
    }
    if (target.empty()) {
      stream_ = &fallback;
    } else {
      if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
      file_ = std::make_unique<std::ofstream>(target, std::ios::binary);
      if (!*file_) throw CliError("cannot write " + target.string());
      stream_ = file_.get();
    }
  }

  std::ostream& stream() { return *stream_; }

  void close() {
    if (file_) {
      file_->close();
      if (!*file_) throw CliError("error while writing output");
    } else {
      stream_->flush();
    }
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

inline const char* kRiskNeutralNote =
    "prices use risk-neutral valuation, which is only an approximation under stochastic volatility";

inline void report_warnings(const std::vector<LoadWarning>& warnings, CsvWriter& w, std::ostream& err) {
  for (const auto& warn : warnings) {
    std::string text = "warning line " + std::to_string(warn.line) + ": " + warn.message;
    w.note(text);
    nlohmann::ordered_json j;
    j["warning"] = warn.message;
    j["line"] = warn.line;
    err << j.dump() << '\n';
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"fracvol: fractional-noise stochastic volatility toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::string out_path;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate a price CSV and write the cleaned series");
  InputOptions ingest_in;
  ingest_in.add(ingest);
  ingest->add_option("--out", out_path, "output CSV (default stdout)");

  // detrend
  auto* detrend_cmd = app.add_subcommand("detrend", "polynomial detrending of log-price");
  InputOptions detrend_in;
  detrend_in.add(detrend_cmd);
  double cond_threshold = 1e8;
  bool detrend_rescale = false;
  detrend_cmd->add_option("--cond-threshold", cond_threshold, "condition-number cap")->capture_default_str();
  detrend_cmd->add_flag("--rescale", detrend_rescale, "divide residuals by their standard deviation");
  detrend_cmd->add_option("--out", out_path, "output CSV (default stdout)");

  // vol
  auto* vol_cmd = app.add_subcommand("vol", "induced volatility from a price series");
  InputOptions vol_in;
  vol_in.add(vol_cmd);
  std::size_t vol_window = 5;
  std::size_t vol_stride = 1;
  vol_cmd->add_option("--window", vol_window, "window length in points")->capture_default_str();
  vol_cmd->add_option("--stride", vol_stride, "distance between window ends")->capture_default_str();
  vol_cmd->add_option("--out", out_path, "output CSV (default stdout)");

  // calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "estimate (H, k, beta, delta) from a price series");
  InputOptions cal_in;
  cal_in.add(cal_cmd);
  CalibrationOptions cal_opt;
  bool cal_detrend = false;
  bool cal_rescale = false;
  bool cal_noise = false;
  double cal_cond = 1e8;
  cal_cmd->add_option("--window", cal_opt.window, "volatility window")->capture_default_str();
  cal_cmd->add_option("--stride", cal_opt.stride, "volatility window stride")->capture_default_str();
  cal_cmd->add_option("--lags", cal_opt.lags, "scaling lags")->delimiter(',');
  cal_cmd->add_flag("--noise-correction", cal_noise, "correct var(log sigma) for estimator noise");
  cal_cmd->add_flag("--detrend", cal_detrend, "detrend log-price first");
  cal_cmd->add_flag("--rescale", cal_rescale, "rescale detrended log-price to unit variance (implies --detrend)");
  cal_cmd->add_option("--cond-threshold", cal_cond, "detrending condition-number cap")->capture_default_str();
  cal_cmd->add_option("--out", out_path, "output JSON (default stdout)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "simulate prices and volatility");
  ParamOverrides sim_params;
  sim_params.add(sim_cmd, true);
  SimulationConfig sim;
  std::uint64_t sim_seed = 0;
  std::string sim_form = "coupled";
  std::string sim_method = "circulant";
  sim_cmd->add_option("--n", sim.n_steps, "number of steps")->required();
  sim_cmd->add_option("--seed", sim_seed, "random seed")->required();
  sim_cmd->add_option("--dt", sim.dt, "step size")->capture_default_str();
  sim_cmd->add_option("--mu", sim.mu, "drift")->capture_default_str();
  sim_cmd->add_option("--s0", sim.s0, "initial price")->capture_default_str();
  sim_cmd->add_option("--form", sim_form, "coupled | compensated")
      ->check(CLI::IsMember({"coupled", "compensated"}))
      ->capture_default_str();
  sim_cmd->add_option("--method", sim_method, "circulant | cholesky")
      ->check(CLI::IsMember({"circulant", "cholesky"}))
      ->capture_default_str();
  sim_cmd->add_option("--out", out_path, "output CSV (default stdout)");

  // dist
  auto* dist_cmd = app.add_subcommand("dist", "return density on a grid");
  ParamOverrides dist_params;
  dist_params.add(dist_cmd, true);
  double dist_lag = 1.0;
  double dist_mu = 0.0;
  std::string dist_grid;
  std::size_t dist_terms = 4;
  double dist_tol = 1e-12;
  dist_cmd->add_option("--lag", dist_lag, "return horizon Delta")->capture_default_str();
  dist_cmd->add_option("--mu", dist_mu, "drift")->capture_default_str();
  dist_cmd->add_option("--grid", dist_grid, "r grid start:stop:count")->required();
  dist_cmd->add_option("--series-terms", dist_terms, "terms of the series form")->capture_default_str();
  dist_cmd->add_option("--rel-tol", dist_tol, "quadrature relative tolerance")->capture_default_str();
  dist_cmd->add_option("--out", out_path, "output CSV (default stdout)");

  // fit-compare
  auto* fit_cmd = app.add_subcommand("fit-compare", "empirical return density against the model pdf");
  InputOptions fit_in;
  fit_in.add(fit_cmd);
  ParamOverrides fit_params;
  fit_params.add(fit_cmd, true);
  std::size_t fit_lag = 1;
  std::size_t fit_bins = 50;
  double fit_mu = 0.0;
  bool fit_detrend = false;
  fit_cmd->add_option("--lag", fit_lag, "return lag in points")->capture_default_str();
  fit_cmd->add_option("--bins", fit_bins, "histogram bins")->capture_default_str();
  fit_cmd->add_option("--mu", fit_mu, "drift used by the model pdf")->capture_default_str();
  fit_cmd->add_flag("--detrend", fit_detrend, "detrend log-price before differencing");
  fit_cmd->add_option("--out", out_path, "output CSV (default stdout)");

  // price
  auto* price_cmd = app.add_subcommand("price", "fractional and Black-Scholes call prices");
  ParamOverrides price_params;
  price_params.add(price_cmd, true);
  OptionSpec option;
  std::string alpha_mode = "approx";
  price_cmd->add_option("--spot", option.spot, "spot S")->capture_default_str();
  price_cmd->add_option("--strike", option.strike, "strike K")->capture_default_str();
  price_cmd->add_option("--rate", option.rate, "interest rate r")->capture_default_str();
  price_cmd->add_option("--tau", option.tau, "time to maturity")->required();
  price_cmd->add_option("--sigma", option.sigma, "current volatility sigma_t")->required();
  price_cmd->add_option("--alpha-mode", alpha_mode, "approx | exact")
      ->check(CLI::IsMember({"approx", "exact"}))
      ->capture_default_str();
  price_cmd->add_option("--out", out_path, "output CSV (default stdout)");

  // smile
  auto* smile_cmd = app.add_subcommand("smile", "implied volatility surface of the fractional price");
  ParamOverrides smile_params;
  smile_params.add(smile_cmd, true);
  double smile_sigma = 0.01;
  double smile_rate = 0.001;
  std::string tau_grid = "5:100:20";
  std::string m_grid = "0.5:1.5:21";
  std::string smile_alpha = "approx";
  smile_cmd->add_option("--sigma", smile_sigma, "current volatility sigma_t")->capture_default_str();
  smile_cmd->add_option("--rate", smile_rate, "interest rate r")->capture_default_str();
  smile_cmd->add_option("--tau-grid", tau_grid, "maturity grid start:stop:count")->capture_default_str();
  smile_cmd->add_option("--moneyness-grid", m_grid, "S/K grid start:stop:count")->capture_default_str();
  smile_cmd->add_option("--alpha-mode", smile_alpha, "approx | exact")
      ->check(CLI::IsMember({"approx", "exact"}))
      ->capture_default_str();
  smile_cmd->add_option("--out", out_path, "output CSV (default stdout)");

  std::string active = "fracvol";
  const auto fail = [&](const std::string& kind, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = message;
    j["kind"] = kind;
    j["subcommand"] = active;
    err << j.dump() << '\n';
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    for (auto* sub : app.get_subcommands()) active = sub->get_name();
    fail("usage", e.what());
    return 2;
  }

  try {
    Config cfg;
    if (ingest->parsed()) {
      active = "ingest";
      const LoadResult r = ingest_in.load(cfg);
      Output o(out_path, "ingest.csv", out);
      CsvWriter w(o.stream());
      w.comments("ingest", cfg);
      report_warnings(r.warnings, w, err);
      w.header({"t", "price"});
      for (std::size_t i = 0; i < r.series.size(); ++i) w.row({r.series.timestamps()[i], r.series.prices()[i]});
      o.close();
    } else if (detrend_cmd->parsed()) {
      active = "detrend";
      const LoadResult r = detrend_in.load(cfg);
      const DetrendResult d = detrend_logprice(r.series, cond_threshold, detrend_rescale);
      cfg.emplace_back("cond_threshold", num(cond_threshold));
      cfg.emplace_back("rescale", detrend_rescale ? "true" : "false");
      cfg.emplace_back("degree", std::to_string(d.degree));
      cfg.emplace_back("condition_number", num(d.condition_number));
      std::string coeffs;
      for (double c : d.trend_coeffs) coeffs += (coeffs.empty() ? "" : " ") + num(c);
      cfg.emplace_back("trend_coeffs", coeffs);
      cfg.emplace_back("scale", num(d.scale));
      Output o(out_path, "detrend.csv", out);
      CsvWriter w(o.stream());
      w.comments("detrend", cfg);
      w.header({"t", "detrended"});
      for (std::size_t i = 0; i < d.detrended.size(); ++i) w.row({r.series.timestamps()[i], d.detrended[i]});
      o.close();
    } else if (vol_cmd->parsed()) {
      active = "vol";
      const LoadResult r = vol_in.load(cfg);
      const VolatilitySeries v = induced_volatility(r.series, vol_window, vol_stride);
      cfg.emplace_back("window", std::to_string(vol_window));
      cfg.emplace_back("stride", std::to_string(vol_stride));
      cfg.emplace_back("window_span", num(v.window));
      cfg.emplace_back("missing", std::to_string(v.missing));
      Output o(out_path, "vol.csv", out);
      CsvWriter w(o.stream());
      w.comments("vol", cfg);
      w.header({"t", "sigma"});
      for (std::size_t i = 0; i < v.sigma.size(); ++i) w.row({v.timestamps[i], v.sigma[i]});
      o.close();
    } else if (cal_cmd->parsed()) {
      active = "calibrate";
      const LoadResult r = cal_in.load(cfg);
      std::vector<double> logp = r.series.log_prices();
      nlohmann::ordered_json conf;
      for (const auto& [key, value] : cfg) conf[key] = value;
      if (cal_detrend || cal_rescale) {
        const DetrendResult d = detrend_logprice(r.series, cal_cond, cal_rescale);
        logp = d.detrended;
        conf["detrend_degree"] = d.degree;
      }
      cal_opt.noise_correction = cal_noise;
      const CalibrationResult c = calibrate(logp, r.series.resolution(), cal_opt);
      conf["window"] = cal_opt.window;
      conf["stride"] = cal_opt.stride;
      conf["lags"] = cal_opt.lags;
      conf["detrend"] = cal_detrend || cal_rescale;
      conf["rescale"] = cal_rescale;
      conf["noise_correction"] = cal_noise;
      nlohmann::ordered_json j = params_to_json(c.params);
      nlohmann::ordered_json diag;
      diag["scaling_r_squared"] = c.scaling.r_squared;
      diag["logvol_mean"] = c.logvol_mean;
      diag["logvol_variance"] = c.logvol_variance;
      diag["samples"] = c.samples;
      diag["missing"] = c.missing;
      nlohmann::ordered_json table = nlohmann::ordered_json::array();
      for (const auto& row : c.scaling.table) table.push_back({row.lag, row.mean_abs_increment});
      diag["scaling_table"] = table;
      j["diagnostics"] = diag;
      j["fracvol"] = {{"version", kVersion}, {"subcommand", "calibrate"}, {"config", conf}};
      Output o(out_path, "params.json", out);
      o.stream() << j.dump(2) << '\n';
      o.close();
    } else if (sim_cmd->parsed()) {
      active = "simulate";
      sim.params = sim_params.resolve();
      sim.seed = RngSeed{sim_seed};
      sim.form = sim_form == "compensated" ? VolatilityForm::compensated : VolatilityForm::coupled;
      sim.method = sim_method == "cholesky" ? FbmMethod::cholesky : FbmMethod::circulant;
      const SimulatedPath path = Simulator(sim).run(sim.seed);
      describe(cfg, sim.params);
      cfg.emplace_back("n", std::to_string(sim.n_steps));
      cfg.emplace_back("seed", std::to_string(sim_seed));
      cfg.emplace_back("dt", num(sim.dt));
      cfg.emplace_back("mu", num(sim.mu));
      cfg.emplace_back("s0", num(sim.s0));
      cfg.emplace_back("form", sim_form);
      cfg.emplace_back("method", sim_method);
      Output o(out_path, "simulate.csv", out);
      CsvWriter w(o.stream());
      w.comments("simulate", cfg);
      w.note("sigma is the volatility over [t, t + dt); the last row has none");
      w.header({"t", "price", "sigma"});
      const auto t = path.price.timestamps();
      const auto s = path.price.prices();
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double sigma = i < path.volatility.sigma.size() ? path.volatility.sigma[i]
                                                             : std::numeric_limits<double>::quiet_NaN();
        w.row({t[i], s[i], sigma});
      }
      o.close();
    } else if (dist_cmd->parsed()) {
      active = "dist";
      const VolatilityParams p = dist_params.resolve();
      const ReturnDistSpec spec(p, dist_lag, dist_mu);
      const std::vector<double> grid = parse_grid(dist_grid);
      PdfQuadratureOptions qopt;
      qopt.rel_tol = dist_tol;
      const auto rows = return_pdf_table(grid, spec, dist_terms, qopt);
      describe(cfg, p);
      cfg.emplace_back("lag", num(dist_lag));
      cfg.emplace_back("mu", num(dist_mu));
      cfg.emplace_back("r0", num(spec.r0()));
      cfg.emplace_back("C", num(spec.c_const()));
      cfg.emplace_back("grid", dist_grid);
      cfg.emplace_back("series_terms", std::to_string(dist_terms));
      cfg.emplace_back("rel_tol", num(dist_tol));
      Output o(out_path, "dist.csv", out);
      CsvWriter w(o.stream());
      w.comments("dist", cfg);
      w.note("pdf_series is an asymptotic truncation; pdf_asymptote is the large-return form, nan for lambda <= 1");
      w.header({"r", "pdf_quadrature", "pdf_series", "pdf_asymptote", "lambda"});
      for (const auto& row : rows) w.row({row.r, row.quadrature, row.series, row.asymptote, row.lambda});
      o.close();
    } else if (fit_cmd->parsed()) {
      active = "fit-compare";
      const LoadResult r = fit_in.load(cfg);
      const VolatilityParams p = fit_params.resolve();
      std::vector<double> logp = r.series.log_prices();
      if (fit_detrend) logp = detrend_logprice(r.series).detrended;
      const std::vector<double> returns = log_returns(logp, fit_lag);
      const EmpiricalDensity emp = empirical_density(returns, fit_bins);
      const ReturnDistSpec spec(p, static_cast<double>(fit_lag) * r.series.resolution(), fit_mu);
      describe(cfg, p);
      cfg.emplace_back("lag", std::to_string(fit_lag));
      cfg.emplace_back("bins", std::to_string(fit_bins));
      cfg.emplace_back("mu", num(fit_mu));
      cfg.emplace_back("detrend", fit_detrend ? "true" : "false");
      cfg.emplace_back("bin_width", num(emp.bin_width));
      Output o(out_path, "fit-compare.csv", out);
      CsvWriter w(o.stream());
      w.comments("fit-compare", cfg);
      report_warnings(r.warnings, w, err);
      w.header({"bin_center", "empirical_density", "model_pdf"});
      for (std::size_t i = 0; i < emp.bin_centers.size(); ++i) {
        w.row({emp.bin_centers[i], emp.densities[i], return_pdf_quadrature(emp.bin_centers[i], spec)});
      }
      o.close();
    } else if (price_cmd->parsed()) {
      active = "price";
      const VolatilityParams p = price_params.resolve();
      PricingOptions popt;
      popt.alpha_mode = alpha_mode == "exact" ? AlphaMode::exact : AlphaMode::approx;
      std::vector<std::string> warnings;
      const double alpha2 = alpha_squared(AlphaParams::from(p, option.tau), popt.alpha_mode, &warnings);
      const double v_quad = fractional_call_price(option, p, popt);
      const double v_closed = fractional_call_closed(option, p, popt.alpha_mode);
      const double v_bs = black_scholes_call(option);
      describe(cfg, p);
      cfg.emplace_back("alpha_mode", alpha_mode);
      Output o(out_path, "price.csv", out);
      CsvWriter w(o.stream());
      w.comments("price", cfg);
      w.note(kRiskNeutralNote);
      for (const auto& msg : warnings) w.note("warning: " + msg);
      w.header({"spot", "strike", "rate", "tau", "sigma_t", "alpha2", "price_quadrature", "price_closed",
                "black_scholes"});
      w.row({option.spot, option.strike, option.rate, option.tau, option.sigma, alpha2, v_quad, v_closed, v_bs});
      o.close();
    } else if (smile_cmd->parsed()) {
      active = "smile";
      const VolatilityParams p = smile_params.resolve();
      const std::vector<double> taus = parse_grid(tau_grid);
      const std::vector<double> ms = parse_grid(m_grid);
      PricingOptions popt;
      popt.alpha_mode = smile_alpha == "exact" ? AlphaMode::exact : AlphaMode::approx;
      const auto surface = implied_vol_surface(p, smile_sigma, smile_rate, taus, ms, popt);
      describe(cfg, p);
      cfg.emplace_back("sigma_t", num(smile_sigma));
      cfg.emplace_back("rate", num(smile_rate));
      cfg.emplace_back("tau_grid", tau_grid);
      cfg.emplace_back("moneyness_grid", m_grid);
      cfg.emplace_back("alpha_mode", smile_alpha);
      Output o(out_path, "smile.csv", out);
      CsvWriter w(o.stream());
      w.comments("smile", cfg);
      w.note(kRiskNeutralNote);
      w.header({"tau", "moneyness", "price", "implied_vol"});
      for (const auto& pt : surface) w.row({pt.tau, pt.moneyness, pt.price, pt.implied_vol});
      o.close();
    }
  } catch (const CliError& e) {
    fail("usage", e.what());
    return 2;
  } catch (const convergence_error& e) {
    fail("convergence", e.what());
    return 1;
  } catch (const std::exception& e) {
    fail("error", e.what());
    return 1;
  }
  return 0;
}

}  // namespace fracvol::cli
