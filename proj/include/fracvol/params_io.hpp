#pragma once

// VolatilityParams as a flat JSON document {"hurst", "k", "beta", "delta"}.
// "theta" is written for convenience and ignored on input, as are any other
// extra keys. Named presets can be used wherever a document is expected.

#include "fracvol/volatility.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

namespace fracvol {

inline nlohmann::ordered_json params_to_json(const VolatilityParams& p) {
  nlohmann::ordered_json j;
  j["hurst"] = p.hurst();
  j["k"] = p.k();
  j["beta"] = p.beta();
  j["delta"] = p.delta();
  j["theta"] = p.theta();
  return j;
}

inline VolatilityParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("params: expected a JSON object");
  const auto field = [&](const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(std::string("params: missing key \"") + key + "\"");
    if (!it->is_number()) throw std::invalid_argument(std::string("params: key \"") + key + "\" must be a number");
    return it->get<double>();
  };
  return VolatilityParams(field("hurst"), field("k"), field("beta"), field("delta"));
}

inline VolatilityParams parse_params(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("params: invalid JSON: ") + e.what());
  }
  return params_from_json(j);
}

inline std::optional<VolatilityParams> params_preset(const std::string& name) {
  if (name == "nyse-daily" || name == "nyse-preset") return nyse_daily_preset();
  return std::nullopt;
}

/// A preset name or the path of a JSON document.
inline VolatilityParams load_params(const std::string& name_or_path) {
  if (auto preset = params_preset(name_or_path)) return *preset;
  std::ifstream in(name_or_path);
  if (!in) throw std::runtime_error("params: cannot open \"" + name_or_path + "\" (and it is not a preset name)");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_params(text);
}

inline void save_params(const std::filesystem::path& path, const VolatilityParams& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("params: cannot write " + path.string());
  out << params_to_json(p).dump(2) << '\n';
}

}  // namespace fracvol
