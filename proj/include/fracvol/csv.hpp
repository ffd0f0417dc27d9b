#pragma once

// Plot-ready CSV output: a block of "# key = value" comment lines recording
// the resolved configuration, one header row, then data rows. Numbers use
// the shortest representation that round-trips, so identical inputs give
// byte-identical files.

#include "fracvol/version.hpp"

#include <charconv>
#include <cmath>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fracvol {

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  /// Emits the version line plus one comment per (key, value) pair.
  void comments(std::string_view title, const std::vector<std::pair<std::string, std::string>>& config) {
    out_ << "# fracvol " << kVersion << ' ' << title << '\n';
    for (const auto& [key, value] : config) out_ << "# " << key << " = " << value << '\n';
  }

  void note(std::string_view text) { out_ << "# " << text << '\n'; }

  void header(std::initializer_list<std::string_view> columns) {
    bool first = true;
    for (auto c : columns) {
      if (!first) out_ << ',';
      out_ << c;
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_number(v);
      first = false;
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
};

}  // namespace fracvol
