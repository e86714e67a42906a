#pragma once

// CSV emission. Numbers use the shortest decimal form that parses back to
// the same double.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isolab/error.hpp"

namespace isolab {

/// Shortest decimal that parses back to exactly `x`. Non-finite values
/// become an empty cell.
inline std::string format_double(double x) {
  if (!std::isfinite(x)) return {};
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

inline std::string format_double(std::optional<double> x) { return x ? format_double(*x) : std::string{}; }

/// Quotes a field only when it contains a separator, quote or line break.
inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), columns_(header.size()) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    write_cells(header);
  }

  /// Cells must already be formatted (see format_double); they are escaped here.
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw Error("CSV row width does not match header of " + path_.string());
    write_cells(cells);
  }

  void close() {
    out_.close();
    if (!out_) throw Error("failed writing " + path_.string());
  }

 private:
  void write_cells(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_escape(cells[i]);
    }
    out_ << '\n';
  }

  std::filesystem::path path_;
  std::size_t columns_;
  std::ofstream out_;
};

}  // namespace isolab
