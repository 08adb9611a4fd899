#pragma once

// Deterministic text output: locale-free number formatting, CSV tables,
// SHA-256 digests, atomic file writes and small self-contained SVG plots.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace annealab {

/// Shortest decimal that round-trips to the same double ("nan", "inf", "-inf" otherwise).
std::string format_number(double x);
std::string format_number(std::uint64_t x);

/// Comma-separated table with a fixed header; rows end in LF.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(const std::vector<std::string>& cells);
  std::size_t rows() const noexcept { return rows_; }
  const std::string& text() const noexcept { return text_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

std::string sha256_hex(std::string_view bytes);

/// Writes to a temporary sibling and renames it over `path`. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool line = true;
  bool markers = false;
  std::vector<double> y_low;  // optional error bars, same length as y
  std::vector<double> y_high;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  bool log_x = false;
};

std::string render_svg(const SvgPlot& plot);

}  // namespace annealab
