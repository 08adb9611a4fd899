#include "annealab/output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <system_error>
#include <unistd.h>

#include "annealab/error.hpp"

namespace annealab {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string format_number(std::uint64_t x) { return std::to_string(x); }

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  row(header);
  rows_ = 0;
}

CsvTable& CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw Error(ErrorCode::InvalidArgument, "CSV row width differs from the header");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) text_ += ',';
    text_ += cells[k];
  }
  text_ += '\n';
  ++rows_;
  return *this;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out += kHex[md[k] >> 4];
    out += kHex[md[k] & 0xf];
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "write to " + tmp.string() + " failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(ErrorCode::IoError, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 80;
constexpr double kRight = 170;
constexpr double kTop = 40;
constexpr double kBottom = 60;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) {
      lo = 0;
      hi = 1;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

}  // namespace

std::string render_svg(const SvgPlot& plot) {
  auto tx = [&](double x) { return plot.log_x ? std::log10(x) : x; };
  Range xr;
  Range yr;
  for (const auto& s : plot.series) {
    for (double x : s.x) xr.add(tx(x));
    for (double y : s.y) yr.add(y);
    for (double y : s.y_low) yr.add(y);
    for (double y : s.y_high) yr.add(y);
  }
  xr.settle();
  yr.settle();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (tx(x) - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
       "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       escape_xml(plot.title) + "</text>\n";
  o += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double fx = xr.lo + (xr.hi - xr.lo) * k / 5.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * k / 5.0;
    const double gx = kLeft + pw * k / 5.0;
    const double gy = kTop + ph * (1.0 - k / 5.0);
    o += "<line x1=\"" + fmt(gx) + "\" y1=\"" + fmt(kTop + ph) + "\" x2=\"" + fmt(gx) + "\" y2=\"" +
         fmt(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt(gx) + "\" y=\"" + fmt(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
         tick_label(plot.log_x ? std::pow(10.0, fx) : fx) + "</text>\n";
    o += "<line x1=\"" + fmt(kLeft - 5) + "\" y1=\"" + fmt(gy) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" + fmt(gy) +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(gy + 4) + "\" text-anchor=\"end\">" + tick_label(fy) +
         "</text>\n";
  }
  o += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 15) + "\" text-anchor=\"middle\">" +
       escape_xml(plot.x_label) + "</text>\n";
  o += "<text transform=\"translate(18," + fmt(kTop + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape_xml(plot.y_label) + "</text>\n";

  double legend_y = kTop + 10;
  for (const auto& s : plot.series) {
    if (s.line && s.x.size() > 1) {
      o += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        if (!std::isfinite(s.y[k])) continue;
        o += fmt(px(s.x[k])) + "," + fmt(py(s.y[k])) + " ";
      }
      o += "\"/>\n";
    }
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.y[k])) continue;
      if (k < s.y_low.size() && k < s.y_high.size()) {
        o += "<line x1=\"" + fmt(px(s.x[k])) + "\" y1=\"" + fmt(py(s.y_low[k])) + "\" x2=\"" + fmt(px(s.x[k])) +
             "\" y2=\"" + fmt(py(s.y_high[k])) + "\" stroke=\"" + s.color + "\"/>\n";
      }
      if (s.markers) {
        o += "<circle cx=\"" + fmt(px(s.x[k])) + "\" cy=\"" + fmt(py(s.y[k])) + "\" r=\"3\" fill=\"" + s.color +
             "\"/>\n";
      }
    }
    const double lx = kLeft + pw + 12;
    o += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(legend_y) + "\" x2=\"" + fmt(lx + 20) + "\" y2=\"" +
         fmt(legend_y) + "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + fmt(lx + 26) + "\" y=\"" + fmt(legend_y + 4) + "\">" + escape_xml(s.label) + "</text>\n";
    legend_y += 18;
  }
  o += "</svg>\n";
  return o;
}

}  // namespace annealab
