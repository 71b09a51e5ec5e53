#include "repsim/cli/report.hpp"

#include "repsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace repsim::report {
namespace {

struct Rgb {
  double r, g, b;
};

constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kDarkBlue{8, 48, 107};
constexpr Rgb kBlue{33, 102, 172};
constexpr Rgb kRed{178, 24, 43};

Rgb mix(Rgb a, Rgb b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround(c.r)),
                static_cast<int>(std::lround(c.g)), static_cast<int>(std::lround(c.b)));
  return buf;
}

std::string escape_xml(std::string_view s) {
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

nlohmann::ordered_json number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

std::string matrix_csv(const std::string& corner, std::span<const std::string> rows,
                       std::span<const std::string> cols, const Matrix& values) {
  std::string out = corner;
  for (const auto& c : cols) out += "," + c;
  out += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += rows[i];
    for (std::size_t j = 0; j < cols.size(); ++j)
      out += "," + csv_number(values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    out += "\n";
  }
  return out;
}

std::string color(double v, double lo, double hi) {
  if (!std::isfinite(v)) return "#bdbdbd";
  const double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
  if (lo >= 0.0) return hex(mix(kWhite, kDarkBlue, t));
  return t < 0.5 ? hex(mix(kBlue, kWhite, 2.0 * t)) : hex(mix(kWhite, kRed, 2.0 * t - 1.0));
}

std::string heatmap_svg(const std::string& title, std::span<const std::string> labels, const Matrix& values,
                        double lo, double hi) {
  const int cell = 14;
  const int margin = 10 + 7 * static_cast<int>(std::accumulate(
                                  labels.begin(), labels.end(), std::size_t{0},
                                  [](std::size_t m, const std::string& s) { return std::max(m, s.size()); }));
  const int m = static_cast<int>(labels.size());
  const int top = margin + 24;
  const int legend = 40;
  const int width = margin + m * cell + legend + 20;
  const int height = top + m * cell + 10;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                    std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  out += "<text x=\"4\" y=\"14\" font-size=\"12\">" + escape_xml(title) + "</text>\n";
  for (int i = 0; i < m; ++i) {
    const std::string label = escape_xml(labels[static_cast<std::size_t>(i)]);
    const int y = top + i * cell;
    out += "<text x=\"" + std::to_string(margin - 4) + "\" y=\"" + std::to_string(y + cell - 3) +
           "\" text-anchor=\"end\">" + label + "</text>\n";
    const int x = margin + i * cell + cell - 3;
    out += "<text transform=\"translate(" + std::to_string(x) + "," + std::to_string(top - 4) +
           ") rotate(-90)\">" + label + "</text>\n";
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double v = values(i, j);
      out += "<rect x=\"" + std::to_string(margin + j * cell) + "\" y=\"" + std::to_string(top + i * cell) +
             "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" +
             color(v, lo, hi) + "\"><title>" + escape_xml(labels[static_cast<std::size_t>(i)]) + " / " +
             escape_xml(labels[static_cast<std::size_t>(j)]) + ": " + csv_number(v) + "</title></rect>\n";
    }
  }
  // color bar, top = hi
  const int bar_x = margin + m * cell + 10;
  const int steps = 20;
  const int bar_h = std::max(m * cell, 100);
  for (int s = 0; s < steps; ++s) {
    const double v = hi - (hi - lo) * (s + 0.5) / steps;
    out += "<rect x=\"" + std::to_string(bar_x) + "\" y=\"" + std::to_string(top + s * bar_h / steps) +
           "\" width=\"10\" height=\"" + std::to_string(bar_h / steps + 1) + "\" fill=\"" + color(v, lo, hi) +
           "\"/>\n";
  }
  out += "<text x=\"" + std::to_string(bar_x + 12) + "\" y=\"" + std::to_string(top + 8) + "\">" +
         format_double(hi) + "</text>\n";
  out += "<text x=\"" + std::to_string(bar_x + 12) + "\" y=\"" + std::to_string(top + bar_h) + "\">" +
         format_double(lo) + "</text>\n";
  out += "</svg>\n";
  return out;
}

nlohmann::ordered_json distributions_json(std::span<const ConsistencyDistribution> distributions) {
  std::vector<std::size_t> order(distributions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return distributions[a].summary.median > distributions[b].summary.median;
  });
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (std::size_t i : order) {
    const auto& d = distributions[i];
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& [a, b] : d.dataset_pairs) pairs.push_back({a, b});
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    for (double v : d.samples) samples.push_back(number(v));
    out.push_back({{"theta", d.theta_set},
                   {"phi", d.phi_set},
                   {"measure", d.measure.name()},
                   {"count", d.summary.count},
                   {"median", number(d.summary.median)},
                   {"q1", number(d.summary.q1)},
                   {"q3", number(d.summary.q3)},
                   {"mean", number(d.summary.mean)},
                   {"std", number(d.summary.std)},
                   {"dataset_pairs", std::move(pairs)},
                   {"samples", std::move(samples)}});
  }
  return out;
}

std::string file_stem(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    out += keep ? c : (c == '=' ? '-' : '_');
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace repsim::report
