#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace paretotab::cli {

namespace {

constexpr double kWidth = 760, kHeight = 460;
constexpr double kLeft = 72, kRight = 190, kTop = 44, kBottom = 62;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;

  double transform(double v) const { return log ? std::log10(v) : v; }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0); }
};

void fit_axis(Axis& a, const std::vector<double>& values) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!a.usable(v)) continue;
    lo = std::min(lo, a.transform(v));
    hi = std::max(hi, a.transform(v));
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-12) {
    const double pad = std::max(std::abs(lo) * 0.05, 0.5);
    lo -= pad;
    hi += pad;
  } else {
    const double pad = (hi - lo) * 0.05;
    lo -= pad;
    hi += pad;
  }
  a.lo = lo;
  a.hi = hi;
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

}  // namespace

std::string xml_escape(const std::string& s) {
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

std::string render_svg(const LineChart& chart, const std::string& comment) {
  Axis ax{chart.log_x}, ay{chart.log_y};
  std::vector<double> xs, ys;
  for (const auto& s : chart.series) {
    for (const auto& [x, y] : s.points) {
      if (ax.usable(x) && ay.usable(y)) {
        xs.push_back(x);
        ys.push_back(y);
      }
    }
  }
  fit_axis(ax, xs);
  fit_axis(ay, ys);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (ax.transform(x) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (ay.transform(y) - ay.lo) / (ay.hi - ay.lo) * ph; };

  // "--" is not allowed inside XML comments.
  std::string safe_comment = comment;
  for (auto pos = safe_comment.find("--"); pos != std::string::npos; pos = safe_comment.find("--")) {
    safe_comment.replace(pos, 2, "- -");
  }

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<!-- " + safe_comment + " -->\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     num(kLeft + pw / 2), xml_escape(chart.title));
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                     num(kLeft), num(kTop), num(pw), num(ph));

  // Five evenly spaced ticks per axis in transformed space.
  for (int i = 0; i <= 4; ++i) {
    const double tx = ax.lo + (ax.hi - ax.lo) * i / 4.0;
    const double vx = ax.log ? std::pow(10.0, tx) : tx;
    const double x = kLeft + pw * i / 4.0;
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", num(x),
                       num(kTop + ph), num(kTop + ph + 5));
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", num(x),
                       num(kTop + ph + 19), vx);
    const double ty = ay.lo + (ay.hi - ay.lo) * i / 4.0;
    const double vy = ay.log ? std::pow(10.0, ty) : ty;
    const double y = kTop + ph - ph * i / 4.0;
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", num(kLeft - 5),
                       num(y), num(kLeft));
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.4g}</text>\n", num(kLeft - 8),
                       num(y + 4), vy);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(kLeft + pw / 2),
                     num(kHeight - 16), xml_escape(chart.x_label + (ax.log ? " (log scale)" : "")));
  out += fmt::format(
      "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
      num(kTop + ph / 2), xml_escape(chart.y_label + (ay.log ? " (log scale)" : "")));

  for (std::size_t si = 0; si < chart.series.size(); ++si) {
    const auto& s = chart.series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    const std::string dash = s.dashed ? " stroke-dasharray=\"5,4\"" : "";
    std::vector<std::string> segments(1);
    for (const auto& [x, y] : s.points) {
      if (!ax.usable(x) || !ay.usable(y)) {
        if (!segments.back().empty()) segments.emplace_back();
        continue;
      }
      if (!segments.back().empty()) segments.back() += ' ';
      segments.back() += num(px(x)) + ',' + num(py(y));
      if (!s.dashed) {
        out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{}\"/>\n", num(px(x)), num(py(y)), color);
      }
    }
    for (const auto& seg : segments) {
      if (seg.find(' ') == std::string::npos) continue;
      out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{}/>\n", seg,
                         color, dash);
    }
    const double ly = kTop + 12 + 18.0 * static_cast<double>(si);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n",
                       num(kWidth - kRight + 14), num(ly), num(kWidth - kRight + 38), color, dash);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(kWidth - kRight + 44), num(ly + 4),
                       xml_escape(s.name));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace paretotab::cli
