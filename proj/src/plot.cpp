#include "lpwan/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace lpwan {

namespace {

constexpr double kWidth = 720, kHeight = 460;
constexpr double kLeft = 70, kRight = 190, kTop = 40, kBottom = 60;

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    default: out += c;
    }
  }
  return out;
}

/// Round step (1, 2 or 5 times a power of ten) giving roughly `target` ticks.
double nice_step(double span, int target) {
  if (!(span > 0.0))
    return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag)
      return m * mag;
  return 10.0 * mag;
}

struct Axis {
  double lo, hi, step;
};

Axis make_axis(double lo, double hi, bool include_zero) {
  if (include_zero) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
  }
  if (lo == hi) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double step = nice_step(hi - lo, 6);
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

std::string header(const std::string& title) {
  return fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
                     "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
                     "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
                     "<text x=\"{2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
                     kWidth, kHeight, kLeft + (kWidth - kLeft - kRight) / 2, escape(title));
}

std::string y_axis(const Axis& y, const std::string& label, double plot_h) {
  std::string s;
  for (double v = y.lo; v <= y.hi + y.step * 1e-9; v += y.step) {
    const double py = kTop + plot_h * (1.0 - (v - y.lo) / (y.hi - y.lo));
    s += fmt::format("<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", kLeft, py,
                     kWidth - kRight, py);
    s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:g}</text>\n", kLeft - 6, py + 4,
                     std::abs(v) < y.step * 1e-9 ? 0.0 : v);
  }
  s += fmt::format("<text transform=\"translate(18,{:.1f}) rotate(-90)\" text-anchor=\"middle\">{}</text>\n",
                   kTop + plot_h / 2, escape(label));
  return s;
}

std::string legend(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 10 + 20.0 * static_cast<double>(i);
    s += fmt::format("<rect x=\"{}\" y=\"{:.1f}\" width=\"14\" height=\"4\" fill=\"{}\"/>\n", kWidth - kRight + 15,
                     y - 4, kPalette[i % kPalette.size()]);
    s += fmt::format("<text x=\"{}\" y=\"{:.1f}\">{}</text>\n", kWidth - kRight + 35, y, escape(names[i]));
  }
  return s;
}

} // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const Series& s : series)
    for (auto [x, y] : s.points) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  if (!std::isfinite(xlo)) {
    xlo = ylo = 0.0;
    xhi = yhi = 1.0;
  }
  const Axis xa = make_axis(xlo, xhi, false);
  const Axis ya = make_axis(ylo, yhi, true);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + pw * (x - xa.lo) / (xa.hi - xa.lo); };
  auto py = [&](double y) { return kTop + ph * (1.0 - (y - ya.lo) / (ya.hi - ya.lo)); };

  std::string out = header(title) + y_axis(ya, y_label, ph);
  for (double v = xa.lo; v <= xa.hi + xa.step * 1e-9; v += xa.step)
    out += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", px(v),
                       kHeight - kBottom + 18, v);
  out += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2,
                     kHeight - 15, escape(x_label));
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                     kTop, pw, ph);

  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    names.push_back(s.name);
    std::string pts;
    for (auto [x, y] : s.points)
      pts += fmt::format("{:.1f},{:.1f} ", px(x), py(y));
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\" points=\"{}\"/>\n",
                       kPalette[i % kPalette.size()], pts);
  }
  out += legend(names);
  out += "</svg>\n";
  return out;
}

std::string svg_bar_chart(const std::string& title, const std::string& y_label,
                          const std::vector<std::string>& series_names, const std::vector<BarGroup>& groups) {
  double ylo = 0.0, yhi = 0.0;
  for (const BarGroup& g : groups)
    for (double v : g.values) {
      if (std::isnan(v))
        continue;
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  const Axis ya = make_axis(ylo, yhi, true);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto py = [&](double y) { return kTop + ph * (1.0 - (y - ya.lo) / (ya.hi - ya.lo)); };

  std::string out = header(title) + y_axis(ya, y_label, ph);
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                     kTop, pw, ph);
  const double slot = groups.empty() ? pw : pw / static_cast<double>(groups.size());
  const double bar = slot * 0.8 / static_cast<double>(std::max<std::size_t>(series_names.size(), 1));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double x0 = kLeft + slot * static_cast<double>(g) + slot * 0.1;
    for (std::size_t k = 0; k < groups[g].values.size(); ++k) {
      const double v = groups[g].values[k];
      if (std::isnan(v))
        continue;
      const double top = py(std::max(v, 0.0)), bottom = py(std::min(v, 0.0));
      out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n",
                         x0 + bar * static_cast<double>(k), top, bar, bottom - top, kPalette[k % kPalette.size()]);
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", x0 + slot * 0.4,
                       kHeight - kBottom + 18, escape(groups[g].label));
  }
  out += fmt::format("<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"black\"/>\n", kLeft, py(0),
                     kWidth - kRight, py(0));
  out += legend(series_names);
  out += "</svg>\n";
  return out;
}

} // namespace lpwan
