#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace gnnbench {

/// One model's aggregated trajectory: per-epoch mean and band half-width
/// (standard error). NaN means are skipped when drawing.
struct CurveSeries {
  std::string label;
  std::string color;
  std::vector<double> mean;
  std::vector<double> half;
};

/// Fixed palette indexed by model position; repeats past ten entries.
inline std::string curve_color(std::size_t index) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette[index % 10];
}

namespace detail {
inline std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}
}  // namespace detail

/// Self-contained static SVG, 1000x600: per-model mean polyline with a
/// shaded +-stderr polygon under it, axes with value ticks, legend at the
/// right. Output bytes are deterministic functions of the inputs.
inline std::string render_curve_svg(const std::string& title,
                                    const std::vector<CurveSeries>& curves) {
  constexpr double kW = 1000, kH = 600;
  constexpr double kLeft = 70, kRight = 845, kTop = 45, kBottom = 555;

  std::size_t epochs = 0;
  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (const CurveSeries& c : curves) {
    epochs = std::max(epochs, c.mean.size());
    for (std::size_t e = 0; e < c.mean.size(); ++e) {
      if (!std::isfinite(c.mean[e])) continue;
      const double a = c.mean[e] - c.half[e], b = c.mean[e] + c.half[e];
      if (!any) {
        lo = a;
        hi = b;
        any = true;
      } else {
        lo = std::min(lo, a);
        hi = std::max(hi, b);
      }
    }
  }
  if (!any) {
    lo = 0.0;
    hi = 1.0;
  }
  double pad = 0.05 * (hi - lo);
  if (pad <= 0.0) pad = std::max(0.05 * std::abs(hi), 0.05);
  lo -= pad;
  hi += pad;

  const auto x_of = [&](std::size_t e) {
    if (epochs <= 1) return 0.5 * (kLeft + kRight);
    return kLeft + (kRight - kLeft) * static_cast<double>(e) / static_cast<double>(epochs - 1);
  };
  const auto y_of = [&](double v) { return kBottom - (kBottom - kTop) * (v - lo) / (hi - lo); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"600\" "
       "viewBox=\"0 0 1000 600\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"1000\" height=\"600\" fill=\"white\"/>\n";
  s += "<text x=\"" + detail::f2(0.5 * (kLeft + kRight)) +
       "\" y=\"25\" font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">" + title +
       "</text>\n";

  // axes
  s += "<line x1=\"" + detail::f2(kLeft) + "\" y1=\"" + detail::f2(kTop) + "\" x2=\"" +
       detail::f2(kLeft) + "\" y2=\"" + detail::f2(kBottom) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + detail::f2(kLeft) + "\" y1=\"" + detail::f2(kBottom) + "\" x2=\"" +
       detail::f2(kRight) + "\" y2=\"" + detail::f2(kBottom) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = lo + (hi - lo) * t / 5.0;
    const double y = y_of(v);
    char lab[32];
    std::snprintf(lab, sizeof lab, "%.4g", v);
    s += "<line x1=\"" + detail::f2(kLeft - 5) + "\" y1=\"" + detail::f2(y) + "\" x2=\"" +
         detail::f2(kLeft) + "\" y2=\"" + detail::f2(y) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + detail::f2(kLeft - 9) + "\" y=\"" + detail::f2(y + 4) +
         "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" + lab + "</text>\n";
  }
  const int x_ticks = epochs > 1 ? 5 : 1;
  for (int t = 0; t <= x_ticks; ++t) {
    const std::size_t e =
        epochs <= 1 ? 0 : static_cast<std::size_t>(std::lround((epochs - 1) * t / double(x_ticks)));
    const double x = x_of(e);
    s += "<line x1=\"" + detail::f2(x) + "\" y1=\"" + detail::f2(kBottom) + "\" x2=\"" +
         detail::f2(x) + "\" y2=\"" + detail::f2(kBottom + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + detail::f2(x) + "\" y=\"" + detail::f2(kBottom + 20) +
         "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
         std::to_string(e + 1) + "</text>\n";
  }
  s += "<text x=\"" + detail::f2(0.5 * (kLeft + kRight)) + "\" y=\"590\" "
       "font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">epoch</text>\n";

  // bands first so every mean line stays on top
  for (const CurveSeries& c : curves) {
    std::string upper, lower;
    for (std::size_t e = 0; e < c.mean.size(); ++e) {
      if (!std::isfinite(c.mean[e])) continue;
      upper += detail::f2(x_of(e)) + "," + detail::f2(y_of(c.mean[e] + c.half[e])) + " ";
      lower = detail::f2(x_of(e)) + "," + detail::f2(y_of(c.mean[e] - c.half[e])) + " " + lower;
    }
    if (upper.empty()) continue;
    std::string pts = upper + lower;
    if (!pts.empty() && pts.back() == ' ') pts.pop_back();
    s += "<polygon points=\"" + pts + "\" fill=\"" + c.color +
         "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
  }
  for (const CurveSeries& c : curves) {
    std::string pts;
    for (std::size_t e = 0; e < c.mean.size(); ++e) {
      if (!std::isfinite(c.mean[e])) continue;
      pts += detail::f2(x_of(e)) + "," + detail::f2(y_of(c.mean[e])) + " ";
    }
    if (pts.empty()) continue;
    pts.pop_back();
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + c.color +
         "\" stroke-width=\"1.5\"/>\n";
  }

  // legend
  double ly = kTop + 10;
  for (const CurveSeries& c : curves) {
    s += "<rect x=\"860\" y=\"" + detail::f2(ly - 9) + "\" width=\"14\" height=\"14\" fill=\"" +
         c.color + "\"/>\n";
    s += "<text x=\"880\" y=\"" + detail::f2(ly + 3) +
         "\" font-family=\"sans-serif\" font-size=\"13\">" + c.label + "</text>\n";
    ly += 22;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace gnnbench
