#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ordmet/report.hpp"
#include "ordmet/responsiveness.hpp"

namespace ordmet {

// Static line chart for one curve: fixed 800x500 viewBox, one polyline per
// contiguous run of defined points (gaps where a score is unused), axis
// ticks at integer scores. Values are plotted raw, without any vertical
// alignment; the y range adapts to the data.
inline std::string curve_svg(const CurvePoints& curve, const std::string& title) {
  const double width = 800, height = 500;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const double plot_w = width - ml - mr;
  const double plot_h = height - mt - mb;

  const int x_max = curve.xs.empty() ? 1 : curve.xs.back();
  double y_min = 0.0, y_max = 1.0;
  for (const auto& y : curve.ys) {
    if (!y) continue;
    y_min = std::min(y_min, *y);
    y_max = std::max(y_max, *y);
  }
  if (y_max == y_min) y_max = y_min + 1.0;

  const auto px = [&](double x) { return ml + plot_w * x / std::max(1, x_max); };
  const auto py = [&](double y) { return mt + plot_h * (1.0 - (y - y_min) / (y_max - y_min)); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  svg += "<text x=\"" + format9(ml) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" +
         title + "</text>\n";

  // axes
  svg += "<line x1=\"" + format9(ml) + "\" y1=\"" + format9(mt + plot_h) + "\" x2=\"" +
         format9(ml + plot_w) + "\" y2=\"" + format9(mt + plot_h) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + format9(ml) + "\" y1=\"" + format9(mt) + "\" x2=\"" + format9(ml) +
         "\" y2=\"" + format9(mt + plot_h) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // x ticks at integer scores
  for (int x = 0; x <= x_max; ++x) {
    const double cx = px(x);
    svg += "<line x1=\"" + format9(cx) + "\" y1=\"" + format9(mt + plot_h) + "\" x2=\"" +
           format9(cx) + "\" y2=\"" + format9(mt + plot_h + 6) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format9(cx) + "\" y=\"" + format9(mt + plot_h + 22) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           std::to_string(x) + "</text>\n";
  }
  // y ticks
  for (int i = 0; i <= 4; ++i) {
    const double v = y_min + (y_max - y_min) * i / 4.0;
    const double cy = py(v);
    svg += "<line x1=\"" + format9(ml - 6) + "\" y1=\"" + format9(cy) + "\" x2=\"" + format9(ml) +
           "\" y2=\"" + format9(cy) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format9(ml - 10) + "\" y=\"" + format9(cy + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
           format9(round9(v)) + "</text>\n";
  }

  // polylines, split at undefined points
  std::vector<std::string> segments;
  std::string current;
  int run = 0;
  for (std::size_t i = 0; i < curve.xs.size(); ++i) {
    if (curve.ys[i]) {
      current += format9(px(curve.xs[i])) + "," + format9(py(*curve.ys[i])) + " ";
      ++run;
    } else {
      if (run > 0) segments.push_back(current);
      current.clear();
      run = 0;
    }
  }
  if (run > 0) segments.push_back(current);
  for (const auto& seg : segments) {
    svg += "<polyline fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"2\" points=\"" + seg +
           "\"/>\n";
  }
  // markers so single defined points stay visible
  for (std::size_t i = 0; i < curve.xs.size(); ++i) {
    if (!curve.ys[i]) continue;
    svg += "<circle cx=\"" + format9(px(curve.xs[i])) + "\" cy=\"" + format9(py(*curve.ys[i])) +
           "\" r=\"3\" fill=\"#1f6feb\"/>\n";
  }
  svg += "<text x=\"" + format9(width - mr) + "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"12\" text-anchor=\"end\">raw values (no vertical alignment)</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace ordmet
