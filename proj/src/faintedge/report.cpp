/*
 * Copyright 2026 The faintedge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "faintedge/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace faintedge {

std::string format_number(double value) {
  if (std::isnan(value)) return "";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  // printf honours LC_NUMERIC; the C locale is the only one this library sets.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_line_chart(const std::vector<Series>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
  constexpr double W = 640, H = 420, L = 70, R = 160, T = 40, B = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = 0.0, y1 = 1.0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      if (std::isfinite(s.y[i])) {
        y0 = std::min(y0, s.y[i]);
        y1 = std::max(y1, s.y[i]);
      }
    }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0;
  if (x1 == x0) x1 = x0 + 1.0;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
                    "font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + format_number(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
  svg += "<line x1=\"" + format_number(L) + "\" y1=\"" + format_number(H - B) + "\" x2=\"" +
         format_number(W - R) + "\" y2=\"" + format_number(H - B) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_number(L) + "\" y1=\"" + format_number(T) + "\" x2=\"" + format_number(L) +
         "\" y2=\"" + format_number(H - B) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
    svg += "<text x=\"" + format_number(px(xv)) + "\" y=\"" + format_number(H - B + 18) +
           "\" text-anchor=\"middle\">" + format_number(xv) + "</text>\n";
    svg += "<text x=\"" + format_number(L - 8) + "\" y=\"" + format_number(py(yv) + 4) +
           "\" text-anchor=\"end\">" + format_number(yv) + "</text>\n";
  }
  svg += "<text x=\"" + format_number((L + W - R) / 2) + "\" y=\"" + format_number(H - 15) +
         "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  svg += "<text transform=\"translate(18," + format_number((T + H - B) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % 6];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      pts += format_number(px(s.x[i])) + "," + format_number(py(s.y[i])) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts +
           "\"/>\n";
    const double ly = T + 20.0 * static_cast<double>(k);
    svg += "<line x1=\"" + format_number(W - R + 15) + "\" y1=\"" + format_number(ly) + "\" x2=\"" +
           format_number(W - R + 40) + "\" y2=\"" + format_number(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + format_number(W - R + 46) + "\" y=\"" + format_number(ly + 4) + "\">" +
           escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace faintedge
