// Copyright 2026 The rl_lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RL_LAB_ROBUST_HEATMAP_SVG_H_
#define RL_LAB_ROBUST_HEATMAP_SVG_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "rl_lab/common/format.h"
#include "rl_lab/robust/sweep.h"

namespace rl_lab::robust {

namespace internal {

// coolwarm-style ramp: low = blue, high = red
inline std::string RampColor(double t) {
  t = std::clamp(t, 0.0, 1.0);
  static constexpr std::array<std::array<double, 3>, 3> kStops = {{
      {59, 76, 192}, {221, 221, 221}, {180, 4, 38}}};
  const double x = t * 2.0;
  const int k = std::min(static_cast<int>(x), 1);
  const double f = x - k;
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c) {
    rgb[c] = static_cast<int>(
        std::lround(kStops[k][c] + f * (kStops[k + 1][c] - kStops[k][c])));
  }
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

inline std::string Px(double x) { return FormatFixed(x, 1); }

}  // namespace internal

// One rectangle per cell, coloured linearly between lo and hi (the minimum
// and maximum mean reward of the whole table), with axis labels, cell values
// and a numeric legend as text.  Output depends only on the inputs.
inline std::string HeatmapSvg(const HeatmapMatrix& m, double lo, double hi,
                              const std::string& title) {
  using internal::Px;
  constexpr double kCellW = 72, kCellH = 36, kLeft = 90, kTop = 60;
  constexpr double kLegendW = 18, kLegendGap = 40;
  const std::size_t nr = m.row_values.size();
  const std::size_t nc = m.col_values.size();
  const double grid_w = kCellW * nc;
  const double grid_h = kCellH * nr;
  const double width = kLeft + grid_w + kLegendGap + kLegendW + 90;
  const double height = kTop + grid_h + 60;
  const double span = hi - lo;
  auto t_of = [&](double v) { return span > 0.0 ? (v - lo) / span : 0.5; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Px(width)
    << "\" height=\"" << Px(height) << "\" font-family=\"monospace\" "
    << "font-size=\"11\">\n";
  o << "<text x=\"" << Px(kLeft) << "\" y=\"24\" font-size=\"14\">" << title
    << "</text>\n";
  // column header and axis name
  o << "<text x=\"" << Px(kLeft + grid_w / 2) << "\" y=\"" << Px(kTop - 24)
    << "\" text-anchor=\"middle\">" << AxisName(m.col_axis) << "</text>\n";
  for (std::size_t c = 0; c < nc; ++c) {
    o << "<text x=\"" << Px(kLeft + kCellW * (c + 0.5)) << "\" y=\""
      << Px(kTop - 6) << "\" text-anchor=\"middle\">"
      << FormatShortest(m.col_values[c]) << "</text>\n";
  }
  o << "<text x=\"12\" y=\"" << Px(kTop + grid_h / 2) << "\">"
    << AxisName(m.row_axis) << "</text>\n";
  for (std::size_t r = 0; r < nr; ++r) {
    const double y = kTop + kCellH * r;
    o << "<text x=\"" << Px(kLeft - 6) << "\" y=\"" << Px(y + kCellH / 2 + 4)
      << "\" text-anchor=\"end\">" << FormatShortest(m.row_values[r])
      << "</text>\n";
    for (std::size_t c = 0; c < nc; ++c) {
      const double x = kLeft + kCellW * c;
      const double v = m.values[r][c];
      o << "<rect x=\"" << Px(x) << "\" y=\"" << Px(y) << "\" width=\""
        << Px(kCellW) << "\" height=\"" << Px(kCellH) << "\" fill=\""
        << internal::RampColor(t_of(v)) << "\"/>\n";
      o << "<text x=\"" << Px(x + kCellW / 2) << "\" y=\""
        << Px(y + kCellH / 2 + 4) << "\" text-anchor=\"middle\">"
        << FormatFixed(v, 1) << "</text>\n";
    }
  }
  // legend: five swatches from lo to hi
  const double lx = kLeft + grid_w + kLegendGap;
  constexpr int kSwatches = 5;
  const double sh = grid_h / kSwatches;
  for (int k = 0; k < kSwatches; ++k) {
    const double frac = 1.0 - static_cast<double>(k) / (kSwatches - 1);
    const double y = kTop + sh * k;
    o << "<rect x=\"" << Px(lx) << "\" y=\"" << Px(y) << "\" width=\""
      << Px(kLegendW) << "\" height=\"" << Px(sh) << "\" fill=\""
      << internal::RampColor(frac) << "\"/>\n";
    o << "<text x=\"" << Px(lx + kLegendW + 4) << "\" y=\""
      << Px(y + sh / 2 + 4) << "\">" << FormatFixed(lo + frac * span, 1)
      << "</text>\n";
  }
  o << "<text x=\"" << Px(lx) << "\" y=\"" << Px(kTop - 6)
    << "\">reward</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace rl_lab::robust

#endif  // RL_LAB_ROBUST_HEATMAP_SVG_H_
