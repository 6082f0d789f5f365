/* Copyright 2026 The ambiprune Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ambiprune/plot.h"

#include <algorithm>
#include <array>

#include <fmt/format.h>

namespace ambiprune {

namespace {

constexpr std::array<std::string_view, kTagLevelCount> kLevelColors = {
    "#4c78a8", "#f2cf5b", "#f58518", "#b22222"};

}  // namespace

std::string histogram_csv(const AmbiguityHistogram& hist) {
  std::string out = "bin_lo,bin_hi,count";
  for (TagFamily f : kAllTagFamilies) {
    for (TagLevel l : kAllTagLevels) {
      out += fmt::format(",{}_{}", to_string(f), to_string(l));
    }
  }
  out += '\n';
  for (std::size_t b = 0; b < hist.bins(); ++b) {
    out += fmt::format("{},{},{}", hist.bin_edges[b], hist.bin_edges[b + 1],
                       hist.counts[b]);
    for (TagFamily f : kAllTagFamilies) {
      for (TagLevel l : kAllTagLevels) {
        out += fmt::format(",{}", hist.family(f)[b][tag_index(l)]);
      }
    }
    out += '\n';
  }
  return out;
}

std::string histogram_svg(const AmbiguityHistogram& hist) {
  constexpr double kPanelWidth = 600.0;
  constexpr double kPanelHeight = 220.0;
  constexpr double kMarginLeft = 50.0;
  constexpr double kMarginTop = 30.0;
  constexpr double kPanelGap = 70.0;
  constexpr double kLegendWidth = 120.0;

  const double width = kMarginLeft + kPanelWidth + kLegendWidth;
  const double height = kMarginTop + 2 * (kPanelHeight + kPanelGap);
  const double bar_width = kPanelWidth / static_cast<double>(hist.bins());

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height);
  for (std::size_t panel = 0; panel < kAllTagFamilies.size(); ++panel) {
    TagFamily family = kAllTagFamilies[panel];
    double top = kMarginTop + panel * (kPanelHeight + kPanelGap);
    double bottom = top + kPanelHeight;
    out += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\">{} tag proportion per "
        "ambiguity bin</text>\n",
        kMarginLeft, top - 10, to_string(family));
    for (std::size_t b = 0; b < hist.bins(); ++b) {
      double x = kMarginLeft + b * bar_width;
      double y = bottom;
      for (TagLevel l : kAllTagLevels) {
        double h = hist.family(family)[b][tag_index(l)] * kPanelHeight;
        if (h <= 0.0) continue;
        y -= h;
        out += fmt::format(
            "<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" "
            "fill=\"{}\"><title>[{}, {}) {}: {} of {}</title></rect>\n",
            x, y, bar_width * 0.9, h, kLevelColors[tag_index(l)],
            hist.bin_edges[b], hist.bin_edges[b + 1], to_string(l),
            hist.family(family)[b][tag_index(l)], hist.counts[b]);
      }
    }
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n"
        "<line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\" stroke=\"black\"/>\n",
        kMarginLeft, bottom, kMarginLeft + kPanelWidth, top);
    for (int tick = 0; tick <= 4; ++tick) {
      double v = tick / 4.0;
      out += fmt::format(
          "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
          kMarginLeft + v * kPanelWidth, bottom + 15, v);
      out += fmt::format(
          "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
          kMarginLeft - 5, bottom - v * kPanelHeight + 4, v);
    }
    out += fmt::format(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">ambiguity</text>\n",
        kMarginLeft + kPanelWidth / 2, bottom + 32);
    for (TagLevel l : kAllTagLevels) {
      double ly = top + 15 + 18 * tag_index(l);
      out += fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>"
          "<text x=\"{}\" y=\"{}\">{}</text>\n",
          kMarginLeft + kPanelWidth + 15, ly - 10, kLevelColors[tag_index(l)],
          kMarginLeft + kPanelWidth + 32, ly, to_string(l));
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace ambiprune
