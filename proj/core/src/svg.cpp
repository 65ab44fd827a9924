// Copyright 2026 The sigcomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sigcomm/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace sigcomm {

namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

constexpr double kMarginLeft = 64;
constexpr double kMarginRight = 120;
constexpr double kMarginTop = 36;
constexpr double kMarginBottom = 48;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Frame {
  double x_lo, x_hi, y_lo, y_hi;
  double left, right, top, bottom;

  double px(double x) const { return left + (x - x_lo) / (x_hi - x_lo) * (right - left); }
  double py(double y) const { return bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - top); }
};

void widen(double& lo, double& hi) {
  if (!(lo < hi)) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  } else {
    const double pad = (hi - lo) * 0.05;
    lo -= pad;
    hi += pad;
  }
}

Frame fit(const std::vector<Series>& series, const PlotOptions& opt) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  widen(x_lo, x_hi);
  widen(y_lo, y_hi);
  return {x_lo, x_hi, y_lo, y_hi, kMarginLeft, opt.width - kMarginRight, kMarginTop, opt.height - kMarginBottom};
}

void axes(std::ostringstream& out, const Frame& f, const PlotOptions& opt) {
  out << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.right - f.left << "\" height=\""
      << f.bottom - f.top << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x_lo + (f.x_hi - f.x_lo) * i / 4.0;
    const double yv = f.y_lo + (f.y_hi - f.y_lo) * i / 4.0;
    out << "<text x=\"" << f.px(xv) << "\" y=\"" << f.bottom + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
        << num(xv) << "</text>\n";
    out << "<text x=\"" << f.left - 6 << "\" y=\"" << f.py(yv) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
        << num(yv) << "</text>\n";
  }
  out << "<text x=\"" << opt.width / 2.0 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">"
      << escape(opt.title) << "</text>\n";
  out << "<text x=\"" << (f.left + f.right) / 2 << "\" y=\"" << opt.height - 10
      << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(opt.x_label) << "</text>\n";
  out << "<text x=\"14\" y=\"" << (f.top + f.bottom) / 2 << "\" font-size=\"12\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 14 " << (f.top + f.bottom) / 2 << ")\">" << escape(opt.y_label) << "</text>\n";
}

void legend(std::ostringstream& out, const std::vector<Series>& series, const Frame& f) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = f.top + 14 + 16 * static_cast<double>(i);
    out << "<rect x=\"" << f.right + 10 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
        << kPalette[i % kPalette.size()] << "\"/>\n";
    out << "<text x=\"" << f.right + 24 << "\" y=\"" << y << "\" font-size=\"11\">" << escape(series[i].label)
        << "</text>\n";
  }
}

std::string document(const std::vector<Series>& series, const PlotOptions& opt, bool lines) {
  const Frame f = fit(series, opt);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
      << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  axes(out, f, opt);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % kPalette.size()];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (lines) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(s.y[k])) continue;
        out << num(f.px(s.x[k])) << ',' << num(f.py(s.y[k])) << ' ';
      }
      out << "\"/>\n";
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
        out << "<circle cx=\"" << num(f.px(s.x[k])) << "\" cy=\"" << num(f.py(s.y[k])) << "\" r=\"4\" fill=\""
            << color << "\"/>\n";
      }
    }
  }
  legend(out, series, f);
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::string svg_line_plot(const std::vector<Series>& series, const PlotOptions& options) {
  return document(series, options, true);
}

std::string svg_scatter_plot(const std::vector<Series>& series, const PlotOptions& options) {
  return document(series, options, false);
}

}  // namespace sigcomm
