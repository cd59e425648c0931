#include "searchlab/svg_plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace searchlab {

namespace {

constexpr double kWidth = 840.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 180.0;  // legend gutter
constexpr double kTop = 44.0;
constexpr double kBottom = 52.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[40];
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

struct Scale {
  double d0 = 0.0, d1 = 1.0;  // data range
  double p0 = 0.0, p1 = 1.0;  // pixel range
  double operator()(double v) const {
    if (d1 == d0) return (p0 + p1) / 2.0;
    return p0 + (v - d0) / (d1 - d0) * (p1 - p0);
  }
};

}  // namespace

std::string render_line_chart(const std::vector<Series>& series, const PlotSpec& spec) {
  // Data extent; envelopes widen the y range.
  int t_min = 0, t_max = 1;
  double y_lo = 0.0, y_hi = 1.0;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& pt : s.points) {
      if (!pt.value) continue;
      double lo = *pt.value, hi = *pt.value;
      if (spec.envelopes && pt.sd) {
        lo -= *pt.sd;
        hi += *pt.sd;
      }
      if (!any) {
        t_min = t_max = pt.trial;
        y_lo = lo;
        y_hi = hi;
        any = true;
      } else {
        t_min = std::min(t_min, pt.trial);
        t_max = std::max(t_max, pt.trial);
        y_lo = std::min(y_lo, lo);
        y_hi = std::max(y_hi, hi);
      }
    }
  }
  if (spec.y_min) y_lo = *spec.y_min;
  if (spec.y_max) y_hi = *spec.y_max;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  if (t_max <= t_min) t_max = t_min + 1;
  const double pad = 0.05 * (y_hi - y_lo);
  if (!spec.y_min) y_lo -= pad;
  if (!spec.y_max) y_hi += pad;

  const Scale sx{static_cast<double>(t_min), static_cast<double>(t_max), kLeft, kWidth - kRight};
  const Scale sy{y_lo, y_hi, kHeight - kBottom, kTop};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"24\" font-family=\"sans-serif\""
      << " font-size=\"16\" text-anchor=\"middle\">" << escape_xml(spec.title) << "</text>\n";

  // Axes and ticks.
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\""
      << num(kWidth - kRight) << "\" y2=\"" << num(kHeight - kBottom)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n";

  const int x_step = std::max(1, (t_max - t_min) / 8);
  for (int t = t_min; t <= t_max; t += x_step) {
    const double x = sx(t);
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(kHeight - kBottom + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(x) << "\" y=\"" << num(kHeight - kBottom + 20)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << t
        << "</text>\n";
  }
  svg << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - 12)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
      << escape_xml(spec.x_label) << "</text>\n";

  for (int i = 0; i <= 5; ++i) {
    const double v = y_lo + (y_hi - y_lo) * i / 5.0;
    const double y = sy(v);
    svg << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft)
        << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(kWidth - kRight) << "\" y2=\"" << num(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    svg << "<text x=\"" << num(kLeft - 9) << "\" y=\"" << num(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << tick_label(v)
        << "</text>\n";
  }
  svg << "<text x=\"16\" y=\"" << num((kTop + kHeight - kBottom) / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num((kTop + kHeight - kBottom) / 2) << ")\">" << escape_xml(spec.y_label) << "</text>\n";

  if (!any) {
    svg << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\""
        << num((kTop + kHeight - kBottom) / 2)
        << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">no data</text>\n";
  }

  // Envelopes first so every line draws on top of every band.
  for (std::size_t si = 0; si < series.size(); ++si) {
    if (!spec.envelopes) break;
    const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
    std::vector<SeriesPoint> segment;
    auto flush = [&] {
      if (segment.size() >= 2) {
        std::string points;
        for (const auto& pt : segment) {
          points += num(sx(pt.trial)) + "," + num(sy(*pt.value + *pt.sd)) + " ";
        }
        for (auto it = segment.rbegin(); it != segment.rend(); ++it) {
          points += num(sx(it->trial)) + "," + num(sy(*it->value - *it->sd)) + " ";
        }
        points.pop_back();
        svg << "<polygon points=\"" << points << "\" fill=\"" << color
            << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
      }
      segment.clear();
    };
    for (const auto& pt : series[si].points) {
      if (pt.value && pt.sd) {
        segment.push_back(pt);
      } else {
        flush();
      }
    }
    flush();
  }

  // Mean lines, broken at gaps.
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
    const bool dashed = series[si].group.rfind("human/", 0) == 0;
    std::vector<SeriesPoint> segment;
    auto flush = [&] {
      if (segment.size() == 1) {
        svg << "<circle cx=\"" << num(sx(segment[0].trial)) << "\" cy=\""
            << num(sy(*segment[0].value)) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      } else if (segment.size() >= 2) {
        std::string points;
        for (const auto& pt : segment) {
          points += num(sx(pt.trial)) + "," + num(sy(*pt.value)) + " ";
        }
        points.pop_back();
        svg << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\"" << (dashed ? " stroke-dasharray=\"6 3\"" : "")
            << "/>\n";
      }
      segment.clear();
    };
    for (const auto& pt : series[si].points) {
      if (pt.value) {
        segment.push_back(pt);
      } else {
        flush();
      }
    }
    flush();
  }

  // Legend.
  const double lx = kWidth - kRight + 14;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
    const double y = kTop + 10 + 20.0 * static_cast<double>(si);
    const bool dashed = series[si].group.rfind("human/", 0) == 0;
    svg << "<line x1=\"" << num(lx) << "\" y1=\"" << num(y) << "\" x2=\"" << num(lx + 24)
        << "\" y2=\"" << num(y) << "\" stroke=\"" << color << "\" stroke-width=\"1.8\""
        << (dashed ? " stroke-dasharray=\"6 3\"" : "") << "/>\n";
    svg << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(series[si].group)
        << "</text>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace searchlab
