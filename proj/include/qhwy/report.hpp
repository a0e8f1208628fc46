#pragma once

// Deterministic report emitters: CSV tables and small standalone SVG charts.
// Every float is printed with %.17g so a value survives a round trip through
// the file exactly, and nothing here depends on locale, time, or pointer
// values — the same inputs always produce the same bytes.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhwy/error_analysis.hpp"

namespace qhwy {

inline std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("report: cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw std::runtime_error("report: write to " + path + " failed");
}

// One row per (variant, seed, position); sorted so rerunning with the same
// inputs yields byte-identical files regardless of evaluation order.
inline std::string profiles_csv(std::vector<ErrorProfile> profiles) {
  std::sort(profiles.begin(), profiles.end(), [](const ErrorProfile& a, const ErrorProfile& b) {
    if (a.variant != b.variant) return a.variant < b.variant;
    return a.seed < b.seed;
  });
  std::string out = "variant,seed,position,error\n";
  for (const ErrorProfile& p : profiles) {
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
      out += p.variant;
      out += ',';
      out += std::to_string(p.seed);
      out += ',';
      out += std::to_string(p.labels[i]);
      out += ',';
      out += fmt_g17(p.errors[i]);
      out += '\n';
    }
  }
  return out;
}

struct SweepRow {
  int order = 0;         // position of the setting on the command line
  std::string setting;   // highway width: "full" or a bit count
  std::uint64_t seed = 0;
  double error_vs_full_precision = 0.0;  // final-position error against the unquantized run
  double error_vs_full_highway = 0.0;    // final-position error against the full-highway quantized run
};

inline std::string sweep_csv(std::vector<SweepRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.order != b.order) return a.order < b.order;
    return a.seed < b.seed;
  });
  std::string out = "setting,seed,error_vs_full_precision,error_vs_full_highway\n";
  for (const SweepRow& r : rows) {
    out += r.setting;
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += fmt_g17(r.error_vs_full_precision);
    out += ',';
    out += fmt_g17(r.error_vs_full_highway);
    out += '\n';
  }
  return out;
}

struct ChartSeries {
  std::string label;
  std::string color;  // any SVG color, e.g. "#d62728"
  std::vector<double> xs, ys;
};

// Minimal line chart. Intentionally simple: one plot area, linear axes with
// five ticks each, a legend in the top-left corner of the plot.
inline std::string svg_line_chart(const std::vector<ChartSeries>& series, const std::string& title,
                                  const std::string& x_label, const std::string& y_label) {
  const double width = 720, height = 440;
  const double left = 72, right = 24, top = 48, bottom = 56;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool have_point = false;
  for (const ChartSeries& s : series) {
    if (s.xs.size() != s.ys.size()) throw std::invalid_argument("chart: xs/ys length mismatch");
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!have_point) {
        x_min = x_max = s.xs[i];
        y_min = y_max = s.ys[i];
        have_point = true;
      } else {
        x_min = std::min(x_min, s.xs[i]);
        x_max = std::max(x_max, s.xs[i]);
        y_min = std::min(y_min, s.ys[i]);
        y_max = std::max(y_max, s.ys[i]);
      }
    }
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + (y_min == 0 ? 1 : std::abs(y_min) * 0.1);
  const double y_pad = (y_max - y_min) * 0.05;
  y_min -= y_pad;
  y_max += y_pad;

  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + plot_h - (y - y_min) / (y_max - y_min) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"440\" "
         "viewBox=\"0 0 720 440\" font-family=\"sans-serif\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"720\" height=\"440\" fill=\"white\"/>\n";
  svg += "<text x=\"360\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" + title + "</text>\n";

  // axes
  svg += "<line x1=\"" + fmt_fixed2(left) + "\" y1=\"" + fmt_fixed2(top) + "\" x2=\"" +
         fmt_fixed2(left) + "\" y2=\"" + fmt_fixed2(top + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt_fixed2(left) + "\" y1=\"" + fmt_fixed2(top + plot_h) + "\" x2=\"" +
         fmt_fixed2(left + plot_w) + "\" y2=\"" + fmt_fixed2(top + plot_h) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 4.0;
    const double fy = y_min + (y_max - y_min) * i / 4.0;
    svg += "<line x1=\"" + fmt_fixed2(px(fx)) + "\" y1=\"" + fmt_fixed2(top + plot_h) + "\" x2=\"" +
           fmt_fixed2(px(fx)) + "\" y2=\"" + fmt_fixed2(top + plot_h + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt_fixed2(px(fx)) + "\" y=\"" + fmt_fixed2(top + plot_h + 20) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + fmt_fixed2(fx) + "</text>\n";
    svg += "<line x1=\"" + fmt_fixed2(left - 5) + "\" y1=\"" + fmt_fixed2(py(fy)) + "\" x2=\"" +
           fmt_fixed2(left) + "\" y2=\"" + fmt_fixed2(py(fy)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt_fixed2(left - 8) + "\" y=\"" + fmt_fixed2(py(fy) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + fmt_fixed2(fy) + "</text>\n";
  }
  svg += "<text x=\"" + fmt_fixed2(left + plot_w / 2) + "\" y=\"" + fmt_fixed2(height - 12) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + x_label + "</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt_fixed2(top + plot_h / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " +
         fmt_fixed2(top + plot_h / 2) + ")\">" + y_label + "</text>\n";

  for (const ChartSeries& s : series) {
    if (s.xs.empty()) continue;
    std::string points;
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (i) points += ' ';
      points += fmt_fixed2(px(s.xs[i])) + "," + fmt_fixed2(py(s.ys[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" +
           points + "\"/>\n";
  }

  double legend_y = top + 16;
  for (const ChartSeries& s : series) {
    svg += "<line x1=\"" + fmt_fixed2(left + 12) + "\" y1=\"" + fmt_fixed2(legend_y - 4) + "\" x2=\"" +
           fmt_fixed2(left + 36) + "\" y2=\"" + fmt_fixed2(legend_y - 4) + "\" stroke=\"" + s.color +
           "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + fmt_fixed2(left + 42) + "\" y=\"" + fmt_fixed2(legend_y) +
           "\" font-size=\"12\">" + s.label + "</text>\n";
    legend_y += 16;
  }
  svg += "</svg>\n";
  return svg;
}

// Chart of the per-position medians of two variants, the standard view of a
// profile run.
inline std::string comparison_chart_svg(const ComparisonReport& report, const std::string& title,
                                        const std::string& x_label) {
  std::vector<double> xs(report.labels.begin(), report.labels.end());
  ChartSeries conv{"conventional (median)", "#d62728", xs, report.conventional_median};
  ChartSeries hw{"highway (median)", "#1f77b4", xs, report.highway_median};
  return svg_line_chart({conv, hw}, title, x_label, "error (1 - cosine similarity)");
}

}  // namespace qhwy
