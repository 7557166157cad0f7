#include "svg_plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pipecut/io.hpp"

namespace pipecut_cli {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 460.0;
constexpr double kLeft = 70.0, kRight = 30.0, kTop = 50.0, kBottom = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string color(std::size_t i) { return kPalette[i % 6]; }

std::string fmt(double v) { return pipecut::format_double(v); }

struct SvgFile {
  std::ofstream out;
  explicit SvgFile(const std::string& path) : out(path) {
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
        << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  ~SvgFile() { out << "</svg>\n"; }

  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& anchor = "start",
            const std::string& fill = "#000000") {
    out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\""
        << size << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor
        << "\" fill=\"" << fill << "\">" << s << "</text>\n";
  }
  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke, double width = 1.0,
            const std::string& dash = "") {
    out << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\""
        << fmt(x2) << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke
        << "\" stroke-width=\"" << fmt(width) << "\"";
    if (!dash.empty()) out << " stroke-dasharray=\"" << dash << "\"";
    out << "/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill) {
    out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
        << fmt(w) << "\" height=\"" << fmt(h) << "\" fill=\"" << fill
        << "\"/>\n";
  }
  void circle(double x, double y, double r, const std::string& fill) {
    out << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\""
        << fmt(r) << "\" fill=\"" << fill << "\"/>\n";
  }
};

struct Axis {
  double lo, hi;
  double scale(double v, double px_lo, double px_hi) const {
    if (hi == lo) return 0.5 * (px_lo + px_hi);
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
  }
};

void draw_frame(SvgFile& svg, const std::string& title) {
  svg.text(kWidth / 2.0, 24.0, title, 15, "middle");
  svg.line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom,
           "#000000");
  svg.line(kLeft, kTop, kLeft, kHeight - kBottom, "#000000");
}

void draw_legend(SvgFile& svg, const std::vector<std::string>& labels) {
  double x = kLeft + 10.0;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    svg.rect(x, kTop - 14.0, 10.0, 10.0, color(s));
    svg.text(x + 14.0, kTop - 5.0, labels[s], 11);
    x += 18.0 + 8.0 * labels[s].size();
  }
}

}  // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
  SvgFile svg(path);
  draw_frame(svg, title);
  std::size_t max_n = 1;
  double y_hi = 1e-12;
  for (const auto& s : series) {
    max_n = std::max(max_n, s.ys.size());
    for (const double v : s.ys) y_hi = std::max(y_hi, v);
  }
  const Axis xa{1.0, static_cast<double>(max_n)};
  const Axis ya{0.0, y_hi};

  for (int tick = 0; tick <= 4; ++tick) {
    const double v = ya.lo + tick * (ya.hi - ya.lo) / 4.0;
    const double y = ya.scale(v, kHeight - kBottom, kTop);
    svg.line(kLeft - 4.0, y, kLeft, y, "#000000");
    svg.text(kLeft - 8.0, y + 4.0, fmt(std::round(v * 1000.0) / 1000.0), 10,
             "end");
  }
  svg.text(kWidth / 2.0, kHeight - 18.0, x_label, 12, "middle");
  svg.text(16.0, kTop - 8.0, y_label, 12);

  std::vector<std::string> labels;
  for (const auto& s : series) labels.push_back(s.label);
  draw_legend(svg, labels);

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ys = series[s].ys;
    svg.out << "<polyline fill=\"none\" stroke=\"" << color(s)
            << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double x = xa.scale(i + 1.0, kLeft, kWidth - kRight);
      const double y = ya.scale(ys[i], kHeight - kBottom, kTop);
      svg.out << fmt(x) << ',' << fmt(y) << ' ';
    }
    svg.out << "\"/>\n";
  }
}

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& group_labels,
                         const std::vector<Series>& series) {
  SvgFile svg(path);
  draw_frame(svg, title);
  double y_hi = 1e-12;
  for (const auto& s : series)
    for (const double v : s.ys) y_hi = std::max(y_hi, v);
  const Axis ya{0.0, y_hi * 1.1};

  for (int tick = 0; tick <= 4; ++tick) {
    const double v = tick * ya.hi / 4.0;
    const double y = ya.scale(v, kHeight - kBottom, kTop);
    svg.text(kLeft - 8.0, y + 4.0, fmt(std::round(v * 100.0) / 100.0), 10,
             "end");
  }
  std::vector<std::string> labels;
  for (const auto& s : series) labels.push_back(s.label);
  draw_legend(svg, labels);

  const std::size_t groups = group_labels.size();
  const double span = (kWidth - kLeft - kRight) / std::max<std::size_t>(groups, 1);
  const double bar = span * 0.8 / std::max<std::size_t>(series.size(), 1);
  for (std::size_t g = 0; g < groups; ++g) {
    const double x0 = kLeft + g * span + span * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = g < series[s].ys.size() ? series[s].ys[g] : 0.0;
      const double y = ya.scale(v, kHeight - kBottom, kTop);
      svg.rect(x0 + s * bar, y, bar * 0.92, (kHeight - kBottom) - y, color(s));
    }
    svg.text(x0 + span * 0.4, kHeight - kBottom + 16.0, group_labels[g], 10,
             "middle");
  }
}

void write_heatmap_svg(const std::string& path, const std::string& title,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::vector<std::vector<double>>& values01) {
  SvgFile svg(path);
  svg.text(kWidth / 2.0, 24.0, title, 15, "middle");
  const double left = 150.0;
  const std::size_t rows = row_labels.size();
  const std::size_t cols = col_labels.size();
  const double cw = (kWidth - left - kRight) / std::max<std::size_t>(cols, 1);
  const double ch =
      (kHeight - kTop - kBottom) / std::max<std::size_t>(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    svg.text(left - 6.0, kTop + r * ch + ch * 0.6, row_labels[r], 10, "end");
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = std::clamp(values01[r][c], 0.0, 1.0);
      // White at 0 to a deep blue at 1.
      const int red = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      const int green = static_cast<int>(std::lround(255.0 - 175.0 * v));
      char buf[8];
      std::snprintf(buf, sizeof(buf), "#%02x%02xff", red, green);
      svg.rect(left + c * cw, kTop + r * ch, cw - 1.0, ch - 1.0, buf);
      svg.text(left + c * cw + cw / 2.0, kTop + r * ch + ch * 0.6,
               fmt(std::round(v * 100.0) / 100.0), 9, "middle",
               v > 0.6 ? "#ffffff" : "#000000");
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    svg.text(left + c * cw + cw / 2.0, kHeight - kBottom + 16.0, col_labels[c],
             10, "middle");
  }
}

void write_interval_plot_svg(const std::string& path, const std::string& title,
                             const std::vector<std::string>& series_labels,
                             const std::vector<IntervalRow>& rows,
                             bool log_scale) {
  SvgFile svg(path);
  draw_frame(svg, title);
  draw_legend(svg, series_labels);

  auto tr = [&](double v) { return log_scale ? std::log(v) : v; };
  double lo = 1e300, hi = -1e300;
  for (const auto& r : rows) {
    for (std::size_t s = 0; s < r.mean.size(); ++s) {
      if (!(r.lo[s] > 0.0) && log_scale) continue;
      lo = std::min(lo, tr(r.lo[s]));
      hi = std::max(hi, tr(r.hi[s]));
    }
  }
  if (lo > hi) {
    lo = 0.0;
    hi = 1.0;
  }
  const Axis ya{lo - 0.05 * (hi - lo) - 1e-9, hi + 0.05 * (hi - lo) + 1e-9};

  const double span =
      (kWidth - kLeft - kRight) / std::max<std::size_t>(rows.size(), 1);
  // Reference line at odds ratio 1.
  const double ref = ya.scale(tr(1.0), kHeight - kBottom, kTop);
  if (tr(1.0) > ya.lo && tr(1.0) < ya.hi) {
    svg.line(kLeft, ref, kWidth - kRight, ref, "#999999", 1.0, "4,3");
  }
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = ya.lo + tick * (ya.hi - ya.lo) / 4.0;
    const double y = ya.scale(v, kHeight - kBottom, kTop);
    const double shown = log_scale ? std::exp(v) : v;
    svg.text(kLeft - 8.0, y + 4.0, fmt(std::round(shown * 100.0) / 100.0), 10,
             "end");
  }

  for (std::size_t g = 0; g < rows.size(); ++g) {
    const auto& row = rows[g];
    const double x0 = kLeft + g * span;
    svg.text(x0 + span / 2.0, kHeight - kBottom + 16.0, row.label, 10,
             "middle");
    const std::size_t ns = row.mean.size();
    for (std::size_t s = 0; s < ns; ++s) {
      if (log_scale && !(row.lo[s] > 0.0)) continue;
      const double x = x0 + span * (s + 1.0) / (ns + 1.0);
      const std::string col =
          row.emphasized[s] ? color(s) : std::string("#bbbbbb");
      svg.line(x, ya.scale(tr(row.lo[s]), kHeight - kBottom, kTop), x,
               ya.scale(tr(row.hi[s]), kHeight - kBottom, kTop), col, 2.0);
      svg.circle(x, ya.scale(tr(row.mean[s]), kHeight - kBottom, kTop), 3.5,
                 col);
    }
  }
}

}  // namespace pipecut_cli
