#ifndef PIPECUT_TOOLS_SVG_PLOTS_HPP
#define PIPECUT_TOOLS_SVG_PLOTS_HPP

#include <string>
#include <vector>

namespace pipecut_cli {

// Minimal self-contained SVG emitters for the comparison plots.  Output is a
// pure function of the inputs so reruns are byte-identical.

struct Series {
  std::string label;
  std::vector<double> ys;  // x is the 1-based index
};

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& group_labels,
                         const std::vector<Series>& series);

void write_heatmap_svg(const std::string& path, const std::string& title,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::vector<std::vector<double>>& values01);

struct IntervalRow {
  std::string label;
  // one entry per series: mean, lo, hi, drawn solid when flagged
  std::vector<double> mean, lo, hi;
  std::vector<bool> emphasized;
};

void write_interval_plot_svg(const std::string& path, const std::string& title,
                             const std::vector<std::string>& series_labels,
                             const std::vector<IntervalRow>& rows,
                             bool log_scale);

}  // namespace pipecut_cli

#endif  // PIPECUT_TOOLS_SVG_PLOTS_HPP
