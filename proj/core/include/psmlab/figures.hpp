#pragma once

#include <string>
#include <vector>

namespace psmlab {

// One named line on a chart; values align with the x labels, NaN entries
// break the line.
struct ChartSeries {
  std::string name;
  std::vector<double> values;
};

// Renders a single SVG line chart: categorical x axis (one slot per label),
// linear y axis, legend when more than one series is present.
void write_svg_line_chart(const std::string& path, const std::string& title,
                          const std::string& y_label,
                          const std::vector<std::string>& x_labels,
                          const std::vector<ChartSeries>& series);

// Reads balance.csv and estimates.csv from results_dir and renders one SVG
// per diagnostic panel into out_dir (per scenario id found in the files):
// Mahalanobis distance, proportion of |SMD| > 0.1, SMD, pair count,
// C-statistic, effect estimates by model spec, and SE concordance per spec.
// Returns the paths written.
std::vector<std::string> render_figures(const std::string& results_dir,
                                        const std::string& out_dir);

}  // namespace psmlab
