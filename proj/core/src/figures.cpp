#include "psmlab/figures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "psmlab/csv.hpp"
#include "psmlab/errors.hpp"

namespace psmlab {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 78.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 46.0;
constexpr double kMarginBottom = 64.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

std::string tick_label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4g", v);
  return buffer;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg_line_chart(const std::string& path, const std::string& title,
                          const std::string& y_label,
                          const std::vector<std::string>& x_labels,
                          const std::vector<ChartSeries>& series) {
  if (x_labels.empty()) throw Error("write_svg_line_chart: no x labels");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (const double v : s.values) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!(lo <= hi)) {  // no finite data at all
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-300) {
    const double pad = std::max(std::fabs(hi), 1.0) * 0.1;
    lo -= pad;
    hi += pad;
  } else {
    const double pad = (hi - lo) * 0.06;
    lo -= pad;
    hi += pad;
  }

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto x_at = [&](std::size_t i) {
    if (x_labels.size() == 1) return kMarginLeft + plot_w / 2.0;
    return kMarginLeft + plot_w * static_cast<double>(i) /
                             static_cast<double>(x_labels.size() - 1);
  };
  const auto y_at = [&](double v) {
    return kMarginTop + plot_h * (1.0 - (v - lo) / (hi - lo));
  };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << xml_escape(title)
      << "</text>\n";

  // y grid + ticks
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    const double y = y_at(v);
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << y << "\" x2=\""
        << kWidth - kMarginRight << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(v) << "</text>\n";
  }

  // x ticks
  for (std::size_t i = 0; i < x_labels.size(); ++i) {
    const double x = x_at(i);
    out << "<line x1=\"" << x << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
        << x << "\" y2=\"" << kMarginTop + plot_h + 5
        << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << kMarginTop + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << xml_escape(x_labels[i]) << "</text>\n";
  }
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << "caliper multiplier</text>\n";
  out << "<text transform=\"translate(18," << kMarginTop + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">" << xml_escape(y_label) << "</text>\n";

  // axes
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\""
      << kMarginLeft << "\" y2=\"" << kMarginTop + plot_h
      << "\" stroke=\"#333333\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h
      << "\" x2=\"" << kWidth - kMarginRight << "\" y2=\"" << kMarginTop + plot_h
      << "\" stroke=\"#333333\"/>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    // Polyline segments; NaN breaks the line.
    std::string points;
    auto flush = [&]() {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
        points.clear();
      }
    };
    for (std::size_t i = 0; i < series[s].values.size() && i < x_labels.size(); ++i) {
      const double v = series[s].values[i];
      if (!std::isfinite(v)) {
        flush();
        continue;
      }
      const double x = x_at(i);
      const double y = y_at(v);
      points += tick_label(x) + "," + tick_label(y) + " ";
      out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    }
    flush();

    if (series.size() > 1) {
      const double lx = kMarginLeft + 10 + 150.0 * static_cast<double>(s % 3);
      const double ly = kMarginTop - 12 + 14.0 * static_cast<double>(s / 3);
      out << "<rect x=\"" << lx << "\" y=\"" << ly - 8
          << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
      out << "<text x=\"" << lx + 14 << "\" y=\"" << ly + 1
          << "\" font-family=\"sans-serif\" font-size=\"11\">"
          << xml_escape(series[s].name) << "</text>\n";
    }
  }

  out << "</svg>\n";
  if (!out) throw IoError("write failure on '" + path + "'");
}

std::vector<std::string> render_figures(const std::string& results_dir,
                                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  const csv::Table balance =
      csv::read_table((fs::path(results_dir) / "balance.csv").string());
  const csv::Table estimates =
      csv::read_table((fs::path(results_dir) / "estimates.csv").string());

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("render_figures: cannot create directory '" + out_dir +
                  "': " + ec.message());
  }

  const int b_id = balance.column("scenario_id");
  const int b_mult = balance.column("caliper_multiplier");
  std::vector<std::string> written;

  // Scenario ids in first-appearance order.
  std::vector<std::string> ids;
  for (const auto& row : balance.rows) {
    if (std::find(ids.begin(), ids.end(), row[b_id]) == ids.end()) {
      ids.push_back(row[b_id]);
    }
  }

  for (const auto& id : ids) {
    std::vector<std::string> x_labels;
    for (const auto& row : balance.rows) {
      if (row[b_id] == id) x_labels.push_back(row[b_mult]);
    }

    auto balance_series = [&](const std::string& column) {
      ChartSeries s;
      s.name = column;
      const int col = balance.column(column);
      for (const auto& row : balance.rows) {
        if (row[b_id] != id) continue;
        s.values.push_back(csv::parse_field_double(row[col], "balance.csv"));
      }
      return s;
    };

    struct Panel {
      const char* column;
      const char* file;
      const char* title;
    };
    const Panel panels[] = {
        {"mahalanobis_means", "_mahalanobis.svg",
         "Mahalanobis distance between matched group means"},
        {"prop_abs_smd_x3_gt_0.1", "_prop_large_smd.svg",
         "Proportion of |SMD(X3)| > 0.1"},
        {"mean_smd_x3", "_smd_x3.svg", "Mean SMD of X3"},
        {"pairwise_ix", "_pairwise_ix.svg", "Mean pairwise Mahalanobis distance"},
        {"mean_pairs", "_pairs.svg", "Mean number of matched pairs"},
        {"c_stat", "_c_stat.svg", "Mean matched-sample C-statistic"},
    };
    for (const auto& panel : panels) {
      const std::string path = (fs::path(out_dir) / (id + panel.file)).string();
      write_svg_line_chart(path, panel.title, panel.column, x_labels,
                           {balance_series(panel.column)});
      written.push_back(path);
    }

    // Effect estimates: one line per model spec.
    const int e_id = estimates.column("scenario_id");
    const int e_mult = estimates.column("caliper_multiplier");
    const int e_spec = estimates.column("model_spec");
    const int e_mean = estimates.column("mean_estimate");
    const int e_emp = estimates.column("empirical_se");
    const int e_model = estimates.column("mean_se_model");
    const int e_sand = estimates.column("mean_se_sandwich");

    std::vector<std::string> spec_names;
    for (const auto& row : estimates.rows) {
      if (row[e_id] != id) continue;
      if (std::find(spec_names.begin(), spec_names.end(), row[e_spec]) ==
          spec_names.end()) {
        spec_names.push_back(row[e_spec]);
      }
    }

    auto estimate_series = [&](const std::string& spec, int column) {
      ChartSeries s;
      s.name = spec;
      for (const auto& label : x_labels) {
        double value = std::numeric_limits<double>::quiet_NaN();
        for (const auto& row : estimates.rows) {
          if (row[e_id] == id && row[e_spec] == spec && row[e_mult] == label) {
            value = csv::parse_field_double(row[column], "estimates.csv");
            break;
          }
        }
        s.values.push_back(value);
      }
      return s;
    };

    std::vector<ChartSeries> estimate_lines;
    for (const auto& spec : spec_names) {
      estimate_lines.push_back(estimate_series(spec, e_mean));
    }
    {
      const std::string path = (fs::path(out_dir) / (id + "_estimates.svg")).string();
      write_svg_line_chart(path, "Mean effect estimate by model spec",
                           "mean_estimate", x_labels, estimate_lines);
      written.push_back(path);
    }

    for (const auto& spec : spec_names) {
      ChartSeries empirical = estimate_series(spec, e_emp);
      empirical.name = "empirical_se";
      ChartSeries model = estimate_series(spec, e_model);
      model.name = "mean_se_model";
      ChartSeries sandwich = estimate_series(spec, e_sand);
      sandwich.name = "mean_se_sandwich";
      const std::string path =
          (fs::path(out_dir) / (id + "_se_" + spec + ".svg")).string();
      write_svg_line_chart(path, "SE concordance: " + spec, "standard error",
                           x_labels, {empirical, model, sandwich});
      written.push_back(path);
    }
  }

  return written;
}

}  // namespace psmlab
