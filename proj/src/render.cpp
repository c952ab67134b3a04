#include "biteweight/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "biteweight/evalharness.hpp"

namespace biteweight {

namespace {

const char* kColumns[5] = {"Apple", "Banana", "Rice", "Chips", "All"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct TableRow {
  std::string estimator, set;
  // per column: cell text or "-" when absent
  std::array<std::string, 5> cells;
};

std::vector<TableRow> build_rows(const EvalReport& rep, Metric metric) {
  // rows keyed by (estimator, set) in first-seen order; columns by regime
  std::vector<TableRow> rows;
  std::map<std::pair<std::string, std::string>, size_t> row_of;
  std::array<double, 5> col_min;
  std::array<std::pair<size_t, int>, 5> min_at;  // (row, col) of the minimum
  col_min.fill(std::numeric_limits<double>::infinity());
  min_at.fill({SIZE_MAX, -1});

  for (const auto& cell : rep.cells) {
    const auto key = std::make_pair(cell.estimator, cell.set);
    if (row_of.find(key) == row_of.end()) {
      row_of[key] = rows.size();
      TableRow r;
      r.estimator = cell.estimator;
      r.set = cell.set;
      r.cells.fill("-");
      rows.push_back(std::move(r));
    }
    int col = -1;
    for (int c = 0; c < 5; ++c)
      if (cell.regime == kColumns[c]) col = c;
    if (col < 0) continue;

    bool any = false;
    for (const auto& fr : cell.folds)
      if (!fr.skipped && !fr.pairs.empty()) any = true;
    if (!any) continue;

    const double mean = metric == Metric::MAE ? cell.mae_mean : cell.mape_mean;
    const double sd = metric == Metric::MAE ? cell.mae_std : cell.mape_std;
    rows[row_of[key]].cells[static_cast<size_t>(col)] = fmt(mean) + " (" + fmt(sd) + ")";
    if (mean < col_min[static_cast<size_t>(col)]) {
      col_min[static_cast<size_t>(col)] = mean;
      min_at[static_cast<size_t>(col)] = {row_of[key], col};
    }
  }

  for (const auto& [row, col] : min_at)
    if (row != SIZE_MAX) rows[row].cells[static_cast<size_t>(col)] += "*";
  return rows;
}

}  // namespace

std::string render_metric_csv(const EvalReport& rep, Metric metric) {
  const auto rows = build_rows(rep, metric);
  std::ostringstream out;
  out << "estimator,set";
  for (const char* c : kColumns) out << "," << c;
  out << "\n";
  for (const auto& r : rows) {
    out << r.estimator << "," << r.set;
    for (const auto& c : r.cells) out << "," << c;
    out << "\n";
  }
  return out.str();
}

std::string render_metric_text(const EvalReport& rep, Metric metric) {
  const auto rows = build_rows(rep, metric);
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"estimator", "set"});
  for (const char* c : kColumns) grid.back().push_back(c);
  for (const auto& r : rows) {
    std::vector<std::string> line = {r.estimator, r.set};
    for (const auto& c : r.cells) line.push_back(c);
    grid.push_back(std::move(line));
  }

  std::vector<size_t> width(grid[0].size(), 0);
  for (const auto& line : grid)
    for (size_t c = 0; c < line.size(); ++c)
      width[c] = std::max(width[c], line[c].size());

  std::ostringstream out;
  out << (metric == Metric::MAE
              ? "MAE (g), mean (std) of per-bout absolute errors; * = column best\n"
              : "MAPE (%), mean (std) of per-bout absolute relative errors; * = column best\n");
  for (size_t l = 0; l < grid.size(); ++l) {
    for (size_t c = 0; c < grid[l].size(); ++c) {
      out << grid[l][c];
      if (c + 1 < grid[l].size())
        out << std::string(width[c] - grid[l][c].size() + 2, ' ');
    }
    out << "\n";
    if (l == 0) {
      size_t total = 0;
      for (size_t c = 0; c < width.size(); ++c)
        total += width[c] + (c + 1 < width.size() ? 2 : 0);
      out << std::string(total, '-') << "\n";
    }
  }
  return out.str();
}

std::string rerender_metric_csv(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::ostringstream out;
  std::string line;
  size_t n_cols = 0;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cur;
    std::istringstream ls(line);
    while (std::getline(ls, cur, ',')) cells.push_back(cur);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (first) {
      n_cols = cells.size();
      first = false;
    } else if (cells.size() != n_cols) {
      throw std::runtime_error("metric CSV has ragged rows");
    }
    for (size_t i = 0; i < cells.size(); ++i)
      out << cells[i] << (i + 1 < cells.size() ? "," : "");
    out << "\n";
  }
  return out.str();
}

std::string render_plot_svg(const EvalReport& rep) {
  // (set, estimator) -> all-foods MAE, in report order
  std::vector<std::string> sets, ests;
  std::map<std::pair<std::string, std::string>, double> value;
  bool have_all = false;
  for (const auto& cell : rep.cells) {
    if (cell.regime != "All" || cell.set == "-") continue;
    have_all = true;
    if (std::find(sets.begin(), sets.end(), cell.set) == sets.end())
      sets.push_back(cell.set);
    if (std::find(ests.begin(), ests.end(), cell.estimator) == ests.end())
      ests.push_back(cell.estimator);
    value[{cell.set, cell.estimator}] = cell.mae_mean;
  }
  if (!have_all)
    throw std::runtime_error("render_plot_svg: no all-foods results in report");

  const double bar_w = 26.0, bar_gap = 3.0, group_gap = 30.0;
  const double ml = 62.0, mt = 46.0, mb = 52.0, plot_h = 300.0;
  const double group_w =
      static_cast<double>(ests.size()) * (bar_w + bar_gap) - bar_gap;
  const double plot_w =
      static_cast<double>(sets.size()) * (group_w + group_gap) - group_gap;
  const double width = ml + plot_w + 150.0;  // room for the legend
  const double height = mt + plot_h + mb;

  double ymax = 0.0;
  for (const auto& [k, v] : value) ymax = std::max(ymax, v);
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.12;

  static const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                   "#8172b3", "#937860"};

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
    << "\" height=\"" << fmt(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"" << fmt(width) << "\" height=\"" << fmt(height)
    << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << fmt(ml) << "\" y=\"20\" font-size=\"14\">"
    << "Mean absolute error (g) per feature set and estimator, all foods</text>\n";

  // y axis with 5 ticks
  for (int t = 0; t <= 5; ++t) {
    const double v = ymax * t / 5.0;
    const double y = mt + plot_h - plot_h * t / 5.0;
    s << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(y) << "\" x2=\""
      << fmt(ml + plot_w) << "\" y2=\"" << fmt(y)
      << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    s << "<text x=\"" << fmt(ml - 8.0) << "\" y=\"" << fmt(y + 4.0)
      << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }

  for (size_t g = 0; g < sets.size(); ++g) {
    const double gx = ml + static_cast<double>(g) * (group_w + group_gap);
    for (size_t b = 0; b < ests.size(); ++b) {
      const auto it = value.find({sets[g], ests[b]});
      if (it == value.end()) continue;
      const double h = plot_h * it->second / ymax;
      const double x = gx + static_cast<double>(b) * (bar_w + bar_gap);
      const double y = mt + plot_h - h;
      s << "<rect class=\"bar\" x=\"" << fmt(x) << "\" y=\"" << fmt(y)
        << "\" width=\"" << fmt(bar_w) << "\" height=\"" << fmt(h) << "\" fill=\""
        << kPalette[b % 6] << "\"/>\n";
      s << "<text x=\"" << fmt(x + bar_w / 2.0) << "\" y=\"" << fmt(y - 4.0)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(it->second)
        << "</text>\n";
    }
    s << "<text x=\"" << fmt(gx + group_w / 2.0) << "\" y=\""
      << fmt(mt + plot_h + 20.0) << "\" text-anchor=\"middle\">" << sets[g]
      << "</text>\n";
  }

  s << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt + plot_h) << "\" x2=\""
    << fmt(ml + plot_w) << "\" y2=\"" << fmt(mt + plot_h)
    << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  for (size_t b = 0; b < ests.size(); ++b) {
    const double lx = ml + plot_w + 24.0;
    const double ly = mt + 10.0 + static_cast<double>(b) * 20.0;
    s << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 10.0)
      << "\" width=\"12\" height=\"12\" fill=\"" << kPalette[b % 6] << "\"/>\n";
    s << "<text x=\"" << fmt(lx + 18.0) << "\" y=\"" << fmt(ly) << "\">" << ests[b]
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace biteweight
