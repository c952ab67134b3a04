#pragma once

#include <string>

namespace biteweight {

struct EvalReport;

enum class Metric { MAE, MAPE };

// Result tables mirroring the report grid: one row per (estimator, feature
// set) plus the baseline row, columns Apple/Banana/Rice/Chips/All, cells
// "mean (std)". The lowest value of each column carries a trailing '*'.
std::string render_metric_csv(const EvalReport& rep, Metric metric);
std::string render_metric_text(const EvalReport& rep, Metric metric);

// Parses a rendered CSV and renders it again (the output must be identical
// for any table produced by render_metric_csv).
std::string rerender_metric_csv(const std::string& csv_text);

// Grouped bar chart of the all-foods MAE: groups = feature sets, bars =
// estimators. Pure-text SVG with deterministic bytes.
std::string render_plot_svg(const EvalReport& rep);

}  // namespace biteweight
