#include <cmath>
#include <algorithm>
#include <filesystem>
#include <sstream>
#include <set>

#include "biteweight/evalharness.hpp"
#include "biteweight/render.hpp"
#include "biteweight/rng.hpp"
#include "doctest.h"

using namespace biteweight;

namespace {

SynthConfig tiny_cfg(int subjects, int bouts, uint64_t seed) {
  SynthConfig cfg = SynthConfig::defaults();
  cfg.n_subjects = subjects;
  cfg.bouts_per_subject_per_food = bouts;
  cfg.seed = seed;
  for (auto& [food, p] : cfg.foods) {
    p.chew_dur_mean_s = 0.12;
    p.chew_dur_std_s = 0.02;
  }
  return cfg;
}

ExperimentConfig cheap_exp() {
  ExperimentConfig cfg;
  cfg.sets = {FeatureSetId::F1, FeatureSetId::F2, FeatureSetId::F4};
  cfg.estimators = {EstimatorKind::LR, EstimatorKind::GRNN};
  cfg.regimes = {TrainingRegime::Apple, TrainingRegime::All};
  cfg.include_baseline = true;
  cfg.master_seed = 42;
  cfg.k_max = 3;
  cfg.jobs = 1;
  return cfg;
}

// synthetic report covering the full 21-row grid, for the pure rendering paths
EvalReport fabricated_full_report() {
  EvalReport rep;
  rep.config.include_baseline = true;
  const char* ests[] = {"LR", "SVR", "FFNN", "GRNN"};
  const char* sets[] = {"F1", "F2", "F3", "F4", "F5"};
  const char* regimes[] = {"Apple", "Banana", "Rice", "Chips", "All"};
  int row = 0;
  auto add_cell = [&rep](const std::string& est, const std::string& set,
                         const std::string& regime, double mean) {
    CellResult c;
    c.estimator = est;
    c.set = set;
    c.regime = regime;
    FoldResult fr;
    fr.held_out_subject = "S01";
    fr.pairs = {{10.0, 10.0 + mean}};
    fr.fold_mae = mean;
    fr.fold_mape = 10.0 * mean;
    c.folds.push_back(fr);
    c.mae_mean = mean;
    c.mae_std = 0.0;
    c.mape_mean = 10.0 * mean;
    c.mape_std = 0.0;
    rep.cells.push_back(std::move(c));
  };
  for (const char* e : ests)
    for (const char* s : sets) {
      for (int col = 0; col < 5; ++col)
        add_cell(e, s, regimes[col], 0.5 + ((row * 7 + col * 3) % 11));
      ++row;
    }
  for (int col = 0; col < 5; ++col)
    add_cell("Amft", "-", regimes[col], 0.5 + ((row * 7 + col * 3) % 11));
  return rep;
}

}  // namespace

TEST_CASE("mae and mape on hand-checked pairs") {
  CHECK(mae({{2.0, 1.0}, {4.0, 2.0}}) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(mape({{8.0, 10.0}}) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(mae({{3.0, 3.0}, {7.0, 7.0}}) == 0.0);
  CHECK(mape({{3.0, 3.0}, {7.0, 7.0}}) == 0.0);
  CHECK_THROWS_AS(mae({}), std::invalid_argument);
  CHECK_THROWS_AS(mape({}), std::invalid_argument);
}

TEST_CASE("two-subject LOSO produces exactly two complementary folds") {
  const Dataset ds = synth_generate(tiny_cfg(2, 2, 7));
  ExperimentConfig cfg;
  cfg.sets = {FeatureSetId::F1};
  cfg.estimators = {EstimatorKind::LR};
  cfg.regimes = {TrainingRegime::All};
  cfg.include_baseline = false;
  cfg.master_seed = 9;
  const EvalReport rep = loso_run(ds, cfg);
  REQUIRE(rep.cells.size() == 1);
  REQUIRE(rep.cells[0].folds.size() == 2);
  const size_t bouts = ds.total_bouts();
  size_t covered = 0;
  std::set<std::string> held;
  for (const auto& fr : rep.cells[0].folds) {
    held.insert(fr.held_out_subject);
    covered += fr.pairs.size();
    // the held-out subject's bout count must match the fold's pair count
    size_t subject_bouts = 0;
    for (const auto& rec : ds.recordings)
      if (rec.subject_id == fr.held_out_subject) subject_bouts += rec.bouts.size();
    CHECK(fr.pairs.size() == subject_bouts);
  }
  CHECK(held.size() == 2);
  CHECK(covered == bouts);  // every bout tested exactly once in the All regime
}

TEST_CASE("oracle identifiability: exact linear law gives near-zero LOSO error") {
  SynthConfig scfg = tiny_cfg(4, 3, 11);
  for (auto& [food, p] : scfg.foods) {
    p.exact_weight_from_chews = true;
    p.weight_per_chew = 0.5;
    p.weight_offset = 0.25;
    p.chew_count_min = 2;
    p.chew_count_max = 12;
  }
  const Dataset ds = synth_generate(scfg);
  ExperimentConfig cfg;
  cfg.sets = {FeatureSetId::F1};
  cfg.estimators = {EstimatorKind::LR};
  cfg.regimes = {TrainingRegime::All};
  cfg.include_baseline = false;
  cfg.master_seed = 5;
  const EvalReport rep = loso_run(ds, cfg);
  REQUIRE(rep.cells.size() == 1);
  CHECK(rep.cells[0].mae_mean < 1e-6);
}

TEST_CASE("reports are byte-identical across reruns and thread counts") {
  const Dataset ds = synth_generate(tiny_cfg(3, 2, 13));
  ExperimentConfig cfg = cheap_exp();
  const EvalReport a = loso_run(ds, cfg);
  const EvalReport b = loso_run(ds, cfg);
  CHECK(report_to_json(a) == report_to_json(b));

  cfg.jobs = 3;
  const EvalReport c = loso_run(ds, cfg);
  CHECK(report_to_json(a) == report_to_json(c));
  CHECK(render_metric_csv(a, Metric::MAE) == render_metric_csv(c, Metric::MAE));
  CHECK(render_plot_svg(a) == render_plot_svg(c));

  cfg.jobs = 1;
  cfg.master_seed = 43;
  const EvalReport d = loso_run(ds, cfg);
  CHECK(report_to_json(a) != report_to_json(d));
}

TEST_CASE("report JSON round trip") {
  const Dataset ds = synth_generate(tiny_cfg(2, 2, 17));
  ExperimentConfig cfg = cheap_exp();
  cfg.regimes = {TrainingRegime::All};
  const EvalReport rep = loso_run(ds, cfg);
  const std::string text = report_to_json(rep);
  const EvalReport back = report_from_json(text);
  CHECK(report_to_json(back) == text);
}

TEST_CASE("pooled cell statistics equal recomputation from stored pairs") {
  const Dataset ds = synth_generate(tiny_cfg(3, 2, 19));
  ExperimentConfig cfg = cheap_exp();
  cfg.regimes = {TrainingRegime::All};
  const EvalReport rep = loso_run(ds, cfg);
  for (const auto& cell : rep.cells) {
    std::vector<double> abs_err, ape;
    for (const auto& fr : cell.folds) {
      if (fr.skipped) continue;
      for (const auto& [truth, pred] : fr.pairs) {
        abs_err.push_back(std::fabs(pred - truth));
        if (truth >= 0.1) ape.push_back(100.0 * std::fabs(pred - truth) / truth);
      }
    }
    REQUIRE(!abs_err.empty());
    double m = 0.0;
    for (double e : abs_err) m += e;
    m /= static_cast<double>(abs_err.size());
    double s = 0.0;
    for (double e : abs_err) s += (e - m) * (e - m);
    s = abs_err.size() > 1 ? std::sqrt(s / (static_cast<double>(abs_err.size()) - 1.0)) : 0.0;
    CHECK(std::fabs(cell.mae_mean - m) < 1e-12);
    CHECK(std::fabs(cell.mae_std - s) < 1e-12);
    double pm = 0.0;
    for (double e : ape) pm += e;
    pm /= static_cast<double>(ape.size());
    CHECK(std::fabs(cell.mape_mean - pm) < 1e-12);
  }
}

TEST_CASE("no-leakage verification passes on a real run") {
  const Dataset ds = synth_generate(tiny_cfg(3, 2, 23));
  ExperimentConfig cfg = cheap_exp();
  const EvalReport rep = loso_run(ds, cfg);
  std::string why;
  CHECK_MESSAGE(verify_no_leakage(ds, rep, &why), why);
}

TEST_CASE("a regime without training bouts is skipped with a warning") {
  // apple bouts exist only for subject S01: the (Apple, S01) fold has no
  // training data and must be skipped, not crash
  Dataset ds = synth_generate(tiny_cfg(3, 2, 29));
  for (auto& rec : ds.recordings) {
    if (rec.subject_id == "S01") continue;
    auto& bouts = rec.bouts;
    bouts.erase(std::remove_if(bouts.begin(), bouts.end(),
                               [](const Bout& b) { return b.food == Food::Apple; }),
                bouts.end());
  }
  ExperimentConfig cfg;
  cfg.sets = {FeatureSetId::F1};
  cfg.estimators = {EstimatorKind::LR};
  cfg.regimes = {TrainingRegime::Apple};
  cfg.include_baseline = false;
  cfg.master_seed = 3;
  const EvalReport rep = loso_run(ds, cfg);
  bool warned = false;
  for (const auto& m : rep.fold_meta)
    if (m.skipped && m.held_out_subject == "S01" &&
        m.warning.find("no training bouts") != std::string::npos)
      warned = true;
  CHECK(warned);
}

TEST_CASE("full-grid tables have 21 data rows and 5 regime columns") {
  const EvalReport rep = fabricated_full_report();
  const std::string csv = render_metric_csv(rep, Metric::MAE);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "estimator,set,Apple,Banana,Rice,Chips,All");
  int rows = 0;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    ++rows;
    lines.push_back(line);
  }
  CHECK(rows == 21);
  CHECK(lines.back().substr(0, 7) == "Amft,-,");

  // flagged minimum per column equals independent argmin recomputation
  for (int col = 0; col < 5; ++col) {
    double best = 1e300;
    int best_row = -1;
    for (size_t r = 0; r < rep.cells.size(); ++r) {
      if (rep.cells[r].regime != std::vector<std::string>{"Apple", "Banana", "Rice",
                                                          "Chips", "All"}[static_cast<size_t>(col)])
        continue;
      if (rep.cells[r].mae_mean < best) {
        best = rep.cells[r].mae_mean;
        best_row = static_cast<int>(r);
      }
    }
    REQUIRE(best_row >= 0);
    const std::string label = rep.cells[static_cast<size_t>(best_row)].estimator + "," +
                              rep.cells[static_cast<size_t>(best_row)].set;
    bool found_flag = false;
    for (const auto& l : lines) {
      if (l.substr(0, label.size()) != label) continue;
      std::istringstream ls(l);
      std::string cell;
      for (int c = 0; c < 3 + col; ++c) std::getline(ls, cell, ',');
      found_flag = !cell.empty() && cell.back() == '*';
    }
    CHECK(found_flag);
  }

  // parse -> re-render is the identity
  CHECK(rerender_metric_csv(csv) == csv);
  CHECK(rerender_metric_csv(render_metric_csv(rep, Metric::MAPE)) ==
        render_metric_csv(rep, Metric::MAPE));

  const std::string txt = render_metric_text(rep, Metric::MAE);
  CHECK(txt.find("Amft") != std::string::npos);
  CHECK(txt.find('*') != std::string::npos);
}

TEST_CASE("the all-foods plot draws one bar per (set, estimator)") {
  const EvalReport rep = fabricated_full_report();
  const std::string svg = render_plot_svg(rep);
  CHECK(render_plot_svg(rep) == svg);  // deterministic bytes

  size_t bars = 0, pos = 0;
  std::vector<double> heights;
  while ((pos = svg.find("<rect class=\"bar\"", pos)) != std::string::npos) {
    ++bars;
    const size_t hpos = svg.find("height=\"", pos);
    heights.push_back(std::stod(svg.substr(hpos + 8)));
    ++pos;
  }
  CHECK(bars == 20);

  // bar heights are proportional to the reported all-foods MAE values
  std::vector<double> values;
  for (const auto& cell : rep.cells)
    if (cell.regime == "All" && cell.set != "-") values.push_back(cell.mae_mean);
  REQUIRE(values.size() == 20);
  // svg emits bars grouped by set with estimators inside; report order is
  // estimator-major, so compare via ratios of matching pairs after sorting
  std::sort(values.begin(), values.end());
  std::sort(heights.begin(), heights.end());
  for (size_t i = 1; i < values.size(); ++i) {
    const double vr = values[i] / values[0];
    const double hr = heights[i] / heights[0];
    CHECK(hr == doctest::Approx(vr).epsilon(2e-2));  // %.2f rounding in the svg
  }

  EvalReport no_all = rep;
  no_all.cells.erase(std::remove_if(no_all.cells.begin(), no_all.cells.end(),
                                    [](const CellResult& c) { return c.regime == "All"; }),
                     no_all.cells.end());
  CHECK_THROWS_AS(render_plot_svg(no_all), std::runtime_error);
}

TEST_CASE("write_report_files emits the full set of outputs") {
  const Dataset ds = synth_generate(tiny_cfg(2, 2, 31));
  ExperimentConfig cfg = cheap_exp();
  cfg.regimes = {TrainingRegime::All};
  const EvalReport rep = loso_run(ds, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "bw_report_out";
  std::filesystem::remove_all(dir);
  write_report_files(rep, dir.string());
  for (const char* name : {"report.json", "mae.csv", "mape.csv", "mae.txt",
                           "mape.txt", "fig_all.svg", "meta.json"})
    CHECK(std::filesystem::exists(dir / name));
  std::filesystem::remove_all(dir);
}
