#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "biteweight/boutfeat.hpp"
#include "biteweight/dataset.hpp"
#include "biteweight/estimators.hpp"

namespace biteweight {

struct ExperimentConfig {
  std::string dataset_path;  // recorded in the report; loso_run takes a Dataset
  std::vector<FeatureSetId> sets = {FeatureSetId::F1, FeatureSetId::F2,
                                    FeatureSetId::F3, FeatureSetId::F4,
                                    FeatureSetId::F5};
  std::vector<EstimatorKind> estimators = {EstimatorKind::LR, EstimatorKind::SVR,
                                           EstimatorKind::FFNN, EstimatorKind::GRNN};
  std::vector<TrainingRegime> regimes = {TrainingRegime::Apple, TrainingRegime::Banana,
                                         TrainingRegime::Rice, TrainingRegime::Chips,
                                         TrainingRegime::All};
  bool include_baseline = true;
  uint64_t master_seed = 1;
  int k_max = 32;
  int jobs = 1;
  std::string out_dir;
};

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& cfg, const std::string& path);

double mae(const std::vector<std::pair<double, double>>& truth_pred_pairs);
// percent; pairs with truth < 0.1 g must be filtered out by the caller
double mape(const std::vector<std::pair<double, double>>& truth_pred_pairs);

struct FoldResult {
  std::string held_out_subject;
  bool skipped = false;
  std::string warning;
  std::vector<std::pair<double, double>> pairs;  // (truth_g, prediction_g)
  double fold_mae = 0.0;
  double fold_mape = 0.0;
};

// one (estimator x feature-set x regime) cell of the result grid
struct CellResult {
  std::string estimator;  // "LR", "SVR", "FFNN", "GRNN" or "Amft"
  std::string set;        // "F1".."F5" or "-" for the baseline
  std::string regime;
  std::vector<FoldResult> folds;
  // pooled per-bout absolute errors across folds
  double mae_mean = 0.0, mae_std = 0.0;
  double mape_mean = 0.0, mape_std = 0.0;
};

struct CellHyper {
  std::string estimator, set;
  std::string summary;  // chosen hyper-parameters, rendered as JSON text
};

struct FoldMeta {
  std::string regime;
  std::string held_out_subject;
  bool skipped = false;
  std::string warning;
  int codebook_k = 0;
  std::vector<double> aic_curve;
  std::vector<double> desc_mean, desc_std;  // descriptor standardizer
  std::vector<double> f1_mean, f1_std;      // non-audio block standardizer
  std::vector<CellHyper> hypers;
};

struct EvalReport {
  ExperimentConfig config;
  std::vector<CellResult> cells;
  std::vector<FoldMeta> fold_meta;
  int mape_excluded = 0;  // bouts under the 0.1 g MAPE guard (unreachable for valid data)
};

// Full LOSO grid. Deterministic in config.master_seed; the number of worker
// threads (config.jobs) does not change any output byte.
EvalReport loso_run(const Dataset& ds, const ExperimentConfig& cfg);

std::string report_to_json(const EvalReport& rep);
EvalReport report_from_json(const std::string& text);

// Writes report.json, mae.csv, mape.csv, mae.txt, mape.txt, fig_all.svg and
// meta.json under out_dir.
void write_report_files(const EvalReport& rep, const std::string& out_dir);

// Recomputes every fold's standardizers, codebook and hyper-parameter winners
// from training-fold data only and compares with the logged values. Returns
// false (with a reason) on any mismatch.
bool verify_no_leakage(const Dataset& ds, const EvalReport& rep, std::string* why);

}  // namespace biteweight
