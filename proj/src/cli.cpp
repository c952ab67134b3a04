#include "biteweight/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "biteweight/baseline_amft.hpp"
#include "biteweight/evalharness.hpp"
#include "biteweight/rng.hpp"

namespace biteweight::cli {

namespace {

struct DatasetFeatures {
  std::vector<const Bout*> bouts;
  std::vector<const Recording*> recs;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Codebook codebook;
  bool has_codebook = false;
};

// whole-dataset feature table (no LOSO; standardizer/codebook fit on all data)
DatasetFeatures dataset_features(const Dataset& ds, FeatureSetId set,
                                 TrainingRegime regime, int k_max, uint64_t seed) {
  DatasetFeatures out;
  for (const auto& rec : ds.recordings)
    for (const auto& bout : rec.bouts) {
      if (regime != TrainingRegime::All &&
          static_cast<int>(regime) != static_cast<int>(bout.food))
        continue;
      out.bouts.push_back(&bout);
      out.recs.push_back(&rec);
    }
  if (out.bouts.empty()) throw std::runtime_error("no bouts match the regime");

  std::vector<std::vector<ChewDescriptor>> raw(out.bouts.size());
  Standardizer desc_std;
  if (feature_set_uses_audio(set)) {
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < out.bouts.size(); ++i) {
      for (const auto& chew : out.bouts[i]->chews) {
        raw[i].push_back(extract_chew_descriptor(*out.recs[i], chew));
        rows.emplace_back(raw[i].back().v.begin(), raw[i].back().v.end());
      }
    }
    desc_std = fit_standardizer_rows(rows);
    Eigen::MatrixXd all(static_cast<long>(rows.size()), kDescriptorDim);
    long r = 0;
    for (const auto& bd : raw)
      for (const auto& d : bd) {
        const ChewDescriptor z = apply_standardizer(desc_std, d);
        for (int c = 0; c < kDescriptorDim; ++c) all(r, c) = z[c];
        ++r;
      }
    out.codebook = select_k_aic(all, k_max, seed);
    out.has_codebook = true;
  }

  std::vector<std::vector<double>> f1_rows;
  const bool want_f1 =
      set == FeatureSetId::F1 || set == FeatureSetId::F4 || set == FeatureSetId::F5;
  Standardizer f1_std;
  if (want_f1) {
    for (const Bout* b : out.bouts) {
      const BoutFeatures f = nonaudio_features(*b);
      std::vector<double> row = {static_cast<double>(f.n_chews), f.chew_dur_mean,
                                 f.chew_dur_std, f.rate_mean, f.rate_std};
      if (regime == TrainingRegime::All)
        row.insert(row.end(), f.food_onehot.begin(), f.food_onehot.end());
      f1_rows.push_back(std::move(row));
    }
    if (f1_rows.size() >= 2) {
      f1_std = fit_standardizer_rows(f1_rows);
    } else {
      f1_std.mean.assign(f1_rows[0].size(), 0.0);
      f1_std.std.assign(f1_rows[0].size(), 1.0);
    }
  }

  for (size_t i = 0; i < out.bouts.size(); ++i) {
    std::vector<double> row;
    if (want_f1) row = apply_standardizer(f1_std, f1_rows[i]);
    if (set != FeatureSetId::F1) {
      Eigen::MatrixXd D(static_cast<long>(raw[i].size()), kDescriptorDim);
      for (size_t r = 0; r < raw[i].size(); ++r) {
        const ChewDescriptor z = apply_standardizer(desc_std, raw[i][r]);
        for (int c = 0; c < kDescriptorDim; ++c) D(static_cast<long>(r), c) = z[c];
      }
      const std::vector<double> enc =
          (set == FeatureSetId::F2 || set == FeatureSetId::F4)
              ? encode_bow(out.codebook, D)
              : encode_vlad(out.codebook, D);
      row.insert(row.end(), enc.begin(), enc.end());
    }
    if (i == 0) out.X.resize(static_cast<long>(out.bouts.size()), static_cast<long>(row.size()));
    for (size_t c = 0; c < row.size(); ++c)
      out.X(static_cast<long>(i), static_cast<long>(c)) = row[c];
  }
  out.y.resize(static_cast<long>(out.bouts.size()));
  for (size_t i = 0; i < out.bouts.size(); ++i) out.y(static_cast<long>(i)) = out.bouts[i]->weight_g;
  return out;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
  SynthConfig cfg = config_path.empty() ? SynthConfig::defaults()
                                        : load_synth_config(config_path);
  const Dataset ds = synth_generate(cfg);
  save_dataset(ds, out_dir);
  std::cout << "wrote " << ds.recordings.size() << " recordings, "
            << ds.total_bouts() << " bouts, " << ds.total_chews() << " chews to "
            << out_dir << "\n";
  return 0;
}

int cmd_validate(const std::string& data_dir) {
  Dataset ds;
  try {
    ds = load_dataset(data_dir);
  } catch (const std::exception& e) {
    std::cerr << "load error: " << e.what() << "\n";
    return 1;
  }
  const ValidationReport rep = validate(ds);
  for (const auto& issue : rep.issues) {
    std::cerr << (issue.recording_id.empty() ? std::string("dataset")
                                             : issue.recording_id);
    if (issue.bout_index >= 0) std::cerr << ": bout " << issue.bout_index;
    std::cerr << ": " << issue.message << "\n";
  }
  if (!rep.ok()) return 1;
  std::cout << "OK: " << ds.subjects.size() << " subjects, " << ds.total_bouts()
            << " bouts, " << ds.total_chews() << " chews\n";
  return 0;
}

int cmd_features(const std::string& data_dir, const std::string& set_name,
                 const std::string& regime_name_str, int k_max, uint64_t seed,
                 const std::string& out_csv) {
  const Dataset ds = load_dataset(data_dir);
  std::ofstream out(out_csv);
  if (!out) throw std::runtime_error(out_csv + ": cannot open for writing");
  out.precision(17);

  if (set_name == "descriptors") {
    out << "subject,bout_index,chew_index";
    for (int b = 0; b < kNumBands; ++b) out << ",band_log_energy_" << b;
    out << ",skewness,kurtosis,katz_fd,log_total_energy\n";
    for (const auto& rec : ds.recordings) {
      for (size_t bi = 0; bi < rec.bouts.size(); ++bi)
        for (size_t ci = 0; ci < rec.bouts[bi].chews.size(); ++ci) {
          const ChewDescriptor d =
              extract_chew_descriptor(rec, rec.bouts[bi].chews[ci]);
          out << rec.subject_id << "," << bi << "," << ci;
          for (int j = 0; j < kDescriptorDim; ++j) out << "," << d[j];
          out << "\n";
        }
    }
    std::cout << "wrote descriptor table to " << out_csv << "\n";
    return 0;
  }

  const FeatureSetId set = feature_set_from_name(set_name);
  const TrainingRegime regime = regime_from_name(regime_name_str);
  const DatasetFeatures feats = dataset_features(ds, set, regime, k_max, seed);
  const int k = feats.has_codebook ? feats.codebook.k : 0;
  out << "subject,bout_index,food,weight_g";
  for (const auto& name : feature_names(set, regime, k)) out << "," << name;
  out << "\n";
  for (size_t i = 0; i < feats.bouts.size(); ++i) {
    out << feats.bouts[i]->subject_id << "," << i << ","
        << food_name(feats.bouts[i]->food) << "," << feats.bouts[i]->weight_g;
    for (long c = 0; c < feats.X.cols(); ++c) out << "," << feats.X(static_cast<long>(i), c);
    out << "\n";
  }
  std::cout << "wrote " << feats.bouts.size() << " feature rows to " << out_csv << "\n";
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& estimator_name_str,
              const std::string& set_name, const std::string& regime_name_str,
              int k_max, uint64_t seed, const std::string& out_path) {
  const Dataset ds = load_dataset(data_dir);
  const FeatureSetId set = feature_set_from_name(set_name);
  const TrainingRegime regime = regime_from_name(regime_name_str);
  const EstimatorKind kind = estimator_from_name(estimator_name_str);

  const DatasetFeatures feats =
      dataset_features(ds, set, regime, k_max, derive_seed(seed, {0xcbu}));
  TrainSet t;
  t.X = feats.X;
  t.y = feats.y;
  for (const Bout* b : feats.bouts) t.groups.push_back(b->subject_id);

  EstimatorModel model;
  switch (kind) {
    case EstimatorKind::LR:
      model = lr_fit(t);
      break;
    case EstimatorKind::SVR: {
      SvrConfig c = SvrConfig::defaults();
      c.seed = seed;
      model = svr_fit(t, c);
      break;
    }
    case EstimatorKind::FFNN: {
      FfnnConfig c = FfnnConfig::defaults();
      c.seed = seed;
      model = ffnn_fit(t, c);
      break;
    }
    case EstimatorKind::GRNN: {
      GrnnConfig c = GrnnConfig::defaults();
      c.seed = seed;
      model = grnn_fit(t, c);
      break;
    }
  }
  model.seed = seed;
  std::ofstream out(out_path);
  out << model_to_json(model) << "\n";
  if (!out) throw std::runtime_error(out_path + ": write failed");
  std::cout << "wrote " << estimator_name(kind) << " model (" << t.X.rows()
            << " rows, " << t.X.cols() << " features) to " << out_path << "\n";
  return 0;
}

int cmd_loso(const std::string& data_dir, const std::string& config_path,
             const std::string& out_dir, int jobs, uint64_t seed, bool seed_set,
             int k_max, bool k_max_set) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = load_experiment_config(config_path);
  if (!data_dir.empty()) cfg.dataset_path = data_dir;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (jobs > 0) cfg.jobs = jobs;
  if (seed_set) cfg.master_seed = seed;
  if (k_max_set) cfg.k_max = k_max;
  if (cfg.dataset_path.empty())
    throw CLI::ValidationError("--data (or a dataset in the config) is required");
  if (cfg.out_dir.empty())
    throw CLI::ValidationError("--out (or out_dir in the config) is required");

  const Dataset ds = load_dataset(cfg.dataset_path);
  const ValidationReport vr = validate(ds);
  if (!vr.ok()) {
    for (const auto& issue : vr.issues)
      std::cerr << issue.recording_id << ": " << issue.message << "\n";
    return 1;
  }
  const EvalReport rep = loso_run(ds, cfg);
  write_report_files(rep, cfg.out_dir);
  std::cout << "wrote report files to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& in_path, const std::string& out_dir) {
  std::ifstream f(in_path);
  if (!f) throw std::runtime_error(in_path + ": cannot open report");
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  const EvalReport rep = report_from_json(text);
  write_report_files(rep, out_dir);
  std::cout << "re-rendered report files to " << out_dir << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"bite-weight estimation from chewing audio"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic corpus");
  std::string synth_config, synth_out;
  synth->add_option("--config", synth_config, "SynthConfig JSON (defaults when omitted)");
  synth->add_option("--out", synth_out, "output corpus directory")->required();

  // validate
  auto* val = app.add_subcommand("validate", "check a corpus directory against the data model");
  std::string val_data;
  val->add_option("--data", val_data, "corpus directory")->required();

  // features
  auto* feat = app.add_subcommand("features", "dump a feature table as CSV");
  std::string feat_data, feat_set = "F1", feat_regime = "All", feat_out;
  int feat_kmax = 32;
  uint64_t feat_seed = 1;
  feat->add_option("--data", feat_data, "corpus directory")->required();
  feat->add_option("--set", feat_set, "F1..F5 or 'descriptors'");
  feat->add_option("--regime", feat_regime, "Apple|Banana|Rice|Chips|All");
  feat->add_option("--kmax", feat_kmax, "codebook size cap for the AIC scan");
  feat->add_option("--seed", feat_seed, "codebook seed");
  feat->add_option("--out", feat_out, "output CSV path")->required();

  // train
  auto* train = app.add_subcommand("train", "train one estimator on the whole corpus");
  std::string train_data, train_est, train_set = "F1", train_regime = "All", train_out;
  int train_kmax = 32;
  uint64_t train_seed = 1;
  train->add_option("--data", train_data, "corpus directory")->required();
  train->add_option("--estimator", train_est, "LR|SVR|FFNN|GRNN")->required();
  train->add_option("--set", train_set, "F1..F5");
  train->add_option("--regime", train_regime, "Apple|Banana|Rice|Chips|All");
  train->add_option("--kmax", train_kmax, "codebook size cap for the AIC scan");
  train->add_option("--seed", train_seed, "training seed");
  train->add_option("--out", train_out, "output model JSON path")->required();

  // loso
  auto* loso = app.add_subcommand("loso", "run the LOSO experiment grid");
  std::string loso_data, loso_config, loso_out;
  int loso_jobs = 0, loso_kmax = 32;
  uint64_t loso_seed = 0;
  loso->add_option("--data", loso_data, "corpus directory");
  loso->add_option("--config", loso_config, "ExperimentConfig JSON");
  loso->add_option("--out", loso_out, "output directory for the 7 report files");
  loso->add_option("--jobs", loso_jobs, "worker threads (output independent of N)");
  auto* seed_opt = loso->add_option("--seed", loso_seed, "master seed (64-bit decimal)");
  auto* kmax_opt = loso->add_option("--kmax", loso_kmax, "codebook size cap");

  // report
  auto* report = app.add_subcommand("report", "re-render tables and plot from report.json");
  std::string report_in, report_out;
  report->add_option("--in", report_in, "report.json path")->required();
  report->add_option("--out", report_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_config, synth_out);
    if (val->parsed()) return cmd_validate(val_data);
    if (feat->parsed())
      return cmd_features(feat_data, feat_set, feat_regime, feat_kmax, feat_seed, feat_out);
    if (train->parsed())
      return cmd_train(train_data, train_est, train_set, train_regime, train_kmax,
                       train_seed, train_out);
    if (loso->parsed())
      return cmd_loso(loso_data, loso_config, loso_out, loso_jobs, loso_seed,
                      seed_opt->count() > 0, loso_kmax, kmax_opt->count() > 0);
    if (report->parsed()) return cmd_report(report_in, report_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace biteweight::cli
