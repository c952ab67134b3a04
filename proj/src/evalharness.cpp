#include "biteweight/evalharness.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "biteweight/baseline_amft.hpp"
#include "biteweight/render.hpp"
#include "biteweight/rng.hpp"
#include "json.hpp"

using ordered_json = nlohmann::ordered_json;

namespace biteweight {

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error(path + ": cannot open experiment config");
  ordered_json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": bad JSON: " + e.what());
  }
  ExperimentConfig cfg;
  if (j.contains("dataset")) cfg.dataset_path = j["dataset"];
  if (j.contains("sets")) {
    cfg.sets.clear();
    for (const auto& s : j["sets"]) cfg.sets.push_back(feature_set_from_name(s));
  }
  if (j.contains("estimators")) {
    cfg.estimators.clear();
    for (const auto& e : j["estimators"])
      cfg.estimators.push_back(estimator_from_name(e));
  }
  if (j.contains("regimes")) {
    cfg.regimes.clear();
    for (const auto& r : j["regimes"]) cfg.regimes.push_back(regime_from_name(r));
  }
  if (j.contains("include_baseline")) cfg.include_baseline = j["include_baseline"];
  if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<uint64_t>();
  if (j.contains("k_max")) cfg.k_max = j["k_max"];
  if (j.contains("jobs")) cfg.jobs = j["jobs"];
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"];
  if (cfg.sets.empty() || cfg.estimators.empty() || cfg.regimes.empty())
    throw std::runtime_error(path + ": empty sets/estimators/regimes selection");
  return cfg;
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
  ordered_json j;
  j["dataset"] = cfg.dataset_path;
  j["sets"] = ordered_json::array();
  for (FeatureSetId s : cfg.sets) j["sets"].push_back(feature_set_name(s));
  j["estimators"] = ordered_json::array();
  for (EstimatorKind e : cfg.estimators) j["estimators"].push_back(estimator_name(e));
  j["regimes"] = ordered_json::array();
  for (TrainingRegime r : cfg.regimes) j["regimes"].push_back(regime_name(r));
  j["include_baseline"] = cfg.include_baseline;
  j["master_seed"] = cfg.master_seed;
  j["k_max"] = cfg.k_max;
  j["jobs"] = cfg.jobs;
  j["out_dir"] = cfg.out_dir;
  std::ofstream f(path);
  f << j.dump(2) << "\n";
  if (!f) throw std::runtime_error(path + ": cannot write experiment config");
}

double mae(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("mae: empty pair list");
  double s = 0.0;
  for (const auto& [truth, pred] : pairs) s += std::fabs(pred - truth);
  return s / static_cast<double>(pairs.size());
}

double mape(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("mape: empty pair list");
  double s = 0.0;
  for (const auto& [truth, pred] : pairs) s += std::fabs(pred - truth) / truth;
  return 100.0 * s / static_cast<double>(pairs.size());
}

namespace {

constexpr double kMapeGuardGrams = 0.1;

struct BoutRef {
  int rec = 0;
  int bout = 0;
  std::string subject;
  Food food = Food::Apple;
  double weight = 0.0;
};

std::vector<BoutRef> flatten_bouts(const Dataset& ds) {
  std::vector<BoutRef> refs;
  for (size_t r = 0; r < ds.recordings.size(); ++r)
    for (size_t b = 0; b < ds.recordings[r].bouts.size(); ++b) {
      const Bout& bout = ds.recordings[r].bouts[b];
      refs.push_back({static_cast<int>(r), static_cast<int>(b), bout.subject_id,
                      bout.food, bout.weight_g});
    }
  return refs;
}

std::vector<std::vector<ChewDescriptor>> extract_descriptors(
    const Dataset& ds, const std::vector<BoutRef>& refs, int jobs) {
  std::vector<std::vector<ChewDescriptor>> out(refs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= refs.size()) return;
      const Recording& rec = ds.recordings[static_cast<size_t>(refs[i].rec)];
      const Bout& bout = rec.bouts[static_cast<size_t>(refs[i].bout)];
      out[i].reserve(bout.chews.size());
      for (const auto& chew : bout.chews)
        out[i].push_back(extract_chew_descriptor(rec, chew));
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

bool regime_matches(TrainingRegime r, Food f) {
  return r == TrainingRegime::All || static_cast<int>(r) == static_cast<int>(f);
}

std::vector<double> f1_raw(const Bout& b, TrainingRegime regime) {
  const BoutFeatures f = nonaudio_features(b);
  std::vector<double> row = {static_cast<double>(f.n_chews), f.chew_dur_mean,
                             f.chew_dur_std, f.rate_mean, f.rate_std};
  if (regime == TrainingRegime::All)
    row.insert(row.end(), f.food_onehot.begin(), f.food_onehot.end());
  return row;
}

struct CellPairKey {
  int est;  // canonical estimator index, -1 for the baseline
  int set;  // canonical set index, -1 for the baseline
  bool operator<(const CellPairKey& o) const {
    return est != o.est ? est < o.est : set < o.set;
  }
};

struct FoldOutput {
  FoldMeta meta;
  std::map<CellPairKey, FoldResult> cells;
  int mape_excluded = 0;
};

void finish_fold_result(FoldResult& fr, int* excluded) {
  if (fr.pairs.empty()) {
    if (!fr.skipped) {
      fr.skipped = true;
      if (fr.warning.empty()) fr.warning = "no test bouts";
    }
    return;
  }
  fr.fold_mae = mae(fr.pairs);
  std::vector<std::pair<double, double>> guarded;
  for (const auto& pr : fr.pairs) {
    if (pr.first < kMapeGuardGrams) {
      if (excluded != nullptr) ++(*excluded);
      continue;
    }
    guarded.push_back(pr);
  }
  fr.fold_mape = guarded.empty() ? 0.0 : mape(guarded);
}

uint64_t fold_codebook_seed(uint64_t master, int regime, int fold) {
  return derive_seed(master, {11u, static_cast<uint64_t>(regime),
                              static_cast<uint64_t>(fold)});
}

uint64_t cell_seed(uint64_t master, int regime, int fold, int est, int set) {
  return derive_seed(master, {13u, static_cast<uint64_t>(regime),
                              static_cast<uint64_t>(fold), static_cast<uint64_t>(est),
                              static_cast<uint64_t>(set)});
}

// fit with the per-estimator default protocol
EstimatorModel fit_estimator(EstimatorKind kind, const TrainSet& t, uint64_t seed) {
  switch (kind) {
    case EstimatorKind::LR:
      return lr_fit(t);
    case EstimatorKind::SVR: {
      SvrConfig c = SvrConfig::defaults();
      c.seed = seed;
      return svr_fit(t, c);
    }
    case EstimatorKind::FFNN: {
      FfnnConfig c = FfnnConfig::defaults();
      c.seed = seed;
      return ffnn_fit(t, c);
    }
    case EstimatorKind::GRNN: {
      GrnnConfig c = GrnnConfig::defaults();
      c.seed = seed;
      return grnn_fit(t, c);
    }
  }
  throw std::logic_error("fit_estimator: bad kind");
}

std::string hyper_summary(const EstimatorModel& m) {
  ordered_json j;
  switch (m.kind) {
    case EstimatorKind::LR:
      break;
    case EstimatorKind::SVR: {
      const auto& sm = std::get<SvrModel>(m.params);
      j["C"] = sm.C;
      j["gamma"] = sm.gamma;
      j["epsilon"] = sm.epsilon;
      break;
    }
    case EstimatorKind::FFNN: {
      const auto& fm = std::get<FfnnModel>(m.params);
      j["hidden_layers"] = fm.hidden_layers;
      j["neurons"] = fm.neurons;
      break;
    }
    case EstimatorKind::GRNN: {
      j["sigma"] = std::get<GrnnModel>(m.params).sigma;
      break;
    }
  }
  if (!std::isnan(m.validation_mae)) j["validation_mae"] = m.validation_mae;
  return j.dump();
}

// baseline LR with selection; small folds skip selection instead of failing
AmftModel fit_amft_guarded(const TrainSet& t) {
  if (t.X.rows() >= 10) return amft_fit(t, SelectionMethod::Spearman);
  AmftModel m;
  m.method = SelectionMethod::Spearman;
  m.selected.resize(kAmftDim);
  for (int j = 0; j < kAmftDim; ++j) m.selected[static_cast<size_t>(j)] = j;
  m.lr = lr_fit(t);
  return m;
}

FoldOutput run_fold(const Dataset& ds, const ExperimentConfig& cfg,
                    const std::vector<BoutRef>& refs,
                    const std::vector<std::vector<ChewDescriptor>>& raw_desc,
                    TrainingRegime regime, int fold_idx, const std::string& subject) {
  FoldOutput out;
  out.meta.regime = regime_name(regime);
  out.meta.held_out_subject = subject;

  std::vector<int> train_ix, test_ix;
  for (size_t i = 0; i < refs.size(); ++i) {
    if (!regime_matches(regime, refs[i].food)) continue;
    (refs[i].subject == subject ? test_ix : train_ix).push_back(static_cast<int>(i));
  }

  auto mark_all_skipped = [&](const std::string& why) {
    out.meta.skipped = true;
    out.meta.warning = why;
    for (EstimatorKind est : cfg.estimators)
      for (FeatureSetId set : cfg.sets) {
        FoldResult fr;
        fr.held_out_subject = subject;
        fr.skipped = true;
        fr.warning = why;
        out.cells[{static_cast<int>(est), static_cast<int>(set)}] = fr;
      }
    if (cfg.include_baseline) {
      FoldResult fr;
      fr.held_out_subject = subject;
      fr.skipped = true;
      fr.warning = why;
      out.cells[{-1, -1}] = fr;
    }
  };

  if (train_ix.empty()) {
    mark_all_skipped("regime has no training bouts for this fold");
    return out;
  }

  const bool needs_audio = [&] {
    for (FeatureSetId s : cfg.sets)
      if (feature_set_uses_audio(s)) return true;
    return false;
  }();

  // fold-level descriptor standardizer + codebook (training portion only)
  Standardizer desc_std;
  Codebook cb;
  std::vector<Eigen::MatrixXd> bout_desc(refs.size());  // standardized, lazily sized
  if (needs_audio) {
    std::vector<std::vector<double>> rows;
    for (int i : train_ix)
      for (const auto& d : raw_desc[static_cast<size_t>(i)])
        rows.emplace_back(d.v.begin(), d.v.end());
    if (rows.size() < 2) {
      mark_all_skipped("not enough chews to fit the codebook");
      return out;
    }
    desc_std = fit_standardizer_rows(rows);
    out.meta.desc_mean = desc_std.mean;
    out.meta.desc_std = desc_std.std;

    Eigen::MatrixXd train_mat(static_cast<long>(rows.size()), kDescriptorDim);
    {
      long r = 0;
      for (int i : train_ix)
        for (const auto& d : raw_desc[static_cast<size_t>(i)]) {
          const ChewDescriptor z = apply_standardizer(desc_std, d);
          for (int c = 0; c < kDescriptorDim; ++c) train_mat(r, c) = z[c];
          ++r;
        }
    }
    cb = select_k_aic(train_mat, cfg.k_max,
                      fold_codebook_seed(cfg.master_seed, static_cast<int>(regime), fold_idx));
    out.meta.codebook_k = cb.k;
    out.meta.aic_curve = cb.aic_curve;

    auto standardize_bout = [&](int i) {
      const auto& src = raw_desc[static_cast<size_t>(i)];
      Eigen::MatrixXd m(static_cast<long>(src.size()), kDescriptorDim);
      for (size_t r = 0; r < src.size(); ++r) {
        const ChewDescriptor z = apply_standardizer(desc_std, src[r]);
        for (int c = 0; c < kDescriptorDim; ++c) m(static_cast<long>(r), c) = z[c];
      }
      return m;
    };
    for (int i : train_ix) bout_desc[static_cast<size_t>(i)] = standardize_bout(i);
    for (int i : test_ix) bout_desc[static_cast<size_t>(i)] = standardize_bout(i);
  }

  // non-audio block standardizer (training portion only)
  Standardizer f1_std;
  {
    std::vector<std::vector<double>> rows;
    rows.reserve(train_ix.size());
    for (int i : train_ix)
      rows.push_back(f1_raw(
          ds.recordings[static_cast<size_t>(refs[static_cast<size_t>(i)].rec)]
              .bouts[static_cast<size_t>(refs[static_cast<size_t>(i)].bout)],
          regime));
    if (rows.size() >= 2) {
      f1_std = fit_standardizer_rows(rows);
    } else {
      f1_std.mean.assign(rows[0].size(), 0.0);
      f1_std.std.assign(rows[0].size(), 1.0);
    }
    out.meta.f1_mean = f1_std.mean;
    out.meta.f1_std = f1_std.std;
  }

  // per-bout encodings, shared across feature sets
  std::vector<std::vector<double>> bow_cache(refs.size()), vlad_cache(refs.size());
  auto feature_row = [&](FeatureSetId set, int i) {
    const Bout& bout = ds.recordings[static_cast<size_t>(refs[static_cast<size_t>(i)].rec)]
                           .bouts[static_cast<size_t>(refs[static_cast<size_t>(i)].bout)];
    std::vector<double> row;
    if (set == FeatureSetId::F1 || set == FeatureSetId::F4 || set == FeatureSetId::F5)
      row = apply_standardizer(f1_std, f1_raw(bout, regime));
    if (set == FeatureSetId::F2 || set == FeatureSetId::F4) {
      auto& enc = bow_cache[static_cast<size_t>(i)];
      if (enc.empty()) enc = encode_bow(cb, bout_desc[static_cast<size_t>(i)]);
      row.insert(row.end(), enc.begin(), enc.end());
    }
    if (set == FeatureSetId::F3 || set == FeatureSetId::F5) {
      auto& enc = vlad_cache[static_cast<size_t>(i)];
      if (enc.empty()) enc = encode_vlad(cb, bout_desc[static_cast<size_t>(i)]);
      row.insert(row.end(), enc.begin(), enc.end());
    }
    return row;
  };

  auto build = [&](FeatureSetId set, const std::vector<int>& ix, TrainSet& t) {
    if (ix.empty()) return;
    const std::vector<double> first = feature_row(set, ix[0]);
    t.X.resize(static_cast<long>(ix.size()), static_cast<long>(first.size()));
    t.y.resize(static_cast<long>(ix.size()));
    t.groups.clear();
    for (size_t r = 0; r < ix.size(); ++r) {
      const std::vector<double> row = r == 0 ? first : feature_row(set, ix[r]);
      for (size_t c = 0; c < row.size(); ++c)
        t.X(static_cast<long>(r), static_cast<long>(c)) = row[c];
      t.y(static_cast<long>(r)) = refs[static_cast<size_t>(ix[r])].weight;
      t.groups.push_back(refs[static_cast<size_t>(ix[r])].subject);
    }
  };

  for (FeatureSetId set : cfg.sets) {
    TrainSet train, test;
    build(set, train_ix, train);
    build(set, test_ix, test);
    for (EstimatorKind est : cfg.estimators) {
      FoldResult fr;
      fr.held_out_subject = subject;
      const uint64_t seed = cell_seed(cfg.master_seed, static_cast<int>(regime),
                                      fold_idx, static_cast<int>(est),
                                      static_cast<int>(set));
      try {
        const EstimatorModel model = fit_estimator(est, train, seed);
        out.meta.hypers.push_back(
            {estimator_name(est), feature_set_name(set), hyper_summary(model)});
        for (size_t r = 0; r < test_ix.size(); ++r)
          fr.pairs.emplace_back(test.y(static_cast<long>(r)),
                                predict(model, test.X.row(static_cast<long>(r)).transpose()));
      } catch (const std::exception& e) {
        fr.skipped = true;
        fr.warning = e.what();
      }
      finish_fold_result(fr, &out.mape_excluded);
      out.cells[{static_cast<int>(est), static_cast<int>(set)}] = std::move(fr);
    }
  }

  if (cfg.include_baseline) {
    FoldResult fr;
    fr.held_out_subject = subject;
    auto amft_row = [&](int i) {
      const auto& rec = ds.recordings[static_cast<size_t>(refs[static_cast<size_t>(i)].rec)];
      const auto& bout = rec.bouts[static_cast<size_t>(refs[static_cast<size_t>(i)].bout)];
      return amft_features(bout, rec);
    };
    auto build_amft = [&](const std::vector<int>& ix) {
      TrainSet t;
      t.X.resize(static_cast<long>(ix.size()), kAmftDim);
      t.y.resize(static_cast<long>(ix.size()));
      for (size_t r = 0; r < ix.size(); ++r) {
        const auto row = amft_row(ix[r]);
        for (int c = 0; c < kAmftDim; ++c) t.X(static_cast<long>(r), c) = row[static_cast<size_t>(c)];
        t.y(static_cast<long>(r)) = refs[static_cast<size_t>(ix[r])].weight;
      }
      return t;
    };

    ordered_json sel_meta = ordered_json::object();
    if (regime == TrainingRegime::All) {
      // per-food models, dispatched by the test bout's food; foods without
      // training bouts fall back to a pooled model
      const TrainSet pooled = build_amft(train_ix);
      AmftModel fallback = fit_amft_guarded(pooled);
      std::map<Food, AmftModel> per_food;
      for (Food f : kAllFoods) {
        std::vector<int> ix;
        for (int i : train_ix)
          if (refs[static_cast<size_t>(i)].food == f) ix.push_back(i);
        if (!ix.empty()) per_food[f] = fit_amft_guarded(build_amft(ix));
        sel_meta[food_name(f)] =
            !ix.empty() ? ordered_json(per_food[f].selected) : ordered_json("pooled");
      }
      for (int i : test_ix) {
        const auto row = amft_row(i);
        Eigen::VectorXd x(kAmftDim);
        for (int c = 0; c < kAmftDim; ++c) x(c) = row[static_cast<size_t>(c)];
        const Food f = refs[static_cast<size_t>(i)].food;
        const AmftModel& m = per_food.count(f) ? per_food[f] : fallback;
        fr.pairs.emplace_back(refs[static_cast<size_t>(i)].weight, amft_predict(m, x));
      }
    } else {
      const AmftModel m = fit_amft_guarded(build_amft(train_ix));
      sel_meta["selected"] = m.selected;
      for (int i : test_ix) {
        const auto row = amft_row(i);
        Eigen::VectorXd x(kAmftDim);
        for (int c = 0; c < kAmftDim; ++c) x(c) = row[static_cast<size_t>(c)];
        fr.pairs.emplace_back(refs[static_cast<size_t>(i)].weight, amft_predict(m, x));
      }
    }
    out.meta.hypers.push_back({"Amft", "-", sel_meta.dump()});
    finish_fold_result(fr, &out.mape_excluded);
    out.cells[{-1, -1}] = std::move(fr);
  }

  return out;
}

void pool_cell(CellResult& cell) {
  std::vector<double> abs_err, ape;
  std::vector<double> fm, fp;
  for (const auto& fr : cell.folds) {
    if (fr.skipped || fr.pairs.empty()) continue;
    for (const auto& [truth, pred] : fr.pairs) {
      abs_err.push_back(std::fabs(pred - truth));
      if (truth >= kMapeGuardGrams)
        ape.push_back(100.0 * std::fabs(pred - truth) / truth);
    }
  }
  auto mean_sample_std = [](const std::vector<double>& v) {
    if (v.empty()) return std::pair<double, double>(0.0, 0.0);
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2) return std::pair<double, double>(m, 0.0);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::pair<double, double>(m, std::sqrt(s / (static_cast<double>(v.size()) - 1.0)));
  };
  std::tie(cell.mae_mean, cell.mae_std) = mean_sample_std(abs_err);
  std::tie(cell.mape_mean, cell.mape_std) = mean_sample_std(ape);
}

}  // namespace

EvalReport loso_run(const Dataset& ds, const ExperimentConfig& cfg) {
  if (ds.subjects.size() < 2)
    throw std::invalid_argument("loso_run: need at least 2 subjects");
  if (cfg.sets.empty() || cfg.estimators.empty() || cfg.regimes.empty())
    throw std::invalid_argument("loso_run: empty selection");

  const std::vector<BoutRef> refs = flatten_bouts(ds);
  const std::vector<std::string> subjects(ds.subjects.begin(), ds.subjects.end());

  const bool needs_audio = [&] {
    for (FeatureSetId s : cfg.sets)
      if (feature_set_uses_audio(s)) return true;
    return false;
  }();
  std::vector<std::vector<ChewDescriptor>> raw_desc;
  if (needs_audio)
    raw_desc = extract_descriptors(ds, refs, cfg.jobs);
  else
    raw_desc.resize(refs.size());

  struct Task {
    TrainingRegime regime;
    int fold;
  };
  std::vector<Task> tasks;
  for (TrainingRegime r : cfg.regimes)
    for (size_t f = 0; f < subjects.size(); ++f)
      tasks.push_back({r, static_cast<int>(f)});

  std::vector<FoldOutput> outputs(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      outputs[i] = run_fold(ds, cfg, refs, raw_desc, tasks[i].regime, tasks[i].fold,
                            subjects[static_cast<size_t>(tasks[i].fold)]);
    }
  };
  if (cfg.jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < cfg.jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  EvalReport rep;
  rep.config = cfg;
  rep.config.jobs = 1;      // thread count must not change report bytes
  rep.config.out_dir = "";  // ditto for the output location

  auto fold_outputs_for = [&](TrainingRegime r) {
    std::vector<const FoldOutput*> v;
    for (size_t t = 0; t < tasks.size(); ++t)
      if (tasks[t].regime == r) v.push_back(&outputs[t]);
    return v;
  };

  for (EstimatorKind est : cfg.estimators)
    for (FeatureSetId set : cfg.sets)
      for (TrainingRegime regime : cfg.regimes) {
        CellResult cell;
        cell.estimator = estimator_name(est);
        cell.set = feature_set_name(set);
        cell.regime = regime_name(regime);
        for (const FoldOutput* fo : fold_outputs_for(regime))
          cell.folds.push_back(
              fo->cells.at({static_cast<int>(est), static_cast<int>(set)}));
        pool_cell(cell);
        rep.cells.push_back(std::move(cell));
      }
  if (cfg.include_baseline)
    for (TrainingRegime regime : cfg.regimes) {
      CellResult cell;
      cell.estimator = "Amft";
      cell.set = "-";
      cell.regime = regime_name(regime);
      for (const FoldOutput* fo : fold_outputs_for(regime))
        cell.folds.push_back(fo->cells.at({-1, -1}));
      pool_cell(cell);
      rep.cells.push_back(std::move(cell));
    }

  for (const FoldOutput& fo : outputs) {
    rep.fold_meta.push_back(fo.meta);
    rep.mape_excluded += fo.mape_excluded;
  }
  return rep;
}

// --- report (de)serialization ------------------------------------------------

namespace {

ordered_json config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["dataset"] = cfg.dataset_path;
  j["sets"] = ordered_json::array();
  for (FeatureSetId s : cfg.sets) j["sets"].push_back(feature_set_name(s));
  j["estimators"] = ordered_json::array();
  for (EstimatorKind e : cfg.estimators) j["estimators"].push_back(estimator_name(e));
  j["regimes"] = ordered_json::array();
  for (TrainingRegime r : cfg.regimes) j["regimes"].push_back(regime_name(r));
  j["include_baseline"] = cfg.include_baseline;
  j["master_seed"] = cfg.master_seed;
  j["k_max"] = cfg.k_max;
  return j;
}

ExperimentConfig config_from_json(const ordered_json& j) {
  ExperimentConfig cfg;
  if (j.contains("dataset")) cfg.dataset_path = j["dataset"];
  if (j.contains("sets")) {
    cfg.sets.clear();
    for (const auto& s : j["sets"]) cfg.sets.push_back(feature_set_from_name(s));
  }
  if (j.contains("estimators")) {
    cfg.estimators.clear();
    for (const auto& e : j["estimators"])
      cfg.estimators.push_back(estimator_from_name(e));
  }
  if (j.contains("regimes")) {
    cfg.regimes.clear();
    for (const auto& r : j["regimes"]) cfg.regimes.push_back(regime_from_name(r));
  }
  if (j.contains("include_baseline")) cfg.include_baseline = j["include_baseline"];
  if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<uint64_t>();
  if (j.contains("k_max")) cfg.k_max = j["k_max"];
  if (j.contains("jobs")) cfg.jobs = j["jobs"];
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"];
  return cfg;
}

ordered_json fold_to_json(const FoldResult& fr) {
  ordered_json j;
  j["held_out_subject"] = fr.held_out_subject;
  j["skipped"] = fr.skipped;
  if (!fr.warning.empty()) j["warning"] = fr.warning;
  j["pairs"] = ordered_json::array();
  for (const auto& [truth, pred] : fr.pairs) j["pairs"].push_back({truth, pred});
  j["mae"] = fr.fold_mae;
  j["mape"] = fr.fold_mape;
  return j;
}

FoldResult fold_from_json(const ordered_json& j) {
  FoldResult fr;
  fr.held_out_subject = j.at("held_out_subject");
  fr.skipped = j.at("skipped");
  if (j.contains("warning")) fr.warning = j["warning"];
  for (const auto& p : j.at("pairs"))
    fr.pairs.emplace_back(p[0].get<double>(), p[1].get<double>());
  fr.fold_mae = j.at("mae");
  fr.fold_mape = j.at("mape");
  return fr;
}

}  // namespace

std::string report_to_json(const EvalReport& rep) {
  ordered_json j;
  j["config"] = config_to_json(rep.config);
  j["standardization"] = "training-fold-only";
  j["cells"] = ordered_json::array();
  for (const auto& cell : rep.cells) {
    ordered_json c;
    c["estimator"] = cell.estimator;
    c["set"] = cell.set;
    c["regime"] = cell.regime;
    c["mae_mean"] = cell.mae_mean;
    c["mae_std"] = cell.mae_std;
    c["mape_mean"] = cell.mape_mean;
    c["mape_std"] = cell.mape_std;
    c["folds"] = ordered_json::array();
    for (const auto& fr : cell.folds) c["folds"].push_back(fold_to_json(fr));
    j["cells"].push_back(std::move(c));
  }
  j["mape_excluded"] = rep.mape_excluded;
  return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  EvalReport rep;
  rep.config = config_from_json(j.at("config"));
  for (const auto& c : j.at("cells")) {
    CellResult cell;
    cell.estimator = c.at("estimator");
    cell.set = c.at("set");
    cell.regime = c.at("regime");
    cell.mae_mean = c.at("mae_mean");
    cell.mae_std = c.at("mae_std");
    cell.mape_mean = c.at("mape_mean");
    cell.mape_std = c.at("mape_std");
    for (const auto& f : c.at("folds")) cell.folds.push_back(fold_from_json(f));
    rep.cells.push_back(std::move(cell));
  }
  rep.mape_excluded = j.at("mape_excluded");
  return rep;
}

namespace {

std::string meta_to_json(const EvalReport& rep) {
  ordered_json j;
  j["master_seed"] = rep.config.master_seed;
  j["mape_excluded"] = rep.mape_excluded;
  j["folds"] = ordered_json::array();
  for (const auto& m : rep.fold_meta) {
    ordered_json f;
    f["regime"] = m.regime;
    f["held_out_subject"] = m.held_out_subject;
    f["skipped"] = m.skipped;
    if (!m.warning.empty()) f["warning"] = m.warning;
    f["codebook_k"] = m.codebook_k;
    f["aic_curve"] = m.aic_curve;
    f["descriptor_standardizer"] = {{"mean", m.desc_mean}, {"std", m.desc_std}};
    f["nonaudio_standardizer"] = {{"mean", m.f1_mean}, {"std", m.f1_std}};
    f["hyper_parameters"] = ordered_json::array();
    for (const auto& h : m.hypers) {
      ordered_json hj;
      hj["estimator"] = h.estimator;
      hj["set"] = h.set;
      hj["chosen"] = ordered_json::parse(h.summary);
      f["hyper_parameters"].push_back(std::move(hj));
    }
    j["folds"].push_back(std::move(f));
  }
  return j.dump(2);
}

}  // namespace

void write_report_files(const EvalReport& rep, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&out_dir](const std::string& name, const std::string& text) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error(path + ": write failed");
  };
  write("report.json", report_to_json(rep));
  write("mae.csv", render_metric_csv(rep, Metric::MAE));
  write("mape.csv", render_metric_csv(rep, Metric::MAPE));
  write("mae.txt", render_metric_text(rep, Metric::MAE));
  write("mape.txt", render_metric_text(rep, Metric::MAPE));
  write("fig_all.svg", render_plot_svg(rep));
  write("meta.json", meta_to_json(rep));
}

bool verify_no_leakage(const Dataset& ds, const EvalReport& rep, std::string* why) {
  auto fail = [&why](const std::string& msg) {
    if (why != nullptr) *why = msg;
    return false;
  };

  const ExperimentConfig& cfg = rep.config;
  const std::vector<BoutRef> refs = flatten_bouts(ds);
  const std::vector<std::string> subjects(ds.subjects.begin(), ds.subjects.end());

  const bool needs_audio = [&] {
    for (FeatureSetId s : cfg.sets)
      if (feature_set_uses_audio(s)) return true;
    return false;
  }();
  std::vector<std::vector<ChewDescriptor>> raw_desc(refs.size());
  if (needs_audio) raw_desc = extract_descriptors(ds, refs, 1);

  size_t mi = 0;
  for (TrainingRegime regime : cfg.regimes)
    for (size_t f = 0; f < subjects.size(); ++f, ++mi) {
      if (mi >= rep.fold_meta.size()) return fail("fold metadata shorter than the grid");
      const FoldMeta& logged = rep.fold_meta[mi];
      const FoldOutput fresh = run_fold(ds, cfg, refs, raw_desc, regime,
                                        static_cast<int>(f), subjects[f]);
      const FoldMeta& rm = fresh.meta;
      const std::string ctx =
          "fold (" + logged.regime + ", " + logged.held_out_subject + "): ";
      if (rm.regime != logged.regime || rm.held_out_subject != logged.held_out_subject)
        return fail(ctx + "fold identity mismatch");
      if (rm.skipped != logged.skipped) return fail(ctx + "skip state mismatch");
      if (rm.desc_mean != logged.desc_mean || rm.desc_std != logged.desc_std)
        return fail(ctx + "descriptor standardizer not reproducible from training data");
      if (rm.f1_mean != logged.f1_mean || rm.f1_std != logged.f1_std)
        return fail(ctx + "non-audio standardizer not reproducible from training data");
      if (rm.codebook_k != logged.codebook_k || rm.aic_curve != logged.aic_curve)
        return fail(ctx + "codebook selection not reproducible from training data");
      if (rm.hypers.size() != logged.hypers.size())
        return fail(ctx + "hyper-parameter log size mismatch");
      for (size_t h = 0; h < rm.hypers.size(); ++h)
        if (rm.hypers[h].summary != logged.hypers[h].summary)
          return fail(ctx + "hyper-parameters for " + rm.hypers[h].estimator + "/" +
                      rm.hypers[h].set + " not reproducible from training data");
    }
  if (mi != rep.fold_meta.size()) return fail("fold metadata longer than the grid");
  return true;
}

}  // namespace biteweight
