#include <filesystem>
#include <fstream>

#include "biteweight/cli.hpp"
#include "biteweight/dataset.hpp"
#include "biteweight/estimators.hpp"
#include "biteweight/evalharness.hpp"
#include "doctest.h"

using namespace biteweight;
namespace fs = std::filesystem;

namespace {

int run_cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv = {"biteweight"};
  argv.insert(argv.end(), args.begin(), args.end());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

void write_tiny_synth_config(const fs::path& p, uint64_t seed) {
  SynthConfig cfg = SynthConfig::defaults();
  cfg.n_subjects = 2;
  cfg.bouts_per_subject_per_food = 2;
  cfg.seed = seed;
  for (auto& [food, fp] : cfg.foods) {
    fp.chew_dur_mean_s = 0.12;
    fp.chew_dur_std_s = 0.02;
  }
  save_synth_config(cfg, p.string());
}

}  // namespace

TEST_CASE("synth -> validate -> loso -> report round trip through the CLI") {
  TempDir dir("bw_cli_e2e");
  const fs::path cfg_path = dir.path / "synth.json";
  const fs::path data = dir.path / "corpus";
  write_tiny_synth_config(cfg_path, 77);

  CHECK(run_cli({"synth", "--config", cfg_path.c_str(), "--out", data.c_str()}) == 0);
  CHECK(run_cli({"validate", "--data", data.c_str()}) == 0);

  // experiment config: cheap selection, baseline on
  ExperimentConfig ecfg;
  ecfg.sets = {FeatureSetId::F1, FeatureSetId::F4};
  ecfg.estimators = {EstimatorKind::LR, EstimatorKind::GRNN};
  ecfg.regimes = {TrainingRegime::All};
  ecfg.include_baseline = true;
  ecfg.master_seed = 5;
  ecfg.k_max = 2;
  const fs::path exp_path = dir.path / "exp.json";
  save_experiment_config(ecfg, exp_path.string());

  const fs::path out1 = dir.path / "out1";
  CHECK(run_cli({"loso", "--data", data.c_str(), "--config", exp_path.c_str(),
                 "--out", out1.c_str()}) == 0);
  for (const char* name : {"report.json", "mae.csv", "mape.csv", "mae.txt",
                           "mape.txt", "fig_all.svg", "meta.json"})
    CHECK(fs::exists(out1 / name));

  // identical seed and inputs give identical bytes, also via --jobs
  const fs::path out2 = dir.path / "out2";
  CHECK(run_cli({"loso", "--data", data.c_str(), "--config", exp_path.c_str(),
                 "--out", out2.c_str(), "--jobs", "3"}) == 0);
  for (const char* name : {"report.json", "mae.csv", "mape.csv", "fig_all.svg"})
    CHECK(slurp(out1 / name) == slurp(out2 / name));

  // report re-rendering reproduces every derived file byte-for-byte
  const fs::path out3 = dir.path / "out3";
  CHECK(run_cli({"report", "--in", (out1 / "report.json").c_str(), "--out",
                 out3.c_str()}) == 0);
  for (const char* name : {"report.json", "mae.csv", "mape.csv", "mae.txt",
                           "mape.txt", "fig_all.svg"})
    CHECK(slurp(out1 / name) == slurp(out3 / name));
}

TEST_CASE("synth is idempotent: same config, identical directory trees") {
  TempDir dir("bw_cli_synth2");
  const fs::path cfg_path = dir.path / "synth.json";
  write_tiny_synth_config(cfg_path, 123);
  const fs::path a = dir.path / "a";
  const fs::path b = dir.path / "b";
  CHECK(run_cli({"synth", "--config", cfg_path.c_str(), "--out", a.c_str()}) == 0);
  CHECK(run_cli({"synth", "--config", cfg_path.c_str(), "--out", b.c_str()}) == 0);

  std::vector<fs::path> files_a;
  for (const auto& e : fs::directory_iterator(a)) files_a.push_back(e.path());
  std::sort(files_a.begin(), files_a.end());
  CHECK(files_a.size() == 4);  // 2 recordings x (wav + json)
  for (const auto& fa : files_a) {
    const fs::path fb = b / fa.filename();
    REQUIRE(fs::exists(fb));
    CHECK(slurp(fa) == slurp(fb));
  }
}

TEST_CASE("train writes a model whose JSON round-trips") {
  TempDir dir("bw_cli_train");
  const fs::path cfg_path = dir.path / "synth.json";
  const fs::path data = dir.path / "corpus";
  write_tiny_synth_config(cfg_path, 9);
  REQUIRE(run_cli({"synth", "--config", cfg_path.c_str(), "--out", data.c_str()}) == 0);

  const fs::path model_path = dir.path / "model.json";
  CHECK(run_cli({"train", "--data", data.c_str(), "--estimator", "GRNN", "--set",
                 "F4", "--regime", "Apple", "--seed", "11", "--kmax", "2", "--out",
                 model_path.c_str()}) == 0);
  const std::string text = slurp(model_path);
  const EstimatorModel m = model_from_json(text);
  CHECK(m.kind == EstimatorKind::GRNN);
  CHECK(model_to_json(m) + "\n" == text);
}

TEST_CASE("features dumps descriptor and feature tables") {
  TempDir dir("bw_cli_feat");
  const fs::path cfg_path = dir.path / "synth.json";
  const fs::path data = dir.path / "corpus";
  write_tiny_synth_config(cfg_path, 31);
  REQUIRE(run_cli({"synth", "--config", cfg_path.c_str(), "--out", data.c_str()}) == 0);
  const Dataset ds = load_dataset(data.string());

  const fs::path desc_csv = dir.path / "desc.csv";
  CHECK(run_cli({"features", "--data", data.c_str(), "--set", "descriptors",
                 "--out", desc_csv.c_str()}) == 0);
  std::ifstream f(desc_csv);
  std::string line;
  size_t rows = 0;
  std::getline(f, line);
  CHECK(line.find("katz_fd") != std::string::npos);
  while (std::getline(f, line)) ++rows;
  CHECK(rows == ds.total_chews());

  const fs::path feat_csv = dir.path / "f4.csv";
  CHECK(run_cli({"features", "--data", data.c_str(), "--set", "F4", "--regime",
                 "All", "--kmax", "2", "--seed", "3", "--out",
                 feat_csv.c_str()}) == 0);
  std::ifstream g(feat_csv);
  rows = 0;
  std::getline(g, line);
  CHECK(line.substr(0, 31) == "subject,bout_index,food,weight_");
  while (std::getline(g, line)) ++rows;
  CHECK(rows == ds.total_bouts());
}

TEST_CASE("exit codes: 2 for usage errors, 1 for bad inputs") {
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({"loso", "--bogus-flag", "1"}) == 2);
  CHECK(run_cli({"validate", "--data", "/nonexistent/path/xyz"}) == 1);

  // a one-subject corpus fails validation (LOSO needs two)
  TempDir dir("bw_cli_exit1");
  SynthConfig cfg = SynthConfig::defaults();
  cfg.n_subjects = 1;
  cfg.bouts_per_subject_per_food = 1;
  for (auto& [food, fp] : cfg.foods) fp.chew_dur_mean_s = 0.1;
  save_dataset(synth_generate(cfg), (dir.path / "one").string());
  CHECK(run_cli({"validate", "--data", (dir.path / "one").c_str()}) == 1);
}
