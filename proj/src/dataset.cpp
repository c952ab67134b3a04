#include "biteweight/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "biteweight/wav.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace biteweight {

const char* food_name(Food f) {
  switch (f) {
    case Food::Apple: return "apple";
    case Food::Banana: return "banana";
    case Food::Rice: return "rice";
    case Food::Chips: return "chips";
  }
  return "?";
}

Food food_from_name(const std::string& name) {
  for (Food f : kAllFoods)
    if (name == food_name(f)) return f;
  throw std::runtime_error("unknown food type: '" + name + "'");
}

namespace {

void check_bout(const std::string& where, int bout_idx, const Bout& b,
                double duration_s) {
  const std::string ctx = where + ": bout " + std::to_string(bout_idx) + ": ";
  if (!(b.weight_g > 0.0))
    throw std::runtime_error(ctx + "non-positive weight");
  if (b.chews.empty()) throw std::runtime_error(ctx + "bout has no chews");
  for (size_t i = 0; i < b.chews.size(); ++i) {
    const auto& c = b.chews[i];
    if (!(c.stop_s > c.start_s))
      throw std::runtime_error(ctx + "chew " + std::to_string(i) +
                               ": chew interval inverted");
    if (c.start_s < 0.0 || c.stop_s > duration_s)
      throw std::runtime_error(ctx + "chew " + std::to_string(i) +
                               ": annotation beyond audio duration");
    if (i > 0 && b.chews[i].start_s < b.chews[i - 1].stop_s)
      throw std::runtime_error(ctx + "chew " + std::to_string(i) +
                               ": overlapping or unsorted chews");
  }
}

}  // namespace

Dataset load_dataset(const std::string& root_path) {
  if (!fs::is_directory(root_path))
    throw std::runtime_error(root_path + ": not a directory");

  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(root_path)) {
    if (e.path().extension() == ".wav") stems.push_back(e.path().stem().string());
  }
  std::sort(stems.begin(), stems.end());
  if (stems.empty())
    throw std::runtime_error(root_path + ": no .wav recordings found");

  Dataset ds;
  for (const auto& stem : stems) {
    const std::string wav_path = (fs::path(root_path) / (stem + ".wav")).string();
    const std::string ann_path = (fs::path(root_path) / (stem + ".json")).string();

    WavData w = read_wav(wav_path);
    if (w.sample_rate_hz != kSampleRateHz)
      throw std::runtime_error(wav_path + ": expected 44100 Hz, got " +
                               std::to_string(w.sample_rate_hz));

    std::ifstream jf(ann_path);
    if (!jf)
      throw std::runtime_error(ann_path + ": missing annotation file");
    ordered_json j;
    try {
      jf >> j;
    } catch (const std::exception& e) {
      throw std::runtime_error(ann_path + ": bad JSON: " + e.what());
    }

    Recording rec;
    rec.id = stem;
    rec.subject_id = j.at("subject_id").get<std::string>();
    rec.samples = std::move(w.samples);

    int bi = 0;
    for (const auto& jb : j.at("bouts")) {
      Bout b;
      b.subject_id = rec.subject_id;
      b.food = food_from_name(jb.at("food").get<std::string>());
      b.weight_g = jb.at("weight_g").get<double>();
      for (const auto& jc : jb.at("chews"))
        b.chews.push_back({jc.at(0).get<double>(), jc.at(1).get<double>()});
      check_bout(ann_path, bi, b, rec.duration_s());
      rec.bouts.push_back(std::move(b));
      ++bi;
    }
    ds.subjects.insert(rec.subject_id);
    ds.recordings.push_back(std::move(rec));
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& root_path) {
  fs::create_directories(root_path);
  for (const auto& rec : ds.recordings) {
    write_wav((fs::path(root_path) / (rec.id + ".wav")).string(), rec.samples,
              rec.sample_rate_hz);
    ordered_json j;
    j["subject_id"] = rec.subject_id;
    j["bouts"] = ordered_json::array();
    for (const auto& b : rec.bouts) {
      ordered_json jb;
      jb["food"] = food_name(b.food);
      jb["weight_g"] = b.weight_g;
      jb["chews"] = ordered_json::array();
      for (const auto& c : b.chews)
        jb["chews"].push_back({c.start_s, c.stop_s});
      j["bouts"].push_back(std::move(jb));
    }
    std::ofstream jf(fs::path(root_path) / (rec.id + ".json"));
    jf << j.dump(2) << "\n";
    if (!jf) throw std::runtime_error("failed writing annotations for " + rec.id);
  }
}

ValidationReport validate(const Dataset& ds) {
  ValidationReport rep;
  auto add = [&rep](const std::string& rec, int bout, const std::string& msg) {
    rep.issues.push_back({rec, bout, msg});
  };

  if (ds.subjects.size() < 2)
    add("", -1, "LOSO requires >= 2 subjects (got " +
                    std::to_string(ds.subjects.size()) + ")");

  for (const auto& rec : ds.recordings) {
    if (rec.sample_rate_hz != kSampleRateHz)
      add(rec.id, -1, "sample rate is not 44100 Hz");
    if (rec.bit_depth != kBitDepth) add(rec.id, -1, "bit depth is not 16");
    const double dur = rec.duration_s();
    for (size_t bi = 0; bi < rec.bouts.size(); ++bi) {
      const Bout& b = rec.bouts[bi];
      const int bidx = static_cast<int>(bi);
      if (!(b.weight_g > 0.0)) add(rec.id, bidx, "non-positive weight");
      if (b.chews.empty()) add(rec.id, bidx, "bout has no chews");
      if (b.subject_id != rec.subject_id)
        add(rec.id, bidx, "bout subject differs from recording subject");
      for (size_t i = 0; i < b.chews.size(); ++i) {
        const auto& c = b.chews[i];
        if (!(c.stop_s > c.start_s))
          add(rec.id, bidx, "chew " + std::to_string(i) + " interval inverted");
        if (c.start_s < 0.0 || c.stop_s > dur)
          add(rec.id, bidx, "chew " + std::to_string(i) + " beyond audio duration");
        if (i > 0 && c.start_s < b.chews[i - 1].stop_s)
          add(rec.id, bidx,
              "chews " + std::to_string(i - 1) + "/" + std::to_string(i) +
                  " overlap in bout " + std::to_string(bi));
      }
    }
  }
  return rep;
}

}  // namespace biteweight
