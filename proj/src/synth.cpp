#include <cmath>
#include <fstream>
#include <stdexcept>

#include "biteweight/dataset.hpp"
#include "biteweight/rng.hpp"
#include "biteweight/wav.hpp"
#include "json.hpp"

using ordered_json = nlohmann::ordered_json;

namespace biteweight {

SynthConfig SynthConfig::defaults() {
  SynthConfig cfg;
  FoodSynthParams apple;
  apple.weight_min_g = 2.0;
  apple.weight_max_g = 20.0;
  apple.chews_per_gram = 0.70;
  apple.chew_dur_mean_s = 0.28;
  apple.chew_dur_std_s = 0.05;
  apple.spectral_tilt = 0.70;
  apple.energy_per_gram = 9e-4;
  apple.noise_floor = 2.0e-4;

  FoodSynthParams banana = apple;
  banana.chews_per_gram = 0.55;
  banana.chew_dur_mean_s = 0.30;
  banana.chew_dur_std_s = 0.06;
  banana.spectral_tilt = -0.70;
  banana.energy_per_gram = 7e-4;
  banana.noise_floor = 1.5e-4;

  FoodSynthParams rice = apple;
  rice.chews_per_gram = 0.65;
  rice.chew_dur_mean_s = 0.26;
  rice.chew_dur_std_s = 0.05;
  rice.spectral_tilt = -0.45;
  rice.energy_per_gram = 8e-4;
  rice.noise_floor = 1.8e-4;

  FoodSynthParams chips = apple;
  chips.weight_min_g = 0.5;
  chips.weight_max_g = 3.0;
  chips.chews_per_gram = 2.0;
  chips.chew_dur_mean_s = 0.22;
  chips.chew_dur_std_s = 0.04;
  chips.spectral_tilt = 0.85;
  chips.energy_per_gram = 3e-3;
  chips.noise_floor = 2.5e-4;

  cfg.foods[Food::Apple] = apple;
  cfg.foods[Food::Banana] = banana;
  cfg.foods[Food::Rice] = rice;
  cfg.foods[Food::Chips] = chips;
  return cfg;
}

namespace {

void check_config(const SynthConfig& cfg) {
  if (cfg.n_subjects < 1) throw std::invalid_argument("n_subjects must be >= 1");
  if (cfg.bouts_per_subject_per_food < 1)
    throw std::invalid_argument("bouts_per_subject_per_food must be >= 1");
  if (cfg.foods.size() != static_cast<size_t>(kNumFoods))
    throw std::invalid_argument("config must define all four foods");
  for (const auto& [food, p] : cfg.foods) {
    if (!(p.weight_min_g > 0.0) || !(p.weight_max_g >= p.weight_min_g))
      throw std::invalid_argument(std::string("bad weight range for ") +
                                  food_name(food));
    if (p.exact_weight_from_chews) {
      if (p.chew_count_min < 1 || p.chew_count_max < p.chew_count_min)
        throw std::invalid_argument("bad chew count range");
      if (!(p.weight_per_chew * p.chew_count_min + p.weight_offset > 0.0))
        throw std::invalid_argument("exact weight law yields non-positive weight");
    }
    if (p.chews_per_gram <= 0.0)
      throw std::invalid_argument("chews_per_gram must be positive");
    if (p.chew_dur_mean_s <= 0.0)
      throw std::invalid_argument("chew duration must be positive");
  }
}

struct PlannedChew {
  double start_s, stop_s;
  double power;  // target per-sample energy of the burst
  double tilt;
};

}  // namespace

Dataset synth_generate(const SynthConfig& cfg) {
  check_config(cfg);
  constexpr double fs = static_cast<double>(kSampleRateHz);

  Dataset ds;
  for (int s = 0; s < cfg.n_subjects; ++s) {
    Rng rng(derive_seed(cfg.seed, {0xdab0u, static_cast<uint64_t>(s)}));

    char name[16];
    std::snprintf(name, sizeof(name), "S%02d", s + 1);
    Recording rec;
    rec.id = name;
    rec.subject_id = name;

    double gain = 1.0 + cfg.subject_gain_std * rng.normal();
    if (gain < 0.2) gain = 0.2;

    std::vector<PlannedChew> planned;
    double cursor = 0.5;
    for (Food food : kAllFoods) {
      const FoodSynthParams& p = cfg.foods.at(food);
      for (int bi = 0; bi < cfg.bouts_per_subject_per_food; ++bi) {
        Bout bout;
        bout.subject_id = rec.subject_id;
        bout.food = food;

        int n_chews;
        if (p.exact_weight_from_chews) {
          n_chews = static_cast<int>(
              rng.uniform_int(p.chew_count_min, p.chew_count_max));
          bout.weight_g = p.weight_per_chew * n_chews + p.weight_offset;
        } else {
          bout.weight_g = rng.uniform(p.weight_min_g, p.weight_max_g);
          const int jitter = p.chew_count_jitter > 0
                                 ? static_cast<int>(rng.uniform_int(
                                       -p.chew_count_jitter, p.chew_count_jitter))
                                 : 0;
          n_chews = static_cast<int>(
              std::lround(p.chews_per_gram * bout.weight_g)) + jitter;
          if (n_chews < 1) n_chews = 1;
        }

        for (int ci = 0; ci < n_chews; ++ci) {
          double dur = p.chew_dur_mean_s + p.chew_dur_std_s * rng.normal();
          if (dur < 0.08) dur = 0.08;
          if (dur > 1.0) dur = 1.0;
          double power = (p.noise_floor + p.energy_per_gram * bout.weight_g) *
                         gain * (1.0 + cfg.power_jitter * rng.normal());
          if (power < 1e-8) power = 1e-8;
          planned.push_back({cursor, cursor + dur, power, p.spectral_tilt});
          bout.chews.push_back({cursor, cursor + dur});
          cursor += dur + rng.uniform(0.05, 0.15);
        }
        cursor += rng.uniform(0.4, 0.8);
        rec.bouts.push_back(std::move(bout));
      }
    }

    const size_t total = static_cast<size_t>(std::llround((cursor + 0.3) * fs));
    std::vector<double> audio(total, 0.0);
    if (cfg.background_rms > 0.0)
      for (auto& v : audio) v = cfg.background_rms * rng.normal();

    for (const auto& pc : planned) {
      const size_t i0 = static_cast<size_t>(std::llround(pc.start_s * fs));
      const size_t i1 = static_cast<size_t>(std::llround(pc.stop_s * fs));
      const size_t len = i1 - i0;
      std::vector<double> burst(len);
      // white noise through a one-pole tilt filter; pole sign flips the
      // emphasis between low (wet) and high (crispy) bands
      const double a = -pc.tilt;
      double state = 0.0;
      for (size_t i = 0; i < len; ++i) {
        state = rng.normal() + a * state;
        burst[i] = state;
      }
      double msq = 0.0;
      for (size_t i = 0; i < len; ++i) {
        const double w =
            0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                  static_cast<double>(len - 1)));
        burst[i] *= w;
        msq += burst[i] * burst[i];
      }
      msq /= static_cast<double>(len);
      const double scale = msq > 0.0 ? std::sqrt(pc.power / msq) : 0.0;
      for (size_t i = 0; i < len && i0 + i < audio.size(); ++i)
        audio[i0 + i] += scale * burst[i];
    }

    rec.samples.resize(audio.size());
    for (size_t i = 0; i < audio.size(); ++i)
      rec.samples[i] = quantize16(audio[i]);

    ds.subjects.insert(rec.subject_id);
    ds.recordings.push_back(std::move(rec));
  }
  return ds;
}

namespace {

FoodSynthParams food_params_from_json(const ordered_json& j,
                                      const FoodSynthParams& base) {
  FoodSynthParams p = base;
  if (j.contains("weight_min_g")) p.weight_min_g = j["weight_min_g"];
  if (j.contains("weight_max_g")) p.weight_max_g = j["weight_max_g"];
  if (j.contains("chews_per_gram")) p.chews_per_gram = j["chews_per_gram"];
  if (j.contains("chew_count_jitter")) p.chew_count_jitter = j["chew_count_jitter"];
  if (j.contains("chew_dur_mean_s")) p.chew_dur_mean_s = j["chew_dur_mean_s"];
  if (j.contains("chew_dur_std_s")) p.chew_dur_std_s = j["chew_dur_std_s"];
  if (j.contains("spectral_tilt")) p.spectral_tilt = j["spectral_tilt"];
  if (j.contains("energy_per_gram")) p.energy_per_gram = j["energy_per_gram"];
  if (j.contains("noise_floor")) p.noise_floor = j["noise_floor"];
  if (j.contains("exact_weight_from_chews"))
    p.exact_weight_from_chews = j["exact_weight_from_chews"];
  if (j.contains("weight_per_chew")) p.weight_per_chew = j["weight_per_chew"];
  if (j.contains("weight_offset")) p.weight_offset = j["weight_offset"];
  if (j.contains("chew_count_min")) p.chew_count_min = j["chew_count_min"];
  if (j.contains("chew_count_max")) p.chew_count_max = j["chew_count_max"];
  return p;
}

ordered_json food_params_to_json(const FoodSynthParams& p) {
  ordered_json j;
  j["weight_min_g"] = p.weight_min_g;
  j["weight_max_g"] = p.weight_max_g;
  j["chews_per_gram"] = p.chews_per_gram;
  j["chew_count_jitter"] = p.chew_count_jitter;
  j["chew_dur_mean_s"] = p.chew_dur_mean_s;
  j["chew_dur_std_s"] = p.chew_dur_std_s;
  j["spectral_tilt"] = p.spectral_tilt;
  j["energy_per_gram"] = p.energy_per_gram;
  j["noise_floor"] = p.noise_floor;
  if (p.exact_weight_from_chews) {
    j["exact_weight_from_chews"] = true;
    j["weight_per_chew"] = p.weight_per_chew;
    j["weight_offset"] = p.weight_offset;
    j["chew_count_min"] = p.chew_count_min;
    j["chew_count_max"] = p.chew_count_max;
  }
  return j;
}

}  // namespace

SynthConfig load_synth_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error(path + ": cannot open config");
  ordered_json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": bad JSON: " + e.what());
  }
  SynthConfig cfg = SynthConfig::defaults();
  if (j.contains("n_subjects")) cfg.n_subjects = j["n_subjects"];
  if (j.contains("bouts_per_subject_per_food"))
    cfg.bouts_per_subject_per_food = j["bouts_per_subject_per_food"];
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("subject_gain_std")) cfg.subject_gain_std = j["subject_gain_std"];
  if (j.contains("power_jitter")) cfg.power_jitter = j["power_jitter"];
  if (j.contains("background_rms")) cfg.background_rms = j["background_rms"];
  if (j.contains("foods")) {
    for (Food f : kAllFoods) {
      const std::string name = food_name(f);
      if (j["foods"].contains(name))
        cfg.foods[f] = food_params_from_json(j["foods"][name], cfg.foods[f]);
    }
  }
  return cfg;
}

void save_synth_config(const SynthConfig& cfg, const std::string& path) {
  ordered_json j;
  j["n_subjects"] = cfg.n_subjects;
  j["bouts_per_subject_per_food"] = cfg.bouts_per_subject_per_food;
  j["seed"] = cfg.seed;
  j["subject_gain_std"] = cfg.subject_gain_std;
  j["power_jitter"] = cfg.power_jitter;
  j["background_rms"] = cfg.background_rms;
  j["foods"] = ordered_json::object();
  for (Food f : kAllFoods)
    j["foods"][food_name(f)] = food_params_to_json(cfg.foods.at(f));
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error(path + ": cannot write config");
}

}  // namespace biteweight
