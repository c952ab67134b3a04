#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "biteweight/types.hpp"

namespace biteweight {

// --- on-disk corpus -------------------------------------------------------
//
// A corpus directory holds one <id>.wav (RIFF PCM 44100/16/mono) and one
// <id>.json annotation per recording:
//   { "subject_id": "...",
//     "bouts": [ {"food": "apple", "weight_g": 12.5,
//                 "chews": [[start_s, stop_s], ...]}, ... ] }

// Loads and fully validates a corpus directory. Throws std::runtime_error
// naming the file and record index on the first violation.
Dataset load_dataset(const std::string& root_path);

// Writes a dataset as a corpus directory (creates it if needed).
void save_dataset(const Dataset& ds, const std::string& root_path);

// --- validation -----------------------------------------------------------

struct ValidationIssue {
  std::string recording_id;
  int bout_index = -1;  // -1 when not bout-specific
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Report-only invariant check; collects every violation instead of aborting.
ValidationReport validate(const Dataset& ds);

// --- synthetic corpora ----------------------------------------------------

struct FoodSynthParams {
  double weight_min_g = 2.0;
  double weight_max_g = 20.0;
  double chews_per_gram = 0.6;   // chew count slope
  int chew_count_jitter = 1;     // bounded +-jitter on the rounded count
  double chew_dur_mean_s = 0.25;
  double chew_dur_std_s = 0.05;
  double spectral_tilt = 0.0;    // >0 crispy (high-frequency energy), <0 wet
  double energy_per_gram = 8e-4; // per-sample power per gram of bite weight
  double noise_floor = 2e-4;     // per-sample power at zero weight

  // Exact-law mode: chew count ~ U{count_min..count_max} and
  // weight = weight_per_chew * n + weight_offset (replaces the range draw).
  bool exact_weight_from_chews = false;
  double weight_per_chew = 0.5;
  double weight_offset = 0.25;
  int chew_count_min = 2;
  int chew_count_max = 12;
};

struct SynthConfig {
  int n_subjects = 8;
  int bouts_per_subject_per_food = 15;
  uint64_t seed = 1;
  double subject_gain_std = 0.1;   // per-subject energy multiplier spread
  double power_jitter = 0.05;      // per-chew relative power jitter
  double background_rms = 0.002;   // recording-wide noise floor amplitude
  std::map<Food, FoodSynthParams> foods;

  static SynthConfig defaults();
};

// Deterministic synthetic corpus: filtered-noise chew bursts whose per-sample
// energy is affine in bite weight, chew count tied to weight, spectral tilt
// tied to food. Pure function of the config (seed included).
Dataset synth_generate(const SynthConfig& cfg);

// JSON (de)serialization of SynthConfig for the CLI.
SynthConfig load_synth_config(const std::string& path);
void save_synth_config(const SynthConfig& cfg, const std::string& path);

}  // namespace biteweight
