#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biteweight/chewfeat.hpp"
#include "biteweight/codebook.hpp"
#include "biteweight/types.hpp"

namespace biteweight {

// Non-audio bout features computed from chew time-stamps alone.
struct BoutFeatures {
  int n_chews = 0;
  double chew_dur_mean = 0.0;
  double chew_dur_std = 0.0;
  double rate_mean = 0.0;  // mean inter-onset interval t1[i] - t1[i-1], seconds
  double rate_std = 0.0;
  std::array<double, kNumFoods> food_onehot{};
};

BoutFeatures nonaudio_features(const Bout& b);

enum class FeatureSetId { F1, F2, F3, F4, F5 };
enum class TrainingRegime { Apple = 0, Banana = 1, Rice = 2, Chips = 3, All = 4 };

const char* feature_set_name(FeatureSetId s);
FeatureSetId feature_set_from_name(const std::string& name);
const char* regime_name(TrainingRegime r);
TrainingRegime regime_from_name(const std::string& name);
bool feature_set_uses_audio(FeatureSetId s);

// Numeric length of the non-audio block: 5 timing features, plus the food
// one-hot only when training across foods (a constant one-hot column would
// make the food-specific normal equations singular).
int f1_length(TrainingRegime regime);

// Assembled feature vector for one bout.
//   F1: timing block (+ one-hot in the all-foods regime)
//   F2: BoW histogram of the bout's standardized descriptors
//   F3: VLAD of the same
//   F4: F1 ++ F2,  F5: F1 ++ F3
// `descriptors` must already be standardized; `cb` is required for F2..F5.
std::vector<double> assemble(FeatureSetId set, const Bout& b,
                             const std::vector<ChewDescriptor>& descriptors,
                             const Codebook* cb, TrainingRegime regime);

// Column labels matching assemble()'s output, for CSV dumps.
std::vector<std::string> feature_names(FeatureSetId set, TrainingRegime regime, int k);

}  // namespace biteweight
