#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace biteweight {

inline constexpr int kSampleRateHz = 44100;
inline constexpr int kBitDepth = 16;

enum class Food : int { Apple = 0, Banana = 1, Rice = 2, Chips = 3 };
inline constexpr int kNumFoods = 4;
inline constexpr std::array<Food, 4> kAllFoods = {Food::Apple, Food::Banana, Food::Rice, Food::Chips};

const char* food_name(Food f);
Food food_from_name(const std::string& name);  // throws on unknown name

// One jaw-closing event, annotated by start/stop time within the recording.
struct ChewAnnotation {
  double start_s = 0.0;
  double stop_s = 0.0;
};

// One bite: a sequence of chews with the food label and plate-scale weight.
struct Bout {
  std::string subject_id;
  Food food = Food::Apple;
  std::vector<ChewAnnotation> chews;
  double weight_g = 0.0;
};

struct Recording {
  std::string id;  // file stem on disk
  std::string subject_id;
  int sample_rate_hz = kSampleRateHz;
  int bit_depth = kBitDepth;
  std::vector<float> samples;  // mono, [-1, 1], on the 16-bit grid k/32768
  std::vector<Bout> bouts;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

struct Dataset {
  std::vector<Recording> recordings;
  std::set<std::string> subjects;

  size_t total_bouts() const {
    size_t n = 0;
    for (const auto& r : recordings) n += r.bouts.size();
    return n;
  }
  size_t total_chews() const {
    size_t n = 0;
    for (const auto& r : recordings)
      for (const auto& b : r.bouts) n += b.chews.size();
    return n;
  }
};

}  // namespace biteweight
