#include "biteweight/boutfeat.hpp"

#include <cmath>
#include <stdexcept>

namespace biteweight {

namespace {

// mean and sample (n-1) std; std is 0 with fewer than 2 values
std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / (static_cast<double>(v.size()) - 1.0))};
}

}  // namespace

BoutFeatures nonaudio_features(const Bout& b) {
  BoutFeatures f;
  f.n_chews = static_cast<int>(b.chews.size());
  std::vector<double> durs, gaps;
  durs.reserve(b.chews.size());
  for (size_t i = 0; i < b.chews.size(); ++i) {
    durs.push_back(b.chews[i].stop_s - b.chews[i].start_s);
    if (i > 0) gaps.push_back(b.chews[i].start_s - b.chews[i - 1].start_s);
  }
  std::tie(f.chew_dur_mean, f.chew_dur_std) = mean_std(durs);
  std::tie(f.rate_mean, f.rate_std) = mean_std(gaps);
  f.food_onehot[static_cast<size_t>(b.food)] = 1.0;
  return f;
}

const char* feature_set_name(FeatureSetId s) {
  switch (s) {
    case FeatureSetId::F1: return "F1";
    case FeatureSetId::F2: return "F2";
    case FeatureSetId::F3: return "F3";
    case FeatureSetId::F4: return "F4";
    case FeatureSetId::F5: return "F5";
  }
  return "?";
}

FeatureSetId feature_set_from_name(const std::string& name) {
  for (FeatureSetId s : {FeatureSetId::F1, FeatureSetId::F2, FeatureSetId::F3,
                         FeatureSetId::F4, FeatureSetId::F5})
    if (name == feature_set_name(s)) return s;
  throw std::runtime_error("unknown feature set: '" + name + "'");
}

const char* regime_name(TrainingRegime r) {
  switch (r) {
    case TrainingRegime::Apple: return "Apple";
    case TrainingRegime::Banana: return "Banana";
    case TrainingRegime::Rice: return "Rice";
    case TrainingRegime::Chips: return "Chips";
    case TrainingRegime::All: return "All";
  }
  return "?";
}

TrainingRegime regime_from_name(const std::string& name) {
  for (TrainingRegime r : {TrainingRegime::Apple, TrainingRegime::Banana,
                           TrainingRegime::Rice, TrainingRegime::Chips,
                           TrainingRegime::All})
    if (name == regime_name(r)) return r;
  throw std::runtime_error("unknown training regime: '" + name + "'");
}

bool feature_set_uses_audio(FeatureSetId s) { return s != FeatureSetId::F1; }

int f1_length(TrainingRegime regime) {
  return regime == TrainingRegime::All ? 5 + kNumFoods : 5;
}

std::vector<double> assemble(FeatureSetId set, const Bout& b,
                             const std::vector<ChewDescriptor>& descriptors,
                             const Codebook* cb, TrainingRegime regime) {
  std::vector<double> out;

  const bool want_f1 =
      set == FeatureSetId::F1 || set == FeatureSetId::F4 || set == FeatureSetId::F5;
  const bool want_bow = set == FeatureSetId::F2 || set == FeatureSetId::F4;
  const bool want_vlad = set == FeatureSetId::F3 || set == FeatureSetId::F5;

  if (want_f1) {
    const BoutFeatures f = nonaudio_features(b);
    out = {static_cast<double>(f.n_chews), f.chew_dur_mean, f.chew_dur_std,
           f.rate_mean, f.rate_std};
    if (regime == TrainingRegime::All)
      out.insert(out.end(), f.food_onehot.begin(), f.food_onehot.end());
  }

  if (want_bow || want_vlad) {
    if (cb == nullptr)
      throw std::runtime_error("assemble: feature set requires a codebook");
    if (descriptors.size() != b.chews.size())
      throw std::runtime_error("assemble: descriptor count does not match chews");
    Eigen::MatrixXd D(static_cast<long>(descriptors.size()), kDescriptorDim);
    for (size_t i = 0; i < descriptors.size(); ++i)
      for (int j = 0; j < kDescriptorDim; ++j)
        D(static_cast<long>(i), j) = descriptors[i][j];
    const std::vector<double> enc =
        want_bow ? encode_bow(*cb, D) : encode_vlad(*cb, D);
    out.insert(out.end(), enc.begin(), enc.end());
  }

  return out;
}

std::vector<std::string> feature_names(FeatureSetId set, TrainingRegime regime, int k) {
  std::vector<std::string> names;
  const bool want_f1 =
      set == FeatureSetId::F1 || set == FeatureSetId::F4 || set == FeatureSetId::F5;
  if (want_f1) {
    names = {"n_chews", "chew_dur_mean", "chew_dur_std", "rate_mean", "rate_std"};
    if (regime == TrainingRegime::All)
      for (Food f : kAllFoods) names.push_back(std::string("food_") + food_name(f));
  }
  if (set == FeatureSetId::F2 || set == FeatureSetId::F4)
    for (int j = 0; j < k; ++j) names.push_back("bow_" + std::to_string(j));
  if (set == FeatureSetId::F3 || set == FeatureSetId::F5)
    for (int j = 0; j < k; ++j)
      for (int c = 0; c < kDescriptorDim; ++c)
        names.push_back("vlad_" + std::to_string(j) + "_" + std::to_string(c));
  return names;
}

}  // namespace biteweight
