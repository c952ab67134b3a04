#include <cmath>

#include "biteweight/boutfeat.hpp"
#include "biteweight/rng.hpp"
#include "doctest.h"

using namespace biteweight;

namespace {

Bout make_bout(const std::vector<double>& t1, const std::vector<double>& t2,
               Food food = Food::Apple) {
  Bout b;
  b.subject_id = "S01";
  b.food = food;
  b.weight_g = 5.0;
  for (size_t i = 0; i < t1.size(); ++i) b.chews.push_back({t1[i], t2[i]});
  return b;
}

}  // namespace

TEST_CASE("equally spaced chews give zero spreads") {
  const Bout b = make_bout({0.0, 0.5, 1.0}, {0.4, 0.9, 1.4});
  const BoutFeatures f = nonaudio_features(b);
  CHECK(f.n_chews == 3);
  CHECK(f.chew_dur_mean == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(f.chew_dur_std == doctest::Approx(0.0));
  CHECK(f.rate_mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.rate_std == doctest::Approx(0.0));
  CHECK(f.food_onehot[0] == 1.0);
}

TEST_CASE("two-chew bout matches the hand statistics oracle") {
  const Bout b = make_bout({0.0, 0.6}, {0.3, 1.1});
  const BoutFeatures f = nonaudio_features(b);
  CHECK(f.n_chews == 2);
  CHECK(f.chew_dur_mean == doctest::Approx(0.4).epsilon(1e-12));
  // sample std of {0.3, 0.5} = sqrt(((.3-.4)^2+(.5-.4)^2)/1) = sqrt(0.02)
  CHECK(f.chew_dur_std == doctest::Approx(std::sqrt(0.02)).epsilon(1e-9));
  CHECK(f.rate_mean == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(f.rate_std == doctest::Approx(0.0));
}

TEST_CASE("single-chew bout uses the degeneracy conventions") {
  const Bout b = make_bout({0.0}, {0.3});
  const BoutFeatures f = nonaudio_features(b);
  CHECK(f.n_chews == 1);
  CHECK(f.chew_dur_mean == doctest::Approx(0.3));
  CHECK(f.chew_dur_std == 0.0);
  CHECK(f.rate_mean == 0.0);
  CHECK(f.rate_std == 0.0);
}

TEST_CASE("time translation leaves bout features unchanged") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> t1, t2;
    double cursor = rng.uniform(0.0, 1.0);
    const int n = static_cast<int>(rng.uniform_int(1, 12));
    for (int i = 0; i < n; ++i) {
      const double dur = rng.uniform(0.1, 0.5);
      t1.push_back(cursor);
      t2.push_back(cursor + dur);
      cursor += dur + rng.uniform(0.01, 0.2);
    }
    const Bout a = make_bout(t1, t2);
    const double shift = rng.uniform(-t1.front(), 100.0);
    for (auto& v : t1) v += shift;
    for (auto& v : t2) v += shift;
    const Bout b = make_bout(t1, t2);
    const BoutFeatures fa = nonaudio_features(a);
    const BoutFeatures fb = nonaudio_features(b);
    CHECK(fa.n_chews == fb.n_chews);
    CHECK(fa.chew_dur_mean == doctest::Approx(fb.chew_dur_mean).epsilon(1e-9));
    CHECK(fa.chew_dur_std == doctest::Approx(fb.chew_dur_std).epsilon(1e-9));
    CHECK(fa.rate_mean == doctest::Approx(fb.rate_mean).epsilon(1e-9));
    CHECK(fa.rate_std == doctest::Approx(fb.rate_std).epsilon(1e-9));
  }
}

TEST_CASE("assembled lengths follow (set, k, regime)") {
  const int k = 3;
  Codebook cb;
  cb.k = k;
  cb.d = kDescriptorDim;
  cb.centroids = Eigen::MatrixXd::Zero(k, kDescriptorDim);
  cb.centroids(1, 0) = 2.0;
  cb.centroids(2, 1) = -2.0;

  const Bout b = make_bout({0.0, 0.5}, {0.4, 0.9}, Food::Rice);
  std::vector<ChewDescriptor> descs(2);
  for (int j = 0; j < kDescriptorDim; ++j) {
    descs[0][j] = 0.1 * j;
    descs[1][j] = -0.05 * j;
  }

  const auto f1_all = assemble(FeatureSetId::F1, b, descs, nullptr, TrainingRegime::All);
  CHECK(f1_all.size() == 9);
  CHECK(f1_all[5 + static_cast<int>(Food::Rice)] == 1.0);

  const auto f1_food = assemble(FeatureSetId::F1, b, descs, nullptr, TrainingRegime::Rice);
  CHECK(f1_food.size() == 5);

  const auto f2 = assemble(FeatureSetId::F2, b, descs, &cb, TrainingRegime::All);
  CHECK(f2.size() == static_cast<size_t>(k));

  const auto f3 = assemble(FeatureSetId::F3, b, descs, &cb, TrainingRegime::All);
  CHECK(f3.size() == static_cast<size_t>(k * kDescriptorDim));

  const auto f4 = assemble(FeatureSetId::F4, b, descs, &cb, TrainingRegime::All);
  CHECK(f4.size() == f1_all.size() + f2.size());

  const auto f5 = assemble(FeatureSetId::F5, b, descs, &cb, TrainingRegime::Rice);
  CHECK(f5.size() == f1_food.size() + f3.size());

  // deterministic: same inputs give identical vectors
  CHECK(assemble(FeatureSetId::F4, b, descs, &cb, TrainingRegime::All) == f4);

  CHECK(feature_names(FeatureSetId::F4, TrainingRegime::All, k).size() == f4.size());
  CHECK(feature_names(FeatureSetId::F5, TrainingRegime::Rice, k).size() == f5.size());
}

TEST_CASE("audio feature sets require a codebook") {
  const Bout b = make_bout({0.0}, {0.4});
  std::vector<ChewDescriptor> descs(1);
  CHECK_THROWS_WITH_AS(assemble(FeatureSetId::F2, b, descs, nullptr, TrainingRegime::All),
                       doctest::Contains("requires a codebook"), std::runtime_error);
}
