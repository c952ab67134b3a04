#include <cmath>

#include "biteweight/baseline_amft.hpp"
#include "biteweight/rng.hpp"
#include "biteweight/wav.hpp"
#include "doctest.h"

using namespace biteweight;

namespace {

// recording with uniform bursts so per-chew energies are controllable
struct Fixture {
  Recording rec;
  Bout bout;
};

Fixture make_fixture(int n_chews, double dur = 0.2, double gap = 0.1,
                     double amp = 0.1, uint64_t seed = 1, bool identical_chews = false) {
  Fixture f;
  f.rec.id = "R";
  f.rec.subject_id = "S01";
  f.bout.subject_id = "S01";
  f.bout.food = Food::Apple;
  f.bout.weight_g = 5.0;

  Rng rng(seed);
  const double fs = 44100.0;
  std::vector<float> chew_template;
  double cursor = 0.2;
  for (int i = 0; i < n_chews; ++i) {
    f.bout.chews.push_back({cursor, cursor + dur});
    cursor += dur + gap;
  }
  f.rec.samples.assign(static_cast<size_t>((cursor + 0.2) * fs), 0.0f);
  for (int i = 0; i < n_chews; ++i) {
    const size_t i0 = static_cast<size_t>(std::llround(f.bout.chews[static_cast<size_t>(i)].start_s * fs));
    const size_t i1 = static_cast<size_t>(std::llround(f.bout.chews[static_cast<size_t>(i)].stop_s * fs));
    if (identical_chews && i == 0) {
      chew_template.resize(i1 - i0);
      for (auto& v : chew_template) v = quantize16(amp * rng.normal());
    }
    for (size_t t = i0; t < i1; ++t) {
      if (identical_chews)
        f.rec.samples[t] = chew_template[t - i0];
      else
        f.rec.samples[t] = quantize16(amp * rng.normal());
    }
  }
  return f;
}

}  // namespace

TEST_CASE("amft feature vector always has exactly 50 entries") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 15));
    const Fixture f = make_fixture(n, rng.uniform(0.1, 0.3), rng.uniform(0.05, 0.2),
                                   0.1, 100 + static_cast<uint64_t>(trial));
    const auto v = amft_features(f.bout, f.rec);
    CHECK(v.size() == 50);
    for (double x : v) CHECK(std::isfinite(x));
  }
  CHECK(amft_feature_names().size() == 50);
}

TEST_CASE("with exactly 3 chews the first-3 segment equals the whole bout") {
  const Fixture f = make_fixture(3);
  const auto v = amft_features(f.bout, f.rec);
  for (int j = 0; j < 8; ++j)
    CHECK(v[static_cast<size_t>(j)] ==
          doctest::Approx(v[static_cast<size_t>(4 * 8 + j)]).epsilon(1e-12));
}

TEST_CASE("uniform 6-chew bout yields identical third blocks") {
  const Fixture f = make_fixture(6, 0.2, 0.1, 0.1, 7, /*identical_chews=*/true);
  const auto v = amft_features(f.bout, f.rec);
  for (int j = 0; j < 8; ++j) {
    const double t1 = v[static_cast<size_t>(1 * 8 + j)];
    const double t2 = v[static_cast<size_t>(2 * 8 + j)];
    const double t3 = v[static_cast<size_t>(3 * 8 + j)];
    CHECK(t1 == doctest::Approx(t2).epsilon(1e-9));
    CHECK(t2 == doctest::Approx(t3).epsilon(1e-9));
  }
}

TEST_CASE("time translation of annotations and audio leaves features unchanged") {
  const Fixture f = make_fixture(5, 0.2, 0.12, 0.1, 9);
  const auto v0 = amft_features(f.bout, f.rec);

  // prepend exactly one second of silence and shift all time-stamps
  Fixture g = f;
  const size_t shift = 44100;
  g.rec.samples.insert(g.rec.samples.begin(), shift, 0.0f);
  for (auto& c : g.bout.chews) {
    c.start_s += 1.0;
    c.stop_s += 1.0;
  }
  const auto v1 = amft_features(g.bout, g.rec);
  for (size_t j = 0; j < 50; ++j) CHECK(v0[j] == doctest::Approx(v1[j]).epsilon(1e-9));
}

TEST_CASE("spearman on monotone and reversed sequences") {
  const std::vector<double> x = {1.0, 2.0, 5.0, 7.0, 11.0};
  const std::vector<double> up = {0.1, 0.4, 0.5, 2.0, 3.0};
  std::vector<double> down(up.rbegin(), up.rend());
  CHECK(spearman(x, up) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spearman(x, down) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("spearman with ties matches the hand-ranked oracle") {
  // ranks of x = [1,1,2] are [1.5, 1.5, 3]; ranks of y = [3,5,4] are [1,3,2];
  // the rank deviations are orthogonal, so rho = 0
  CHECK(spearman({1.0, 1.0, 2.0}, {3.0, 5.0, 4.0}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("spearman input validation and zero-variance convention") {
  CHECK_THROWS_AS(spearman({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK(spearman({2.0, 2.0, 2.0}, {1.0, 5.0, 3.0}) == 0.0);
}

TEST_CASE("f_test_pvalue agrees with the known F(1,10) quantile and a numeric oracle") {
  // 95th percentile of F(1, 10) is 4.9646
  CHECK(f_test_pvalue(4.9646, 10.0) == doctest::Approx(0.05).epsilon(1e-3));

  // numeric oracle: integrate the F(1, df2) density on [0, f] by Simpson
  auto density = [](double x, double d2) {
    const double d1 = 1.0;
    const double lg = std::lgamma((d1 + d2) / 2.0) - std::lgamma(d1 / 2.0) -
                      std::lgamma(d2 / 2.0);
    return std::exp(lg + (d1 / 2.0) * std::log(d1 / d2) +
                    (d1 / 2.0 - 1.0) * std::log(x) -
                    ((d1 + d2) / 2.0) * std::log1p(d1 * x / d2));
  };
  // substitute x = t^2 to remove the x^(-1/2) singularity at the origin;
  // the integrand has a finite positive limit at t = 0
  auto g = [&density](double t, double d2) {
    t = std::max(t, 1e-9);
    return 2.0 * t * density(t * t, d2);
  };
  for (double f : {0.5, 1.0, 2.5, 6.0}) {
    const double d2 = 14.0;
    const int steps = 20000;
    const double upper = std::sqrt(f);
    double integral = 0.0;
    const double h = upper / steps;
    for (int i = 0; i < steps; ++i) {
      const double a = h * i, m = h * (i + 0.5), b = h * (i + 1);
      integral += h / 6.0 * (g(a, d2) + 4.0 * g(m, d2) + g(b, d2));
    }
    CHECK(f_test_pvalue(f, d2) == doctest::Approx(1.0 - integral).epsilon(1e-5));
  }
}

TEST_CASE("a feature equal to the target is selected first by both methods") {
  Rng rng(13);
  TrainSet t;
  const int n = 40, p = 12;
  t.X.resize(n, p);
  t.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) t.X(i, j) = rng.uniform(-1.0, 1.0);
    t.y(i) = rng.uniform(1.0, 9.0);
    t.X(i, 7) = t.y(i);  // plant the answer in column 7
  }
  const auto sp = select_features(t, SelectionMethod::Spearman);
  CHECK(sp.size() == 10);
  CHECK(std::find(sp.begin(), sp.end(), 7) != sp.end());

  const auto st = select_features(t, SelectionMethod::Stepwise);
  REQUIRE(!st.empty());
  CHECK(std::find(st.begin(), st.end(), 7) != st.end());
}

TEST_CASE("stepwise on pure noise keeps at most a couple of features") {
  Rng rng(17);
  TrainSet t;
  const int n = 60, p = 50;
  t.X.resize(n, p);
  t.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) t.X(i, j) = rng.normal();
    t.y(i) = 5.0 + rng.normal();
  }
  const auto st = select_features(t, SelectionMethod::Stepwise);
  CHECK(st.size() <= 2);
}

TEST_CASE("spearman selection returns exactly 10 of 50 candidates") {
  Rng rng(19);
  TrainSet t;
  t.X.resize(30, 50);
  t.y.resize(30);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 50; ++j) t.X(i, j) = rng.normal();
    t.y(i) = rng.uniform(1.0, 5.0);
  }
  CHECK(select_features(t, SelectionMethod::Spearman).size() == 10);
}

TEST_CASE("stepwise terminates on seeded noise instances") {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(1000 + seed);
    TrainSet t;
    const int n = 30, p = 20;
    t.X.resize(n, p);
    t.y.resize(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) t.X(i, j) = rng.normal();
      t.y(i) = 3.0 + rng.normal();
    }
    const auto sel = select_features(t, SelectionMethod::Stepwise);  // must return
    CHECK(sel.size() <= static_cast<size_t>(p));
  }
}

TEST_CASE("amft fit/predict and serialization round trip") {
  Rng rng(23);
  TrainSet t;
  const int n = 50;
  t.X.resize(n, kAmftDim);
  t.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kAmftDim; ++j) t.X(i, j) = rng.normal();
    t.y(i) = 4.0 + 2.0 * t.X(i, 3) - t.X(i, 20) + 0.1 * rng.normal();
  }
  const AmftModel m = amft_fit(t, SelectionMethod::Spearman);
  CHECK(m.selected.size() == 10);

  const std::string text = amft_model_to_json(m);
  const AmftModel back = amft_model_from_json(text);
  CHECK(back.selected == m.selected);
  CHECK(amft_model_to_json(back) == text);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd x = t.X.row(i).transpose();
    CHECK(amft_predict(back, x) == amft_predict(m, x));
  }

  // with the planted structure the fit should track the target closely
  double mae = 0.0;
  for (int i = 0; i < n; ++i)
    mae += std::fabs(amft_predict(m, t.X.row(i).transpose()) - t.y(i));
  mae /= n;
  CHECK(mae < 0.5);
}
