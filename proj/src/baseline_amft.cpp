#include "biteweight/baseline_amft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

using ordered_json = nlohmann::ordered_json;

namespace biteweight {

namespace {

constexpr double kEnergyGuard = 1e-12;

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

// [first, last) chew index range of each of the 6 segments; empty ranges
// (thirds of bouts with fewer than 3 chews) fall back to the whole bout
std::pair<int, int> segment_range(int segment, int n) {
  const int t1 = static_cast<int>(std::ceil(n / 3.0));
  const int t2 = static_cast<int>(std::ceil(2.0 * n / 3.0));
  std::pair<int, int> r;
  switch (segment) {
    case 0: r = {0, n}; break;
    case 1: r = {0, t1}; break;
    case 2: r = {t1, t2}; break;
    case 3: r = {t2, n}; break;
    case 4: r = {0, std::min(3, n)}; break;
    case 5: r = {0, std::min(5, n)}; break;
    default: throw std::logic_error("bad segment id");
  }
  if (r.first >= r.second) r = {0, n};
  return r;
}

// total energy and sample count of one chew's audio
std::pair<double, double> chew_energy(const Recording& rec, const ChewAnnotation& c) {
  const double fs = static_cast<double>(rec.sample_rate_hz);
  size_t i0 = static_cast<size_t>(std::llround(c.start_s * fs));
  size_t i1 = static_cast<size_t>(std::llround(c.stop_s * fs));
  if (i1 > rec.samples.size()) i1 = rec.samples.size();
  double e = 0.0;
  for (size_t i = i0; i < i1; ++i)
    e += static_cast<double>(rec.samples[i]) * rec.samples[i];
  return {e, static_cast<double>(i1 > i0 ? i1 - i0 : 0)};
}

}  // namespace

std::array<double, kAmftDim> amft_features(const Bout& b, const Recording& audio) {
  if (b.chews.empty()) throw std::invalid_argument("amft_features: bout has no chews");
  const int n = static_cast<int>(b.chews.size());

  std::vector<double> energies(static_cast<size_t>(n)), counts(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    std::tie(energies[static_cast<size_t>(i)], counts[static_cast<size_t>(i)]) =
        chew_energy(audio, b.chews[static_cast<size_t>(i)]);

  std::array<double, kAmftDim> out{};
  int o = 0;
  for (int seg = 0; seg < 6; ++seg) {
    const auto [lo, hi] = segment_range(seg, n);
    std::vector<double> durs, gaps;
    double e_total = 0.0, n_samp = 0.0;
    for (int i = lo; i < hi; ++i) {
      durs.push_back(b.chews[static_cast<size_t>(i)].stop_s -
                     b.chews[static_cast<size_t>(i)].start_s);
      if (i > lo)
        gaps.push_back(b.chews[static_cast<size_t>(i)].start_s -
                       b.chews[static_cast<size_t>(i) - 1].start_s);
      e_total += energies[static_cast<size_t>(i)];
      n_samp += counts[static_cast<size_t>(i)];
    }
    const double seg_dur =
        b.chews[static_cast<size_t>(hi) - 1].stop_s - b.chews[static_cast<size_t>(lo)].start_s;
    const auto [dmean, dstd] = mean_std(durs);
    const auto [gmean, gstd] = mean_std(gaps);
    double chew_time = 0.0;
    for (double d : durs) chew_time += d;

    out[static_cast<size_t>(o++)] = static_cast<double>(hi - lo);
    out[static_cast<size_t>(o++)] = seg_dur;
    out[static_cast<size_t>(o++)] = dmean;
    out[static_cast<size_t>(o++)] = dstd;
    out[static_cast<size_t>(o++)] = gmean;
    out[static_cast<size_t>(o++)] = gstd;
    out[static_cast<size_t>(o++)] = seg_dur > 0.0 ? chew_time / seg_dur : 0.0;
    out[static_cast<size_t>(o++)] = n_samp > 0.0 ? e_total / n_samp : 0.0;
  }

  // bout-global extras
  double e_total = 0.0, n_samp = 0.0;
  for (int i = 0; i < n; ++i) {
    e_total += energies[static_cast<size_t>(i)];
    n_samp += counts[static_cast<size_t>(i)];
  }
  out[48] = b.chews.back().stop_s - b.chews.front().start_s;
  out[49] = std::log((n_samp > 0.0 ? e_total / n_samp : 0.0) + kEnergyGuard);
  return out;
}

std::vector<std::string> amft_feature_names() {
  static const char* seg_names[6] = {"whole", "third1", "third2", "third3",
                                     "first3", "first5"};
  static const char* feat_names[8] = {"n_chews", "duration", "dur_mean", "dur_std",
                                      "gap_mean", "gap_std", "chew_fraction",
                                      "energy"};
  std::vector<std::string> names;
  for (const char* s : seg_names)
    for (const char* f : feat_names)
      names.push_back(std::string(s) + "_" + f);
  names.emplace_back("bout_duration");
  names.emplace_back("bout_log_energy");
  return names;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&v](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("spearman: need matched sequences of length >= 3");
  return pearson(average_ranks(x), average_ranks(y));
}

// --- incomplete beta for the F-distribution tail ----------------------------

namespace {

double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14, kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double ibeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

// SSE of a least-squares fit (with bias) on the selected columns
double lr_sse(const TrainSet& t, const std::vector<int>& cols) {
  TrainSet sub;
  sub.X.resize(t.X.rows(), static_cast<long>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) sub.X.col(static_cast<long>(j)) = t.X.col(cols[j]);
  sub.y = t.y;
  const EstimatorModel m = lr_fit(sub);
  const Eigen::VectorXd r = predict_all(m, sub.X) - t.y;
  return r.squaredNorm();
}

}  // namespace

double f_test_pvalue(double f_stat, double df2) {
  if (f_stat <= 0.0) return 1.0;
  if (df2 <= 0.0) return 1.0;
  return ibeta(df2 / 2.0, 0.5, df2 / (df2 + f_stat));
}

std::vector<int> select_features(const TrainSet& train, SelectionMethod method) {
  const int n = static_cast<int>(train.X.rows());
  const int p = static_cast<int>(train.X.cols());
  if (n < 10) throw std::invalid_argument("select_features: need at least 10 rows");

  if (method == SelectionMethod::Spearman) {
    std::vector<double> target(train.y.data(), train.y.data() + n);
    std::vector<std::pair<double, int>> scored;
    for (int j = 0; j < p; ++j) {
      std::vector<double> col(train.X.col(j).data(), train.X.col(j).data() + n);
      scored.emplace_back(-std::fabs(spearman(col, target)), j);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<int> out;
    const int keep = std::min(10, p);
    for (int j = 0; j < keep; ++j) out.push_back(scored[static_cast<size_t>(j)].second);
    std::sort(out.begin(), out.end());
    return out;
  }

  // stepwise: forward entry (p < 0.05), backward removal (p > 0.10)
  std::vector<int> selected;
  double sse_cur = lr_sse(train, selected);
  for (int round = 0; round < 50; ++round) {
    bool changed = false;

    int best_j = -1;
    double best_sse = sse_cur;
    for (int j = 0; j < p; ++j) {
      if (std::find(selected.begin(), selected.end(), j) != selected.end()) continue;
      std::vector<int> cand = selected;
      cand.push_back(j);
      const double sse = lr_sse(train, cand);
      if (sse < best_sse) {
        best_sse = sse;
        best_j = j;
      }
    }
    if (best_j >= 0) {
      const double df2 = static_cast<double>(n) - (static_cast<double>(selected.size()) + 1.0) - 1.0;
      if (df2 > 0.0 && best_sse > 0.0) {
        const double f = (sse_cur - best_sse) / (best_sse / df2);
        if (f_test_pvalue(f, df2) < 0.05) {
          selected.push_back(best_j);
          std::sort(selected.begin(), selected.end());
          sse_cur = best_sse;
          changed = true;
        }
      }
    }

    bool removed = true;
    while (removed && !selected.empty()) {
      removed = false;
      const double df2 = static_cast<double>(n) - static_cast<double>(selected.size()) - 1.0;
      if (df2 <= 0.0) break;
      int worst_i = -1;
      double worst_p = 0.10;
      double worst_sse = 0.0;
      for (size_t i = 0; i < selected.size(); ++i) {
        std::vector<int> reduced = selected;
        reduced.erase(reduced.begin() + static_cast<long>(i));
        const double sse_red = lr_sse(train, reduced);
        const double f = sse_cur > 0.0 ? (sse_red - sse_cur) / (sse_cur / df2) : 0.0;
        const double pv = f_test_pvalue(f, df2);
        if (pv > worst_p) {
          worst_p = pv;
          worst_i = static_cast<int>(i);
          worst_sse = sse_red;
        }
      }
      if (worst_i >= 0) {
        selected.erase(selected.begin() + worst_i);
        sse_cur = worst_sse;
        removed = true;
        changed = true;
      }
    }

    if (!changed) break;
  }
  return selected;
}

AmftModel amft_fit(const TrainSet& train, SelectionMethod method) {
  AmftModel m;
  m.method = method;
  m.selected = select_features(train, method);

  TrainSet sub;
  sub.X.resize(train.X.rows(), static_cast<long>(m.selected.size()));
  for (size_t j = 0; j < m.selected.size(); ++j)
    sub.X.col(static_cast<long>(j)) = train.X.col(m.selected[j]);
  sub.y = train.y;
  sub.groups = train.groups;
  m.lr = lr_fit(sub);
  return m;
}

double amft_predict(const AmftModel& m, const Eigen::VectorXd& features) {
  Eigen::VectorXd sub(static_cast<long>(m.selected.size()));
  for (size_t j = 0; j < m.selected.size(); ++j) sub(static_cast<long>(j)) = features(m.selected[j]);
  return predict(m.lr, sub);
}

std::string amft_model_to_json(const AmftModel& m) {
  ordered_json j;
  j["selection_method"] = m.method == SelectionMethod::Spearman ? "spearman" : "stepwise";
  j["selected"] = m.selected;
  j["lr"] = ordered_json::parse(model_to_json(m.lr));
  return j.dump(2);
}

AmftModel amft_model_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  AmftModel m;
  m.method = j.at("selection_method") == "stepwise" ? SelectionMethod::Stepwise
                                                    : SelectionMethod::Spearman;
  m.selected = j.at("selected").get<std::vector<int>>();
  m.lr = model_from_json(j.at("lr").dump());
  return m;
}

}  // namespace biteweight
