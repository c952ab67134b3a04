#pragma once

#include <array>
#include <string>
#include <vector>

#include "biteweight/estimators.hpp"
#include "biteweight/types.hpp"

namespace biteweight {

inline constexpr int kAmftDim = 50;

// Literature-baseline feature vector: 8 chew-statistics features extracted
// from 6 bout segments (whole bout, the three thirds by chew index, first 3
// chews, first 5 chews) plus total bout duration and total bout log-energy.
// Per segment: chew count, segment duration, mean/std chew duration,
// mean/std inter-chew interval, chewing-time fraction, mean per-sample
// signal energy over the segment's chews.
std::array<double, kAmftDim> amft_features(const Bout& b, const Recording& audio);

std::vector<std::string> amft_feature_names();

// Spearman rank correlation with average ranks for ties; 0 when either rank
// sequence has no variance.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

enum class SelectionMethod { Spearman, Stepwise };

// Spearman: the 10 indices with the largest |rho| against the target.
// Stepwise: forward entry at p < 0.05 (partial F), backward removal at
// p > 0.10, iterated to a fixpoint (at most 50 rounds).
std::vector<int> select_features(const TrainSet& train, SelectionMethod method);

struct AmftModel {
  std::vector<int> selected;  // column indices into the 50-dim vector
  EstimatorModel lr;          // linear regression on the selected columns
  SelectionMethod method = SelectionMethod::Spearman;
};

AmftModel amft_fit(const TrainSet& train, SelectionMethod method);
double amft_predict(const AmftModel& m, const Eigen::VectorXd& features);

std::string amft_model_to_json(const AmftModel& m);
AmftModel amft_model_from_json(const std::string& text);

// Upper tail of the F(1, df2) distribution, used by the stepwise partial-F
// tests (exposed for oracle checks).
double f_test_pvalue(double f_stat, double df2);

}  // namespace biteweight
