#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "storyframe/feature_table.hpp"
#include "storyframe/stats.hpp"

namespace storyframe::classify {

/// Indices (ascending) of a 1:1 class-balanced subset: every minority sample
/// plus a seeded uniform draw of equally many majority samples.
std::vector<std::size_t> undersample(std::span<const int> y, std::uint64_t seed);

struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<int> assignments;  // fold id per sample

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
};

/// Shuffles each class (seeded) and deals it round-robin into k folds.
FoldPlan stratified_folds(std::span<const int> y, int k, std::uint64_t seed);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double f1 = 0.0;         // macro
  std::size_t n = 0;
};

/// Macro-averaged metrics over classes {0, 1}; a class with no predictions
/// (or no samples) scores 0 precision (or recall).
Metrics compute_metrics(std::span<const int> y_true, std::span<const int> y_pred);

/// Dense samples x features matrix; NaN marks a missing value.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;

  static Dataset from_table(const FeatureTable& t);
  static Dataset from_joined(const JoinedFeatures& j);
};

struct FoldModel {
  std::vector<double> means;  // training-fold column means (missing values ignored)
  std::vector<double> sds;
  stats::LogisticFit fit;     // coefficients over [1, standardized features]
};

struct TrainOptions {
  stats::LogisticOptions logistic{1.0, 100, 1e-8};
  double threshold = 0.5;
  bool ignore_constant_columns = false;  // zero such columns in the fold instead of throwing
};

/// Standardizes with training rows only (missing values imputed to the
/// training mean) and fits the logistic model. A column constant over the
/// training rows raises ZeroVarianceError unless opts.ignore_constant_columns
/// is set, in which case it is held at zero (sd recorded as 0). A
/// single-class fold raises Error.
FoldModel fit_fold(const Dataset& data, std::span<const int> y, std::span<const std::size_t> train,
                   const TrainOptions& opts = {});

std::vector<int> predict(const FoldModel& model, const Dataset& data, std::span<const std::size_t> rows,
                         double threshold = 0.5);

struct ClassifierReport {
  std::string feature_set;
  std::uint64_t seed = 0;
  std::vector<Metrics> folds;
  Metrics mean;  // unweighted mean over folds
  std::vector<std::vector<double>> coefficients;  // per fold
};

ClassifierReport train_eval(const Dataset& data, std::span<const int> y, const FoldPlan& plan,
                            const TrainOptions& opts = {});

/// Predicts the majority class (ties -> 0) for every sample.
ClassifierReport mfc_baseline(std::span<const int> y);

std::string report_to_json(const ClassifierReport& r, const std::string& meta_json = {});

}  // namespace storyframe::classify
