#include "storyframe/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "storyframe/error.hpp"
#include "storyframe/random.hpp"

namespace storyframe::classify {

namespace {

void check_binary(std::span<const int> y) {
  for (int v : y) {
    if (v != 0 && v != 1) throw Error("labels must be 0 or 1");
  }
}

}  // namespace

std::vector<std::size_t> undersample(std::span<const int> y, std::uint64_t seed) {
  check_binary(y);
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  if (by_class[0].empty() || by_class[1].empty()) throw Error("undersample: both classes must be present");
  const int minority = by_class[1].size() < by_class[0].size() ? 1 : 0;
  auto& major = by_class[1 - minority];
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(major));
  std::vector<std::size_t> out = by_class[minority];
  out.insert(out.end(), major.begin(), major.begin() + static_cast<std::ptrdiff_t>(by_class[minority].size()));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_folds(std::span<const int> y, int k, std::uint64_t seed) {
  check_binary(y);
  if (k < 2) throw Error("stratified_folds: k must be at least 2");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(y.size(), -1);
  Rng rng(seed);
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c) members.push_back(i);
    }
    if (members.size() < static_cast<std::size_t>(k)) {
      throw Error("stratified_folds: class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                  " samples, fewer than k = " + std::to_string(k));
    }
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t j = 0; j < members.size(); ++j) plan.assignments[members[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  }
  return plan;
}

Metrics compute_metrics(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw Error("compute_metrics: size mismatch");
  Metrics m;
  m.n = y_true.size();
  if (m.n == 0) return m;
  std::size_t cm[2][2] = {{0, 0}, {0, 0}};  // [true][pred]
  for (std::size_t i = 0; i < m.n; ++i) ++cm[y_true[i]][y_pred[i]];
  m.accuracy = static_cast<double>(cm[0][0] + cm[1][1]) / static_cast<double>(m.n);
  for (int c = 0; c < 2; ++c) {
    const double tp = static_cast<double>(cm[c][c]);
    const double pred = static_cast<double>(cm[0][c] + cm[1][c]);
    const double actual = static_cast<double>(cm[c][0] + cm[c][1]);
    const double p = pred > 0 ? tp / pred : 0.0;
    const double r = actual > 0 ? tp / actual : 0.0;
    const double f = p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
    m.precision += p / 2.0;
    m.recall += r / 2.0;
    m.f1 += f / 2.0;
  }
  return m;
}

Dataset Dataset::from_table(const FeatureTable& t) {
  Dataset d;
  d.feature_names = t.feature_names();
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    const auto row = t.row(r);
    d.rows.emplace_back(row.begin(), row.end());
  }
  return d;
}

Dataset Dataset::from_joined(const JoinedFeatures& j) { return Dataset{j.feature_names, j.rows}; }

FoldModel fit_fold(const Dataset& data, std::span<const int> y, std::span<const std::size_t> train,
                   const TrainOptions& opts) {
  const std::size_t p = data.feature_names.size();
  FoldModel model;
  model.means.assign(p, 0.0);
  model.sds.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> present;
    for (std::size_t i : train) {
      const double v = data.rows[i][j];
      if (!std::isnan(v)) present.push_back(v);
    }
    if (present.size() >= 2) {
      model.means[j] = stats::mean(present);
      model.sds[j] = stats::sample_sd(present);
    }
    if (!(model.sds[j] > 0.0)) {
      if (!opts.ignore_constant_columns) throw ZeroVarianceError(data.feature_names[j]);
      model.sds[j] = 0.0;  // column ignored for this fold
    }
  }
  Eigen::MatrixXd X(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(p + 1));
  Eigen::VectorXd yv(static_cast<Eigen::Index>(train.size()));
  for (std::size_t r = 0; r < train.size(); ++r) {
    const auto& row = data.rows[train[r]];
    X(static_cast<Eigen::Index>(r), 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double v = std::isnan(row[j]) || model.sds[j] == 0.0 ? 0.0 : (row[j] - model.means[j]) / model.sds[j];
      X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j + 1)) = v;
    }
    yv(static_cast<Eigen::Index>(r)) = y[train[r]];
  }
  model.fit = stats::logistic_fit(X, yv, opts.logistic);
  return model;
}

std::vector<int> predict(const FoldModel& model, const Dataset& data, std::span<const std::size_t> rows,
                         double threshold) {
  std::vector<int> out;
  out.reserve(rows.size());
  const auto& beta = model.fit.coefficients;
  for (std::size_t i : rows) {
    double eta = beta[0];
    for (std::size_t j = 0; j < model.means.size(); ++j) {
      const double v = data.rows[i][j];
      if (!std::isnan(v) && model.sds[j] > 0.0) eta += beta[j + 1] * (v - model.means[j]) / model.sds[j];
    }
    const double prob = 1.0 / (1.0 + std::exp(-eta));
    out.push_back(prob >= threshold ? 1 : 0);
  }
  return out;
}

namespace {

Metrics average(const std::vector<Metrics>& folds) {
  Metrics m;
  for (const auto& f : folds) {
    m.accuracy += f.accuracy;
    m.precision += f.precision;
    m.recall += f.recall;
    m.f1 += f.f1;
    m.n += f.n;
  }
  const double k = static_cast<double>(folds.size());
  m.accuracy /= k;
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  return m;
}

}  // namespace

ClassifierReport train_eval(const Dataset& data, std::span<const int> y, const FoldPlan& plan,
                            const TrainOptions& opts) {
  check_binary(y);
  if (y.size() != data.rows.size() || plan.assignments.size() != y.size()) {
    throw Error("train_eval: labels, rows and fold plan disagree in size");
  }
  ClassifierReport report;
  report.seed = plan.seed;
  for (int fold = 0; fold < plan.k; ++fold) {
    const auto train = plan.train_indices(fold);
    const auto test = plan.test_indices(fold);
    bool seen[2] = {false, false};
    for (std::size_t i : train) seen[y[i]] = true;
    if (!seen[0] || !seen[1]) throw Error("train_eval: training set of fold " + std::to_string(fold) + " has a single class");
    const FoldModel model = fit_fold(data, y, train, opts);
    const auto pred = predict(model, data, test, opts.threshold);
    std::vector<int> truth;
    for (std::size_t i : test) truth.push_back(y[i]);
    report.folds.push_back(compute_metrics(truth, pred));
    report.coefficients.push_back(model.fit.coefficients);
  }
  report.mean = average(report.folds);
  return report;
}

ClassifierReport mfc_baseline(std::span<const int> y) {
  check_binary(y);
  std::size_t ones = 0;
  for (int v : y) ones += static_cast<std::size_t>(v);
  const int majority = ones > y.size() - ones ? 1 : 0;
  const std::vector<int> pred(y.size(), majority);
  ClassifierReport r;
  r.feature_set = "mfc";
  r.folds.push_back(compute_metrics(y, pred));
  r.mean = r.folds.front();
  return r;
}

std::string report_to_json(const ClassifierReport& r, const std::string& meta_json) {
  auto metrics = [](const Metrics& m) {
    nlohmann::ordered_json j;
    j["accuracy"] = m.accuracy;
    j["f1"] = m.f1;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["n"] = m.n;
    return j;
  };
  nlohmann::ordered_json j;
  if (!meta_json.empty()) j["meta"] = nlohmann::ordered_json::parse(meta_json);
  j["feature_set"] = r.feature_set;
  j["seed"] = r.seed;
  j["k"] = r.folds.size();
  j["mean"] = metrics(r.mean);
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : r.folds) j["folds"].push_back(metrics(f));
  return j.dump(2);
}

}  // namespace storyframe::classify
