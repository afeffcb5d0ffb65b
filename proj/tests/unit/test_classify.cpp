#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "storyframe/classify.hpp"
#include "storyframe/error.hpp"
#include "storyframe/random.hpp"

using namespace storyframe;
using namespace storyframe::classify;

namespace {

std::vector<int> labels(std::size_t zeros, std::size_t ones) {
  std::vector<int> y(zeros, 0);
  y.insert(y.end(), ones, 1);
  return y;
}

// Box-Muller on the portable generator, so fixtures do not depend on libstdc++ distributions.
double gauss(Rng& rng) {
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

}  // namespace

TEST_CASE("Rng bounded draws and shuffles are reproducible") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.below(7) == b.below(7));
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  Rng c(9), d(9);
  c.shuffle(std::span<int>(v));
  d.shuffle(std::span<int>(w));
  CHECK(v == w);
  std::sort(v.begin(), v.end());
  for (int i = 0; i < 50; ++i) CHECK(v[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("undersample") {
  const auto y = labels(100, 30);
  const auto idx = undersample(y, 3);
  CHECK(idx.size() == 60);
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  std::size_t ones = 0;
  for (auto i : idx) ones += static_cast<std::size_t>(y[i]);
  CHECK(ones == 30);
  CHECK(undersample(y, 3) == idx);
  CHECK(undersample(y, 4) != idx);

  const auto balanced = labels(20, 20);
  std::vector<std::size_t> all(40);
  std::iota(all.begin(), all.end(), 0);
  CHECK(undersample(balanced, 1) == all);
  CHECK_THROWS_AS(undersample(labels(5, 0), 1), Error);
}

TEST_CASE("stratified_folds") {
  auto plan = stratified_folds(labels(60, 40), 10, 7);
  for (int f = 0; f < 10; ++f) {
    std::size_t ones = 0, zeros = 0;
    for (auto i : plan.test_indices(f)) (i >= 60 ? ones : zeros) += 1;
    CHECK(ones == 4);
    CHECK(zeros == 6);
  }
  plan = stratified_folds(labels(60, 41), 10, 7);
  std::vector<std::size_t> ones_per_fold(10, 0);
  for (std::size_t i = 60; i < 101; ++i) ++ones_per_fold[static_cast<std::size_t>(plan.assignments[i])];
  CHECK(std::count(ones_per_fold.begin(), ones_per_fold.end(), 4u) == 9);
  CHECK(std::count(ones_per_fold.begin(), ones_per_fold.end(), 5u) == 1);
  CHECK(stratified_folds(labels(60, 41), 10, 7).assignments == plan.assignments);
  CHECK_THROWS_AS(stratified_folds(labels(60, 9), 10, 1), Error);

  // Partition property and per-class deviation from the ideal.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t z = 37 + seed * 3, o = 23 + seed;
    const auto y = labels(z, o);
    const auto p = stratified_folds(y, 10, seed);
    std::size_t covered = 0;
    for (int f = 0; f < 10; ++f) {
      const auto test = p.test_indices(f);
      covered += test.size();
      std::size_t c1 = 0;
      for (auto i : test) c1 += static_cast<std::size_t>(y[i]);
      CHECK(std::abs(static_cast<double>(c1) - static_cast<double>(o) / 10.0) <= 1.0);
      CHECK(std::abs(static_cast<double>(test.size() - c1) - static_cast<double>(z) / 10.0) <= 1.0);
      CHECK(p.train_indices(f).size() + test.size() == y.size());
    }
    CHECK(covered == y.size());
  }
}

TEST_CASE("metrics and the MFC baseline") {
  const auto mfc = mfc_baseline(labels(50, 50));
  CHECK(mfc.mean.accuracy == 0.5);
  CHECK(mfc.mean.f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(mfc.mean.precision == 0.25);
  CHECK(mfc.mean.recall == 0.5);
  CHECK(mfc_baseline(labels(10, 0)).mean.accuracy == 1.0);
  CHECK(mfc_baseline(labels(75, 25)).mean.accuracy == 0.75);
  CHECK(mfc_baseline(labels(25, 75)).mean.accuracy == 0.75);

  const std::vector<int> t = {1, 1, 0, 0};
  const std::vector<int> p = {1, 0, 0, 0};
  const auto m = compute_metrics(t, p);
  CHECK(m.accuracy == 0.75);
  CHECK(m.precision == doctest::Approx((1.0 + 2.0 / 3.0) / 2));
  CHECK(m.recall == doctest::Approx((0.5 + 1.0) / 2));
}

TEST_CASE("train_eval on a separable feature") {
  Rng rng(1);
  FeatureTable t({"x"});
  std::vector<int> y;
  for (int i = 0; i < 400; ++i) {
    const int label = i % 2;
    const double mag = 0.5 + rng.uniform();
    t.add_row(std::to_string(i), {label ? mag : -mag});
    y.push_back(label);
  }
  const auto plan = stratified_folds(y, 10, 2);
  const auto r = train_eval(Dataset::from_table(t), y, plan);
  CHECK(r.mean.accuracy >= 0.95);
  CHECK(r.folds.size() == 10);
  for (const auto& f : r.folds) {
    CHECK((f.accuracy >= 0.0 && f.accuracy <= 1.0));
    CHECK((f.f1 >= 0.0 && f.f1 <= 1.0));
  }
}

TEST_CASE("train_eval on shuffled labels is near chance") {
  Rng rng(21);
  FeatureTable t({"a", "b", "c"});
  std::vector<int> y;
  for (int i = 0; i < 1000; ++i) {
    t.add_row(std::to_string(i), {gauss(rng), gauss(rng), gauss(rng)});
    y.push_back(i < 500 ? 1 : 0);
  }
  rng.shuffle(std::span<int>(y));
  const auto r = train_eval(Dataset::from_table(t), y, stratified_folds(y, 10, 4));
  CHECK(std::abs(r.mean.accuracy - 0.5) <= 0.05);
}

TEST_CASE("train_eval errors") {
  FeatureTable t({"x", "flat"});
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    t.add_row(std::to_string(i), {static_cast<double>(i), 3.0});
    y.push_back(i % 2);
  }
  try {
    train_eval(Dataset::from_table(t), y, stratified_folds(y, 5, 1));
    FAIL("expected ZeroVarianceError");
  } catch (const ZeroVarianceError& e) {
    CHECK(e.feature() == "flat");
  }
  TrainOptions lenient;
  lenient.ignore_constant_columns = true;
  const auto plan = stratified_folds(y, 5, 1);
  const auto with_flat = train_eval(Dataset::from_table(t), y, plan, lenient);
  const auto without = train_eval(Dataset::from_table(t.select({"x"})), y, plan, lenient);
  CHECK(with_flat.mean.accuracy == without.mean.accuracy);
  for (const auto& beta : with_flat.coefficients) CHECK(beta[2] == doctest::Approx(0.0).epsilon(1e-12));

  FoldPlan bad;
  bad.k = 2;
  bad.assignments.assign(40, 0);
  for (std::size_t i = 0; i < 40; i += 2) bad.assignments[i] = 1;  // fold 1 holds every class-0 sample
  CHECK_THROWS_WITH_AS(train_eval(Dataset::from_table(t.select({"x"})), y, bad), doctest::Contains("fold 0"), Error);
}

TEST_CASE("train_eval has no leakage from held-out labels") {
  Rng rng(8);
  FeatureTable t({"a", "b"});
  std::vector<int> y;
  for (int i = 0; i < 300; ++i) {
    const double a = gauss(rng), b = gauss(rng);
    t.add_row(std::to_string(i), {a, b});
    y.push_back(a + 0.5 * gauss(rng) > 0 ? 1 : 0);
  }
  const auto data = Dataset::from_table(t);
  const auto plan = stratified_folds(y, 5, 3);
  const auto base = train_eval(data, y, plan);
  for (int fold = 0; fold < plan.k; ++fold) {
    auto corrupted = y;
    for (auto i : plan.test_indices(fold)) corrupted[i] = 1 - corrupted[i];
    const auto model = fit_fold(data, corrupted, plan.train_indices(fold));
    CHECK(model.fit.coefficients == base.coefficients[static_cast<std::size_t>(fold)]);
  }
}

TEST_CASE("train_eval is invariant to sample order under the same plan") {
  Rng rng(13);
  FeatureTable t({"a", "b"});
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    const double a = gauss(rng);
    t.add_row(std::to_string(i), {a, gauss(rng)});
    y.push_back(a + gauss(rng) > 0 ? 1 : 0);
  }
  const auto data = Dataset::from_table(t);
  const auto plan = stratified_folds(y, 5, 6);
  const auto base = train_eval(data, y, plan);

  std::vector<std::size_t> perm(y.size());
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<std::size_t>(perm));
  Dataset shuffled{data.feature_names, {}};
  std::vector<int> ys;
  FoldPlan ps{plan.k, plan.seed, {}};
  for (auto i : perm) {
    shuffled.rows.push_back(data.rows[i]);
    ys.push_back(y[i]);
    ps.assignments.push_back(plan.assignments[i]);
  }
  const auto other = train_eval(shuffled, ys, ps);
  for (std::size_t f = 0; f < base.folds.size(); ++f) {
    CHECK(other.folds[f].accuracy == base.folds[f].accuracy);
    CHECK(other.folds[f].f1 == base.folds[f].f1);
    for (std::size_t j = 0; j < 3; ++j) CHECK(other.coefficients[f][j] == doctest::Approx(base.coefficients[f][j]).epsilon(1e-9));
  }
}

TEST_CASE("missing values are imputed with training means") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Dataset d{{"x", "sparse"}, {}};
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    const int label = i % 2;
    d.rows.push_back({label ? 1.0 + 0.01 * i : -1.0 - 0.01 * i, i % 3 == 0 ? nan : static_cast<double>(i % 7)});
    y.push_back(label);
  }
  const auto r = train_eval(d, y, stratified_folds(y, 5, 1));
  CHECK(r.mean.accuracy >= 0.95);
  const auto js = nlohmann::json::parse(report_to_json(r, R"({"config_hash":"z"})"));
  CHECK(js["folds"].size() == 5);
  CHECK(js["meta"]["config_hash"] == "z");
}
