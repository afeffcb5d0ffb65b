#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "storyframe/feature_table.hpp"

namespace storyframe::stats {

double mean(std::span<const double> v);
/// Sample variance (n-1 denominator).
double variance(std::span<const double> v);
double sample_sd(std::span<const double> v);

/// (v - mean) / sd with the sample sd. Throws ZeroVarianceError naming `feature`.
std::vector<double> standardize(std::span<const double> values, const std::string& feature = "value");

struct LogisticOptions {
  double ridge = 1e-8;
  int max_iter = 100;
  double tol = 1e-8;  // on the max absolute coefficient update
  bool require_more_rows = true;  // n > p; predictive use with a real ridge may relax it
};

struct LogisticFit {
  std::vector<double> coefficients;  // intercept first when X carries one
  std::vector<double> std_errors;
  std::vector<double> p_values;  // Wald, two-sided
  bool converged = false;
  int n_iter = 0;
  bool separation = false;  // linear predictor separates the classes
  double penalized_log_likelihood = 0.0;
};

/// Ridge-penalized maximum likelihood by damped Newton (IRLS). X must already
/// contain the intercept column. Throws when n <= p, sizes disagree, or y has a single class.
LogisticFit logistic_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LogisticOptions& opts = {});

/// Penalized log-likelihood and its gradient, exposed for verification.
double penalized_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                double ridge);
Eigen::VectorXd penalized_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                   double ridge);

Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X, std::span<const double> coefficients);

/// Signed standardized mean difference (yta minus nta over the pooled sample sd).
double cohens_d(std::span<const double> group_yta, std::span<const double> group_nta);

struct BhResult {
  std::vector<bool> reject;
  std::vector<double> q_values;
};

/// Benjamini-Hochberg step-up procedure; outputs in input order.
BhResult bh_correct(std::span<const double> p_values, double alpha = 0.05);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// P(T <= t) for Student's t with `df` degrees of freedom (df > 0, may be fractional).
double student_t_cdf(double t, double df);
/// Two-sided tail P(|T| >= |t|).
double student_t_two_sided(double t, double df);
/// Two-sided normal tail P(|Z| >= |z|).
double normal_two_sided(double z);

struct WelchResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  bool zero_variance = false;  // both samples constant
};

inline constexpr double kZeroVarianceT = 1e6;

/// Welch's unequal-variance t-test. When both samples are constant: equal
/// means give t = 0, p = 1; otherwise t = +-kZeroVarianceT with p evaluated at
/// df = n1 + n2 - 2, and `zero_variance` is set.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

/// Named covariate columns aligned with the rows being analysed.
struct Covariates {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

struct CorrelationResult {
  std::string feature;
  double cohens_d = 0.0;
  double p_value = 1.0;
  double q_value = 1.0;
  bool q_significant = false;
};

struct CorrelationOptions {
  double alpha = 0.05;
  const Covariates* covariates = nullptr;
  std::set<std::string> adjusted_features;  // features whose fit includes the covariates
  LogisticOptions logistic;
};

struct CorrelationReport {
  std::vector<CorrelationResult> results;  // sorted by feature name
  std::vector<std::string> skipped;        // constant within the table or within a class
};

/// Per-feature logistic regression of y on the standardized feature (plus
/// covariates for adjusted features), signed Cohen's D, and BH across the table.
CorrelationReport correlate_features(const FeatureTable& table, std::span<const int> y,
                                     const CorrelationOptions& opts = {});

struct InteractionResult {
  std::string f1;  // f1 < f2
  std::string f2;
  double beta3 = 0.0;
  double p_value = 1.0;
  double q_value = 1.0;
  bool q_significant = false;
};

/// Fits y ~ 1 + z1 + z2 + z(z1*z2) [+ covariates] for every unordered pair of
/// features and BH-corrects the interaction p-values across pairs. Covariates
/// enter whenever either feature is in `opts.adjusted_features`.
std::vector<InteractionResult> interaction_scan(const FeatureTable& table, std::span<const int> y,
                                                const CorrelationOptions& opts = {});

void write_correlations_csv(const std::string& path, std::span<const CorrelationResult> results,
                            const std::vector<std::string>& comment_lines = {});
void write_interactions_csv(const std::string& path, std::span<const InteractionResult> results,
                            const std::vector<std::string>& comment_lines = {});

}  // namespace storyframe::stats
