#include "storyframe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

#include "csv.hpp"
#include "storyframe/error.hpp"

namespace storyframe::stats {

double mean(std::span<const double> v) {
  if (v.empty()) throw Error("mean of an empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) throw Error("variance needs at least two values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double sample_sd(std::span<const double> v) { return std::sqrt(variance(v)); }

std::vector<double> standardize(std::span<const double> values, const std::string& feature) {
  if (values.size() < 2) throw Error("standardize '" + feature + "': needs at least two values");
  const double m = mean(values);
  const double sd = sample_sd(values);
  if (!(sd > 0.0)) throw ZeroVarianceError(feature);
  std::vector<double> out;
  out.reserve(values.size());
  for (double x : values) out.push_back((x - m) / sd);
  return out;
}

namespace {

double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// p(1-p) without cancellation for large |eta|.
double logistic_weight(double eta) {
  const double e = std::exp(-std::abs(eta));
  return e / ((1.0 + e) * (1.0 + e));
}

Eigen::MatrixXd penalized_hessian(const Eigen::MatrixXd& X, const Eigen::VectorXd& eta, double ridge) {
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) w(i) = logistic_weight(eta(i));
  Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
  H.diagonal().array() += ridge;
  return H;
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& H, const Eigen::VectorXd& g) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Eigen::VectorXd s = ldlt.solve(g);
    if (s.allFinite()) return s;
  }
  return H.completeOrthogonalDecomposition().solve(g);
}

}  // namespace

double penalized_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                double ridge) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - softplus(eta(i));
  return ll - 0.5 * ridge * beta.squaredNorm();
}

Eigen::VectorXd penalized_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                   double ridge) {
  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = y(i) - sigmoid(eta(i));
  return X.transpose() * resid - ridge * beta;
}

Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X, std::span<const double> coefficients) {
  if (static_cast<std::size_t>(X.cols()) != coefficients.size()) throw Error("predict_proba: width mismatch");
  const Eigen::Map<const Eigen::VectorXd> beta(coefficients.data(), static_cast<Eigen::Index>(coefficients.size()));
  Eigen::VectorXd p = X * beta;
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = sigmoid(p(i));
  return p;
}

LogisticFit logistic_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LogisticOptions& opts) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) throw Error("logistic_fit: X has " + std::to_string(n) + " rows but y has " + std::to_string(y.size()));
  if (opts.require_more_rows && n <= p) throw Error("logistic_fit: need more rows than columns");
  if (!X.allFinite()) throw Error("logistic_fit: non-finite design matrix");
  Eigen::Index ones = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw Error("logistic_fit: labels must be 0 or 1");
    ones += y(i) == 1.0 ? 1 : 0;
  }
  if (ones == 0 || ones == n) throw Error("logistic_fit: y contains a single class");

  LogisticFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double obj = penalized_log_likelihood(X, y, beta, opts.ridge);
  for (int it = 1; it <= opts.max_iter; ++it) {
    fit.n_iter = it;
    const Eigen::VectorXd eta = X * beta;
    const Eigen::VectorXd g = penalized_gradient(X, y, beta, opts.ridge);
    const Eigen::VectorXd step = solve_spd(penalized_hessian(X, eta, opts.ridge), g);
    if (!step.allFinite()) break;

    double scale = 1.0;
    Eigen::VectorXd next = beta + step;
    double next_obj = penalized_log_likelihood(X, y, next, opts.ridge);
    for (int h = 0; h < 40 && !(next_obj >= obj - 1e-12 * std::abs(obj)); ++h) {
      scale *= 0.5;
      next = beta + scale * step;
      next_obj = penalized_log_likelihood(X, y, next, opts.ridge);
    }
    const double max_update = (scale * step).cwiseAbs().maxCoeff();
    beta = next;
    obj = next_obj;
    if (max_update < opts.tol) {
      fit.converged = true;
      break;
    }
  }

  const Eigen::VectorXd eta = X * beta;
  const Eigen::MatrixXd H = penalized_hessian(X, eta, opts.ridge);
  const Eigen::MatrixXd cov = H.completeOrthogonalDecomposition().pseudoInverse();
  fit.penalized_log_likelihood = obj;
  fit.coefficients.assign(beta.data(), beta.data() + p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double se = std::sqrt(std::max(cov(j, j), 0.0));
    fit.std_errors.push_back(se);
    fit.p_values.push_back(se > 0.0 ? normal_two_sided(beta(j) / se) : 1.0);
  }

  double min_pos = std::numeric_limits<double>::infinity();
  double max_neg = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) == 1.0) {
      min_pos = std::min(min_pos, eta(i));
    } else {
      max_neg = std::max(max_neg, eta(i));
    }
  }
  fit.separation = min_pos > max_neg;
  return fit;
}

double cohens_d(std::span<const double> group_yta, std::span<const double> group_nta) {
  if (group_yta.size() < 2 || group_nta.size() < 2) throw Error("cohens_d: each group needs at least two values");
  const double n1 = static_cast<double>(group_yta.size());
  const double n2 = static_cast<double>(group_nta.size());
  const double pooled = std::sqrt(((n1 - 1.0) * variance(group_yta) + (n2 - 1.0) * variance(group_nta)) / (n1 + n2 - 2.0));
  if (!(pooled > 0.0)) throw ZeroVarianceError("pooled");
  return (mean(group_yta) - mean(group_nta)) / pooled;
}

BhResult bh_correct(std::span<const double> p_values, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("bh_correct: alpha must be in (0, 1]");
  const std::size_t m = p_values.size();
  for (double v : p_values) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error("bh_correct: p-value outside [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

  BhResult out;
  out.reject.assign(m, false);
  out.q_values.assign(m, 1.0);
  std::size_t cutoff = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    if (p_values[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(m)) cutoff = k;
  }
  for (std::size_t k = 0; k < cutoff; ++k) out.reject[order[k]] = true;
  double running = 1.0;
  for (std::size_t k = m; k >= 1; --k) {
    const double pk = p_values[order[k - 1]];
    const double q = k == m ? pk : pk * static_cast<double>(m) / static_cast<double>(k);
    running = std::min(running, q);
    out.q_values[order[k - 1]] = std::min(running, 1.0);
  }
  return out;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw Error("incomplete_beta: shape parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw Error("incomplete_beta: x outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw Error("student_t: degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  return std::clamp(incomplete_beta(0.5 * df, 0.5, df / (df + t * t)), 0.0, 1.0);
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided(t, df);
  return t < 0.0 ? tail : 1.0 - tail;
}

double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error("welch_t: each sample needs at least two values");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a);
  const double mb = mean(b);
  const double sa = variance(a) / na;
  const double sb = variance(b) / nb;
  WelchResult r;
  if (sa + sb == 0.0) {
    if (ma == mb) return r;
    r.zero_variance = true;
    r.df = na + nb - 2.0;
    r.t = ma > mb ? kZeroVarianceT : -kZeroVarianceT;
    r.p = student_t_two_sided(r.t, r.df);
    return r;
  }
  r.t = (ma - mb) / std::sqrt(sa + sb);
  r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

namespace {

void check_labels(std::span<const int> y, std::size_t rows) {
  if (y.size() != rows) throw Error("labels have " + std::to_string(y.size()) + " entries, table has " + std::to_string(rows) + " rows");
  for (int v : y) {
    if (v != 0 && v != 1) throw Error("labels must be 0 or 1");
  }
}

// Covariate columns that vary over the rows; constant ones are absorbed by the intercept.
std::vector<const std::vector<double>*> usable_covariates(const Covariates* cov, std::size_t rows) {
  std::vector<const std::vector<double>*> out;
  if (cov == nullptr) return out;
  if (cov->names.size() != cov->columns.size()) throw Error("covariate names and columns disagree");
  for (const auto& c : cov->columns) {
    if (c.size() != rows) throw Error("covariate column length does not match the table");
    if (rows >= 2 && variance(c) > 0.0) out.push_back(&c);
  }
  return out;
}

Eigen::MatrixXd design(const std::vector<const std::vector<double>*>& columns, std::size_t rows) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns.size() + 1));
  X.col(0).setOnes();
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t i = 0; i < rows; ++i) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = (*columns[j])[i];
  }
  return X;
}

Eigen::VectorXd label_vector(std::span<const int> y) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(i)) = y[i];
  return v;
}

}  // namespace

CorrelationReport correlate_features(const FeatureTable& table, std::span<const int> y, const CorrelationOptions& opts) {
  check_labels(y, table.num_rows());
  const auto covs = usable_covariates(opts.covariates, table.num_rows());
  const Eigen::VectorXd yv = label_vector(y);

  std::vector<std::size_t> order(table.num_features());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return table.feature_names()[a] < table.feature_names()[b]; });

  CorrelationReport report;
  for (std::size_t j : order) {
    const std::string& name = table.feature_names()[j];
    const std::vector<double> col = table.column(j);
    std::vector<double> yta;
    std::vector<double> nta;
    for (std::size_t i = 0; i < col.size(); ++i) (y[i] == 1 ? yta : nta).push_back(col[i]);
    CorrelationResult r;
    r.feature = name;
    try {
      r.cohens_d = cohens_d(yta, nta);
      const std::vector<double> z = standardize(col, name);
      std::vector<const std::vector<double>*> columns = {&z};
      if (opts.adjusted_features.contains(name)) columns.insert(columns.end(), covs.begin(), covs.end());
      const LogisticFit fit = logistic_fit(design(columns, col.size()), yv, opts.logistic);
      r.p_value = fit.p_values[1];
    } catch (const ZeroVarianceError&) {
      report.skipped.push_back(name);
      continue;
    }
    report.results.push_back(std::move(r));
  }

  std::vector<double> p;
  for (const auto& r : report.results) p.push_back(r.p_value);
  const BhResult bh = bh_correct(p, opts.alpha);
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    report.results[i].q_value = bh.q_values[i];
    report.results[i].q_significant = bh.reject[i];
  }
  return report;
}

std::vector<InteractionResult> interaction_scan(const FeatureTable& table, std::span<const int> y,
                                                const CorrelationOptions& opts) {
  check_labels(y, table.num_rows());
  const auto covs = usable_covariates(opts.covariates, table.num_rows());
  const Eigen::VectorXd yv = label_vector(y);
  const std::size_t n = table.num_rows();

  std::vector<std::string> names = table.feature_names();
  std::sort(names.begin(), names.end());
  std::vector<std::vector<double>> z;
  for (const auto& name : names) z.push_back(standardize(table.column(name), name));

  std::vector<InteractionResult> out;
  for (std::size_t a = 0; a < names.size(); ++a) {
    for (std::size_t b = a + 1; b < names.size(); ++b) {
      std::vector<double> product(n);
      for (std::size_t i = 0; i < n; ++i) product[i] = z[a][i] * z[b][i];
      const std::vector<double> zp = standardize(product, names[a] + "*" + names[b]);
      std::vector<const std::vector<double>*> columns = {&z[a], &z[b], &zp};
      if (opts.adjusted_features.contains(names[a]) || opts.adjusted_features.contains(names[b])) {
        columns.insert(columns.end(), covs.begin(), covs.end());
      }
      const LogisticFit fit = logistic_fit(design(columns, n), yv, opts.logistic);
      InteractionResult r;
      r.f1 = names[a];
      r.f2 = names[b];
      r.beta3 = fit.coefficients[3];
      r.p_value = fit.p_values[3];
      out.push_back(std::move(r));
    }
  }
  std::vector<double> p;
  for (const auto& r : out) p.push_back(r.p_value);
  const BhResult bh = bh_correct(p, opts.alpha);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].q_value = bh.q_values[i];
    out[i].q_significant = bh.reject[i];
  }
  return out;
}

void write_correlations_csv(const std::string& path, std::span<const CorrelationResult> results,
                            const std::vector<std::string>& comment_lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  out << "feature,cohens_d,p,q_significant\n";
  for (const auto& r : results) {
    out << csv::escape(r.feature) << ',' << format_double(r.cohens_d) << ',' << format_double(r.p_value) << ','
        << (r.q_significant ? "true" : "false") << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

void write_interactions_csv(const std::string& path, std::span<const InteractionResult> results,
                            const std::vector<std::string>& comment_lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  out << "f1,f2,beta3,p,q_significant\n";
  for (const auto& r : results) {
    out << csv::escape(r.f1) << ',' << csv::escape(r.f2) << ',' << format_double(r.beta3) << ','
        << format_double(r.p_value) << ',' << (r.q_significant ? "true" : "false") << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace storyframe::stats
