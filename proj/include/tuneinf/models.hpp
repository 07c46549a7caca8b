#pragma once

// Built-in estimating functions and losses with analytic derivatives, plus
// the ridge closed forms used as independent oracles.

#include "tuneinf/csv.hpp"
#include "tuneinf/model.hpp"

namespace tuneinf {

/// Which data columns act as response and covariates, and which
/// coefficients the penalty touches. Coefficient 0 is the intercept.
struct RegressionLayout {
  int response = 0;
  std::vector<int> covariates;
  /// One flag per coefficient; empty means "all but the intercept".
  std::vector<bool> penalized;

  int p() const { return 1 + static_cast<int>(covariates.size()); }
  int d_min() const {
    int m = response;
    for (int c : covariates) m = std::max(m, c);
    return m + 1;
  }

  Vec design(RowRef z) const {
    Vec x(p());
    x[0] = 1.0;
    for (std::size_t k = 0; k < covariates.size(); ++k) x[static_cast<Eigen::Index>(k) + 1] = z[covariates[k]];
    return x;
  }
  double y(RowRef z) const { return z[response]; }

  /// Diagonal of the penalty projection P.
  Vec penalty_mask() const {
    Vec m = Vec::Ones(p());
    if (penalized.empty()) {
      m[0] = 0.0;
    } else {
      if (static_cast<int>(penalized.size()) != p()) throw Error(ErrorCode::InvalidInput, "penalty mask length != p");
      for (int k = 0; k < p(); ++k) m[k] = penalized[static_cast<std::size_t>(k)] ? 1.0 : 0.0;
    }
    return m;
  }

  /// Response in column 0, covariates in columns 1..k.
  static RegressionLayout leading_response(int k) {
    RegressionLayout l;
    l.response = 0;
    for (int c = 1; c <= k; ++c) l.covariates.push_back(c);
    return l;
  }
};

// ---------------------------------------------------------------------------
// Ridge linear regression
// ---------------------------------------------------------------------------

/// phi(z, b, lambda) = -2 x (y - b'x) + 2 lambda P b, the gradient of
/// (y - b'x)^2 + lambda |b_{1:}|^2.
inline ModelSpec ridge_linear_model(const RegressionLayout& layout, Box lambda_domain = Box::interval(0.0, 1.0),
                                    int d = -1) {
  const Vec mask = layout.penalty_mask();
  const int p = layout.p();
  ModelSpec m;
  m.name = "ridge-linear";
  m.p = p;
  m.q = 1;
  m.d = d > 0 ? d : layout.d_min();
  m.lambda_domain = std::move(lambda_domain);
  m.theta_start = Vec::Zero(p);
  m.phi = [layout, mask](RowRef z, const Vec& b, const Vec& la) -> Vec {
    const Vec x = layout.design(z);
    const double e = layout.y(z) - b.dot(x);
    return -2.0 * e * x + 2.0 * la[0] * mask.cwiseProduct(b);
  };
  m.dphi_dtheta = [layout, mask](RowRef z, const Vec&, const Vec& la) -> Mat {
    const Vec x = layout.design(z);
    Mat j = 2.0 * x * x.transpose();
    j.diagonal() += 2.0 * la[0] * mask;
    return j;
  };
  m.dphi_dlambda = [mask](RowRef, const Vec& b, const Vec&) -> Mat { return 2.0 * mask.cwiseProduct(b); };
  m.hess_phi_theta = [p](RowRef, const Vec&, const Vec&) {
    return std::vector<Mat>(static_cast<std::size_t>(p), Mat::Zero(p, p));
  };
  m.dphi_dlambda_dtheta = [mask](RowRef, const Vec&, const Vec&) {
    return std::vector<Mat>{Mat(2.0 * mask.asDiagonal())};
  };
  return m;
}

/// psi(z, b) = (y - b'x)^2.
inline LossSpec squared_error_loss(const RegressionLayout& layout) {
  LossSpec l;
  l.name = "squared-error";
  l.psi = [layout](RowRef z, const Vec& b) {
    const double e = layout.y(z) - b.dot(layout.design(z));
    return e * e;
  };
  l.grad_psi = [layout](RowRef z, const Vec& b) -> Vec {
    const Vec x = layout.design(z);
    return -2.0 * (layout.y(z) - b.dot(x)) * x;
  };
  l.hess_psi = [layout](RowRef z, const Vec&) -> Mat {
    const Vec x = layout.design(z);
    return 2.0 * x * x.transpose();
  };
  return l;
}

// ---------------------------------------------------------------------------
// Ridge logistic regression
// ---------------------------------------------------------------------------

inline double logistic(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

/// phi = gradient of y log p + (1-y) log(1-p) - lambda |b_{1:}|^2 with
/// p = 1 / (1 + exp(-b'x)). The per-observation penalty is lambda, so the
/// sum-level objective carries n * lambda.
inline ModelSpec ridge_logistic_model(const RegressionLayout& layout, Box lambda_domain = Box::interval(0.0, 1.0),
                                      int d = -1) {
  const Vec mask = layout.penalty_mask();
  const int p = layout.p();
  ModelSpec m;
  m.name = "ridge-logistic";
  m.p = p;
  m.q = 1;
  m.d = d > 0 ? d : layout.d_min();
  m.lambda_domain = std::move(lambda_domain);
  m.theta_start = Vec::Zero(p);
  m.phi = [layout, mask](RowRef z, const Vec& b, const Vec& la) -> Vec {
    const Vec x = layout.design(z);
    const double pr = logistic(b.dot(x));
    return (layout.y(z) - pr) * x - 2.0 * la[0] * mask.cwiseProduct(b);
  };
  m.dphi_dtheta = [layout, mask](RowRef z, const Vec& b, const Vec& la) -> Mat {
    const Vec x = layout.design(z);
    const double pr = logistic(b.dot(x));
    Mat j = -pr * (1.0 - pr) * x * x.transpose();
    j.diagonal() -= 2.0 * la[0] * mask;
    return j;
  };
  m.dphi_dlambda = [mask](RowRef, const Vec& b, const Vec&) -> Mat { return -2.0 * mask.cwiseProduct(b); };
  m.hess_phi_theta = [layout, p](RowRef z, const Vec& b, const Vec&) {
    const Vec x = layout.design(z);
    const double pr = logistic(b.dot(x));
    const Mat xx = x * x.transpose();
    const double c = -pr * (1.0 - pr) * (1.0 - 2.0 * pr);
    std::vector<Mat> out;
    out.reserve(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) out.push_back(c * x[k] * xx);
    return out;
  };
  m.dphi_dlambda_dtheta = [mask](RowRef, const Vec&, const Vec&) {
    return std::vector<Mat>{Mat(-2.0 * mask.asDiagonal())};
  };
  return m;
}

/// Brier loss (y - p)^2 where p uses only the coefficients flagged in
/// `predictor_mask` (empty = all of them).
inline LossSpec brier_loss(const RegressionLayout& layout, std::vector<bool> predictor_mask = {}) {
  const int p = layout.p();
  Vec use = Vec::Ones(p);
  if (!predictor_mask.empty()) {
    if (static_cast<int>(predictor_mask.size()) != p) throw Error(ErrorCode::InvalidInput, "predictor mask length != p");
    for (int k = 0; k < p; ++k) use[k] = predictor_mask[static_cast<std::size_t>(k)] ? 1.0 : 0.0;
  }
  LossSpec l;
  l.name = predictor_mask.empty() ? "brier" : "brier-partial";
  l.psi = [layout, use](RowRef z, const Vec& b) {
    const double r = layout.y(z) - logistic(b.dot(use.cwiseProduct(layout.design(z))));
    return r * r;
  };
  l.grad_psi = [layout, use](RowRef z, const Vec& b) -> Vec {
    const Vec x = use.cwiseProduct(layout.design(z));
    const double pr = logistic(b.dot(x));
    return -2.0 * (layout.y(z) - pr) * pr * (1.0 - pr) * x;
  };
  l.hess_psi = [layout, use](RowRef z, const Vec& b) -> Mat {
    const Vec x = use.cwiseProduct(layout.design(z));
    const double pr = logistic(b.dot(x));
    const double w = pr * (1.0 - pr);
    return 2.0 * w * (w - (layout.y(z) - pr) * (1.0 - 2.0 * pr)) * x * x.transpose();
  };
  return l;
}

/// Negative Bernoulli log-likelihood -[y log p + (1-y) log(1-p)].
inline LossSpec logistic_deviance_loss(const RegressionLayout& layout) {
  LossSpec l;
  l.name = "logistic-nll";
  l.psi = [layout](RowRef z, const Vec& b) {
    const double eta = b.dot(layout.design(z));
    // log(1 + e^eta) - y eta, evaluated stably
    const double softplus = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    return softplus - layout.y(z) * eta;
  };
  l.grad_psi = [layout](RowRef z, const Vec& b) -> Vec {
    const Vec x = layout.design(z);
    return -(layout.y(z) - logistic(b.dot(x))) * x;
  };
  l.hess_psi = [layout](RowRef z, const Vec& b) -> Mat {
    const Vec x = layout.design(z);
    const double pr = logistic(b.dot(x));
    return pr * (1.0 - pr) * x * x.transpose();
  };
  return l;
}

// ---------------------------------------------------------------------------
// Hybrid of two estimating functions
// ---------------------------------------------------------------------------

/// A lambda-free estimating function phi(z, theta) with derivatives.
struct EstimatingFunction {
  int p = 0;
  int d = 0;
  std::function<Vec(RowRef, const Vec&)> phi;
  std::function<Mat(RowRef, const Vec&)> jacobian;
  std::function<std::vector<Mat>(RowRef, const Vec&)> hessians;
};

/// phi(z, theta, lambda) = lambda phi_1(z, theta) + (1 - lambda) phi_2(z, theta).
inline ModelSpec hybrid_model(EstimatingFunction first, EstimatingFunction second,
                              Box lambda_domain = Box::interval(0.0, 1.0)) {
  if (first.p != second.p || first.d != second.d)
    throw Error(ErrorCode::InvalidInput, "hybrid components must share p and d");
  const int p = first.p;
  ModelSpec m;
  m.name = "hybrid";
  m.p = p;
  m.q = 1;
  m.d = first.d;
  m.lambda_domain = std::move(lambda_domain);
  m.theta_start = Vec::Zero(p);
  m.phi = [first, second](RowRef z, const Vec& t, const Vec& la) -> Vec {
    return la[0] * first.phi(z, t) + (1.0 - la[0]) * second.phi(z, t);
  };
  m.dphi_dtheta = [first, second](RowRef z, const Vec& t, const Vec& la) -> Mat {
    return la[0] * first.jacobian(z, t) + (1.0 - la[0]) * second.jacobian(z, t);
  };
  m.dphi_dlambda = [first, second](RowRef z, const Vec& t, const Vec&) -> Mat {
    return first.phi(z, t) - second.phi(z, t);
  };
  m.hess_phi_theta = [first, second](RowRef z, const Vec& t, const Vec& la) {
    auto h1 = first.hessians(z, t);
    const auto h2 = second.hessians(z, t);
    for (std::size_t k = 0; k < h1.size(); ++k) h1[k] = la[0] * h1[k] + (1.0 - la[0]) * h2[k];
    return h1;
  };
  m.dphi_dlambda_dtheta = [first, second](RowRef z, const Vec& t, const Vec&) {
    return std::vector<Mat>{first.jacobian(z, t) - second.jacobian(z, t)};
  };
  return m;
}

/// Weighted least-squares normal equations -2 w(z) x (y - b'x).
inline EstimatingFunction weighted_least_squares(const RegressionLayout& layout,
                                                 std::function<double(RowRef)> weight, int d = -1) {
  const int p = layout.p();
  EstimatingFunction f;
  f.p = p;
  f.d = d > 0 ? d : layout.d_min();
  f.phi = [layout, weight](RowRef z, const Vec& b) -> Vec {
    const Vec x = layout.design(z);
    return -2.0 * weight(z) * (layout.y(z) - b.dot(x)) * x;
  };
  f.jacobian = [layout, weight](RowRef z, const Vec&) -> Mat {
    const Vec x = layout.design(z);
    return 2.0 * weight(z) * x * x.transpose();
  };
  f.hessians = [p](RowRef, const Vec&) { return std::vector<Mat>(static_cast<std::size_t>(p), Mat::Zero(p, p)); };
  return f;
}

/// Weighted squared error w(z) (y - b'x)^2.
inline LossSpec weighted_squared_error_loss(const RegressionLayout& layout, std::function<double(RowRef)> weight) {
  LossSpec l;
  l.name = "weighted-squared-error";
  l.psi = [layout, weight](RowRef z, const Vec& b) {
    const double e = layout.y(z) - b.dot(layout.design(z));
    return weight(z) * e * e;
  };
  l.grad_psi = [layout, weight](RowRef z, const Vec& b) -> Vec {
    const Vec x = layout.design(z);
    return -2.0 * weight(z) * (layout.y(z) - b.dot(x)) * x;
  };
  l.hess_psi = [layout, weight](RowRef z, const Vec&) -> Mat {
    const Vec x = layout.design(z);
    return 2.0 * weight(z) * x * x.transpose();
  };
  return l;
}

/// Hybrid of ordinary least squares (lambda = 1) and least squares weighted
/// by exp(x_1 / 2) (lambda = 0). Under a curved mean the two targets differ,
/// so theta_0(lambda) moves with lambda.
inline ModelSpec weighted_ls_hybrid_model(const RegressionLayout& layout, Box lambda_domain = Box::interval(0.0, 1.0),
                                          int d = -1) {
  const int c = layout.covariates.at(0);
  auto ols = weighted_least_squares(layout, [](RowRef) { return 1.0; }, d);
  auto tilted = weighted_least_squares(layout, [c](RowRef z) { return std::exp(0.5 * z[c]); }, d);
  ModelSpec m = hybrid_model(std::move(ols), std::move(tilted), std::move(lambda_domain));
  m.name = "hybrid-wls";
  return m;
}

/// Loss paired with weighted_ls_hybrid_model: squared error weighted by
/// the midpoint of the two component weights.
inline LossSpec weighted_ls_hybrid_loss(const RegressionLayout& layout) {
  const int c = layout.covariates.at(0);
  LossSpec l = weighted_squared_error_loss(layout, [c](RowRef z) { return 0.5 * (1.0 + std::exp(0.5 * z[c])); });
  l.name = "hybrid-wls-loss";
  return l;
}

// ---------------------------------------------------------------------------
// Gaussian location-scale likelihood
// ---------------------------------------------------------------------------

/// Score of N(mu, v) in theta = (mu, v) for column `column` of z. The
/// tuning parameter is inert (d_lambda phi = 0).
inline ModelSpec gaussian_likelihood_model(int column = 0, int d = 1, Box lambda_domain = Box::interval(0.0, 1.0)) {
  ModelSpec m;
  m.name = "gaussian";
  m.p = 2;
  m.q = 1;
  m.d = d;
  m.lambda_domain = std::move(lambda_domain);
  m.theta_start = Vec::Zero(2);
  m.theta_start[1] = 1.0;
  const double inf = std::numeric_limits<double>::infinity();
  m.theta_domain = Box((Vec(2) << -inf, 1e-12).finished(), (Vec(2) << inf, inf).finished());
  m.phi = [column](RowRef z, const Vec& t, const Vec&) -> Vec {
    const double r = z[column] - t[0];
    const double v = t[1];
    return (Vec(2) << r / v, -0.5 / v + 0.5 * r * r / (v * v)).finished();
  };
  m.dphi_dtheta = [column](RowRef z, const Vec& t, const Vec&) -> Mat {
    const double r = z[column] - t[0];
    const double v = t[1];
    Mat j(2, 2);
    j << -1.0 / v, -r / (v * v), -r / (v * v), 0.5 / (v * v) - r * r / (v * v * v);
    return j;
  };
  m.dphi_dlambda = [](RowRef, const Vec&, const Vec&) -> Mat { return Mat::Zero(2, 1); };
  m.hess_phi_theta = [column](RowRef z, const Vec& t, const Vec&) {
    const double r = z[column] - t[0];
    const double v = t[1];
    const double v2 = v * v, v3 = v2 * v, v4 = v3 * v;
    Mat h1(2, 2), h2(2, 2);
    h1 << 0.0, 1.0 / v2, 1.0 / v2, 2.0 * r / v3;
    h2 << 1.0 / v2, 2.0 * r / v3, 2.0 * r / v3, -1.0 / v3 + 3.0 * r * r / v4;
    return std::vector<Mat>{h1, h2};
  };
  m.dphi_dlambda_dtheta = [](RowRef, const Vec&, const Vec&) { return std::vector<Mat>{Mat::Zero(2, 2)}; };
  return m;
}

/// psi = -log f for N(mu, v).
inline LossSpec gaussian_nll_loss(int column = 0) {
  LossSpec l;
  l.name = "gaussian-nll";
  l.psi = [column](RowRef z, const Vec& t) {
    const double r = z[column] - t[0];
    return 0.5 * std::log(2.0 * M_PI * t[1]) + 0.5 * r * r / t[1];
  };
  l.grad_psi = [column](RowRef z, const Vec& t) -> Vec {
    const double r = z[column] - t[0];
    const double v = t[1];
    return (Vec(2) << -r / v, 0.5 / v - 0.5 * r * r / (v * v)).finished();
  };
  l.hess_psi = [column](RowRef z, const Vec& t) -> Mat {
    const double r = z[column] - t[0];
    const double v = t[1];
    Mat h(2, 2);
    h << 1.0 / v, r / (v * v), r / (v * v), -0.5 / (v * v) + r * r / (v * v * v);
    return h;
  };
  return l;
}

// ---------------------------------------------------------------------------
// Ridge closed forms (oracles)
// ---------------------------------------------------------------------------

namespace detail {

inline Mat design_matrix(const Dataset& data, const RegressionLayout& layout) {
  Mat x(data.n(), layout.p());
  for (Eigen::Index i = 0; i < data.n(); ++i) x.row(i) = layout.design(data.row(i)).transpose();
  return x;
}

inline Vec response_vector(const Dataset& data, const RegressionLayout& layout) {
  Vec y(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) y[i] = layout.y(data.row(i));
  return y;
}

inline Eigen::FullPivLU<Mat> checked_lu(const Mat& a) {
  Eigen::FullPivLU<Mat> lu(a);
  if (!lu.isInvertible() || condition_number(a) > kSingularCondition)
    throw Error(ErrorCode::RankDeficient, "ridge system is rank deficient");
  return lu;
}

}  // namespace detail

/// (n^{-1} X'X + lambda P)^{-1} n^{-1} X'y by a direct linear solve.
inline Vec ridge_closed_form(const Dataset& data, const RegressionLayout& layout, double lambda) {
  const Mat x = detail::design_matrix(data, layout);
  const Vec y = detail::response_vector(data, layout);
  const double n = static_cast<double>(data.n());
  Mat a = x.transpose() * x / n;
  a.diagonal() += lambda * layout.penalty_mask();
  return detail::checked_lu(a).solve(x.transpose() * y / n);
}

/// d/dlambda of ridge_closed_form: -(S + lambda P)^{-1} P beta(lambda).
inline Vec ridge_closed_form_derivative(const Dataset& data, const RegressionLayout& layout, double lambda) {
  const Mat x = detail::design_matrix(data, layout);
  const double n = static_cast<double>(data.n());
  Mat a = x.transpose() * x / n;
  a.diagonal() += lambda * layout.penalty_mask();
  const Vec beta = ridge_closed_form(data, layout, lambda);
  return -detail::checked_lu(a).solve(layout.penalty_mask().cwiseProduct(beta));
}

/// Leave-one-out coefficients for row i. The refit solves the estimating
/// equation over n-1 rows, i.e. penalty (n-1) lambda at the sum level, so
/// with A = X'X + (n-1) lambda P the rank-one downdate of A is exact.
inline Vec ridge_loo_closed_form(const Dataset& data, const RegressionLayout& layout, double lambda, Eigen::Index i) {
  const Mat x = detail::design_matrix(data, layout);
  const Vec y = detail::response_vector(data, layout);
  const double n = static_cast<double>(data.n());
  Mat a = x.transpose() * x;
  a.diagonal() += (n - 1.0) * lambda * layout.penalty_mask();
  const auto lu = detail::checked_lu(a);
  const Vec beta = lu.solve(x.transpose() * y);
  const Vec ai_x = lu.solve(x.row(i).transpose());
  const double h = x.row(i).dot(ai_x);
  if (!(h < 1.0 - 1e-12)) throw Error(ErrorCode::RankDeficient, "leverage 1 at row " + std::to_string(i));
  const double e = y[i] - x.row(i).dot(beta);
  return beta - ai_x * (e / (1.0 - h));
}

/// Hat-matrix LOOCV n^{-1} sum (e_i / (1 - h_ii))^2 with
/// H = X (X'X + (n-1) lambda P)^{-1} X'.
inline double ridge_loocv_closed_form(const Dataset& data, const RegressionLayout& layout, double lambda) {
  const Mat x = detail::design_matrix(data, layout);
  const Vec y = detail::response_vector(data, layout);
  const double n = static_cast<double>(data.n());
  Mat a = x.transpose() * x;
  a.diagonal() += (n - 1.0) * lambda * layout.penalty_mask();
  const auto lu = detail::checked_lu(a);
  const Vec beta = lu.solve(x.transpose() * y);
  const Mat ainv_xt = lu.solve(x.transpose());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double h = x.row(i).dot(ainv_xt.col(i));
    if (!(h < 1.0 - 1e-12)) throw Error(ErrorCode::RankDeficient, "leverage 1 at row " + std::to_string(i));
    const double e = (y[i] - x.row(i).dot(beta)) / (1.0 - h);
    acc += e * e;
  }
  return acc / n;
}

// ---------------------------------------------------------------------------
// Pima-style ingestion
// ---------------------------------------------------------------------------

struct PimaOptions {
  std::string response = "diabetes";
  /// Treat zeros in glucose, pressure, triceps, insulin and mass as missing
  /// and drop those rows.
  bool drop_impossible_zeros = true;
  bool standardize = true;
  Box lambda_domain = Box::interval(0.0, 0.05);
};

struct PimaProblem {
  Dataset data;  // column 0 response, columns 1..8 covariates
  RegressionLayout layout;
  ModelSpec model;
  LossSpec loss;
  std::vector<std::string> covariate_names;
  Vec covariate_mean;
  Vec covariate_sd;
  Eigen::Index rows_dropped = 0;
};

inline PimaProblem make_pima_model(const CsvTable& table, const PimaOptions& opt = {}) {
  if (table.header.size() != 9)
    throw Error(ErrorCode::InvalidInput, "Pima schema expects 8 covariates and 1 response, got " +
                                             std::to_string(table.header.size()) + " columns");
  int resp = table.column(opt.response);
  if (resp < 0) throw Error(ErrorCode::InvalidInput, "response column '" + opt.response + "' not found");
  std::vector<int> cov;
  std::vector<std::string> names;
  for (int j = 0; j < 9; ++j)
    if (j != resp) {
      cov.push_back(j);
      names.push_back(table.header[static_cast<std::size_t>(j)]);
    }
  // columns where a zero means "not recorded"; positional fallback follows
  // the UCI column order (glucose .. mass are covariates 2..6)
  std::vector<int> zero_missing;
  const char* known[] = {"glucose", "pressure", "triceps", "insulin", "mass"};
  for (const char* k : known)
    if (table.column(k) >= 0) zero_missing.push_back(table.column(k));
  if (zero_missing.empty())
    for (int k = 1; k <= 5; ++k) zero_missing.push_back(cov[static_cast<std::size_t>(k)]);

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    const double y = table.values(i, resp);
    if (y != 0.0 && y != 1.0)
      throw Error(ErrorCode::InvalidInput, "response must be 0/1, row " + std::to_string(i + 2) + " has " +
                                               std::to_string(y));
    bool ok = true;
    if (opt.drop_impossible_zeros)
      for (int c : zero_missing) ok = ok && table.values(i, c) != 0.0;
    if (ok) keep.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  if (n < 20) throw Error(ErrorCode::InvalidInput, "too few complete rows in Pima data");
  RowMat rows(n, 9);
  for (Eigen::Index r = 0; r < n; ++r) {
    rows(r, 0) = table.values(keep[static_cast<std::size_t>(r)], resp);
    for (int k = 0; k < 8; ++k) rows(r, k + 1) = table.values(keep[static_cast<std::size_t>(r)], cov[static_cast<std::size_t>(k)]);
  }
  PimaProblem out;
  out.covariate_mean = Vec::Zero(8);
  out.covariate_sd = Vec::Ones(8);
  if (opt.standardize) {
    for (int k = 0; k < 8; ++k) {
      auto col = rows.col(k + 1);
      const double mu = col.mean();
      const double sd = std::sqrt((col.array() - mu).square().sum() / static_cast<double>(n - 1));
      col = (col.array() - mu) / sd;
      out.covariate_mean[k] = mu;
      out.covariate_sd[k] = sd;
    }
  }
  out.rows_dropped = table.values.rows() - n;
  out.layout = RegressionLayout::leading_response(8);
  out.data = Dataset(std::move(rows), ColumnRoles{0, out.layout.covariates});
  out.model = ridge_logistic_model(out.layout, opt.lambda_domain, 9);
  out.model.name = "pima-logistic";
  out.loss = brier_loss(out.layout);
  out.covariate_names = std::move(names);
  return out;
}

inline PimaProblem make_pima_model(const std::string& csv_path, const PimaOptions& opt = {}) {
  return make_pima_model(read_csv(csv_path), opt);
}

}  // namespace tuneinf
