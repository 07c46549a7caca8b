#pragma once

// Fixtures shared by the unit tests and the acceptance runner.

#include "tuneinf/tuneinf.hpp"

#include <string>
#include <vector>

namespace tuneinf::testing {

inline std::string data_path(const std::string& file) { return std::string(TUNEINF_DATA_DIR) + "/" + file; }

/// Ridge-linear data with k covariates drawn from the library simulator.
inline Dataset linear_data(Eigen::Index n, int k, std::uint64_t seed, double curvature = 0.0, double sigma = 1.0) {
  DGPSpec d;
  d.kind = DGPKind::LINEAR_GAUSSIAN;
  d.n = n;
  d.seed = seed;
  d.sigma = sigma;
  d.curvature = curvature;
  d.beta = Vec::LinSpaced(k + 1, 1.0, -0.5);
  return simulate(d);
}

inline Dataset gaussmix_data(Eigen::Index n, double C, std::uint64_t seed) {
  DGPSpec d;
  d.kind = DGPKind::GAUSSMIX_C;
  d.n = n;
  d.C = C;
  d.seed = seed;
  return simulate(d);
}

/// Brier loss on the intercept and x1 only.
inline std::vector<bool> partial_mask() { return {true, true, false}; }

struct Case {
  std::string name;
  ModelSpec model;
  LossSpec loss;
  Dataset data;
  CriterionKind criterion = CriterionKind::CV_EXACT;
};

/// One configuration per built-in model family; seeds vary the data.
inline std::vector<Case> builtin_cases(std::uint64_t seed, Eigen::Index n = 200) {
  std::vector<Case> out;
  const RegressionLayout l2 = RegressionLayout::leading_response(2);
  const RegressionLayout l1 = RegressionLayout::leading_response(1);
  out.push_back({"ridge-linear", complete(ridge_linear_model(l2, Box::interval(0.0, 1.0), 3)),
                 complete(squared_error_loss(l2)), linear_data(n, 2, seed, 0.8, 0.5), CriterionKind::CV_EXACT});
  out.push_back({"ridge-logistic", complete(ridge_logistic_model(l2, Box::interval(0.0, 1.0), 3)),
                 complete(brier_loss(l2, partial_mask())), gaussmix_data(n, 2.0, seed), CriterionKind::CV_EXACT});
  out.push_back({"hybrid-wls", complete(weighted_ls_hybrid_model(l1, Box::interval(0.0, 1.0), 2)),
                 complete(weighted_ls_hybrid_loss(l1)), linear_data(n, 1, seed, 0.6, 0.5), CriterionKind::CV_EXACT});
  out.push_back({"gaussian", complete(gaussian_likelihood_model(0, 2, Box::interval(0.0, 1.0))),
                 complete(gaussian_nll_loss(0)), linear_data(n, 1, seed), CriterionKind::CV_EXACT});
  return out;
}

/// phi = z_0 - theta with an inert lambda; derivatives by finite
/// differences.
inline ModelSpec mean_model(Box lambda_domain = Box::interval(0.0, 1.0)) {
  ModelSpec m;
  m.name = "mean";
  m.p = 1;
  m.q = 1;
  m.d = 1;
  m.lambda_domain = std::move(lambda_domain);
  m.theta_start = Vec::Zero(1);
  m.phi = [](RowRef z, const Vec& t, const Vec&) { return Vec::Constant(1, z[0] - t[0]); };
  return complete(std::move(m));
}

inline LossSpec mean_squared_loss() {
  LossSpec l;
  l.psi = [](RowRef z, const Vec& t) { return (z[0] - t[0]) * (z[0] - t[0]); };
  return complete(std::move(l));
}

inline Dataset column(const std::vector<double>& v) {
  RowMat r(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) r(static_cast<Eigen::Index>(i), 0) = v[i];
  return Dataset(std::move(r));
}

/// max |a - b| / max(1, max |b|).
inline double rel_max_diff(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

/// Analytic derivative handles of a model and loss compared with central
/// differences at (theta, lambda) for one row. Returns the worst relative
/// discrepancy.
inline double derivative_discrepancy(const ModelSpec& m, const LossSpec& l, RowRef z, const Vec& theta,
                                     const Vec& lambda) {
  double worst = 0.0;
  auto phi_t = [&](const Vec& t) { return m.phi(z, t, lambda); };
  auto phi_l = [&](const Vec& la) { return m.phi(z, theta, la); };
  worst = std::max(worst, rel_max_diff(m.dphi_dtheta(z, theta, lambda), fd::jacobian(phi_t, theta)));
  worst = std::max(worst, rel_max_diff(m.dphi_dlambda(z, theta, lambda), fd::jacobian(phi_l, lambda)));
  const auto H = m.hess_phi_theta(z, theta, lambda);
  for (int k = 0; k < m.p; ++k) {
    auto row = [&](const Vec& t) -> Vec { return m.dphi_dtheta(z, t, lambda).row(k).transpose(); };
    worst = std::max(worst, rel_max_diff(H[static_cast<std::size_t>(k)], fd::jacobian(row, theta)));
  }
  const auto L = m.dphi_dlambda_dtheta(z, theta, lambda);
  for (int j = 0; j < m.q; ++j) {
    auto col = [&](const Vec& la) -> Vec { return flatten(m.dphi_dtheta(z, theta, la)); };
    const Mat fdj = unflatten(fd::jacobian(col, lambda).col(j), m.p, m.p);
    worst = std::max(worst, rel_max_diff(L[static_cast<std::size_t>(j)], fdj));
  }
  auto psi = [&](const Vec& t) { return l.psi(z, t); };
  auto grad = [&](const Vec& t) -> Vec { return l.grad_psi(z, t); };
  worst = std::max(worst, rel_max_diff(l.grad_psi(z, theta), fd::gradient(psi, theta)));
  worst = std::max(worst, rel_max_diff(l.hess_psi(z, theta), fd::jacobian(grad, theta)));
  return worst;
}

/// Same rows in a shuffled order.
inline Dataset permuted(const Dataset& data, std::uint64_t seed) {
  return data.subset(shuffled_indices(data.n(), seed));
}

inline double sym_defect(const Mat& a) { return (a - a.transpose()).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff()); }

inline double min_eigen(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a));
  return es.eigenvalues().minCoeff();
}

}  // namespace tuneinf::testing
