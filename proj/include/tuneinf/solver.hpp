#pragma once

// Estimator core: damped Newton for n^{-1} sum phi(Z_i, theta, lambda) = 0,
// the implicit derivative theta'(lambda), and leave-one-out refits.

#include "tuneinf/model.hpp"

namespace tuneinf {

struct SolverOptions {
  /// Residual tolerance; unset means 1e-10 * (1 + |theta_init|).
  std::optional<double> tol;
  int max_iter = 100;
  int max_halvings = 40;
  double armijo = 1e-4;
  /// One extra Newton step after convergence, kept when it does not
  /// increase the residual.
  bool polish = true;
  /// Evaluate J_hat at the returned point.
  bool want_jacobian = true;
};

struct SolveResult {
  Vec theta_hat;
  Vec lambda;
  int iterations = 0;
  double residual_norm = 0.0;
  /// -d_theta Phi_n at theta_hat; empty when not requested.
  Mat J_hat;
};

/// Mean of phi over all rows, optionally skipping one.
inline Vec mean_phi(const ModelSpec& m, const Dataset& data, const Vec& theta, const Vec& lambda,
                    Eigen::Index exclude = -1) {
  const Eigen::Index n = data.n();
  Vec s = pairwise_sum<Vec>(0, n, [&](Eigen::Index i) -> Vec {
    if (i == exclude) return Vec::Zero(m.p);
    return m.phi(data.row(i), theta, lambda);
  });
  return s / static_cast<double>(exclude >= 0 ? n - 1 : n);
}

/// Mean of d_theta phi over all rows, optionally skipping one.
inline Mat mean_dphi_dtheta(const ModelSpec& m, const Dataset& data, const Vec& theta, const Vec& lambda,
                            Eigen::Index exclude = -1) {
  const Eigen::Index n = data.n();
  Mat s = pairwise_sum<Mat>(0, n, [&](Eigen::Index i) -> Mat {
    if (i == exclude) return Mat::Zero(m.p, m.p);
    return m.dphi_dtheta(data.row(i), theta, lambda);
  });
  return s / static_cast<double>(exclude >= 0 ? n - 1 : n);
}

inline Mat mean_dphi_dlambda(const ModelSpec& m, const Dataset& data, const Vec& theta, const Vec& lambda) {
  Mat s = pairwise_sum<Mat>(0, data.n(), [&](Eigen::Index i) -> Mat {
    return m.dphi_dlambda(data.row(i), theta, lambda);
  });
  return s / static_cast<double>(data.n());
}

namespace detail {

inline void check_finite(const Vec& r, const char* what) {
  if (!r.allFinite()) throw Error(ErrorCode::Evaluation, std::string(what) + " produced a non-finite value");
}

/// Damped Newton on residual(theta) with Armijo backtracking on |r|^2.
template <class Residual, class Jacobian>
SolveResult newton(Residual&& residual, Jacobian&& jacobian, const Vec& theta_init, const Vec& lambda,
                   const std::optional<Box>& domain, const SolverOptions& opt) {
  const double tol = opt.tol.value_or(1e-10 * (1.0 + theta_init.norm()));
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidInput, "solver tolerance must be positive");
  if (domain && !domain->contains(theta_init))
    throw Error(ErrorCode::InvalidInput, "theta_init lies outside theta_domain");

  Vec theta = theta_init;
  Vec r = residual(theta);
  check_finite(r, "phi");
  double rn = r.norm();
  int it = 0;
  bool polished = !opt.polish;

  // Returns false when no acceptable step was found.
  auto newton_step = [&](bool require_decrease) -> bool {
    const Mat jac = jacobian(theta);
    if (!jac.allFinite()) throw Error(ErrorCode::Evaluation, "d_theta phi produced a non-finite value");
    if (condition_number(jac) > kSingularCondition)
      throw Error(ErrorCode::SingularJacobian, "empirical d_theta Phi_n is singular at an iterate");
    const Vec step = -jac.fullPivLu().solve(r);
    const double f0 = 0.5 * rn * rn;
    double t = 1.0;
    bool projected_any = false;
    for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
      Vec trial = theta + t * step;
      if (domain && !domain->contains(trial)) {
        trial = domain->project(trial);
        projected_any = true;
      }
      Vec rt = residual(trial);
      if (!rt.allFinite()) continue;
      const double ft = 0.5 * rt.squaredNorm();
      const bool ok = require_decrease ? ft <= (1.0 - 2.0 * opt.armijo * t) * f0 : ft <= f0;
      if (ok) {
        theta = std::move(trial);
        r = std::move(rt);
        rn = r.norm();
        return true;
      }
      if (!require_decrease) return false;
    }
    if (projected_any)
      throw Error(ErrorCode::DomainEscape, "iterate left theta_domain and projection did not reduce the residual");
    return false;
  };

  while (true) {
    if (rn <= tol) {
      if (!polished && rn > 0.0) {
        polished = true;
        try {
          newton_step(false);
        } catch (const Error&) {
          // already within tolerance; keep the current point
        }
      }
      break;
    }
    if (it >= opt.max_iter)
      throw Error(ErrorCode::NoConvergence, "iteration cap reached with residual " + std::to_string(rn));
    ++it;
    if (!newton_step(true)) {
      throw Error(ErrorCode::NoConvergence, "line search failed with residual " + std::to_string(rn));
    }
  }

  SolveResult out;
  out.theta_hat = theta;
  out.lambda = lambda;
  out.iterations = it;
  out.residual_norm = rn;
  if (opt.want_jacobian) out.J_hat = -jacobian(theta);
  return out;
}

}  // namespace detail

/// Root of Phi_n(theta, lambda) = n^{-1} sum phi(Z_i, theta, lambda).
inline SolveResult solve_theta(const ModelSpec& model, const Dataset& data, const Vec& lambda, const Vec& theta_init,
                               const SolverOptions& opt = {}) {
  if (lambda.size() != model.q) throw Error(ErrorCode::InvalidInput, "lambda has wrong dimension");
  if (theta_init.size() != model.p) throw Error(ErrorCode::InvalidInput, "theta_init has wrong dimension");
  if (data.d() != model.d) throw Error(ErrorCode::InvalidInput, "data dimension differs from model.d");
  return detail::newton([&](const Vec& t) { return mean_phi(model, data, t, lambda); },
                        [&](const Vec& t) { return mean_dphi_dtheta(model, data, t, lambda); }, theta_init, lambda,
                        model.theta_domain, opt);
}

inline SolveResult solve_theta(const ModelSpec& model, const Dataset& data, const Vec& lambda,
                               const SolverOptions& opt = {}) {
  return solve_theta(model, data, lambda, model.theta_start, opt);
}

/// D_hat = J_hat^{-1} d_lambda Phi_n(theta_hat, lambda), p x q.
inline Mat theta_prime(const ModelSpec& model, const Dataset& data, const SolveResult& solve) {
  Mat J = solve.J_hat;
  if (J.size() == 0) J = -mean_dphi_dtheta(model, data, solve.theta_hat, solve.lambda);
  const Mat dl = mean_dphi_dlambda(model, data, solve.theta_hat, solve.lambda);
  if (condition_number(J) > kSingularCondition)
    throw Error(ErrorCode::SingularJacobian, "J_hat is singular; theta'(lambda) undefined");
  return J.fullPivLu().solve(dl);
}

/// Full-data sums of phi and d_theta phi at a fixed (theta, lambda). Lets
/// every leave-one-out solve warm-started there take its first Newton step
/// without a pass over the data.
struct LooCache {
  Vec theta;
  Vec lambda;
  Vec sum_phi;
  Mat sum_dphi;

  static LooCache build(const ModelSpec& m, const Dataset& data, const Vec& theta, const Vec& lambda) {
    LooCache c;
    c.theta = theta;
    c.lambda = lambda;
    c.sum_phi = pairwise_sum<Vec>(0, data.n(), [&](Eigen::Index i) -> Vec { return m.phi(data.row(i), theta, lambda); });
    c.sum_dphi = pairwise_sum<Mat>(0, data.n(),
                                   [&](Eigen::Index i) -> Mat { return m.dphi_dtheta(data.row(i), theta, lambda); });
    return c;
  }
};

/// Root of the estimating equation over the n-1 rows other than row i
/// (0-based), warm-started at `warm_start`.
inline SolveResult solve_loo(const ModelSpec& model, const Dataset& data, const Vec& lambda, Eigen::Index i,
                             const Vec& warm_start, const SolverOptions& opt = {}, const LooCache* cache = nullptr) {
  const Eigen::Index n = data.n();
  if (n < 3) throw Error(ErrorCode::InvalidInput, "leave-one-out needs n >= 3");
  if (i < 0 || i >= n) throw Error(ErrorCode::InvalidInput, "row index out of range");
  const double denom = static_cast<double>(n - 1);
  const bool use_cache = cache != nullptr && cache->theta.size() == warm_start.size() &&
                         cache->theta == warm_start && cache->lambda == lambda;
  auto residual = [&](const Vec& t) -> Vec {
    if (use_cache && t == cache->theta) return (cache->sum_phi - model.phi(data.row(i), t, lambda)) / denom;
    return mean_phi(model, data, t, lambda, i);
  };
  auto jacobian = [&](const Vec& t) -> Mat {
    if (use_cache && t == cache->theta) return (cache->sum_dphi - model.dphi_dtheta(data.row(i), t, lambda)) / denom;
    return mean_dphi_dtheta(model, data, t, lambda, i);
  };
  return detail::newton(residual, jacobian, warm_start, lambda, model.theta_domain, opt);
}

}  // namespace tuneinf
