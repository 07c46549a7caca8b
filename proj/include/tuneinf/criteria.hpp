#pragma once

// Risk criteria as functions of lambda.

#include "tuneinf/solver.hpp"

#include <map>

namespace tuneinf {

enum class CriterionKind { TE, CV_EXACT, CV_FAST, TE_TRACE_CORRECTED, HOLDOUT, AIC, BIC, TIC };

inline const char* to_string(CriterionKind k) {
  switch (k) {
    case CriterionKind::TE: return "TE";
    case CriterionKind::CV_EXACT: return "CV_EXACT";
    case CriterionKind::CV_FAST: return "CV_FAST";
    case CriterionKind::TE_TRACE_CORRECTED: return "TE_TRACE_CORRECTED";
    case CriterionKind::HOLDOUT: return "HOLDOUT";
    case CriterionKind::AIC: return "AIC";
    case CriterionKind::BIC: return "BIC";
    case CriterionKind::TIC: return "TIC";
  }
  return "?";
}

inline CriterionKind criterion_from_string(const std::string& s) {
  for (auto k : {CriterionKind::TE, CriterionKind::CV_EXACT, CriterionKind::CV_FAST, CriterionKind::TE_TRACE_CORRECTED,
                 CriterionKind::HOLDOUT, CriterionKind::AIC, CriterionKind::BIC, CriterionKind::TIC})
    if (s == to_string(k)) return k;
  if (s == "te") return CriterionKind::TE;
  if (s == "cv" || s == "cv_exact") return CriterionKind::CV_EXACT;
  if (s == "cv_fast") return CriterionKind::CV_FAST;
  if (s == "te_trace" || s == "te_trace_corrected") return CriterionKind::TE_TRACE_CORRECTED;
  if (s == "holdout") return CriterionKind::HOLDOUT;
  if (s == "aic") return CriterionKind::AIC;
  if (s == "bic") return CriterionKind::BIC;
  if (s == "tic") return CriterionKind::TIC;
  throw Error(ErrorCode::InvalidInput, "unknown criterion '" + s + "'");
}

struct CriterionValue {
  double value = 0.0;
  CriterionKind method = CriterionKind::TE;
  Vec lambda;
  /// theta_hat(lambda) on the data the criterion fitted.
  Vec theta_hat;
  std::map<std::string, double> diagnostics;
};

struct CriterionOptions {
  SolverOptions solver;
  /// Start for the full-data solve; unset means model.theta_start.
  std::optional<Vec> theta_init;
  /// Fraction of rows used for evaluation by HOLDOUT.
  double holdout_fraction = 0.5;
  std::uint64_t holdout_seed = 0;
  /// Largest tolerated share of failed leave-one-out refits.
  double max_refit_failure_rate = 0.01;
};

namespace detail {

inline SolveResult full_fit(const ModelSpec& model, const Dataset& data, const Vec& lambda,
                            const CriterionOptions& opt) {
  const Vec start = opt.theta_init ? *opt.theta_init : model.theta_start;
  try {
    return solve_theta(model, data, lambda, start, opt.solver);
  } catch (const Error& e) {
    if (!opt.theta_init || e.code() == ErrorCode::InvalidInput) throw;
    return solve_theta(model, data, lambda, model.theta_start, opt.solver);
  }
}

inline double mean_loss(const LossSpec& loss, const Dataset& data, const Vec& theta) {
  const double s = pairwise_sum<double>(0, data.n(), [&](Eigen::Index i) { return loss.psi(data.row(i), theta); });
  const double v = s / static_cast<double>(data.n());
  if (!std::isfinite(v)) throw Error(ErrorCode::Evaluation, "loss is not finite at theta_hat");
  return v;
}

/// n^{-1} Tr(J^{-1} C), C = n^{-1} sum phi_i grad psi_i^T.
inline double trace_correction(const ModelSpec& model, const LossSpec& loss, const Dataset& data,
                               const SolveResult& fit) {
  const Mat Jinv = checked_inverse(fit.J_hat, "J_hat");
  const Mat C = pairwise_sum<Mat>(0, data.n(), [&](Eigen::Index i) -> Mat {
                  return model.phi(data.row(i), fit.theta_hat, fit.lambda) *
                         loss.grad_psi(data.row(i), fit.theta_hat).transpose();
                }) /
                static_cast<double>(data.n());
  return (Jinv * C).trace() / static_cast<double>(data.n());
}

inline CriterionValue make_value(CriterionKind k, double v, const SolveResult& fit) {
  if (!std::isfinite(v)) throw Error(ErrorCode::Evaluation, std::string(to_string(k)) + " is not finite");
  CriterionValue out;
  out.value = v;
  out.method = k;
  out.lambda = fit.lambda;
  out.theta_hat = fit.theta_hat;
  return out;
}

}  // namespace detail

/// TE(lambda) = n^{-1} sum psi(Z_i, theta_hat(lambda)).
inline CriterionValue training_error(const ModelSpec& model, const LossSpec& loss, const Dataset& data,
                                     const Vec& lambda, const CriterionOptions& opt = {}) {
  CriterionOptions o = opt;
  o.solver.want_jacobian = false;
  const SolveResult fit = detail::full_fit(model, data, lambda, o);
  return detail::make_value(CriterionKind::TE, detail::mean_loss(loss, data, fit.theta_hat), fit);
}

/// Exact leave-one-out risk: n refits, each warm-started at theta_hat(lambda).
/// A failed refit is retried once from model.theta_start.
inline CriterionValue loocv_exact(const ModelSpec& model, const LossSpec& loss, const Dataset& data,
                                  const Vec& lambda, const CriterionOptions& opt = {}) {
  const Eigen::Index n = data.n();
  if (n < 3) throw Error(ErrorCode::InvalidInput, "leave-one-out needs n >= 3");
  CriterionOptions o = opt;
  o.solver.want_jacobian = false;
  const SolveResult fit = detail::full_fit(model, data, lambda, o);
  const LooCache cache = LooCache::build(model, data, fit.theta_hat, lambda);

  SolverOptions loo_opt = opt.solver;
  loo_opt.want_jacobian = false;
  loo_opt.polish = false;
  // the full-data tolerance is scaled by |theta_init|; keep the same scale
  if (!loo_opt.tol) loo_opt.tol = 1e-10 * (1.0 + fit.theta_hat.norm());

  std::vector<double> losses(static_cast<std::size_t>(n), 0.0);
  std::vector<char> failed(static_cast<std::size_t>(n), 0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    std::optional<SolveResult> r;
    try {
      r = solve_loo(model, data, lambda, i, fit.theta_hat, loo_opt, &cache);
    } catch (const Error&) {
      try {
        r = solve_loo(model, data, lambda, i, model.theta_start, loo_opt);
      } catch (const Error&) {
      }
    }
    if (!r) {
      failed[k] = 1;
      return;
    }
    losses[k] = loss.psi(data.row(i), r->theta_hat);
  });

  std::vector<Eigen::Index> bad;
  for (Eigen::Index i = 0; i < n; ++i)
    if (failed[static_cast<std::size_t>(i)]) bad.push_back(i);
  const double rate = static_cast<double>(bad.size()) / static_cast<double>(n);
  if (rate > opt.max_refit_failure_rate) {
    std::string rows;
    for (std::size_t k = 0; k < bad.size() && k < 10; ++k) rows += (k ? "," : "") + std::to_string(bad[k] + 1);
    throw Error(ErrorCode::RefitFailure,
                std::to_string(bad.size()) + " of " + std::to_string(n) + " refits failed (rows " + rows + ")");
  }
  const Eigen::Index used = n - static_cast<Eigen::Index>(bad.size());
  const double s = pairwise_sum<double>(0, n, [&](Eigen::Index i) { return losses[static_cast<std::size_t>(i)]; });
  auto out = detail::make_value(CriterionKind::CV_EXACT, s / static_cast<double>(used), fit);
  out.diagnostics["refit_failures"] = static_cast<double>(bad.size());
  return out;
}

/// Influence approximation theta_(-i) ~ theta_hat - n^{-1} J_hat^{-1} phi_i,
/// with no refitting.
inline CriterionValue loocv_fast(const ModelSpec& model, const LossSpec& loss, const Dataset& data,
                                 const Vec& lambda, const CriterionOptions& opt = {}) {
  CriterionOptions o = opt;
  o.solver.want_jacobian = true;
  const SolveResult fit = detail::full_fit(model, data, lambda, o);
  const Mat Jinv = checked_inverse(fit.J_hat, "J_hat");
  const double n = static_cast<double>(data.n());
  const double s = pairwise_sum<double>(0, data.n(), [&](Eigen::Index i) {
    const Vec shift = Jinv * model.phi(data.row(i), fit.theta_hat, lambda) / n;
    return loss.psi(data.row(i), fit.theta_hat - shift);
  });
  auto out = detail::make_value(CriterionKind::CV_FAST, s / n, fit);
  out.diagnostics["trace_correction"] = detail::trace_correction(model, loss, data, fit);
  return out;
}

/// TE(lambda) - n^{-1} Tr(J_hat^{-1} C_hat).
inline CriterionValue te_trace_corrected(const ModelSpec& model, const LossSpec& loss, const Dataset& data,
                                         const Vec& lambda, const CriterionOptions& opt = {}) {
  CriterionOptions o = opt;
  o.solver.want_jacobian = true;
  const SolveResult fit = detail::full_fit(model, data, lambda, o);
  const double te = detail::mean_loss(loss, data, fit.theta_hat);
  const double tc = detail::trace_correction(model, loss, data, fit);
  auto out = detail::make_value(CriterionKind::TE_TRACE_CORRECTED, te - tc, fit);
  out.diagnostics["trace_correction"] = tc;
  out.diagnostics["training_error"] = te;
  return out;
}

/// Row split used by holdout_error: the first floor(p1 n) shuffled rows
/// evaluate the loss, the remaining rows fit theta.
struct HoldoutSplit {
  std::vector<Eigen::Index> tuning;
  std::vector<Eigen::Index> estimation;
};

inline HoldoutSplit holdout_split(Eigen::Index n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorCode::InvalidInput, "holdout fraction must be in (0,1)");
  const auto idx = shuffled_indices(n, seed);
  const auto n1 = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  HoldoutSplit s;
  s.tuning.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n1));
  s.estimation.assign(idx.begin() + static_cast<std::ptrdiff_t>(n1), idx.end());
  return s;
}

inline CriterionValue holdout_error(const ModelSpec& model, const LossSpec& loss, const Dataset& data,
                                    const Vec& lambda, const CriterionOptions& opt = {}) {
  const auto split = holdout_split(data.n(), opt.holdout_fraction, opt.holdout_seed);
  const auto need = static_cast<std::size_t>(model.p + 1);
  if (split.tuning.size() < need || split.estimation.size() < need)
    throw Error(ErrorCode::InvalidInput, "each holdout part needs at least p+1 rows");
  const Dataset est = data.subset(split.estimation);
  const Dataset tun = data.subset(split.tuning);
  CriterionOptions o = opt;
  o.solver.want_jacobian = false;
  const SolveResult fit = detail::full_fit(model, est, lambda, o);
  auto out = detail::make_value(CriterionKind::HOLDOUT, detail::mean_loss(loss, tun, fit.theta_hat), fit);
  out.diagnostics["tuning_rows"] = static_cast<double>(split.tuning.size());
  return out;
}

/// AIC, BIC and TIC for a likelihood model whose loss is -log f. The
/// criteria are -n^{-1} loglik plus n^{-1} p, n^{-1} p log n and
/// n^{-1} Tr(J_hat^{-1} K_hat) respectively.
inline CriterionValue info_criterion(const ModelSpec& model, const LossSpec& neg_loglik, const Dataset& data,
                                     const Vec& lambda, CriterionKind kind, const CriterionOptions& opt = {}) {
  if (kind != CriterionKind::AIC && kind != CriterionKind::BIC && kind != CriterionKind::TIC)
    throw Error(ErrorCode::InvalidInput, "info_criterion expects AIC, BIC or TIC");
  CriterionOptions o = opt;
  o.solver.want_jacobian = kind == CriterionKind::TIC;
  const SolveResult fit = detail::full_fit(model, data, lambda, o);
  const double n = static_cast<double>(data.n());
  const double p = static_cast<double>(model.p);
  const double nll = detail::mean_loss(neg_loglik, data, fit.theta_hat);
  if (kind == CriterionKind::AIC) return detail::make_value(kind, nll + p / n, fit);
  if (kind == CriterionKind::BIC) return detail::make_value(kind, nll + p * std::log(n) / n, fit);
  const Mat Jinv = checked_inverse(fit.J_hat, "J_hat");
  const Mat K = pairwise_sum<Mat>(0, data.n(), [&](Eigen::Index i) -> Mat {
                  const Vec f = model.phi(data.row(i), fit.theta_hat, lambda);
                  return f * f.transpose();
                }) /
                n;
  const double tc = (Jinv * K).trace() / n;
  auto out = detail::make_value(kind, nll + tc, fit);
  out.diagnostics["trace_correction"] = tc;
  return out;
}

/// Dispatches on `kind`. For AIC/BIC/TIC `loss` must be -log f.
inline CriterionValue evaluate_criterion(CriterionKind kind, const ModelSpec& model, const LossSpec& loss,
                                         const Dataset& data, const Vec& lambda, const CriterionOptions& opt = {}) {
  switch (kind) {
    case CriterionKind::TE: return training_error(model, loss, data, lambda, opt);
    case CriterionKind::CV_EXACT: return loocv_exact(model, loss, data, lambda, opt);
    case CriterionKind::CV_FAST: return loocv_fast(model, loss, data, lambda, opt);
    case CriterionKind::TE_TRACE_CORRECTED: return te_trace_corrected(model, loss, data, lambda, opt);
    case CriterionKind::HOLDOUT: return holdout_error(model, loss, data, lambda, opt);
    default: return info_criterion(model, loss, data, lambda, kind, opt);
  }
}

}  // namespace tuneinf
