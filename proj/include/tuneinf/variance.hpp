#pragma once

// Plug-in variance of sqrt(n)(theta_hat(lambda_hat) - theta_0) with the
// tuning step included (V1), the pointwise sandwich (V2) and the variance
// of the full vector alpha = (theta, lambda, vec D).

#include "tuneinf/tuner.hpp"

namespace tuneinf {

/// (phi, D' grad psi, vec(d_theta phi D + d_lambda phi)), length p+q+pq.
inline Vec eta(RowRef z, const Vec& theta, const Vec& lambda, const Mat& D, const ModelSpec& model,
               const LossSpec& loss) {
  const int p = model.p, q = model.q;
  Vec out(p + q + p * q);
  out.head(p) = model.phi(z, theta, lambda);
  out.segment(p, q) = D.transpose() * loss.grad_psi(z, theta);
  const Mat e3 = model.dphi_dtheta(z, theta, lambda) * D + model.dphi_dlambda(z, theta, lambda);
  out.tail(p * q) = flatten(e3);
  return out;
}

struct VarianceComponents {
  Eigen::Index n = 0;
  Vec theta_hat;
  Vec lambda_hat;
  Mat J_hat;
  Mat K_hat;
  Mat D_hat;
  /// False at boundary fits: only J_hat, K_hat and D_hat are populated.
  bool full = false;
  /// D_hat is exactly zero, so tuning cannot move theta.
  bool collapsed = false;
  Mat Z1_hat;
  Mat Z2_hat;
  Vec b_hat;
  std::vector<Mat> W_blocks;  // W^j, p x p each
  Mat W_hat;                  // q x p
  Mat M_hat;                  // q x pq
  Mat Kstar_hat;
  Mat A1, A2, A3, Astar;
};

/// Which curve Z1_hat is the second derivative of. Both estimate the
/// curvature of the limiting risk at lambda_0; at a CV minimizer the CV
/// curvature is nonnegative while TE'' can take either sign in small samples.
enum class Z1Source { TUNING_CRITERION, TRAINING_ERROR };

struct VarianceOptions {
  Z1Source z1_source = Z1Source::TUNING_CRITERION;
  /// Options for re-evaluating the tuning criterion (holdout split etc.).
  CriterionOptions criterion;
  /// Second derivative of TE by differencing TE'(lambda) = b(lambda)' D(lambda)
  /// at refits instead of differencing TE itself.
  bool z1_chain_rule = false;
  /// Produce J and K only at boundary fits instead of throwing BoundaryFit.
  bool partial_at_boundary = true;
  SolverOptions solver;
};

namespace detail {

inline Mat mean_outer(const Dataset& data, const std::function<Vec(RowRef)>& f) {
  return pairwise_sum<Mat>(0, data.n(), [&](Eigen::Index i) -> Mat {
           const Vec v = f(data.row(i));
           return v * v.transpose();
         }) /
         static_cast<double>(data.n());
}

/// TE at lambda, warm-started at theta_warm.
inline double profiled_te(const ModelSpec& model, const LossSpec& loss, const Dataset& data, const Vec& lambda,
                          const Vec& theta_warm, const SolverOptions& so) {
  SolverOptions o = so;
  o.want_jacobian = false;
  const SolveResult s = solve_theta(model, data, lambda, theta_warm, o);
  return mean_loss(loss, data, s.theta_hat);
}

/// TE'(lambda) = b(lambda)' D(lambda) from a refit at lambda.
inline Vec te_gradient(const ModelSpec& model, const LossSpec& loss, const Dataset& data, const Vec& lambda,
                       const Vec& theta_warm, const SolverOptions& so) {
  SolverOptions o = so;
  o.want_jacobian = true;
  const SolveResult s = solve_theta(model, data, lambda, theta_warm, o);
  const Mat D = theta_prime(model, data, s);
  const Vec b = pairwise_sum<Vec>(0, data.n(), [&](Eigen::Index i) -> Vec {
                  return loss.grad_psi(data.row(i), s.theta_hat);
                }) /
                static_cast<double>(data.n());
  return D.transpose() * b;
}

/// Hessian of a scalar function of lambda by central differences,
/// Richardson combined over steps h and h/2.
inline Mat lambda_hessian(const std::function<double(const Vec&)>& te, const Vec& lambda) {
  const Eigen::Index q = lambda.size();
  auto hess_at = [&](double scale) {
    Mat H(q, q);
    const double f0 = te(lambda);
    Vec l = lambda;
    for (Eigen::Index a = 0; a < q; ++a) {
      const double ha = scale * 1e-3 * (1.0 + std::abs(lambda[a]));
      l[a] = lambda[a] + ha;
      const double fp = te(l);
      l[a] = lambda[a] - ha;
      const double fm = te(l);
      l[a] = lambda[a];
      H(a, a) = (fp - 2.0 * f0 + fm) / (ha * ha);
      for (Eigen::Index b = a + 1; b < q; ++b) {
        const double hb = scale * 1e-3 * (1.0 + std::abs(lambda[b]));
        double acc = 0.0;
        for (int sa : {1, -1})
          for (int sb : {1, -1}) {
            l[a] = lambda[a] + sa * ha;
            l[b] = lambda[b] + sb * hb;
            acc += sa * sb * te(l);
          }
        l[a] = lambda[a];
        l[b] = lambda[b];
        H(a, b) = H(b, a) = acc / (4.0 * ha * hb);
      }
    }
    return H;
  };
  const Mat h1 = hess_at(1.0);
  const Mat h2 = hess_at(0.5);
  return symmetrize((4.0 * h2 - h1) / 3.0);
}

inline Mat te_hessian(const ModelSpec& model, const LossSpec& loss, const Dataset& data, const Vec& lambda,
                      const Vec& theta, const SolverOptions& so) {
  return lambda_hessian([&](const Vec& l) { return profiled_te(model, loss, data, l, theta, so); }, lambda);
}

/// Same Hessian from central differences of the analytic-chain gradient.
inline Mat te_hessian_chain(const ModelSpec& model, const LossSpec& loss, const Dataset& data, const Vec& lambda,
                            const Vec& theta, const SolverOptions& so) {
  const Eigen::Index q = lambda.size();
  auto jac_at = [&](double scale) {
    Mat H(q, q);
    Vec l = lambda;
    for (Eigen::Index a = 0; a < q; ++a) {
      const double h = scale * 1e-3 * (1.0 + std::abs(lambda[a]));
      l[a] = lambda[a] + h;
      const Vec gp = te_gradient(model, loss, data, l, theta, so);
      l[a] = lambda[a] - h;
      const Vec gm = te_gradient(model, loss, data, l, theta, so);
      l[a] = lambda[a];
      H.col(a) = (gp - gm) / (2.0 * h);
    }
    return H;
  };
  const Mat h1 = jac_at(1.0);
  const Mat h2 = jac_at(0.5);
  return symmetrize((4.0 * h2 - h1) / 3.0);
}

}  // namespace detail

/// Every plug-in quantity at the tuned point.
inline VarianceComponents assemble_components(const ModelSpec& model, const LossSpec& loss, const Dataset& data,
                                              const FitResult& fit, const VarianceOptions& opt = {}) {
  const int p = model.p, q = model.q;
  const double n = static_cast<double>(data.n());
  const Vec& th = fit.theta_hat;
  const Vec& la = fit.lambda_hat;
  VarianceComponents c;
  c.n = data.n();
  c.theta_hat = th;
  c.lambda_hat = la;
  c.J_hat = -mean_dphi_dtheta(model, data, th, la);
  c.K_hat = symmetrize(detail::mean_outer(data, [&](RowRef z) { return model.phi(z, th, la); }));
  const Mat Jinv = checked_inverse(c.J_hat, "J_hat");
  c.D_hat = Jinv * mean_dphi_dlambda(model, data, th, la);
  c.collapsed = (c.D_hat.array() == 0.0).all();

  if (!fit.interior()) {
    if (!opt.partial_at_boundary)
      throw Error(ErrorCode::BoundaryFit, "full variance assembly requested at a boundary fit");
    return c;
  }
  c.full = true;
  const Mat& D = c.D_hat;

  c.Z2_hat = symmetrize(pairwise_sum<Mat>(0, data.n(), [&](Eigen::Index i) -> Mat {
                          return loss.hess_psi(data.row(i), th);
                        }) /
                        n);
  c.b_hat = pairwise_sum<Vec>(0, data.n(), [&](Eigen::Index i) -> Vec { return loss.grad_psi(data.row(i), th); }) / n;

  // W^j: row k is D_j' H phi^k, plus d_lambda_j d_theta phi
  c.W_blocks.assign(static_cast<std::size_t>(q), Mat::Zero(p, p));
  for (int j = 0; j < q; ++j) {
    c.W_blocks[static_cast<std::size_t>(j)] = pairwise_sum<Mat>(0, data.n(), [&](Eigen::Index i) -> Mat {
                                                const auto z = data.row(i);
                                                const auto H = model.hess_phi_theta(z, th, la);
                                                Mat w = model.dphi_dlambda_dtheta(z, th, la)[static_cast<std::size_t>(j)];
                                                for (int k = 0; k < p; ++k)
                                                  w.row(k) += D.col(j).transpose() * H[static_cast<std::size_t>(k)];
                                                return w;
                                              }) /
                                              n;
  }
  const Eigen::RowVectorXd bJ = c.b_hat.transpose() * Jinv;
  c.M_hat = Mat::Zero(q, p * q);
  c.W_hat = Mat::Zero(q, p);
  for (int j = 0; j < q; ++j) {
    c.M_hat.block(j, j * p, 1, p) = bJ;
    c.W_hat.row(j) = bJ * c.W_blocks[static_cast<std::size_t>(j)];
  }

  c.Kstar_hat = symmetrize(detail::mean_outer(data, [&](RowRef z) { return eta(z, th, la, D, model, loss); }));

  if (c.collapsed) {
    c.Z1_hat = Mat::Zero(q, q);
    c.A1 = Jinv;
    c.A2 = Mat::Zero(p, q);
    c.A3 = Mat::Zero(p, p * q);
  } else {
    if (opt.z1_chain_rule) {
      c.Z1_hat = detail::te_hessian_chain(model, loss, data, la, th, opt.solver);
    } else if (opt.z1_source == Z1Source::TRAINING_ERROR || fit.criterion == CriterionKind::TE) {
      c.Z1_hat = detail::te_hessian(model, loss, data, la, th, opt.solver);
    } else {
      CriterionOptions co = opt.criterion;
      co.solver = opt.solver;
      co.theta_init = th;
      const CriterionFn f = make_criterion(model, loss, data, fit.criterion, fit.seed, co);
      c.Z1_hat = detail::lambda_hessian([&](const Vec& l) { return f(l).value; }, la);
    }
    const Mat Z1inv = checked_inverse(c.Z1_hat, "Z1_hat");
    c.A1 = Jinv - D * Z1inv * (D.transpose() * c.Z2_hat + c.W_hat) * Jinv;
    c.A2 = -D * Z1inv;
    c.A3 = -D * Z1inv * c.M_hat;
  }
  c.Astar.resize(p, p + q + p * q);
  c.Astar << c.A1, c.A2, c.A3;
  return c;
}

/// V1 = A* K* A*'.
inline Mat variance_tuned(const VarianceComponents& c) {
  if (!c.full) throw Error(ErrorCode::BoundaryFit, "V1 needs the full component set");
  return symmetrize(c.Astar * c.Kstar_hat * c.Astar.transpose());
}

/// V2 = J^{-1} K J^{-T}.
inline Mat variance_pointwise(const VarianceComponents& c) {
  const Mat Jinv = checked_inverse(c.J_hat, "J_hat");
  return symmetrize(Jinv * c.K_hat * Jinv.transpose());
}

/// Empirical Jacobian of alpha -> n^{-1} sum eta(Z_i, alpha) by central
/// differences.
inline Mat eta_mean_jacobian(const ModelSpec& model, const LossSpec& loss, const Dataset& data, const Vec& theta,
                             const Vec& lambda, const Mat& D) {
  const int p = model.p, q = model.q;
  Vec alpha(p + q + p * q);
  alpha << theta, lambda, flatten(D);
  auto mean_eta = [&](const Vec& a) -> Vec {
    const Vec t = a.head(p);
    const Vec l = a.segment(p, q);
    const Mat d = unflatten(a.tail(p * q), p, q);
    return pairwise_sum<Vec>(0, data.n(), [&](Eigen::Index i) -> Vec { return eta(data.row(i), t, l, d, model, loss); }) /
           static_cast<double>(data.n());
  };
  return fd::jacobian(mean_eta, alpha);
}

/// V_alpha = Psi'^{-1} K* Psi'^{-T} for alpha = (theta, lambda, vec D).
inline Mat variance_alpha(const ModelSpec& model, const LossSpec& loss, const Dataset& data, const FitResult& fit) {
  if (!fit.interior()) throw Error(ErrorCode::BoundaryFit, "V_alpha needs an interior fit");
  const Vec& th = fit.theta_hat;
  const Vec& la = fit.lambda_hat;
  SolveResult s;
  s.theta_hat = th;
  s.lambda = la;
  s.J_hat = -mean_dphi_dtheta(model, data, th, la);
  const Mat D = theta_prime(model, data, s);
  const Mat P = eta_mean_jacobian(model, loss, data, th, la, D);
  Eigen::JacobiSVD<Mat> svd(P);
  const auto& sv = svd.singularValues();
  if (!(sv[sv.size() - 1] >= 1e-8 * sv[0]))
    throw Error(ErrorCode::FlatLimitSuspected, "Psi' is numerically singular (theta_0(lambda) looks flat)");
  const Mat Pinv = checked_inverse(P, "Psi'");
  const Mat Kstar = symmetrize(pairwise_sum<Mat>(0, data.n(), [&](Eigen::Index i) -> Mat {
                                 const Vec e = eta(data.row(i), th, la, D, model, loss);
                                 return e * e.transpose();
                               }) /
                               static_cast<double>(data.n()));
  return symmetrize(Pinv * Kstar * Pinv.transpose());
}

enum class VarianceChoice { V1, V2 };

inline const char* to_string(VarianceChoice v) { return v == VarianceChoice::V1 ? "V1" : "V2"; }

struct VarianceReport {
  std::optional<Mat> V1;
  Mat V2;
  std::optional<Mat> V_alpha;
  VarianceChoice selected = VarianceChoice::V2;
  Vec standard_errors;
  std::vector<BoundaryStatus> boundary_status;
  /// Boundary fit with near-zero slope: the limit is a normal mixture and
  /// V2 is only a stand-in.
  bool nondegenerate_boundary = false;
  bool collapsed = false;
  bool flat_limit_suspected = false;
  Eigen::Index n = 0;

  const Mat& selected_matrix() const { return selected == VarianceChoice::V1 ? *V1 : V2; }
};

/// V1 for interior fits, V2 otherwise.
inline VarianceReport select_variance(const VarianceComponents& c, const FitResult& fit) {
  VarianceReport r;
  r.n = c.n;
  r.V2 = variance_pointwise(c);
  r.boundary_status = fit.boundary_status;
  r.collapsed = c.collapsed;
  if (fit.interior() && c.full) {
    r.V1 = variance_tuned(c);
    r.selected = VarianceChoice::V1;
  } else {
    r.selected = VarianceChoice::V2;
    r.nondegenerate_boundary = std::any_of(fit.flat_boundary.begin(), fit.flat_boundary.end(), [](bool b) { return b; });
  }
  r.standard_errors = (r.selected_matrix().diagonal().array().max(0.0) / static_cast<double>(c.n)).sqrt();
  return r;
}

/// Full pipeline: components, selection and, for interior fits, V_alpha
/// (a flat-limit failure there is recorded rather than thrown).
inline VarianceReport variance_report(const ModelSpec& model, const LossSpec& loss, const Dataset& data,
                                      const FitResult& fit, const VarianceOptions& opt = {}, bool with_alpha = true) {
  const VarianceComponents c = assemble_components(model, loss, data, fit, opt);
  VarianceReport r = select_variance(c, fit);
  if (with_alpha && fit.interior()) {
    try {
      r.V_alpha = variance_alpha(model, loss, data, fit);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FlatLimitSuspected && e.code() != ErrorCode::SingularJacobian) throw;
      r.flat_limit_suspected = true;
    }
  }
  return r;
}

/// Per-row first-order terms of theta_hat(lambda_hat) (rows A* eta_i) and
/// of lambda_hat (rows -Z1^{-1}[eta2 + M eta3 + (D'Z2 + W) J^{-1} eta1]).
struct TuningInfluence {
  Mat theta;   // n x p
  Mat lambda;  // n x q
};

inline TuningInfluence tuning_influence(const ModelSpec& model, const LossSpec& loss, const Dataset& data,
                                        const VarianceComponents& c) {
  if (!c.full) throw Error(ErrorCode::BoundaryFit, "influence needs the full component set");
  const int p = model.p, q = model.q;
  TuningInfluence out;
  out.theta.resize(data.n(), p);
  out.lambda = Mat::Zero(data.n(), q);
  const Mat Jinv = checked_inverse(c.J_hat, "J_hat");
  Mat Z1inv = Mat::Zero(q, q);
  if (!c.collapsed) Z1inv = checked_inverse(c.Z1_hat, "Z1_hat");
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Vec e = eta(data.row(i), c.theta_hat, c.lambda_hat, c.D_hat, model, loss);
    out.theta.row(i) = (c.Astar * e).transpose();
    if (!c.collapsed) {
      const Vec inner = e.segment(p, q) + c.M_hat * e.tail(p * q) +
                        (c.D_hat.transpose() * c.Z2_hat + c.W_hat) * Jinv * e.head(p);
      out.lambda.row(i) = (-Z1inv * inner).transpose();
    }
  }
  return out;
}

}  // namespace tuneinf
