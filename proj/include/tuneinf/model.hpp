#pragma once

// User-pluggable estimating functions phi(z, theta, lambda) and losses
// psi(z, theta). Missing derivative handles are filled with central
// finite differences by complete().

#include "tuneinf/core.hpp"

#include <cfloat>
#include <string>

namespace tuneinf {

using PhiFn = std::function<Vec(RowRef z, const Vec& theta, const Vec& lambda)>;
using PhiMatFn = std::function<Mat(RowRef z, const Vec& theta, const Vec& lambda)>;
using PhiMatListFn = std::function<std::vector<Mat>(RowRef z, const Vec& theta, const Vec& lambda)>;

using LossFn = std::function<double(RowRef z, const Vec& theta)>;
using LossGradFn = std::function<Vec(RowRef z, const Vec& theta)>;
using LossHessFn = std::function<Mat(RowRef z, const Vec& theta)>;

namespace fd {

/// Central-difference step for first derivatives.
inline double first_step(double x) { return std::cbrt(DBL_EPSILON) * (1.0 + std::abs(x)); }
/// Step for nested second differences.
inline double second_step(double x) { return std::sqrt(std::sqrt(DBL_EPSILON)) * (1.0 + std::abs(x)); }

/// Jacobian (m x k) of a vector function of x by central differences.
template <class F>
Mat jacobian(F&& f, const Vec& x, double (*step)(double) = first_step) {
  Vec xp = x;
  Mat jac;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = step(x[k]);
    xp[k] = x[k] + h;
    const Vec fp = f(xp);
    xp[k] = x[k] - h;
    const Vec fm = f(xp);
    xp[k] = x[k];
    if (k == 0) jac.resize(fp.size(), x.size());
    jac.col(k) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

/// Gradient of a scalar function by central differences.
template <class F>
Vec gradient(F&& f, const Vec& x, double (*step)(double) = first_step) {
  Vec xp = x;
  Vec g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = step(x[k]);
    xp[k] = x[k] + h;
    const double fp = f(xp);
    xp[k] = x[k] - h;
    const double fm = f(xp);
    xp[k] = x[k];
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Hessian of a scalar function by nested central differences.
template <class F>
Mat hessian(F&& f, const Vec& x) {
  const Eigen::Index k = x.size();
  Mat h(k, k);
  Vec xp = x;
  const double f0 = f(x);
  for (Eigen::Index a = 0; a < k; ++a) {
    const double ha = second_step(x[a]);
    xp[a] = x[a] + ha;
    const double fp = f(xp);
    xp[a] = x[a] - ha;
    const double fm = f(xp);
    xp[a] = x[a];
    h(a, a) = (fp - 2.0 * f0 + fm) / (ha * ha);
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const double hb = second_step(x[b]);
      double acc = 0.0;
      for (int sa : {1, -1})
        for (int sb : {1, -1}) {
          xp[a] = x[a] + sa * ha;
          xp[b] = x[b] + sb * hb;
          acc += sa * sb * f(xp);
        }
      xp[a] = x[a];
      xp[b] = x[b];
      h(a, b) = h(b, a) = acc / (4.0 * ha * hb);
    }
  }
  return h;
}

}  // namespace fd

/// Estimating function phi: R^{d+p+q} -> R^p with its derivatives.
struct ModelSpec {
  std::string name = "custom";
  int p = 0;
  int q = 0;
  int d = 0;
  PhiFn phi;
  PhiMatFn dphi_dtheta;                  // p x p
  PhiMatFn dphi_dlambda;                 // p x q
  PhiMatListFn hess_phi_theta;           // p matrices, H_theta phi^k
  PhiMatListFn dphi_dlambda_dtheta;      // q matrices, d/dlambda_j d_theta phi
  std::optional<Box> theta_domain;
  Box lambda_domain;
  /// Starting point used when the caller gives none.
  Vec theta_start;

  bool complete() const {
    return phi && dphi_dtheta && dphi_dlambda && hess_phi_theta && dphi_dlambda_dtheta;
  }
};

/// Loss psi: R^{d+p} -> R with gradient and Hessian in theta.
struct LossSpec {
  std::string name = "custom";
  LossFn psi;
  LossGradFn grad_psi;
  LossHessFn hess_psi;

  bool complete() const { return psi && grad_psi && hess_psi; }
};

/// Populates every missing derivative slot of `model` with finite
/// differences. Second derivatives difference the first-derivative handle
/// (analytic or not) rather than phi itself.
inline ModelSpec complete(ModelSpec model) {
  if (!model.phi) throw Error(ErrorCode::InvalidInput, "model has no phi handle");
  if (model.p <= 0 || model.q <= 0 || model.d <= 0)
    throw Error(ErrorCode::InvalidInput, "model dimensions p, q, d must be positive");
  if (model.lambda_domain.dim() != model.q)
    throw Error(ErrorCode::InvalidInput, "lambda_domain dimension differs from q");
  model.lambda_domain.validate_strict();
  if (model.theta_start.size() == 0) model.theta_start = Vec::Zero(model.p);

  const PhiFn phi = model.phi;
  const int p = model.p;
  const int q = model.q;
  // differencing a numerical Jacobian needs the wider second-order step
  auto outer_step = model.dphi_dtheta ? fd::first_step : fd::second_step;
  if (!model.dphi_dtheta) {
    model.dphi_dtheta = [phi](RowRef z, const Vec& th, const Vec& la) {
      return fd::jacobian([&](const Vec& t) { return phi(z, t, la); }, th);
    };
  }
  if (!model.dphi_dlambda) {
    model.dphi_dlambda = [phi](RowRef z, const Vec& th, const Vec& la) {
      return fd::jacobian([&](const Vec& l) { return phi(z, th, l); }, la);
    };
  }
  if (!model.hess_phi_theta) {
    const PhiMatFn jac = model.dphi_dtheta;
    model.hess_phi_theta = [jac, p, outer_step](RowRef z, const Vec& th, const Vec& la) {
      // d/dtheta_m of row k of the Jacobian gives H phi^k (k, m).
      std::vector<Mat> out(static_cast<std::size_t>(p), Mat::Zero(p, p));
      Vec tp = th;
      for (int m = 0; m < p; ++m) {
        const double h = outer_step(th[m]);
        tp[m] = th[m] + h;
        const Mat jp = jac(z, tp, la);
        tp[m] = th[m] - h;
        const Mat jm = jac(z, tp, la);
        tp[m] = th[m];
        const Mat dj = (jp - jm) / (2.0 * h);
        for (int k = 0; k < p; ++k) out[static_cast<std::size_t>(k)].col(m) = dj.row(k).transpose();
      }
      for (auto& h : out) h = symmetrize(h);
      return out;
    };
  }
  if (!model.dphi_dlambda_dtheta) {
    const PhiMatFn jac = model.dphi_dtheta;
    model.dphi_dlambda_dtheta = [jac, q, outer_step](RowRef z, const Vec& th, const Vec& la) {
      std::vector<Mat> out;
      out.reserve(static_cast<std::size_t>(q));
      Vec lp = la;
      for (int j = 0; j < q; ++j) {
        const double h = outer_step(la[j]);
        lp[j] = la[j] + h;
        const Mat jp = jac(z, th, lp);
        lp[j] = la[j] - h;
        const Mat jm = jac(z, th, lp);
        lp[j] = la[j];
        out.push_back((jp - jm) / (2.0 * h));
      }
      return out;
    };
  }
  return model;
}

/// Same rules as complete(ModelSpec) for a loss.
inline LossSpec complete(LossSpec loss) {
  if (!loss.psi) throw Error(ErrorCode::InvalidInput, "loss has no psi handle");
  const LossFn psi = loss.psi;
  auto outer_step = loss.grad_psi ? fd::first_step : fd::second_step;
  if (!loss.grad_psi) {
    loss.grad_psi = [psi](RowRef z, const Vec& th) {
      return fd::gradient([&](const Vec& t) { return psi(z, t); }, th);
    };
  }
  if (!loss.hess_psi) {
    const LossGradFn grad = loss.grad_psi;
    loss.hess_psi = [grad, outer_step](RowRef z, const Vec& th) {
      return symmetrize(fd::jacobian([&](const Vec& t) { return grad(z, t); }, th, outer_step));
    };
  }
  return loss;
}

/// Drops every analytic derivative so complete() rebuilds them numerically.
inline ModelSpec strip_derivatives(ModelSpec m) {
  m.dphi_dtheta = nullptr;
  m.dphi_dlambda = nullptr;
  m.hess_phi_theta = nullptr;
  m.dphi_dlambda_dtheta = nullptr;
  return m;
}

inline LossSpec strip_derivatives(LossSpec l) {
  l.grad_psi = nullptr;
  l.hess_psi = nullptr;
  return l;
}

/// Constant loss; handy for checks where every criterion must equal c.
inline LossSpec constant_loss(double c, int p) {
  LossSpec l;
  l.name = "constant";
  l.psi = [c](RowRef, const Vec&) { return c; };
  l.grad_psi = [p](RowRef, const Vec&) { return Vec::Zero(p).eval(); };
  l.hess_psi = [p](RowRef, const Vec&) { return Mat::Zero(p, p).eval(); };
  return l;
}

}  // namespace tuneinf
