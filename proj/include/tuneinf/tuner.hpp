#pragma once

// Minimizes a criterion over a lambda box and classifies the minimizer.

#include "tuneinf/criteria.hpp"

namespace tuneinf {

enum class BoundaryStatus { INTERIOR, LOWER_BOUNDARY, UPPER_BOUNDARY };

inline const char* to_string(BoundaryStatus s) {
  switch (s) {
    case BoundaryStatus::INTERIOR: return "INTERIOR";
    case BoundaryStatus::LOWER_BOUNDARY: return "LOWER_BOUNDARY";
    case BoundaryStatus::UPPER_BOUNDARY: return "UPPER_BOUNDARY";
  }
  return "?";
}

inline BoundaryStatus boundary_from_string(const std::string& s) {
  if (s == "INTERIOR") return BoundaryStatus::INTERIOR;
  if (s == "LOWER_BOUNDARY") return BoundaryStatus::LOWER_BOUNDARY;
  if (s == "UPPER_BOUNDARY") return BoundaryStatus::UPPER_BOUNDARY;
  throw Error(ErrorCode::InvalidInput, "unknown boundary status '" + s + "'");
}

struct TracePoint {
  Vec lambda;
  double value = 0.0;
  bool ok = true;
  std::string phase;  // grid, refine, slope
};

struct FitResult {
  Vec theta_hat;
  Vec lambda_hat;
  Mat D_hat;
  Mat J_hat;
  std::vector<BoundaryStatus> boundary_status;
  /// At a boundary but with |slope| within tolerance (limit cases c/d).
  std::vector<bool> flat_boundary;
  CriterionKind criterion = CriterionKind::TE;
  double criterion_value = 0.0;
  Vec criterion_slope_at_opt;
  Vec slope_tolerance;
  Box lambda_domain;
  std::vector<TracePoint> trace;
  int solver_iterations = 0;
  double residual_norm = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;

  bool interior() const {
    return std::all_of(boundary_status.begin(), boundary_status.end(),
                       [](BoundaryStatus s) { return s == BoundaryStatus::INTERIOR; });
  }
};

struct TuneOptions {
  CriterionOptions criterion;
  /// Golden-section / pattern-search stopping width relative to the axis.
  double rel_tol = 1e-6;
  double boundary_rel = 1e-9;
  double slope_rel_step = 1e-5;
  double max_failure_rate = 0.2;
  std::size_t max_grid_points = 10000;
};

using CriterionFn = std::function<CriterionValue(const Vec& lambda)>;

namespace detail {

struct Evaluated {
  Vec lambda;
  double value = std::numeric_limits<double>::infinity();
  bool ok = false;
};

/// Lexicographic (value, lambda) order: ties go to the smaller lambda.
inline bool better(const Evaluated& a, const Evaluated& b) {
  if (a.ok != b.ok) return a.ok;
  if (a.value != b.value) return a.value < b.value;
  for (Eigen::Index j = 0; j < a.lambda.size(); ++j)
    if (a.lambda[j] != b.lambda[j]) return a.lambda[j] < b.lambda[j];
  return false;
}

class Minimizer {
 public:
  Minimizer(const CriterionFn& f, const TuneOptions& opt, std::vector<TracePoint>& trace)
      : f_(f), opt_(opt), trace_(trace) {}

  Evaluated eval(const Vec& lambda, const char* phase) {
    Evaluated e;
    e.lambda = lambda;
    try {
      e.value = f_(lambda).value;
      e.ok = std::isfinite(e.value);
    } catch (const Error&) {
      e.ok = false;
    }
    if (!e.ok) e.value = std::numeric_limits<double>::infinity();
    trace_.push_back({lambda, e.ok ? e.value : std::numeric_limits<double>::quiet_NaN(), e.ok, phase});
    return e;
  }

  /// Evaluates every point (in parallel), records them in order.
  std::vector<Evaluated> eval_all(const std::vector<Vec>& pts, const char* phase) {
    std::vector<Evaluated> out(pts.size());
    parallel_for(pts.size(), [&](std::size_t k) {
      Evaluated e;
      e.lambda = pts[k];
      try {
        e.value = f_(pts[k]).value;
        e.ok = std::isfinite(e.value);
      } catch (const Error&) {
        e.ok = false;
      }
      if (!e.ok) e.value = std::numeric_limits<double>::infinity();
      out[k] = std::move(e);
    });
    for (const auto& e : out)
      trace_.push_back({e.lambda, e.ok ? e.value : std::numeric_limits<double>::quiet_NaN(), e.ok, phase});
    return out;
  }

  Evaluated minimize(const Box& box, int grid_size) {
    const Eigen::Index q = box.dim();
    if (grid_size < 5) throw Error(ErrorCode::InvalidInput, "grid_size must be at least 5");
    box.validate_strict();

    // per-axis grid, product capped at max_grid_points
    int per_axis = grid_size;
    while (per_axis > 2 && std::pow(static_cast<double>(per_axis), static_cast<double>(q)) >
                               static_cast<double>(opt_.max_grid_points))
      --per_axis;
    std::vector<Vec> pts;
    std::vector<int> idx(static_cast<std::size_t>(q), 0);
    while (true) {
      Vec l(q);
      for (Eigen::Index j = 0; j < q; ++j)
        l[j] = box.lower[j] + box.width(j) * idx[static_cast<std::size_t>(j)] / (per_axis - 1);
      pts.push_back(l);
      Eigen::Index j = 0;
      while (j < q && ++idx[static_cast<std::size_t>(j)] == per_axis) idx[static_cast<std::size_t>(j++)] = 0;
      if (j == q) break;
    }
    const auto grid = eval_all(pts, "grid");
    std::size_t fails = 0;
    std::size_t best = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (!grid[k].ok) ++fails;
      if (better(grid[k], grid[best])) best = k;
    }
    if (static_cast<double>(fails) > opt_.max_failure_rate * static_cast<double>(grid.size()) || !grid[best].ok)
      throw Error(ErrorCode::CriterionFailure, "criterion failed on " + std::to_string(fails) + " of " +
                                                   std::to_string(grid.size()) + " grid points");
    Evaluated incumbent = grid[best];

    if (q == 1) {
      const double step = box.width(0) / (per_axis - 1);
      const double a = std::max(box.lower[0], incumbent.lambda[0] - step);
      const double b = std::min(box.upper[0], incumbent.lambda[0] + step);
      Evaluated g = golden(a, b, box.width(0) * opt_.rel_tol);
      if (better(g, incumbent)) incumbent = g;
    } else {
      incumbent = pattern_search(box, incumbent, per_axis);
    }
    return incumbent;
  }

 private:
  Evaluated golden(double a, double b, double tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto at = [&](double x) { return eval(Vec::Constant(1, x), "refine"); };
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    Evaluated fc = at(c), fd = at(d);
    Evaluated best = better(fd, fc) ? fd : fc;
    while (b - a > tol) {
      if (!better(fd, fc)) {  // minimum in [a, d]; ties keep the left part
        b = d;
        d = c;
        fd = fc;
        c = b - invphi * (b - a);
        fc = at(c);
        if (better(fc, best)) best = fc;
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + invphi * (b - a);
        fd = at(d);
        if (better(fd, best)) best = fd;
      }
    }
    return best;
  }

  Evaluated pattern_search(const Box& box, Evaluated cur, int per_axis) {
    const Eigen::Index q = box.dim();
    Vec step(q);
    for (Eigen::Index j = 0; j < q; ++j) step[j] = box.width(j) / (per_axis - 1);
    int guard = 0;
    while (guard++ < 10000) {
      bool done = true;
      for (Eigen::Index j = 0; j < q; ++j) done = done && step[j] < opt_.rel_tol * box.width(j);
      if (done) break;
      bool improved = false;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (step[j] < opt_.rel_tol * box.width(j)) continue;
        for (double s : {-1.0, 1.0}) {
          Vec l = cur.lambda;
          l[j] = std::clamp(l[j] + s * step[j], box.lower[j], box.upper[j]);
          if (l[j] == cur.lambda[j]) continue;
          Evaluated e = eval(l, "refine");
          if (better(e, cur)) {
            cur = std::move(e);
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    return cur;
  }

  const CriterionFn& f_;
  const TuneOptions& opt_;
  std::vector<TracePoint>& trace_;
};

}  // namespace detail

/// Builds the criterion closure used by tune(); `seed` drives HOLDOUT.
inline CriterionFn make_criterion(const ModelSpec& model, const LossSpec& loss, const Dataset& data,
                                  CriterionKind kind, std::uint64_t seed, const CriterionOptions& opt = {}) {
  CriterionOptions o = opt;
  o.holdout_seed = seed;
  return [&model, &loss, &data, kind, o](const Vec& lambda) {
    return evaluate_criterion(kind, model, loss, data, lambda, o);
  };
}

/// One-sided (at an edge) or central slope of f at lambda along axis j.
inline double criterion_slope(const CriterionFn& f, const Box& box, const Vec& lambda, Eigen::Index j, double h,
                              std::vector<TracePoint>* trace = nullptr) {
  auto at = [&](double x) {
    Vec l = lambda;
    l[j] = x;
    const double v = f(l).value;
    if (trace) trace->push_back({l, v, true, "slope"});
    return v;
  };
  const double x = lambda[j];
  if (x - box.lower[j] < h) return (at(x + h) - at(x)) / h;
  if (box.upper[j] - x < h) return (at(x) - at(x - h)) / h;
  return (at(x + h) - at(x - h)) / (2.0 * h);
}

/// Minimizes `f` over `box`, classifies the minimizer and fits theta there.
inline FitResult tune(const ModelSpec& model, const Dataset& data, const CriterionFn& f, CriterionKind kind,
                      const Box& box, int grid_size, std::uint64_t seed, const TuneOptions& opt = {}) {
  if (box.dim() != model.q) throw Error(ErrorCode::InvalidInput, "lambda box dimension differs from q");
  FitResult fit;
  fit.criterion = kind;
  fit.lambda_domain = box;
  fit.seed = seed;
  detail::Minimizer mz(f, opt, fit.trace);
  const detail::Evaluated best = mz.minimize(box, grid_size);
  fit.lambda_hat = best.lambda;
  fit.criterion_value = best.value;

  const Eigen::Index q = box.dim();
  fit.criterion_slope_at_opt.resize(q);
  fit.slope_tolerance.resize(q);
  fit.boundary_status.assign(static_cast<std::size_t>(q), BoundaryStatus::INTERIOR);
  fit.flat_boundary.assign(static_cast<std::size_t>(q), false);
  try {
    for (Eigen::Index j = 0; j < q; ++j) {
      const double w = box.width(j);
      const double h = opt.slope_rel_step * w;
      const double slope = criterion_slope(f, box, best.lambda, j, h, &fit.trace);
      // curvature from a wider three-point stencil kept inside the box
      const double h2 = 1e-3 * w;
      const double c = std::clamp(best.lambda[j], box.lower[j] + h2, box.upper[j] - h2);
      Vec l = best.lambda;
      l[j] = c - h2;
      const double fm = f(l).value;
      l[j] = c;
      const double f0 = f(l).value;
      l[j] = c + h2;
      const double fp = f(l).value;
      const double curv = std::abs(fp - 2.0 * f0 + fm) / (h2 * h2);
      const double tol = 2.0 * opt.rel_tol * w * curv + 1e-5 * (1.0 + std::abs(best.value)) / w;
      fit.criterion_slope_at_opt[j] = slope;
      fit.slope_tolerance[j] = tol;

      const double edge = opt.boundary_rel * w;
      const auto js = static_cast<std::size_t>(j);
      if (best.lambda[j] - box.lower[j] <= edge && slope > -tol) {
        fit.boundary_status[js] = BoundaryStatus::LOWER_BOUNDARY;
        fit.flat_boundary[js] = slope <= tol;
      } else if (box.upper[j] - best.lambda[j] <= edge && slope < tol) {
        fit.boundary_status[js] = BoundaryStatus::UPPER_BOUNDARY;
        fit.flat_boundary[js] = slope >= -tol;
      } else if (std::abs(slope) > tol) {
        fit.notes.push_back("axis " + std::to_string(j) + ": interior minimizer with slope " + std::to_string(slope) +
                            " above tolerance " + std::to_string(tol));
      }
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::CriterionFailure, std::string("slope evaluation failed: ") + e.what());
  }

  SolverOptions so = opt.criterion.solver;
  so.want_jacobian = true;
  const SolveResult s = solve_theta(model, data, fit.lambda_hat, model.theta_start, so);
  fit.theta_hat = s.theta_hat;
  fit.J_hat = s.J_hat;
  fit.solver_iterations = s.iterations;
  fit.residual_norm = s.residual_norm;
  fit.D_hat = theta_prime(model, data, s);
  return fit;
}

/// tune() with one of the built-in criteria.
inline FitResult tune(const ModelSpec& model, const LossSpec& loss, const Dataset& data, CriterionKind kind,
                      const Box& box, int grid_size, std::uint64_t seed, const TuneOptions& opt = {}) {
  const CriterionFn f = make_criterion(model, loss, data, kind, seed, opt.criterion);
  return tune(model, data, f, kind, box, grid_size, seed, opt);
}

// ---------------------------------------------------------------------------
// Truncated estimator
// ---------------------------------------------------------------------------

enum class TruncationCase { a, b, c, d, interior };

inline const char* to_string(TruncationCase t) {
  switch (t) {
    case TruncationCase::a: return "a";
    case TruncationCase::b: return "b";
    case TruncationCase::c: return "c";
    case TruncationCase::d: return "d";
    case TruncationCase::interior: return "interior";
  }
  return "?";
}

struct TruncatedResult {
  Vec theta_hat;
  double lambda_global = 0.0;
  double lambda_used = 0.0;
  TruncationCase tag = TruncationCase::interior;
  /// False when lambda_global was restricted to the box.
  bool extended = true;
  std::string note;
};

/// theta_hat(clamp(lambda_global)) and its case label. Cases c/d apply
/// within delta = 2 n^{-1/2} width of an edge.
inline TruncatedResult truncated_estimate(const ModelSpec& model, const Dataset& data, double lambda_global,
                                          const Box& box, const SolverOptions& solver = {}) {
  if (box.dim() != 1) throw Error(ErrorCode::InvalidInput, "truncated estimator needs q = 1");
  const double lo = box.lower[0], hi = box.upper[0], w = box.width(0);
  const double delta = 2.0 * w / std::sqrt(static_cast<double>(data.n()));
  TruncatedResult r;
  r.lambda_global = lambda_global;
  r.lambda_used = std::clamp(lambda_global, lo, hi);
  if (lambda_global < lo - delta) r.tag = TruncationCase::a;
  else if (lambda_global > hi + delta) r.tag = TruncationCase::b;
  else if (std::abs(lambda_global - lo) <= delta) r.tag = TruncationCase::c;
  else if (std::abs(lambda_global - hi) <= delta) r.tag = TruncationCase::d;
  else r.tag = TruncationCase::interior;
  r.theta_hat = solve_theta(model, data, Vec::Constant(1, r.lambda_used), model.theta_start, solver).theta_hat;
  return r;
}

/// Estimates the global minimizer lambda_G on [lo - w/2, hi + w/2]. If the
/// criterion cannot be evaluated outside the box, falls back to the box
/// minimizer and decides cases a/b from the sign of the boundary slope.
inline TruncatedResult truncated_estimate(const ModelSpec& model, const Dataset& data, const CriterionFn& f,
                                          const Box& box, int grid_size, const TuneOptions& opt = {}) {
  if (box.dim() != 1) throw Error(ErrorCode::InvalidInput, "truncated estimator needs q = 1");
  const double lo = box.lower[0], hi = box.upper[0], w = box.width(0);
  const Box ext = Box::interval(lo - 0.5 * w, hi + 0.5 * w);
  std::vector<TracePoint> trace;
  detail::Minimizer mz(f, opt, trace);
  bool outside_failed = false;
  detail::Evaluated best;
  try {
    best = mz.minimize(ext, 2 * (grid_size - 1) + 1);
  } catch (const Error&) {
    outside_failed = true;
  }
  for (const auto& t : trace)
    if (!t.ok && (t.lambda[0] < lo || t.lambda[0] > hi)) outside_failed = true;
  if (!outside_failed) return truncated_estimate(model, data, best.lambda[0], box, opt.criterion.solver);

  // constrained fallback
  trace.clear();
  best = mz.minimize(box, grid_size);
  TruncatedResult r = truncated_estimate(model, data, best.lambda[0], box, opt.criterion.solver);
  r.extended = false;
  r.note = "EvaluationOutsideDomain: criterion not evaluable outside the box; case decided by boundary slope";
  const double h = opt.slope_rel_step * w;
  const double edge = opt.boundary_rel * w;
  if (best.lambda[0] - lo <= edge) {
    const double s = criterion_slope(f, box, best.lambda, 0, h);
    r.tag = s > 1e-5 * (1.0 + std::abs(best.value)) / w ? TruncationCase::a : TruncationCase::c;
  } else if (hi - best.lambda[0] <= edge) {
    const double s = criterion_slope(f, box, best.lambda, 0, h);
    r.tag = s < -1e-5 * (1.0 + std::abs(best.value)) / w ? TruncationCase::b : TruncationCase::d;
  }
  return r;
}

}  // namespace tuneinf
