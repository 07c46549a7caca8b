#pragma once

// Monte Carlo engine: data-generating processes, replication loops, the
// nonparametric bootstrap and the boundary mixture-law check.

#include "tuneinf/models.hpp"
#include "tuneinf/variance.hpp"

#include <random>

namespace tuneinf {

enum class DGPKind { GAUSSMIX_C, LINEAR_GAUSSIAN, LOGISTIC_TRUE, CUSTOM };

inline const char* to_string(DGPKind k) {
  switch (k) {
    case DGPKind::GAUSSMIX_C: return "GAUSSMIX_C";
    case DGPKind::LINEAR_GAUSSIAN: return "LINEAR_GAUSSIAN";
    case DGPKind::LOGISTIC_TRUE: return "LOGISTIC_TRUE";
    case DGPKind::CUSTOM: return "CUSTOM";
  }
  return "?";
}

inline DGPKind dgp_from_string(const std::string& s) {
  for (auto k : {DGPKind::GAUSSMIX_C, DGPKind::LINEAR_GAUSSIAN, DGPKind::LOGISTIC_TRUE, DGPKind::CUSTOM})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::InvalidInput, "unknown DGP '" + s + "'");
}

/// Rows always put the response in column 0 and covariates after it.
struct DGPSpec {
  DGPKind kind = DGPKind::LINEAR_GAUSSIAN;
  Eigen::Index n = 100;
  std::uint64_t seed = 0;
  /// GAUSSMIX_C: off-diagonal of Sigma is -sqrt(C/2).
  double C = 0.0;
  /// LINEAR_GAUSSIAN noise standard deviation.
  double sigma = 1.0;
  /// Coefficients (intercept first) for LINEAR_GAUSSIAN / LOGISTIC_TRUE;
  /// the covariate count is beta.size() - 1.
  Vec beta = (Vec(3) << 1.0, 0.5, -0.5).finished();
  /// LINEAR_GAUSSIAN adds curvature * (x_1^2 - 1) to the mean.
  double curvature = 0.0;
  std::function<RowMat(Eigen::Index n, std::uint64_t seed)> sampler;

  int d() const {
    switch (kind) {
      case DGPKind::GAUSSMIX_C: return 3;
      case DGPKind::CUSTOM: return -1;
      default: return static_cast<int>(beta.size());
    }
  }
};

inline Dataset simulate(const DGPSpec& dgp) {
  if (dgp.n < 2) throw Error(ErrorCode::InvalidInput, "simulate needs n >= 2");
  SplitMix64 g(dgp.seed);
  std::normal_distribution<double> N01(0.0, 1.0);
  const Eigen::Index n = dgp.n;
  switch (dgp.kind) {
    case DGPKind::GAUSSMIX_C: {
      if (!(dgp.C >= 0.0 && dgp.C <= 8.0))
        throw Error(ErrorCode::InvalidInput, "GAUSSMIX_C needs 0 <= C <= 8 for a positive definite Sigma");
      const double off = -std::sqrt(dgp.C / 2.0);
      Mat S(2, 2);
      S << 2.0, off, off, 2.0;
      Eigen::LLT<Mat> llt(S);
      if (llt.info() != Eigen::Success) throw Error(ErrorCode::InvalidInput, "Sigma is not positive definite");
      const Mat L = llt.matrixL();
      RowMat rows(n, 3);
      for (Eigen::Index i = 0; i < n; ++i) {
        const bool y = g.uniform() < 0.5;
        Vec e(2);
        e << N01(g), N01(g);
        // X | Y=0 ~ N(mu, Sigma), X | Y=1 ~ N(-mu, 2 Sigma)
        const Vec x = y ? Vec(-0.5 * Vec::Ones(2) + std::sqrt(2.0) * L * e) : Vec(0.5 * Vec::Ones(2) + L * e);
        rows(i, 0) = y ? 1.0 : 0.0;
        rows(i, 1) = x[0];
        rows(i, 2) = x[1];
      }
      return Dataset(std::move(rows), ColumnRoles{0, {1, 2}});
    }
    case DGPKind::LINEAR_GAUSSIAN:
    case DGPKind::LOGISTIC_TRUE: {
      const Eigen::Index k = dgp.beta.size() - 1;
      if (k < 1) throw Error(ErrorCode::InvalidInput, "beta needs an intercept and at least one slope");
      RowMat rows(n, k + 1);
      std::vector<int> cov;
      for (int c = 1; c <= k; ++c) cov.push_back(c);
      for (Eigen::Index i = 0; i < n; ++i) {
        double eta = dgp.beta[0];
        for (Eigen::Index c = 1; c <= k; ++c) {
          rows(i, c) = N01(g);
          eta += dgp.beta[c] * rows(i, c);
        }
        if (dgp.kind == DGPKind::LINEAR_GAUSSIAN) {
          rows(i, 0) = eta + dgp.curvature * (rows(i, 1) * rows(i, 1) - 1.0) + dgp.sigma * N01(g);
        } else {
          rows(i, 0) = g.uniform() < logistic(eta) ? 1.0 : 0.0;
        }
      }
      return Dataset(std::move(rows), ColumnRoles{0, cov});
    }
    case DGPKind::CUSTOM:
      if (!dgp.sampler) throw Error(ErrorCode::InvalidInput, "CUSTOM DGP has no sampler");
      return Dataset(dgp.sampler(n, dgp.seed));
  }
  throw Error(ErrorCode::InvalidInput, "unknown DGP kind");
}

/// Everything needed to go from a dataset to theta_hat(lambda_hat) and its
/// variance estimates.
struct PipelineConfig {
  ModelSpec model;
  LossSpec loss;
  CriterionKind criterion = CriterionKind::CV_EXACT;
  Box lambda_domain = Box::interval(0.0, 1.0);
  int grid_size = 50;
  TuneOptions tune;
  VarianceOptions variance;
  bool compute_variance = true;
  bool with_alpha = false;
  double max_failure_rate = 0.05;
};

struct Replication {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Vec lambda_hat;
  Vec theta_hat;
  std::vector<BoundaryStatus> boundary_status;
  std::optional<Mat> V1;
  std::optional<Mat> V2;
  VarianceChoice selected = VarianceChoice::V2;
};

struct ReplicationSummary {
  Eigen::Index n = 0;
  std::size_t requested = 0;
  std::size_t failures = 0;
  double failure_rate = 0.0;
  std::vector<Replication> replications;
  /// Sample covariance (denominator B-1) of sqrt(n) theta_hat over the
  /// successful replications.
  Mat empirical_variance;
  Mat mean_V1;  // over replications where V1 exists
  Mat mean_V2;
  Mat mean_selected;
  Mat abs_error_V1;
  Mat abs_error_V2;
  Mat abs_error_selected;
  std::size_t v1_count = 0;
  std::size_t interior_count = 0;
};

/// Rebuilds every aggregate from the stored per-replication values.
inline void summarize(ReplicationSummary& s) {
  std::vector<const Replication*> good;
  for (const auto& r : s.replications)
    if (r.ok) good.push_back(&r);
  s.failures = s.replications.size() - good.size();
  s.failure_rate = s.replications.empty() ? 0.0 : static_cast<double>(s.failures) / s.replications.size();
  if (good.empty()) return;
  const Eigen::Index p = good.front()->theta_hat.size();
  const double rn = std::sqrt(static_cast<double>(s.n));
  Mat draws(static_cast<Eigen::Index>(good.size()), p);
  for (std::size_t k = 0; k < good.size(); ++k) draws.row(static_cast<Eigen::Index>(k)) = rn * good[k]->theta_hat.transpose();
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const Mat centered = draws.rowwise() - mean;
  s.empirical_variance = good.size() > 1 ? Mat(centered.transpose() * centered / static_cast<double>(good.size() - 1))
                                         : Mat::Zero(p, p);
  s.mean_V1 = Mat::Zero(p, p);
  s.mean_V2 = Mat::Zero(p, p);
  s.mean_selected = Mat::Zero(p, p);
  s.v1_count = 0;
  s.interior_count = 0;
  std::size_t v2_count = 0, sel_count = 0;
  for (const auto* r : good) {
    if (r->V1) {
      s.mean_V1 += *r->V1;
      ++s.v1_count;
    }
    if (r->V2) {
      s.mean_V2 += *r->V2;
      ++v2_count;
    }
    const bool interior = std::all_of(r->boundary_status.begin(), r->boundary_status.end(),
                                      [](BoundaryStatus b) { return b == BoundaryStatus::INTERIOR; });
    if (interior) ++s.interior_count;
    const std::optional<Mat>& sel = r->selected == VarianceChoice::V1 ? r->V1 : r->V2;
    if (sel) {
      s.mean_selected += *sel;
      ++sel_count;
    }
  }
  if (s.v1_count) s.mean_V1 /= static_cast<double>(s.v1_count);
  if (v2_count) s.mean_V2 /= static_cast<double>(v2_count);
  if (sel_count) s.mean_selected /= static_cast<double>(sel_count);
  s.abs_error_V1 = (s.mean_V1 - s.empirical_variance).cwiseAbs();
  s.abs_error_V2 = (s.mean_V2 - s.empirical_variance).cwiseAbs();
  s.abs_error_selected = (s.mean_selected - s.empirical_variance).cwiseAbs();
}

/// Tunes and (optionally) estimates the variance on one dataset.
inline Replication run_pipeline(const Dataset& data, const PipelineConfig& cfg, std::uint64_t seed) {
  Replication r;
  r.seed = seed;
  try {
    const FitResult fit = tune(cfg.model, cfg.loss, data, cfg.criterion, cfg.lambda_domain, cfg.grid_size, seed, cfg.tune);
    r.lambda_hat = fit.lambda_hat;
    r.theta_hat = fit.theta_hat;
    r.boundary_status = fit.boundary_status;
    if (cfg.compute_variance) {
      VarianceOptions vo = cfg.variance;
      vo.criterion = cfg.tune.criterion;
      const VarianceReport v = variance_report(cfg.model, cfg.loss, data, fit, vo, cfg.with_alpha);
      r.V1 = v.V1;
      r.V2 = v.V2;
      r.selected = v.selected;
    }
    r.ok = true;
  } catch (const Error& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

namespace detail {

inline void check_failures(const ReplicationSummary& s, double limit) {
  if (s.failure_rate > limit) {
    std::string first;
    for (const auto& r : s.replications)
      if (!r.ok) {
        first = r.error;
        break;
      }
    throw Error(ErrorCode::FailureRateExceeded, std::to_string(s.failures) + " of " + std::to_string(s.requested) +
                                                    " replications failed; first: " + first);
  }
}

}  // namespace detail

/// B independent simulate -> tune -> variance runs. Replication j uses the
/// stream stream_seed(seed, j) for its data and holdout split.
inline ReplicationSummary replicate(const DGPSpec& dgp, const PipelineConfig& cfg, std::size_t B, std::uint64_t seed) {
  if (B < 2) throw Error(ErrorCode::InvalidInput, "replicate needs B >= 2");
  ReplicationSummary s;
  s.n = dgp.n;
  s.requested = B;
  s.replications.resize(B);
  parallel_for(B, [&](std::size_t j) {
    DGPSpec d = dgp;
    d.seed = stream_seed(seed, j);
    Replication r;
    try {
      r = run_pipeline(simulate(d), cfg, d.seed);
    } catch (const Error& e) {
      r.ok = false;
      r.error = e.what();
    }
    r.index = j;
    r.seed = d.seed;
    s.replications[j] = std::move(r);
  });
  summarize(s);
  detail::check_failures(s, cfg.max_failure_rate);
  return s;
}

/// Row indices of bootstrap resample j.
inline std::vector<Eigen::Index> bootstrap_indices(Eigen::Index n, std::uint64_t seed) {
  SplitMix64 g(seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (auto& i : idx) i = static_cast<Eigen::Index>(g.below(static_cast<std::uint64_t>(n)));
  return idx;
}

/// Nonparametric bootstrap of the tune-and-fit pipeline.
inline ReplicationSummary bootstrap(const Dataset& data, const PipelineConfig& cfg, std::size_t B, std::uint64_t seed) {
  if (B < 2) throw Error(ErrorCode::InvalidInput, "bootstrap needs B >= 2");
  ReplicationSummary s;
  s.n = data.n();
  s.requested = B;
  s.replications.resize(B);
  parallel_for(B, [&](std::size_t j) {
    const std::uint64_t sj = stream_seed(seed, j);
    Replication r;
    try {
      r = run_pipeline(data.subset(bootstrap_indices(data.n(), sj)), cfg, sj);
    } catch (const Error& e) {
      r.ok = false;
      r.error = e.what();
    }
    r.index = j;
    r.seed = sj;
    s.replications[j] = std::move(r);
  });
  summarize(s);
  detail::check_failures(s, cfg.max_failure_rate);
  return s;
}

// ---------------------------------------------------------------------------
// Distribution comparisons
// ---------------------------------------------------------------------------

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
};

inline Histogram histogram(const std::vector<double>& x, int bins) {
  if (bins < 1) throw Error(ErrorCode::InvalidInput, "histogram needs at least one bin");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  if (x.empty()) {
    h.edges.assign(static_cast<std::size_t>(bins) + 1, 0.0);
    return h;
  }
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  double lo = *mn, hi = *mx;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  for (int k = 0; k <= bins; ++k) h.edges.push_back(lo + (hi - lo) * k / bins);
  for (double v : x) {
    auto k = static_cast<int>((v - lo) / (hi - lo) * bins);
    h.counts[static_cast<std::size_t>(std::clamp(k, 0, bins - 1))]++;
  }
  return h;
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidInput, "KS needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Draws from N(0, V) via a symmetric square root (V may be singular).
inline Mat draw_normal(const Mat& V, std::size_t count, std::uint64_t seed) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(V));
  const Mat root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  SplitMix64 g(seed);
  std::normal_distribution<double> N01(0.0, 1.0);
  Mat out(static_cast<Eigen::Index>(count), V.rows());
  Vec e(V.rows());
  for (std::size_t k = 0; k < count; ++k) {
    for (Eigen::Index c = 0; c < e.size(); ++c) e[c] = N01(g);
    out.row(static_cast<Eigen::Index>(k)) = (root * e).transpose();
  }
  return out;
}

struct MixtureLawReport {
  Mat empirical;  // successful replications x p, sqrt(n)(theta_T - theta_0)
  Mat mixture;    // simulated draws of the limit law
  Vec ks;         // per coordinate
  Mat joint_covariance;  // of (N1, N2, N3), averaged plug-in
  bool degenerate_n3 = false;
  std::map<std::string, std::size_t> case_counts;
  std::size_t failures = 0;
};

/// Compares sqrt(n)(theta_T - theta_0) across replications with the law
/// I(N3 >= 0) N1 + I(N3 < 0) N2 (lower edge) or its mirror (upper edge).
/// N1, N2, N3 come from the uncentered plug-in covariance of the stacked
/// influence terms of theta_hat(lambda_G), theta_hat(edge) and lambda_G.
inline MixtureLawReport mixture_law_check(const DGPSpec& dgp, const PipelineConfig& cfg, const Vec& theta0,
                                          std::size_t B, std::uint64_t seed, bool lower_edge = true,
                                          std::size_t mixture_draws = 4000) {
  if (cfg.lambda_domain.dim() != 1) throw Error(ErrorCode::InvalidInput, "mixture law check needs q = 1");
  const int p = cfg.model.p;
  const double edge = lower_edge ? cfg.lambda_domain.lower[0] : cfg.lambda_domain.upper[0];
  struct One {
    bool ok = false;
    Vec draw;
    Mat cov;
    TruncationCase tag = TruncationCase::interior;
  };
  std::vector<One> reps(B);
  parallel_for(B, [&](std::size_t j) {
    DGPSpec d = dgp;
    d.seed = stream_seed(seed, j);
    One o;
    try {
      const Dataset data = simulate(d);
      const CriterionFn f = make_criterion(cfg.model, cfg.loss, data, cfg.criterion, d.seed, cfg.tune.criterion);
      const TruncatedResult t = truncated_estimate(cfg.model, data, f, cfg.lambda_domain, cfg.grid_size, cfg.tune);
      const double rn = std::sqrt(static_cast<double>(data.n()));
      o.draw = rn * (t.theta_hat - theta0);
      o.tag = t.tag;

      // plug-in influence at the unconstrained minimizer
      FitResult g;
      g.lambda_hat = Vec::Constant(1, t.lambda_global);
      g.criterion = cfg.criterion;
      g.seed = d.seed;
      g.boundary_status = {BoundaryStatus::INTERIOR};
      g.flat_boundary = {false};
      SolverOptions so = cfg.tune.criterion.solver;
      so.want_jacobian = true;
      const SolveResult sg = solve_theta(cfg.model, data, g.lambda_hat, cfg.model.theta_start, so);
      g.theta_hat = sg.theta_hat;
      g.J_hat = sg.J_hat;
      g.D_hat = theta_prime(cfg.model, data, sg);
      VarianceOptions vo = cfg.variance;
      vo.criterion = cfg.tune.criterion;
      const VarianceComponents c = assemble_components(cfg.model, cfg.loss, data, g, vo);
      const TuningInfluence inf = tuning_influence(cfg.model, cfg.loss, data, c);

      const Vec le = Vec::Constant(1, edge);
      const SolveResult s0 = solve_theta(cfg.model, data, le, cfg.model.theta_start, so);
      const Mat J0inv = checked_inverse(s0.J_hat, "J_hat at the edge");
      Mat stacked(data.n(), 2 * p + 1);
      for (Eigen::Index i = 0; i < data.n(); ++i) {
        stacked.block(i, 0, 1, p) = inf.theta.row(i);
        stacked.block(i, p, 1, p) = (J0inv * cfg.model.phi(data.row(i), s0.theta_hat, le)).transpose();
        stacked(i, 2 * p) = inf.lambda(i, 0);
      }
      o.cov = stacked.transpose() * stacked / static_cast<double>(data.n());
      o.ok = true;
    } catch (const Error&) {
      o.ok = false;
    }
    reps[j] = std::move(o);
  });

  MixtureLawReport r;
  std::vector<const One*> good;
  for (const auto& o : reps) {
    if (o.ok) good.push_back(&o);
    else ++r.failures;
  }
  if (good.size() < 2) throw Error(ErrorCode::FailureRateExceeded, "too few successful replications");
  r.empirical.resize(static_cast<Eigen::Index>(good.size()), p);
  r.joint_covariance = Mat::Zero(2 * p + 1, 2 * p + 1);
  for (std::size_t k = 0; k < good.size(); ++k) {
    r.empirical.row(static_cast<Eigen::Index>(k)) = good[k]->draw.transpose();
    r.joint_covariance += good[k]->cov;
    r.case_counts[to_string(good[k]->tag)]++;
  }
  r.joint_covariance /= static_cast<double>(good.size());
  r.degenerate_n3 = r.joint_covariance(2 * p, 2 * p) <= 1e-12 * (1.0 + r.joint_covariance.trace());

  const Mat N = draw_normal(r.joint_covariance, mixture_draws, stream_seed(seed, B + 1));
  r.mixture.resize(static_cast<Eigen::Index>(mixture_draws), p);
  for (Eigen::Index k = 0; k < N.rows(); ++k) {
    const double n3 = N(k, 2 * p);
    const bool first = r.degenerate_n3 || (lower_edge ? n3 >= 0.0 : n3 <= 0.0);
    r.mixture.row(k) = first ? N.block(k, 0, 1, p) : N.block(k, p, 1, p);
  }
  r.ks.resize(p);
  for (int c = 0; c < p; ++c) {
    std::vector<double> a(r.empirical.col(c).data(), r.empirical.col(c).data() + r.empirical.rows());
    std::vector<double> b(r.mixture.col(c).data(), r.mixture.col(c).data() + r.mixture.rows());
    r.ks[c] = ks_statistic(std::move(a), std::move(b));
  }
  return r;
}

}  // namespace tuneinf
