#include "support.hpp"

#include <gtest/gtest.h>

using namespace tuneinf;
using namespace tuneinf::testing;

namespace {

const RegressionLayout kLayout = RegressionLayout::leading_response(2);

ModelSpec ridge() { return ridge_linear_model(kLayout, Box::interval(0.0, 2.0), 3); }

Vec lam(double v) { return Vec::Constant(1, v); }

}  // namespace

TEST(SolveTheta, RidgeAtZeroIsOls) {
  const Dataset data = linear_data(120, 2, 11, 0.3);
  const Mat X = detail::design_matrix(data, kLayout);
  const Vec y = detail::response_vector(data, kLayout);
  const Vec ols = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  const SolveResult s = solve_theta(ridge(), data, lam(0.0));
  EXPECT_LT((s.theta_hat - ols).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveTheta, RidgeMatchesClosedForm) {
  const Dataset data = linear_data(80, 2, 12);
  for (double l : {0.01, 0.3, 1.7}) {
    const SolveResult s = solve_theta(ridge(), data, lam(l));
    EXPECT_LT((s.theta_hat - ridge_closed_form(data, kLayout, l)).cwiseAbs().maxCoeff(), 1e-9) << l;
  }
}

TEST(SolveTheta, ResidualAndJacobianRecorded) {
  const Dataset data = linear_data(60, 2, 13);
  const ModelSpec m = ridge();
  const SolveResult s = solve_theta(m, data, lam(0.2));
  EXPECT_EQ(s.residual_norm, mean_phi(m, data, s.theta_hat, lam(0.2)).norm());
  EXPECT_LE(s.residual_norm, 1e-10 * (1.0 + m.theta_start.norm()));
  EXPECT_EQ(s.J_hat, -mean_dphi_dtheta(m, data, s.theta_hat, lam(0.2)));
  EXPECT_LE(s.iterations, 100);
}

TEST(SolveTheta, PimaAtPublishedLambda) {
  const PimaProblem pp = make_pima_model(data_path("pima_indians_diabetes.csv"));
  const SolveResult s = solve_theta(pp.model, pp.data, lam(0.0085));
  EXPECT_TRUE(s.theta_hat.allFinite());
  EXPECT_LE(s.residual_norm, 1e-10);
  EXPECT_EQ(s.theta_hat.size(), 9);
}

TEST(SolveTheta, PermutationInvariant) {
  for (const Case& c : builtin_cases(21)) {
    const Vec l = lam(0.35);
    const Vec a = solve_theta(c.model, c.data, l).theta_hat;
    const Vec b = solve_theta(c.model, permuted(c.data, 5), l).theta_hat;
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10) << c.name;
  }
}

TEST(SolveTheta, Errors) {
  // duplicated covariate: singular design
  RowMat r(30, 3);
  SplitMix64 g(1);
  for (Eigen::Index i = 0; i < 30; ++i) {
    r(i, 1) = g.uniform();
    r(i, 2) = r(i, 1);
    r(i, 0) = g.uniform();
  }
  try {
    solve_theta(ridge(), Dataset(r), lam(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularJacobian);
  }

  // the root theta = 5 lies outside theta_domain [-1, 1]
  ModelSpec m = mean_model();
  m.theta_domain = Box::interval(-1.0, 1.0);
  const Dataset five = column({5.0, 5.0, 5.0});
  try {
    solve_theta(m, five, lam(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainEscape);
  }

  // iteration cap
  SolverOptions few;
  few.max_iter = 1;
  const RegressionLayout l2 = RegressionLayout::leading_response(2);
  const ModelSpec logit = ridge_logistic_model(l2, Box::interval(0.0, 1.0), 3);
  try {
    solve_theta(logit, gaussmix_data(100, 1.0, 3), lam(0.0), few);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoConvergence);
  }

  EXPECT_THROW(solve_theta(ridge(), linear_data(10, 2, 1), Vec::Zero(2)), Error);
  EXPECT_THROW(solve_theta(ridge(), linear_data(10, 3, 1), lam(0.1)), Error);
  SolverOptions bad;
  bad.tol = -1.0;
  EXPECT_THROW(solve_theta(ridge(), linear_data(10, 2, 1), lam(0.1), bad), Error);
}

TEST(ThetaPrime, ZeroWhenLambdaInert) {
  const Dataset data = column({1.0, 2.0, 4.0, 7.0});
  const ModelSpec m = mean_model();
  const SolveResult s = solve_theta(m, data, lam(0.5));
  EXPECT_EQ(theta_prime(m, data, s), Mat::Zero(1, 1));
}

TEST(ThetaPrime, RidgeMatchesClosedFormDerivative) {
  const Dataset data = linear_data(90, 2, 14);
  for (double l : {0.0, 0.25, 1.2}) {
    const SolveResult s = solve_theta(ridge(), data, lam(l));
    const Vec d = theta_prime(ridge(), data, s).col(0);
    EXPECT_LT((d - ridge_closed_form_derivative(data, kLayout, l)).cwiseAbs().maxCoeff(), 1e-8) << l;
  }
}

TEST(ThetaPrime, SecondOrderDefectForAllModels) {
  SolverOptions tight;
  tight.tol = 1e-14;
  for (const Case& c : builtin_cases(15)) {
    const Vec l = lam(0.4);
    const SolveResult s = solve_theta(c.model, c.data, l, tight);
    const Vec d = theta_prime(c.model, c.data, s).col(0);
    auto defect = [&](double h) {
      const Vec th = solve_theta(c.model, c.data, lam(0.4 + h), tight).theta_hat;
      return (th - s.theta_hat - h * d).norm();
    };
    const double big = defect(1e-3), small = defect(5e-4);
    if (c.name == "gaussian") {
      // theta_hat does not move with lambda at all
      EXPECT_EQ(big, 0.0);
      continue;
    }
    EXPECT_GE(big / small, 3.5) << c.name;
    EXPECT_LE(big / small, 4.5) << c.name;
  }
}

TEST(ThetaPrime, SingularJacobian) {
  SolveResult s;
  s.theta_hat = Vec::Zero(1);
  s.lambda = lam(0.0);
  s.J_hat = Mat::Zero(1, 1);
  EXPECT_THROW(theta_prime(mean_model(), column({1.0, 2.0}), s), Error);
}

TEST(SolveLoo, RidgeMatchesHatMatrixForm) {
  const Dataset data = linear_data(40, 2, 16, 0.5);
  const ModelSpec m = ridge();
  const Vec full = solve_theta(m, data, lam(0.3)).theta_hat;
  for (Eigen::Index i : {0, 7, 39}) {
    const SolveResult r = solve_loo(m, data, lam(0.3), i, full);
    EXPECT_LT((r.theta_hat - ridge_loo_closed_form(data, kLayout, 0.3, i)).cwiseAbs().maxCoeff(), 1e-8) << i;
  }
}

TEST(SolveLoo, ThreeRowsResidual) {
  const Dataset data = column({1.0, 4.0, 10.0});
  const ModelSpec m = mean_model();
  for (Eigen::Index i = 0; i < 3; ++i) {
    const SolveResult r = solve_loo(m, data, lam(0.0), i, Vec::Zero(1));
    double res = 0.0;
    for (Eigen::Index k = 0; k < 3; ++k)
      if (k != i) res += m.phi(data.row(k), r.theta_hat, lam(0.0))[0];
    EXPECT_LE(std::abs(res / 2.0), 1e-10);
  }
  EXPECT_THROW(solve_loo(m, column({1.0, 2.0}), lam(0.0), 0, Vec::Zero(1)), Error);
  EXPECT_THROW(solve_loo(m, data, lam(0.0), 3, Vec::Zero(1)), Error);
}

TEST(SolveLoo, CacheGivesSameAnswer) {
  const Dataset data = gaussmix_data(80, 1.0, 17);
  const RegressionLayout l2 = RegressionLayout::leading_response(2);
  const ModelSpec m = ridge_logistic_model(l2, Box::interval(0.0, 1.0), 3);
  const Vec full = solve_theta(m, data, lam(0.1)).theta_hat;
  const LooCache cache = LooCache::build(m, data, full, lam(0.1));
  for (Eigen::Index i : {0, 40, 79}) {
    const Vec a = solve_loo(m, data, lam(0.1), i, full, {}, &cache).theta_hat;
    const Vec b = solve_loo(m, data, lam(0.1), i, full).theta_hat;
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SolveLoo, ShiftShrinksLikeOneOverN) {
  const ModelSpec m = ridge();
  // the typical shift, not the largest one, which picks up the extreme leverage
  auto mean_shift = [&](Eigen::Index n) {
    double acc = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Dataset data = linear_data(n, 2, stream_seed(18, s * 1000 + static_cast<std::uint64_t>(n)));
      const Vec full = solve_theta(m, data, lam(0.2)).theta_hat;
      for (Eigen::Index i = 0; i < n; ++i) acc += (ridge_loo_closed_form(data, kLayout, 0.2, i) - full).norm();
    }
    return acc / (20.0 * static_cast<double>(n));
  };
  const double ratio = mean_shift(800) / mean_shift(200);
  EXPECT_GT(ratio, 0.2);
  EXPECT_LT(ratio, 0.3);
}

TEST(DerivativeFallback, MatchesAnalyticAtRandomPoints) {
  SplitMix64 g(19);
  for (const Case& c : builtin_cases(20)) {
    const ModelSpec numeric = complete(strip_derivatives(c.model));
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const auto z = c.data.row(static_cast<Eigen::Index>(g.below(static_cast<std::uint64_t>(c.data.n()))));
      Vec th = Vec::Zero(c.model.p);
      for (Eigen::Index j = 0; j < th.size(); ++j) th[j] = 2.0 * g.uniform() - 1.0;
      if (c.name == "gaussian") th[1] = 0.5 + g.uniform();
      const Vec la = lam(g.uniform());
      worst = std::max(worst, rel_max_diff(numeric.dphi_dtheta(z, th, la), c.model.dphi_dtheta(z, th, la)));
    }
    EXPECT_LE(worst, 1e-5) << c.name;
  }
}
