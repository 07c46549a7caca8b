#include "support.hpp"

#include <gtest/gtest.h>

using namespace tuneinf;
using namespace tuneinf::testing;

namespace {

Vec lam(double v) { return Vec::Constant(1, v); }

Dataset three_points() {
  RowMat r(3, 2);
  r << 1, 0, 2, 1, 4, 2;
  return Dataset(r, ColumnRoles{0, {1}});
}

}  // namespace

TEST(RegressionLayoutTest, DesignAndMask) {
  RegressionLayout l;
  l.response = 2;
  l.covariates = {0, 3};
  const Vec z = (Vec(4) << 5, 6, 7, 8).finished();
  EXPECT_EQ(l.design(z), (Vec(3) << 1, 5, 8).finished());
  EXPECT_EQ(l.y(z), 7.0);
  EXPECT_EQ(l.p(), 3);
  EXPECT_EQ(l.d_min(), 4);
  EXPECT_EQ(l.penalty_mask(), (Vec(3) << 0, 1, 1).finished());
  l.penalized = {true, false, true};
  EXPECT_EQ(l.penalty_mask(), (Vec(3) << 1, 0, 1).finished());
  l.penalized = {true};
  EXPECT_THROW(l.penalty_mask(), Error);
}

TEST(RidgeClosedForm, ZeroPenaltyIsOls) {
  const RegressionLayout l = RegressionLayout::leading_response(2);
  const Dataset data = linear_data(50, 2, 31);
  const Mat X = detail::design_matrix(data, l);
  const Vec y = detail::response_vector(data, l);
  const Vec ols = X.colPivHouseholderQr().solve(y);
  EXPECT_LT((ridge_closed_form(data, l, 0.0) - ols).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RidgeClosedForm, HugePenaltyLeavesIntercept) {
  const RegressionLayout l = RegressionLayout::leading_response(2);
  const Dataset data = linear_data(50, 2, 32);
  const Vec b = ridge_closed_form(data, l, 1e8);
  EXPECT_NEAR(b[0], detail::response_vector(data, l).mean(), 1e-4);
  EXPECT_NEAR(b[1], 0.0, 1e-4);
  EXPECT_NEAR(b[2], 0.0, 1e-4);
}

TEST(RidgeClosedForm, AgreesWithNewtonAtRandomLambdas) {
  const RegressionLayout l = RegressionLayout::leading_response(3);
  const ModelSpec m = ridge_linear_model(l, Box::interval(0.0, 5.0), 4);
  const Dataset data = linear_data(70, 3, 33, 0.4);
  SplitMix64 g(34);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double la = 5.0 * g.uniform();
    worst = std::max(worst, (solve_theta(m, data, lam(la)).theta_hat - ridge_closed_form(data, l, la)).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(RidgeClosedForm, RankDeficientDesign) {
  RowMat r(10, 3);
  for (Eigen::Index i = 0; i < 10; ++i) r.row(i) << static_cast<double>(i), 1.0, 2.0;
  const RegressionLayout l = RegressionLayout::leading_response(2);
  try {
    ridge_closed_form(Dataset(r), l, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
}

TEST(RidgeLoocvClosedForm, MatchesRefitPath) {
  const RegressionLayout l = RegressionLayout::leading_response(2);
  const ModelSpec m = ridge_linear_model(l, Box::interval(0.0, 1.0), 3);
  const LossSpec s = squared_error_loss(l);
  const Dataset data = linear_data(45, 2, 35, 0.6);
  for (double la : {0.0, 0.05, 0.7})
    EXPECT_NEAR(loocv_exact(m, s, data, lam(la)).value, ridge_loocv_closed_form(data, l, la), 1e-8);
}

TEST(RidgeLoocvClosedForm, ConstantResponseGivesZero) {
  RowMat r(12, 2);
  SplitMix64 g(36);
  for (Eigen::Index i = 0; i < 12; ++i) r.row(i) << 3.0, g.uniform();
  const RegressionLayout l = RegressionLayout::leading_response(1);
  EXPECT_NEAR(ridge_loocv_closed_form(Dataset(r), l, 0.4), 0.0, 1e-20);
}

TEST(RidgeLoocvClosedForm, HandSolvedThreePoints) {
  // each leave-one-out line interpolates the other two points:
  // errors 1, -0.5, 1
  const RegressionLayout l = RegressionLayout::leading_response(1);
  EXPECT_NEAR(ridge_loocv_closed_form(three_points(), l, 0.0), 0.75, 1e-12);
  const ModelSpec m = ridge_linear_model(l, Box::interval(0.0, 1.0), 2);
  EXPECT_NEAR(loocv_exact(m, squared_error_loss(l), three_points(), lam(0.0)).value, 0.75, 1e-10);
}

TEST(RidgeLoocvClosedForm, LeverageOne) {
  RowMat r(3, 2);
  r << 1, 0, 2, 0, 4, 5;  // the last row alone identifies the slope
  const RegressionLayout l = RegressionLayout::leading_response(1);
  EXPECT_THROW(ridge_loocv_closed_form(Dataset(r), l, 0.0), Error);
}

TEST(BuiltinModels, AnalyticDerivativesMatchFiniteDifferences) {
  SplitMix64 g(37);
  for (const Case& c : builtin_cases(38)) {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const auto z = c.data.row(static_cast<Eigen::Index>(g.below(static_cast<std::uint64_t>(c.data.n()))));
      Vec th(c.model.p);
      for (Eigen::Index j = 0; j < th.size(); ++j) th[j] = 2.0 * g.uniform() - 1.0;
      if (c.name == "gaussian") th[1] = 0.5 + g.uniform();
      worst = std::max(worst, derivative_discrepancy(c.model, c.loss, z, th, lam(g.uniform())));
    }
    EXPECT_LE(worst, 1e-5) << c.name;
  }
}

TEST(BuiltinModels, OtherLossesMatchFiniteDifferences) {
  const RegressionLayout l = RegressionLayout::leading_response(2);
  const ModelSpec m = ridge_logistic_model(l, Box::interval(0.0, 1.0), 3);
  const Dataset data = gaussmix_data(30, 1.0, 39);
  SplitMix64 g(40);
  for (const LossSpec& loss : {brier_loss(l), logistic_deviance_loss(l), brier_loss(l, partial_mask())}) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      Vec th(3);
      for (Eigen::Index j = 0; j < 3; ++j) th[j] = 2.0 * g.uniform() - 1.0;
      worst = std::max(worst, derivative_discrepancy(m, loss, data.row(i), th, lam(0.3)));
    }
    EXPECT_LE(worst, 1e-5) << loss.name;
  }
}

TEST(RidgeLogistic, ScoreAtZero) {
  const RegressionLayout l = RegressionLayout::leading_response(2);
  const ModelSpec m = ridge_logistic_model(l);
  const Vec z = (Vec(3) << 1.0, 0.4, -2.0).finished();
  const Vec expect = (Vec(3) << 0.5, 0.2, -1.0).finished();  // x (y - 1/2)
  EXPECT_LT((m.phi(z, Vec::Zero(3), lam(0.0)) - expect).norm(), 1e-15);
  EXPECT_NEAR(logistic(800.0), 1.0, 1e-15);
  EXPECT_NEAR(logistic(-800.0), 0.0, 1e-15);
}

TEST(RidgeLogistic, PartialBrierIgnoresMaskedCoefficient) {
  const RegressionLayout l = RegressionLayout::leading_response(2);
  const LossSpec b = brier_loss(l, partial_mask());
  const Vec z = (Vec(3) << 1.0, 0.4, -2.0).finished();
  const Vec t1 = (Vec(3) << 0.1, 0.2, 0.3).finished();
  const Vec t2 = (Vec(3) << 0.1, 0.2, -5.0).finished();
  EXPECT_EQ(b.psi(z, t1), b.psi(z, t2));
  EXPECT_EQ(b.grad_psi(z, t1)[2], 0.0);
  EXPECT_THROW(brier_loss(l, {true}), Error);
}

TEST(Pima, Wiring) {
  const PimaProblem pp = make_pima_model(data_path("pima_indians_diabetes.csv"));
  EXPECT_EQ(pp.model.p, 9);
  EXPECT_EQ(pp.model.q, 1);
  EXPECT_EQ(pp.data.d(), 9);
  EXPECT_EQ(pp.data.n(), 392);
  EXPECT_EQ(pp.rows_dropped, 768 - 392);
  EXPECT_EQ(pp.covariate_names.size(), 8u);
  // standardized covariates
  for (Eigen::Index c = 1; c < 9; ++c) EXPECT_NEAR(pp.data.rows().col(c).mean(), 0.0, 1e-12);
  // score at zero is x (y - 1/2)
  for (Eigen::Index i = 0; i < 5; ++i) {
    const auto z = pp.data.row(i);
    const Vec expect = pp.layout.design(z) * (z[0] - 0.5);
    EXPECT_LT((pp.model.phi(z, Vec::Zero(9), lam(0.0)) - expect).norm(), 1e-15);
  }
}

TEST(Pima, SchemaErrors) {
  CsvTable t;
  t.header = {"a", "b"};
  t.values = RowMat::Zero(30, 2);
  EXPECT_THROW(make_pima_model(t), Error);
  CsvTable bad = read_csv(data_path("pima_indians_diabetes.csv"));
  bad.values(3, 8) = 2.0;
  try {
    make_pima_model(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 5"), std::string::npos);
  }
  PimaOptions o;
  o.response = "outcome";
  EXPECT_THROW(make_pima_model(read_csv(data_path("pima_indians_diabetes.csv")), o), Error);
}

TEST(Hybrid, DerivativesComposeFromComponents) {
  const RegressionLayout l = RegressionLayout::leading_response(1);
  const ModelSpec m = weighted_ls_hybrid_model(l, Box::interval(0.0, 1.0), 2);
  const Vec z = (Vec(2) << 0.7, 1.3).finished();
  const Vec t = (Vec(2) << 0.2, -0.4).finished();
  auto ols = weighted_least_squares(l, [](RowRef) { return 1.0; }, 2);
  auto tilt = weighted_least_squares(l, [](RowRef r) { return std::exp(0.5 * r[1]); }, 2);
  EXPECT_LT((m.dphi_dlambda(z, t, lam(0.3)).col(0) - (ols.phi(z, t) - tilt.phi(z, t))).norm(), 1e-14);
  EXPECT_LT((m.phi(z, t, lam(1.0)) - ols.phi(z, t)).norm(), 1e-14);
  EXPECT_LT((m.phi(z, t, lam(0.0)) - tilt.phi(z, t)).norm(), 1e-14);
}

TEST(Hybrid, IdenticalComponentsHaveInertLambda) {
  const RegressionLayout l = RegressionLayout::leading_response(1);
  auto f = weighted_least_squares(l, [](RowRef) { return 1.0; }, 2);
  const ModelSpec m = hybrid_model(f, f);
  const LossSpec loss = squared_error_loss(l);
  const Dataset data = linear_data(80, 1, 41, 0.5);
  for (Eigen::Index i = 0; i < 5; ++i)
    EXPECT_EQ(m.dphi_dlambda(data.row(i), Vec::Ones(2), lam(0.4)), Mat::Zero(2, 1));

  FitResult fit;
  const SolveResult s = solve_theta(m, data, lam(0.5));
  fit.theta_hat = s.theta_hat;
  fit.lambda_hat = lam(0.5);
  fit.boundary_status = {BoundaryStatus::INTERIOR};
  fit.flat_boundary = {false};
  const VarianceComponents c = assemble_components(m, loss, data, fit);
  EXPECT_TRUE(c.collapsed);
  EXPECT_LE(rel_max_diff(variance_tuned(c), variance_pointwise(c)), 1e-12);
  try {
    variance_alpha(m, loss, data, fit);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::FlatLimitSuspected || e.code() == ErrorCode::SingularJacobian);
  }
  EXPECT_THROW(hybrid_model(f, weighted_least_squares(RegressionLayout::leading_response(2), [](RowRef) { return 1.0; })),
               Error);
}

TEST(Gaussian, ScoreVanishesAtSampleMoments) {
  const Dataset data = column({1.0, 2.0, 6.0, -1.0});
  const ModelSpec m = gaussian_likelihood_model();
  const SolveResult s = solve_theta(m, data, lam(0.0));
  EXPECT_NEAR(s.theta_hat[0], 2.0, 1e-10);
  EXPECT_NEAR(s.theta_hat[1], (1.0 + 0.0 + 16.0 + 9.0) / 4.0, 1e-9);
  const LossSpec nll = gaussian_nll_loss();
  const Vec z = Vec::Constant(1, 0.5);
  const Vec t = (Vec(2) << 0.0, 1.0).finished();
  EXPECT_NEAR(nll.psi(z, t), 0.5 * std::log(2.0 * M_PI) + 0.125, 1e-15);
}
