#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "lppls/likelihood.hpp"
#include "support.hpp"

using namespace lppls;
using namespace lppls::testing;

namespace {

const SyntheticWindow& clean() {
  static const SyntheticWindow w = make_window(0.0, 1);
  return w;
}

const SyntheticWindow& noisy() {
  static const SyntheticWindow w = make_window(0.03, 17);
  return w;
}

struct Fitted {
  std::vector<double> grid;
  std::vector<ProfilePoint> profile;
  FitResult mle;
};

Fitted fit(const Observations& obs, double t2_time) {
  Fitted f;
  f.grid = make_tc_grid(t2_time, 20, 60, 2);
  f.profile = profile_f2(obs, f.grid, CalibrationOptions{});
  f.mle = full_mle(obs, f.profile, CalibrationOptions{});
  return f;
}

const Fitted& noisy_fit() {
  static const Fitted f = fit(noisy().obs, noisy().t2_time);
  return f;
}

ProfilePoint point(double tc, double f2, bool converged = true) {
  ProfilePoint p;
  p.tc = tc;
  p.f2 = f2;
  p.converged = converged;
  return p;
}

}  // namespace

TEST(Variance, Estimators) {
  EXPECT_DOUBLE_EQ(sigma2_mle(3.0, 300), 0.01);
  EXPECT_DOUBLE_EQ(sigma2_unbiased(2.93, 300), 0.01);
  EXPECT_THROW(sigma2_mle(1.0, 0), DomainError);
  EXPECT_THROW(sigma2_unbiased(1.0, 7), DomainError);
  EXPECT_THROW(sigma2_mle(-1.0, 10), DomainError);
}

TEST(ProfileLikelihood, NormalizedAtArgmin) {
  const std::vector<ProfilePoint> pts{point(1, 0.5), point(2, 0.2), point(3, 0.3)};
  const auto c = profile_likelihood(pts, 100);
  EXPECT_EQ(c.rel_lp[1], 1.0);
  EXPECT_LT(c.rel_lp[0], 1.0);
  EXPECT_LT(c.rel_lp[2], 1.0);
}

TEST(ProfileLikelihood, RatioIsPowerOfF2Ratio) {
  const double r = 1.01;
  const std::size_t n = 300;
  const std::vector<ProfilePoint> pts{point(1, 0.2), point(2, 0.2 * r)};
  const auto c = profile_likelihood(pts, n);
  EXPECT_NEAR(c.rel_lp[1] / c.rel_lp[0], std::pow(r, -0.5 * n), 1e-12);
  EXPECT_NEAR(c.log_lp[1] - c.log_lp[0], -0.5 * n * std::log(r), 1e-12);
}

TEST(ProfileLikelihood, ExcludedAndPerfectPoints) {
  const std::vector<ProfilePoint> pts{point(1, 0.5), point(2, 0.1, false), point(3, 0.0)};
  const auto c = profile_likelihood(pts, 50);
  EXPECT_TRUE(std::isnan(c.rel_lp[1]));
  EXPECT_TRUE(c.flags[1] & kFlagNotConverged);
  EXPECT_TRUE(c.flags[2] & kFlagPerfectFit);
  EXPECT_EQ(c.rel_lp[2], 1.0);
  EXPECT_EQ(c.rel_lp[0], 0.0);
}

TEST(ProfileLikelihood, ArgmaxIsArgminF2) {
  const auto& f = noisy_fit();
  const auto c = profile_likelihood(f.profile, noisy().obs.size());
  const auto arg = *profile_argmin(f.profile);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LE(c.rel_lp[i], c.rel_lp[arg]);
  EXPECT_EQ(c.rel_lp[arg], 1.0);
}

TEST(Normalize, LogSpace) {
  const std::vector<double> v{-1e6, -1e6 + 1, std::numeric_limits<double>::quiet_NaN()};
  const auto r = normalize_log_likelihood(v);
  EXPECT_EQ(r[1], 1.0);
  EXPECT_NEAR(r[0], std::exp(-1.0), 1e-15);
  EXPECT_TRUE(std::isnan(r[2]));
}

TEST(FisherBlocks, ZeroNoiseResidualHessianVanishes) {
  const auto& w = clean();
  const auto f = fisher_blocks(w.obs, w.truth);
  EXPECT_LT(f.h.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FisherBlocks, SingleObservationOuterProduct) {
  Observations obs;
  obs.t = {10.0};
  obs.y = {1.0};
  const LpplsParams p{{40.5, 0.7, 8.0}, {1.2, -0.1, 0.01, 0.02}, 0.0};
  const auto f = fisher_blocks(obs, p);
  const Vector6 g = grad_psi(10.0, p);
  EXPECT_TRUE(f.xtx.isApprox(g * g.transpose(), 1e-15));
  const double e = 1.0 - lppls_eval(10.0, p.nonlinear, p.linear);
  EXPECT_TRUE(f.h.isApprox(e * hess_psi(10.0, p), 1e-15));
}

TEST(FisherBlocks, InformationMatchesFiniteDifferenceHessian) {
  const auto& w = noisy();
  const auto& pt = noisy_fit().profile[10];
  const LpplsParams p = pt.params();
  const auto f = fisher_blocks(w.obs, p);
  ASSERT_TRUE(f.positive_definite());

  const Matrix6 fd = fd_sse_hessian(w.obs, p);
  // Information block is the Hessian of SSE / (2 s).
  const Matrix6 info = f.information().topLeftCorner<6, 6>();
  const Matrix6 fd_info = fd / (2.0 * f.s_hat);
  EXPECT_LT(scaled_max_error(info, fd_info), 1e-4);
  EXPECT_NEAR(f.information()(6, 6), w.obs.size() / (2.0 * f.s_hat * f.s_hat), 1e-9);
}

TEST(Severini, AtMleAgainstItselfIsGramMatrix) {
  const auto& w = noisy();
  const auto& mle = noisy_fit().mle.params;
  const auto f = fisher_blocks(w.obs, mle);
  const Matrix7 sig = severini_sigma(w.obs, mle, mle);
  EXPECT_TRUE((sig.topLeftCorner<6, 6>() * mle.s).isApprox(f.xtx, 1e-13));
  EXPECT_TRUE((sig.topRightCorner<6, 1>().isZero(0.0)));
}

TEST(Severini, TransposeSymmetry) {
  const auto& w = noisy();
  const auto a = noisy_fit().profile[3].params();
  auto b = noisy_fit().mle.params;
  b.s = a.s;
  const Matrix7 ab = severini_sigma(w.obs, a, b);
  const Matrix7 ba = severini_sigma(w.obs, b, a);
  EXPECT_TRUE(ab.isApprox(ba.transpose(), 1e-14));
}

TEST(Severini, MatchesPerObservationExpectedScoreSum) {
  const auto& w = noisy();
  for (std::size_t k : {0u, 7u, 15u}) {
    const auto a = noisy_fit().profile[k].params();
    const auto b = noisy_fit().mle.params;
    const Matrix7 exact = severini_sigma(w.obs, a, b);
    const Matrix7 oracle = expected_score_product(w.obs, a, b);
    EXPECT_LT(max_component_rel_error(exact.reshaped(), oracle.reshaped(), 1e-12), 1e-10) << k;
  }
}

TEST(Severini, SampleFormIsUnbiasedInExpectation) {
  // With data drawn at the evaluation point the literal residual sum averages
  // to the exact form.
  const auto& w = clean();
  LpplsParams p = w.truth;
  p.s = 0.03 * 0.03;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 0.03);
  Matrix7 mean = Matrix7::Zero();
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    Observations o = w.obs;
    for (auto& y : o.y) y += z(rng);
    mean += sample_score_covariance(o, p, p) / reps;
  }
  const Matrix7 exact = severini_sigma(w.obs, p, p);
  EXPECT_LT(scaled_max_error(mean, exact), 0.1);
}

TEST(ModifiedLikelihood, ReducesToGramDeterminantWhenHVanishes) {
  const auto& w = clean();
  const auto f = fisher_blocks(w.obs, w.truth);
  const double s = 1e-6;
  std::uint32_t flag = 0;
  const auto v = modified_log_likelihood(f.xtx, f.xtx, s, w.obs.size(), flag);
  ASSERT_TRUE(v);
  const double expected = -0.5 * *linalg::logdet_spd(f.xtx) - 0.5 * (w.obs.size() - 8.0) * std::log(s);
  EXPECT_NEAR(*v, expected, 1e-9 * std::abs(expected));
  EXPECT_EQ(flag, 0u);
}

TEST(ModifiedLikelihood, StableForLargeNAndTinyVariance) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(6, 6) * 1e300;
  a(0, 0) = 1e-300;
  std::uint32_t flag = 0;
  const auto v = modified_log_likelihood(a, a, 1e-12, 1000, flag);
  ASSERT_TRUE(v);
  EXPECT_TRUE(std::isfinite(*v));
}

TEST(ModifiedLikelihood, FlagsNonPositiveDefinite) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(6, 6);
  a(2, 2) = -1.0;
  std::uint32_t flag = 0;
  EXPECT_FALSE(modified_log_likelihood(a, Eigen::MatrixXd::Identity(6, 6), 1.0, 100, flag));
  EXPECT_TRUE(flag & kFlagNotPositiveDefinite);
  flag = 0;
  EXPECT_FALSE(modified_log_likelihood(Eigen::MatrixXd::Identity(6, 6), Eigen::MatrixXd::Zero(6, 6), 1.0,
                                       100, flag));
  EXPECT_TRUE(flag & kFlagSingularSigma);
}

TEST(ModifiedLikelihood, ZeroNoiseArgmaxMatchesProfile) {
  const auto& w = clean();
  const auto f = fit(w.obs, w.t2_time);
  const auto c = modified_profile_likelihood(w.obs, f.profile, f.mle);
  std::size_t lp = 0, lm = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.rel_lp[i] == 1.0) lp = i;
    if (c.rel_lm[i] == 1.0) lm = i;
  }
  EXPECT_EQ(lp, lm);
  EXPECT_LE(std::abs(c.grid[lm] - w.tc_true), 2.0);
}

TEST(ModifiedLikelihood, NormalizedAndInvariantToLevelShift) {
  const auto& w = noisy();
  const auto& f = noisy_fit();
  const auto c = modified_profile_likelihood(w.obs, f.profile, f.mle);
  double mx = 0;
  for (double v : c.rel_lm)
    if (!std::isnan(v)) mx = std::max(mx, v);
  EXPECT_EQ(mx, 1.0);

  Observations shifted = w.obs;
  for (auto& y : shifted.y) y += 1.5;
  const auto g = fit(shifted, w.t2_time);
  const auto d = modified_profile_likelihood(shifted, g.profile, g.mle);
  ASSERT_EQ(c.size(), d.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(std::isnan(c.rel_lm[i]), std::isnan(d.rel_lm[i])) << i;
    if (!std::isnan(c.rel_lm[i])) EXPECT_NEAR(c.rel_lm[i], d.rel_lm[i], 1e-6) << i;
  }
}

TEST(ModifiedLikelihood, ParallelMatchesSequential) {
  const auto& w = noisy();
  const auto& f = noisy_fit();
  const auto a = modified_profile_likelihood(w.obs, f.profile, f.mle, 1);
  const auto b = modified_profile_likelihood(w.obs, f.profile, f.mle, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.flags[i], b.flags[i]);
    if (!std::isnan(a.log_lm[i])) EXPECT_EQ(a.log_lm[i], b.log_lm[i]);
  }
}

TEST(ModifiedLikelihood, AllExcludedIsAnError) {
  const auto& w = noisy();
  std::vector<ProfilePoint> pts(3, point(0, 1.0, false));
  EXPECT_THROW(modified_profile_likelihood(w.obs, pts, noisy_fit().mle), ConvergenceError);
}
