#pragma once

// Normal likelihood of the LPPLS model, the profile likelihood of tc and the
// modified profile likelihood in Severini's score-covariance form:
//
//   log Lp(tc) = -(n/2) ln F2(tc)
//   log Lm(tc) = 1/2 log|X'X - H| - log|X_hat' X| - ((n - p - 2)/2) ln s_tc
//
// X is the n x p gradient matrix at (tc, psi_tc), X_hat the same at the full
// MLE, H the residual-weighted Hessian sum and s_tc = F2(tc)/n.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lppls/calibrate.hpp"
#include "lppls/error.hpp"
#include "lppls/linalg.hpp"
#include "lppls/model.hpp"
#include "lppls/parallel.hpp"
#include "lppls/series.hpp"

namespace lppls {

/// Variance MLE, SSE / n.
inline double sigma2_mle(double sse, std::size_t n) {
  if (n == 0) throw DomainError("sigma2_mle requires n > 0");
  if (!(sse >= 0.0)) throw DomainError("sigma2_mle requires sse >= 0");
  return sse / static_cast<double>(n);
}

/// Bias-corrected variance, SSE / (n - 7).
inline double sigma2_unbiased(double sse, std::size_t n) {
  if (n <= static_cast<std::size_t>(kEtaDim)) throw DomainError("sigma2_unbiased requires n > 7");
  if (!(sse >= 0.0)) throw DomainError("sigma2_unbiased requires sse >= 0");
  return sse / static_cast<double>(n - kEtaDim);
}

/// Per-point markers. Any flag other than kPerfectFit excludes the point from
/// the curve it affects.
enum PointFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagNotConverged = 1u << 0,
  kFlagDegenerate = 1u << 1,     ///< normal matrix too ill-conditioned
  kFlagNotPositiveDefinite = 1u << 2,  ///< X'X - H not positive definite
  kFlagSingularSigma = 1u << 3,  ///< score covariance numerically singular
  kFlagPerfectFit = 1u << 4,     ///< F2 = 0, infinite profile likelihood
};

inline constexpr std::uint32_t kLpExcluding = kFlagNotConverged | kFlagDegenerate;
inline constexpr std::uint32_t kLmExcluding =
    kLpExcluding | kFlagNotPositiveDefinite | kFlagSingularSigma;

enum class CurveKind { lp, lm };

/// Likelihood values over a one-dimensional grid (tc, or a nuisance
/// parameter). Excluded points carry NaN in the log and relative columns.
struct LikelihoodCurve {
  std::vector<double> grid;
  std::vector<double> f2;
  std::vector<double> log_lp;
  std::vector<double> log_lm;
  std::vector<double> rel_lp;
  std::vector<double> rel_lm;
  std::vector<std::uint32_t> flags;
  /// Subordinated estimates behind each grid value.
  std::vector<ProfilePoint> points;
  std::size_t n = 0;

  std::size_t size() const { return grid.size(); }
  const std::vector<double>& relative(CurveKind k) const { return k == CurveKind::lp ? rel_lp : rel_lm; }
  const std::vector<double>& log_likelihood(CurveKind k) const {
    return k == CurveKind::lp ? log_lp : log_lm;
  }
};

/// exp(v - max v) over finite entries; +inf entries map to 1 and everything
/// else to 0; NaN stays NaN.
inline std::vector<double> normalize_log_likelihood(std::span<const double> logl) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logl)
    if (!std::isnan(v)) mx = std::max(mx, v);
  std::vector<double> rel(logl.size(), nan);
  for (std::size_t i = 0; i < logl.size(); ++i) {
    const double v = logl[i];
    if (std::isnan(v)) continue;
    if (std::isinf(mx) && mx > 0) rel[i] = std::isinf(v) && v > 0 ? 1.0 : 0.0;
    else rel[i] = std::exp(v - mx);
  }
  return rel;
}

/// Profile log-likelihood columns (f2, log_lp, rel_lp) from a tc profile.
inline LikelihoodCurve profile_likelihood(std::span<const ProfilePoint> profile, std::size_t n) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  LikelihoodCurve c;
  c.n = n;
  c.points.assign(profile.begin(), profile.end());
  for (const auto& p : profile) {
    std::uint32_t flag = kFlagNone;
    if (!p.converged) flag |= kFlagNotConverged;
    if (p.degenerate || !std::isfinite(p.f2)) flag |= kFlagDegenerate;
    if (p.f2 == 0.0) flag |= kFlagPerfectFit;
    c.grid.push_back(p.tc);
    c.f2.push_back(p.f2);
    c.flags.push_back(flag);
    if (flag & kLpExcluding) c.log_lp.push_back(nan);
    else c.log_lp.push_back(-0.5 * static_cast<double>(n) * std::log(p.f2));
  }
  c.rel_lp = normalize_log_likelihood(c.log_lp);
  c.log_lm.assign(c.size(), nan);
  c.rel_lm.assign(c.size(), nan);
  return c;
}

/// Gradient matrix X (n x 6) and residual-weighted Hessian sum H at one
/// parameter point.
struct DesignBlocks {
  Eigen::MatrixXd x;
  Matrix6 h = Matrix6::Zero();
  Eigen::VectorXd residuals;
};

inline DesignBlocks design_blocks(const Observations& obs, const LpplsParams& p) {
  const std::size_t n = obs.size();
  DesignBlocks d;
  d.x.resize(static_cast<Eigen::Index>(n), kPsiDim);
  d.residuals.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    d.x.row(row) = grad_psi(obs.t[i], p).transpose();
    const double e = obs.y[i] - lppls_eval(obs.t[i], p.nonlinear, p.linear);
    d.residuals[row] = e;
    d.h.noalias() += e * hess_psi(obs.t[i], p);
  }
  return d;
}

/// Observed-information ingredients at (tc, psi_tc).
struct FisherBlocks {
  LpplsParams params;
  std::size_t n = 0;
  Matrix6 xtx = Matrix6::Zero();
  Matrix6 h = Matrix6::Zero();
  double s_hat = 0.0;
  /// log|I(eta)| of the 7 x 7 information; nullopt when X'X - H is not PD.
  std::optional<double> log_det_i;

  bool positive_definite() const { return log_det_i.has_value(); }

  /// I(eta): psi block (X'X - H)/s, variance entry n/(2 s^2), no cross terms.
  Matrix7 information() const {
    Matrix7 info = Matrix7::Zero();
    info.topLeftCorner<6, 6>() = (xtx - h) / s_hat;
    info(6, 6) = static_cast<double>(n) / (2.0 * s_hat * s_hat);
    return info;
  }
};

inline FisherBlocks fisher_blocks(const Observations& obs, const LpplsParams& p) {
  const auto d = design_blocks(obs, p);
  FisherBlocks f;
  f.params = p;
  f.n = obs.size();
  f.xtx = d.x.transpose() * d.x;
  f.h = d.h;
  f.s_hat = d.residuals.squaredNorm() / static_cast<double>(obs.size());
  const Matrix6 a = f.xtx - f.h;
  if (f.s_hat > 0.0) {
    if (const auto ld = linalg::logdet_spd(a)) {
      const double n = static_cast<double>(obs.size());
      f.log_det_i = *ld - kPsiDim * std::log(f.s_hat) + std::log(n / 2.0) - 2.0 * std::log(f.s_hat);
    }
  }
  return f;
}

inline FisherBlocks fisher_blocks(const Observations& obs, const ProfilePoint& p) {
  return fisher_blocks(obs, p.params());
}

/// sum_i grad(t_i; a) grad(t_i; b)^T
inline Matrix6 score_cross_product(const Observations& obs, const LpplsParams& a, const LpplsParams& b) {
  Matrix6 m = Matrix6::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i)
    m.noalias() += grad_psi(obs.t[i], a) * grad_psi(obs.t[i], b).transpose();
  return m;
}

/// Exact score covariance Sigma(tc, eta_tc; tc_hat, eta_hat) of the Gaussian
/// model, expectation under the second argument:
/// psi block X(a)'X(b)/s_a, variance entry n/(2 s_a^2), cross terms zero.
inline Matrix7 severini_sigma(const Observations& obs, const LpplsParams& at_tc,
                              const LpplsParams& at_mle) {
  if (!(at_tc.s > 0.0)) throw DomainError("severini_sigma requires a positive variance");
  Matrix7 sig = Matrix7::Zero();
  sig.topLeftCorner<6, 6>() = score_cross_product(obs, at_tc, at_mle) / at_tc.s;
  sig(6, 6) = static_cast<double>(obs.size()) / (2.0 * at_tc.s * at_tc.s);
  return sig;
}

/// Per-observation log-likelihood score d/d eta of
/// -ln(2 pi s)/2 - (y - LPPLS)^2 / (2 s).
inline Eigen::Matrix<double, 7, 1> observation_score(double t, double y, const LpplsParams& p) {
  const double e = y - lppls_eval(t, p.nonlinear, p.linear);
  Eigen::Matrix<double, 7, 1> g;
  g.head<6>() = grad_psi(t, p) * (e / p.s);
  g[6] = -0.5 / p.s + e * e / (2.0 * p.s * p.s);
  return g;
}

/// Sample estimate sum_i score_i(a) score_i(b)^T from the observed residuals.
inline Matrix7 sample_score_covariance(const Observations& obs, const LpplsParams& a,
                                       const LpplsParams& b) {
  Matrix7 m = Matrix7::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i)
    m.noalias() += observation_score(obs.t[i], obs.y[i], a) *
                   observation_score(obs.t[i], obs.y[i], b).transpose();
  return m;
}

/// Modified profile log-likelihood for p nuisance coordinates.
/// Returns nullopt (with the reason in `flag`) when X'X - H is not positive
/// definite or the score cross product is singular.
inline std::optional<double> modified_log_likelihood(const Eigen::MatrixXd& xtx_minus_h,
                                                     const Eigen::MatrixXd& cross, double s_hat,
                                                     std::size_t n, std::uint32_t& flag) {
  const auto p = static_cast<double>(xtx_minus_h.rows());
  const auto num = linalg::logdet_spd(xtx_minus_h);
  if (!num) {
    flag |= kFlagNotPositiveDefinite;
    return std::nullopt;
  }
  const auto den = linalg::log_abs_det(cross);
  if (!den) {
    flag |= kFlagSingularSigma;
    return std::nullopt;
  }
  return 0.5 * *num - *den - 0.5 * (static_cast<double>(n) - p - 2.0) * std::log(s_hat);
}

/// Profile and modified profile likelihood over a tc profile, with the full
/// MLE supplying the reference gradients.
inline LikelihoodCurve modified_profile_likelihood(const Observations& obs,
                                                   std::span<const ProfilePoint> profile,
                                                   const FitResult& mle, unsigned threads = 1) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  LikelihoodCurve c = profile_likelihood(profile, obs.size());
  const std::size_t n = obs.size();
  Eigen::MatrixXd x_hat(static_cast<Eigen::Index>(n), kPsiDim);
  for (std::size_t i = 0; i < n; ++i)
    x_hat.row(static_cast<Eigen::Index>(i)) = grad_psi(obs.t[i], mle.params).transpose();

  parallel_for(profile.size(), threads, [&](std::size_t k) {
    if (c.flags[k] & kLpExcluding) return;
    const ProfilePoint& p = profile[k];
    if (!(p.s_hat > 0.0)) return;
    const auto d = design_blocks(obs, p.params());
    const Eigen::MatrixXd a = d.x.transpose() * d.x - d.h;
    const Eigen::MatrixXd cross = x_hat.transpose() * d.x;
    std::uint32_t flag = c.flags[k];
    const auto v = modified_log_likelihood(a, cross, p.s_hat, n, flag);
    c.flags[k] = flag;
    c.log_lm[k] = v ? *v : nan;
  });
  bool any = false;
  for (double v : c.log_lm) any = any || !std::isnan(v);
  if (!any) throw ConvergenceError("every grid point was excluded from the modified profile likelihood");
  c.rel_lm = normalize_log_likelihood(c.log_lm);
  return c;
}

}  // namespace lppls
