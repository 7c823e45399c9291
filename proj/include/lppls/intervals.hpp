#pragma once

// Likelihood intervals from relative-likelihood curves, nuisance profiles of
// m and omega at fixed tc, and their quadratic (Fisher) approximations,
// including the damping D through a change of variables.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lppls/calibrate.hpp"
#include "lppls/error.hpp"
#include "lppls/likelihood.hpp"
#include "lppls/linalg.hpp"
#include "lppls/model.hpp"
#include "lppls/nelder_mead.hpp"
#include "lppls/parallel.hpp"
#include "lppls/series.hpp"

namespace lppls {

inline constexpr double kDefaultCutoff = 0.05;

struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Segment&) const = default;
};

struct LikelihoodInterval {
  double cutoff = kDefaultCutoff;
  std::vector<Segment> segments;
  bool boundary_touched = false;

  bool contains(double x) const {
    return std::any_of(segments.begin(), segments.end(),
                       [x](const Segment& s) { return x >= s.lo && x <= s.hi; });
  }
};

/// Maximal runs of rel > cutoff over the points with a defined (non-NaN)
/// relative likelihood. Run ends are moved to the linearly interpolated
/// crossing with the neighbouring defined point; a run that reaches the first
/// or last defined point sets boundary_touched.
inline LikelihoodInterval threshold_segments(std::span<const double> x, std::span<const double> rel,
                                             double cutoff) {
  if (x.size() != rel.size()) throw ConfigError("grid and curve lengths differ");
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw ConfigError("cutoff must lie in (0, 1)");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rel.size(); ++i)
    if (!std::isnan(rel[i])) idx.push_back(i);

  auto crossing = [&](std::size_t a, std::size_t b) {
    const double ra = rel[a], rb = rel[b];
    if (ra == rb) return 0.5 * (x[a] + x[b]);
    const double w = (cutoff - ra) / (rb - ra);
    return x[a] + std::clamp(w, 0.0, 1.0) * (x[b] - x[a]);
  };

  LikelihoodInterval li;
  li.cutoff = cutoff;
  std::size_t k = 0;
  while (k < idx.size()) {
    if (!(rel[idx[k]] > cutoff)) {
      ++k;
      continue;
    }
    std::size_t e = k;
    while (e + 1 < idx.size() && rel[idx[e + 1]] > cutoff) ++e;
    Segment s;
    if (k == 0) {
      s.lo = x[idx[k]];
      li.boundary_touched = true;
    } else {
      s.lo = crossing(idx[k - 1], idx[k]);
    }
    if (e + 1 == idx.size()) {
      s.hi = x[idx[e]];
      li.boundary_touched = true;
    } else {
      s.hi = crossing(idx[e], idx[e + 1]);
    }
    li.segments.push_back(s);
    k = e + 1;
  }
  return li;
}

inline LikelihoodInterval likelihood_interval(const LikelihoodCurve& curve, CurveKind which,
                                              double cutoff = kDefaultCutoff) {
  const auto& rel = curve.relative(which);
  const auto valid = std::count_if(rel.begin(), rel.end(), [](double v) { return !std::isnan(v); });
  if (valid < 3) throw DataError("likelihood interval needs at least 3 usable grid points");
  auto li = threshold_segments(curve.grid, rel, cutoff);
  if (li.segments.empty()) throw DataError("no grid point lies above the cutoff");
  return li;
}

/// True when the plain and modified curves lead to different conclusions at
/// `cutoff`: a different argmax grid point or a different number of interval
/// segments. Both curves are reported either way.
inline bool curves_disagree(const LikelihoodCurve& curve, double cutoff = kDefaultCutoff) {
  auto argmax = [](const std::vector<double>& rel) {
    std::size_t best = rel.size();
    for (std::size_t i = 0; i < rel.size(); ++i)
      if (!std::isnan(rel[i]) && (best == rel.size() || rel[i] > rel[best])) best = i;
    return best;
  };
  if (argmax(curve.rel_lp) != argmax(curve.rel_lm)) return true;
  return threshold_segments(curve.grid, curve.rel_lp, cutoff).segments.size() !=
         threshold_segments(curve.grid, curve.rel_lm, cutoff).segments.size();
}

/// m over [0.05, 1.5] step 0.01.
inline std::vector<double> default_m_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 145; ++k) g.push_back(0.05 + 0.01 * k);
  return g;
}

/// omega over [2, 20] step 0.05.
inline std::vector<double> default_omega_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 360; ++k) g.push_back(2.0 + 0.05 * k);
  return g;
}

/// Reduced design of the nuisance profile: X and H with the row/column of
/// the profiled parameter deleted.
inline Eigen::MatrixXd drop_column(const Eigen::MatrixXd& x, int j) {
  Eigen::MatrixXd r(x.rows(), x.cols() - 1);
  for (Eigen::Index c = 0, k = 0; c < x.cols(); ++c)
    if (c != j) r.col(k++) = x.col(c);
  return r;
}

inline Eigen::MatrixXd drop_row_column(const Eigen::MatrixXd& a, int j) {
  const Eigen::MatrixXd t = drop_column(a, j);
  return drop_column(t.transpose(), j).transpose();
}

/// Profile and modified profile likelihood of m (or omega) at fixed tc.
/// At each grid value the other nonlinear parameter is optimized in 1-D by
/// Nelder-Mead with exact linear amplitudes. The reference gradients in the
/// denominator are taken at `reference`, the unconstrained optimum at this tc.
inline LikelihoodCurve nuisance_profile(const Observations& obs, const ProfilePoint& reference,
                                        NuisanceParameter which, std::span<const double> grid,
                                        const CalibrationOptions& opt = {}) {
  if (which == NuisanceParameter::damping)
    throw ConfigError("damping has no direct nuisance profile");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const bool profile_m = which == NuisanceParameter::m;
  const int drop = profile_m ? kM : kOmega;
  const double tc = reference.tc;
  const detail::FixedTcCost cost(obs, tc);
  const std::size_t n = obs.size();

  std::vector<double> free_starts;
  if (profile_m) {
    for (const auto& s : opt.starts) free_starts.push_back(s.omega);
  } else {
    for (const auto& s : opt.starts) free_starts.push_back(s.m);
  }
  std::sort(free_starts.begin(), free_starts.end());
  free_starts.erase(std::unique(free_starts.begin(), free_starts.end()), free_starts.end());
  free_starts.push_back(profile_m ? reference.omega_hat : reference.m_hat);

  const Box<1> box = profile_m ? Box<1>{{opt.box.omega_min}, {opt.box.omega_max}}
                               : Box<1>{{opt.box.m_min}, {opt.box.m_max}};
  const double step = profile_m ? 1.0 : 0.1;

  std::vector<ProfilePoint> pts(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = grid[k];
    auto objective = [&](const Point<1>& x) {
      return profile_m ? cost.f1(v, x[0], opt.max_condition) : cost.f1(x[0], v, opt.max_condition);
    };
    std::vector<double> starts = free_starts;
    if (k > 0 && std::isfinite(pts[k - 1].f2))
      starts.push_back(profile_m ? pts[k - 1].omega_hat : pts[k - 1].m_hat);
    NelderMeadResult<1> best;
    int used = 0;
    for (double s0 : starts) {
      const auto r = nelder_mead<1>(objective, {s0}, {step}, box, opt.nelder_mead);
      ++used;
      if (r.f < best.f || (r.f == best.f && r.converged && !best.converged)) best = r;
    }
    ProfilePoint& p = pts[k];
    p.tc = tc;
    p.n = n;
    p.starts_used = used;
    p.m_hat = profile_m ? v : best.x[0];
    p.omega_hat = profile_m ? best.x[0] : v;
    p.converged = best.converged && std::isfinite(best.f);
    const auto sol = cost.solve(p.m_hat, p.omega_hat, opt.max_condition);
    if (!sol) {
      p.degenerate = true;
      p.converged = false;
      continue;
    }
    p.linear = sol->linear;
    p.f2 = sol->sse;
    p.s_hat = sol->sse / static_cast<double>(n);
    p.condition_number = sol->condition_number;
  }

  LikelihoodCurve c = profile_likelihood(pts, n);
  c.grid.assign(grid.begin(), grid.end());

  Eigen::MatrixXd x_ref(static_cast<Eigen::Index>(n), kPsiDim);
  for (std::size_t i = 0; i < n; ++i)
    x_ref.row(static_cast<Eigen::Index>(i)) = grad_psi(obs.t[i], reference.params()).transpose();
  const Eigen::MatrixXd x_ref_red = drop_column(x_ref, drop);

  parallel_for(pts.size(), opt.threads, [&](std::size_t k) {
    if (c.flags[k] & kLpExcluding) return;
    const ProfilePoint& p = pts[k];
    if (!(p.s_hat > 0.0)) return;
    const auto d = design_blocks(obs, p.params());
    const Eigen::MatrixXd x_red = drop_column(d.x, drop);
    const Eigen::MatrixXd a = x_red.transpose() * x_red - drop_row_column(d.h, drop);
    const Eigen::MatrixXd cross = x_ref_red.transpose() * x_red;
    std::uint32_t flag = c.flags[k];
    const auto v = modified_log_likelihood(a, cross, p.s_hat, n, flag);
    c.flags[k] = flag;
    c.log_lm[k] = v ? *v : nan;
  });
  c.rel_lm = normalize_log_likelihood(c.log_lm);
  return c;
}

/// sqrt(-2 ln c)
inline double cutoff_multiplier(double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw ConfigError("cutoff must lie in (0, 1)");
  return std::sqrt(-2.0 * std::log(cutoff));
}

inline Matrix7 invert_information(const Matrix7& info) {
  const auto inv = linalg::inverse_spd(info);
  if (!inv)
    throw DegenerateDesignError("observed information is not invertible",
                                linalg::scaled_condition_number(info));
  return *inv;
}

/// Quadratic approximation m_hat +- sqrt(-2 ln c [I^-1]_jj) (resp. omega).
inline NuisanceInterval approx_nuisance_interval(const FisherBlocks& fisher, NuisanceParameter which,
                                                 double cutoff = kDefaultCutoff) {
  if (which == NuisanceParameter::damping)
    throw ConfigError("use damping_interval for the damping parameter");
  const int j = which == NuisanceParameter::m ? kM : kOmega;
  const Matrix7 inv = invert_information(fisher.information());
  NuisanceInterval out;
  out.parameter = which;
  out.center = which == NuisanceParameter::m ? fisher.params.nonlinear.m : fisher.params.nonlinear.omega;
  out.half_width = cutoff_multiplier(cutoff) * std::sqrt(std::max(inv(j, j), 0.0));
  return out;
}

/// d eta / d zeta for zeta = (D, omega, A, B, C1, C2, s), i.e. m expressed as
/// D omega |C| / |B|.
inline Matrix7 damping_jacobian(const LpplsParams& p) {
  const double B = p.linear.B, C1 = p.linear.C1, C2 = p.linear.C2, w = p.nonlinear.omega;
  const double c = std::hypot(C1, C2);
  const double b = std::abs(B);
  if (b == 0.0 || c == 0.0) throw DomainError("damping transform needs B != 0 and |C| > 0");
  const double D = damping(p);
  Matrix7 j = Matrix7::Identity();
  j(0, 0) = w * c / b;
  j(0, 1) = D * c / b;
  j(0, 2) = 0.0;
  j(0, 3) = -D * w * c / (B * b);
  j(0, 4) = D * w * C1 / (b * c);
  j(0, 5) = D * w * C2 / (b * c);
  j(0, 6) = 0.0;
  return j;
}

/// d zeta / d eta, the inverse transform's Jacobian.
inline Matrix7 damping_inverse_jacobian(const LpplsParams& p) {
  const double B = p.linear.B, C1 = p.linear.C1, C2 = p.linear.C2;
  const double m = p.nonlinear.m, w = p.nonlinear.omega;
  const double c2 = C1 * C1 + C2 * C2;
  if (B == 0.0 || c2 == 0.0 || m == 0.0) throw DomainError("damping transform needs m, B, |C| != 0");
  const double D = damping(p);
  Matrix7 k = Matrix7::Identity();
  k(0, 0) = D / m;
  k(0, 1) = -D / w;
  k(0, 2) = 0.0;
  k(0, 3) = D / B;
  k(0, 4) = -D * C1 / c2;
  k(0, 5) = -D * C2 / c2;
  k(0, 6) = 0.0;
  return k;
}

/// D_hat +- sqrt(-2 ln c [I(zeta)^-1]_11) with I(zeta) = J' I(eta) J.
inline NuisanceInterval damping_interval(const FisherBlocks& fisher, double cutoff = kDefaultCutoff) {
  const Matrix7 j = damping_jacobian(fisher.params);
  const Matrix7 info_zeta = j.transpose() * fisher.information() * j;
  const Matrix7 inv = invert_information(info_zeta);
  NuisanceInterval out;
  out.parameter = NuisanceParameter::damping;
  out.center = damping(fisher.params);
  out.half_width = cutoff_multiplier(cutoff) * std::sqrt(std::max(inv(0, 0), 0.0));
  return out;
}

/// All three approximate intervals at one tc; nullopt when the information
/// is singular or the damping transform is undefined.
inline std::optional<NuisanceIntervals> approx_nuisance_intervals(const FisherBlocks& fisher,
                                                                  double cutoff = kDefaultCutoff) {
  if (!fisher.positive_definite() || !(fisher.s_hat > 0.0)) return std::nullopt;
  try {
    return NuisanceIntervals{approx_nuisance_interval(fisher, NuisanceParameter::m, cutoff),
                             approx_nuisance_interval(fisher, NuisanceParameter::omega, cutoff),
                             damping_interval(fisher, cutoff)};
  } catch (const DomainError&) {
    return std::nullopt;
  } catch (const DegenerateDesignError&) {
    return std::nullopt;
  }
}

}  // namespace lppls
