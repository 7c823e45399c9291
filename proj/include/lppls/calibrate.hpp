#pragma once

// Least-squares calibration with the linear amplitudes solved exactly and
// (m, omega) subordinated to tc:
//
//   F1(tc, m, omega) = min_{A,B,C1,C2} SSE
//   F2(tc)           = min_{m,omega}  F1(tc, m, omega)
//   tc_hat           = argmin_tc      F2(tc)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lppls/error.hpp"
#include "lppls/linalg.hpp"
#include "lppls/model.hpp"
#include "lppls/nelder_mead.hpp"
#include "lppls/parallel.hpp"
#include "lppls/series.hpp"

namespace lppls {

struct StartPoint {
  double m;
  double omega;
};

/// m in {0.2, 0.5, 0.8} x omega in {4, 7, 10, 13, 17}.
inline std::vector<StartPoint> default_starts() {
  std::vector<StartPoint> s;
  for (double m : {0.2, 0.5, 0.8})
    for (double w : {4.0, 7.0, 10.0, 13.0, 17.0}) s.push_back({m, w});
  return s;
}

/// Optimizer search box; deliberately wider than the qualification bounds.
struct SearchBox {
  double m_min = 0.01;
  double m_max = 1.99;
  double omega_min = 1.0;
  double omega_max = 50.0;
};

struct CalibrationOptions {
  std::vector<StartPoint> starts = default_starts();
  SearchBox box;
  NelderMeadOptions nelder_mead;
  double max_condition = 1e12;
  /// Seed each profile point with its neighbour's optimum. Only used when the
  /// profile runs sequentially.
  bool warm_start = true;
  unsigned threads = 1;
  /// Restarts of the joint (tc, m, omega) polish in full_mle.
  int polish_restarts = 3;
};

struct LinearSolution {
  LinearParams linear;
  double sse = 0.0;
  double condition_number = 0.0;
};

namespace detail {

/// F1 at a fixed tc. Holds ln|tc - t_i| so that each (m, omega) evaluation
/// costs one exp and one sincos per observation.
class FixedTcCost {
 public:
  FixedTcCost(const Observations& obs, double tc)
      : y_(&obs.y), tc_(tc), logd_(obs.size()), f_(obs.size()), g_(obs.size()), h_(obs.size()) {
    for (std::size_t i = 0; i < obs.size(); ++i) logd_[i] = checked_log_distance(obs.t[i], tc);
  }

  double tc() const { return tc_; }
  std::size_t size() const { return logd_.size(); }

  /// Linear amplitudes and SSE; nullopt when the scaled normal matrix has
  /// condition number above `max_condition`.
  std::optional<LinearSolution> solve(double m, double omega, double max_condition) const {
    const auto& y = *y_;
    const std::size_t n = size();
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    Eigen::Vector4d r = Eigen::Vector4d::Zero();
    double sf = 0, sg = 0, sh = 0, sff = 0, sfg = 0, sfh = 0, sgg = 0, sgh = 0, shh = 0;
    double sy = 0, syf = 0, syg = 0, syh = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Basis b = basis_from_log(logd_[i], m, omega);
      f_[i] = b.f;
      g_[i] = b.g;
      h_[i] = b.h;
      sf += b.f;
      sg += b.g;
      sh += b.h;
      sff += b.f * b.f;
      sfg += b.f * b.g;
      sfh += b.f * b.h;
      sgg += b.g * b.g;
      sgh += b.g * b.h;
      shh += b.h * b.h;
      sy += y[i];
      syf += y[i] * b.f;
      syg += y[i] * b.g;
      syh += y[i] * b.h;
    }
    M << static_cast<double>(n), sf, sg, sh,
         sf, sff, sfg, sfh,
         sg, sfg, sgg, sgh,
         sh, sfh, sgh, shh;
    r << sy, syf, syg, syh;
    const double cond = linalg::scaled_condition_number(M);
    if (!(cond <= max_condition)) return std::nullopt;
    const Eigen::Vector4d d = M.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::Matrix4d Ms = d.asDiagonal() * M * d.asDiagonal();
    const Eigen::LLT<Eigen::Matrix4d> llt(Ms);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::Vector4d beta = d.asDiagonal() * llt.solve(d.asDiagonal() * r);
    LinearSolution out;
    out.linear = {beta[0], beta[1], beta[2], beta[3]};
    out.condition_number = cond;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - lppls_from_basis({f_[i], g_[i], h_[i], logd_[i]}, out.linear);
      sse += e * e;
    }
    out.sse = sse;
    return out;
  }

  double f1(double m, double omega, double max_condition) const {
    const auto s = solve(m, omega, max_condition);
    return s ? s->sse : std::numeric_limits<double>::infinity();
  }

 private:
  const std::vector<double>* y_;
  double tc_;
  std::vector<double> logd_;
  mutable std::vector<double> f_, g_, h_;
};

}  // namespace detail

/// Exact least-squares amplitudes at fixed (tc, m, omega).
/// Throws DegenerateDesignError above `max_condition`.
inline LinearSolution solve_linear(const Observations& obs, double tc, double m, double omega,
                                   double max_condition = 1e12) {
  if (obs.size() < 5) throw DataError("solve_linear needs at least 5 observations");
  const detail::FixedTcCost cost(obs, tc);
  auto s = cost.solve(m, omega, max_condition);
  if (!s) {
    const auto probe = cost.solve(m, omega, std::numeric_limits<double>::infinity());
    throw DegenerateDesignError("degenerate LPPLS design matrix",
                                probe ? probe->condition_number
                                      : std::numeric_limits<double>::infinity());
  }
  return *s;
}

/// Subordinated optimum at one tc.
struct ProfilePoint {
  double tc = 0.0;
  double f2 = std::numeric_limits<double>::infinity();
  double m_hat = 0.0;
  double omega_hat = 0.0;
  LinearParams linear;
  double s_hat = 0.0;
  std::size_t n = 0;
  bool converged = false;
  bool degenerate = false;  ///< every start hit a degenerate design
  int starts_used = 0;
  int evaluations = 0;
  double condition_number = 0.0;

  LpplsParams params() const { return {{tc, m_hat, omega_hat}, linear, s_hat}; }
};

/// Minimizes F1 over (m, omega) at fixed tc by Nelder-Mead from each start,
/// then restarts once from the best vertex.
inline ProfilePoint minimize_f1(const Observations& obs, double tc, const CalibrationOptions& opt,
                                std::span<const StartPoint> starts) {
  const detail::FixedTcCost cost(obs, tc);
  const SearchBox& sb = opt.box;
  const Box<2> box{{sb.m_min, sb.omega_min}, {sb.m_max, sb.omega_max}};
  auto objective = [&](const Point<2>& x) { return cost.f1(x[0], x[1], opt.max_condition); };

  ProfilePoint out;
  out.tc = tc;
  out.n = obs.size();
  NelderMeadResult<2> best;
  for (const auto& s : starts) {
    const auto r = nelder_mead<2>(objective, {s.m, s.omega}, {0.1, 1.0}, box, opt.nelder_mead);
    ++out.starts_used;
    out.evaluations += r.evaluations;
    if (r.f < best.f || (r.f == best.f && r.converged && !best.converged)) best = r;
  }
  if (std::isfinite(best.f)) {
    const auto r = nelder_mead<2>(objective, best.x, {0.02, 0.2}, box, opt.nelder_mead);
    ++out.starts_used;
    out.evaluations += r.evaluations;
    if (r.f <= best.f) best = r;
    else best.converged = best.converged && r.converged;
  }
  out.converged = best.converged && std::isfinite(best.f);
  out.m_hat = best.x[0];
  out.omega_hat = best.x[1];
  const auto sol = cost.solve(out.m_hat, out.omega_hat, opt.max_condition);
  if (!sol) {
    out.degenerate = true;
    out.converged = false;
    return out;
  }
  out.linear = sol->linear;
  out.f2 = sol->sse;
  out.s_hat = sol->sse / static_cast<double>(obs.size());
  out.condition_number = sol->condition_number;
  return out;
}

inline ProfilePoint minimize_f1(const Observations& obs, double tc, const CalibrationOptions& opt) {
  return minimize_f1(obs, tc, opt, opt.starts);
}

/// F2 profile over a tc grid. Sequential runs warm-start each point from its
/// predecessor's (m_hat, omega_hat) in addition to the standard starts.
inline std::vector<ProfilePoint> profile_f2(const Observations& obs, std::span<const double> tc_grid,
                                            const CalibrationOptions& opt) {
  std::vector<ProfilePoint> out(tc_grid.size());
  const bool sequential = opt.threads <= 1;
  if (sequential) {
    std::vector<StartPoint> starts = opt.starts;
    for (std::size_t i = 0; i < tc_grid.size(); ++i) {
      if (opt.warm_start && i > 0 && std::isfinite(out[i - 1].f2)) {
        if (starts.size() == opt.starts.size()) starts.push_back({});
        starts.back() = {out[i - 1].m_hat, out[i - 1].omega_hat};
      }
      out[i] = minimize_f1(obs, tc_grid[i], opt, starts);
    }
    return out;
  }
  parallel_for(tc_grid.size(), opt.threads,
               [&](std::size_t i) { out[i] = minimize_f1(obs, tc_grid[i], opt); });
  return out;
}

/// Gauss-Newton steps on all seven parameters (tc, psi) from `start`, each
/// accepted only if it lowers the SSE and stays inside the bounds. Used to
/// take a simplex optimum down to rounding level.
inline std::pair<LpplsParams, double> gauss_newton_refine(const Observations& obs, LpplsParams p,
                                                          double tc_lo, double tc_hi,
                                                          const SearchBox& box, int max_steps = 30) {
  const auto n = static_cast<Eigen::Index>(obs.size());
  auto residuals = [&](const LpplsParams& q, Eigen::VectorXd& r) {
    r.resize(n);
    try {
      for (Eigen::Index i = 0; i < n; ++i)
        r[i] = obs.y[static_cast<std::size_t>(i)] -
               lppls_eval(obs.t[static_cast<std::size_t>(i)], q.nonlinear, q.linear);
    } catch (const SingularityError&) {
      return std::numeric_limits<double>::infinity();
    }
    return r.squaredNorm();
  };
  Eigen::VectorXd r;
  double sse = residuals(p, r);
  Eigen::MatrixXd j(n, 7);
  for (int it = 0; it < max_steps && std::isfinite(sse) && sse > 0.0; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = obs.t[static_cast<std::size_t>(i)];
      j(i, 0) = grad_tc(t, p);
      j.row(i).tail<6>() = grad_psi(t, p).transpose();
    }
    Eigen::VectorXd scale = j.colwise().norm().transpose();
    for (Eigen::Index k = 0; k < 7; ++k)
      if (!(scale[k] > 0.0)) scale[k] = 1.0;
    const Eigen::MatrixXd js = j * scale.cwiseInverse().asDiagonal();
    const Eigen::VectorXd step = scale.cwiseInverse().asDiagonal() *
                                 Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(js).solve(r);
    LpplsParams q = p;
    q.nonlinear.tc += step[0];
    q.nonlinear.m += step[1 + kM];
    q.nonlinear.omega += step[1 + kOmega];
    q.linear.A += step[1 + kA];
    q.linear.B += step[1 + kB];
    q.linear.C1 += step[1 + kC1];
    q.linear.C2 += step[1 + kC2];
    if (q.nonlinear.tc < tc_lo || q.nonlinear.tc > tc_hi || q.nonlinear.m < box.m_min ||
        q.nonlinear.m > box.m_max || q.nonlinear.omega < box.omega_min ||
        q.nonlinear.omega > box.omega_max)
      break;
    Eigen::VectorXd rq;
    const double sq = residuals(q, rq);
    if (!(sq < sse)) break;
    p = q;
    r = rq;
    sse = sq;
  }
  p.s = sse / static_cast<double>(obs.size());
  return {p, sse};
}

struct FitResult {
  LpplsParams params;
  double sse = 0.0;
  std::size_t n = 0;
  bool converged = false;
  int n_restarts_used = 0;
  double condition_number = 0.0;
  bool boundary = false;          ///< grid argmin at the first or last tc
  std::size_t grid_argmin = 0;
};

/// Index of the smallest finite f2, or nullopt.
inline std::optional<std::size_t> profile_argmin(std::span<const ProfilePoint> profile) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (!std::isfinite(profile[i].f2)) continue;
    if (!best || profile[i].f2 < profile[*best].f2) best = i;
  }
  return best;
}

/// Full MLE from an existing profile: the grid argmin polished by Nelder-Mead
/// over (tc, m, omega) jointly, with tc kept inside the grid span.
inline FitResult full_mle(const Observations& obs, std::span<const ProfilePoint> profile,
                          const CalibrationOptions& opt) {
  const auto arg = profile_argmin(profile);
  if (!arg) throw ConvergenceError("no grid point produced a finite F2");
  const ProfilePoint& p0 = profile[*arg];
  const double tc_lo = profile.front().tc;
  const double tc_hi = profile.back().tc;
  const double tc_step =
      profile.size() > 1 ? std::abs(profile[1].tc - profile[0].tc) : 1.0;

  const SearchBox& sb = opt.box;
  const Box<3> box{{std::min(tc_lo, tc_hi), sb.m_min, sb.omega_min},
                   {std::max(tc_lo, tc_hi), sb.m_max, sb.omega_max}};
  auto objective = [&](const Point<3>& x) {
    try {
      return detail::FixedTcCost(obs, x[0]).f1(x[1], x[2], opt.max_condition);
    } catch (const SingularityError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  FitResult fit;
  fit.n = obs.size();
  fit.grid_argmin = *arg;
  fit.boundary = *arg == 0 || *arg + 1 == profile.size();
  fit.n_restarts_used = p0.starts_used;

  NelderMeadResult<3> best;
  best.x = {p0.tc, p0.m_hat, p0.omega_hat};
  best.f = p0.f2;
  best.converged = p0.converged;
  Point<3> step{0.5 * tc_step, 0.02, 0.2};
  for (int r = 0; r < std::max(1, opt.polish_restarts); ++r) {
    const auto res = nelder_mead<3>(objective, best.x, step, box, opt.nelder_mead);
    ++fit.n_restarts_used;
    const bool improved = res.f < best.f;
    if (res.f <= best.f) best = res;
    if (!improved || best.f <= opt.nelder_mead.fatol) break;
    for (auto& s : step) s *= 0.1;
  }

  const auto sol = detail::FixedTcCost(obs, best.x[0]).solve(best.x[1], best.x[2],
                                                            opt.max_condition);
  if (!sol) throw DegenerateDesignError("degenerate design at the polished optimum",
                                        std::numeric_limits<double>::infinity());
  const LpplsParams polished{{best.x[0], best.x[1], best.x[2]}, sol->linear,
                             sol->sse / static_cast<double>(obs.size())};
  const auto [refined, sse] = gauss_newton_refine(obs, polished, box.lo[0], box.hi[0], sb);
  fit.params = refined;
  fit.sse = sse;
  fit.condition_number = sol->condition_number;
  fit.converged = best.converged && p0.converged;
  return fit;
}

inline FitResult full_mle(const Observations& obs, std::span<const double> tc_grid,
                          const CalibrationOptions& opt) {
  const auto profile = profile_f2(obs, tc_grid, opt);
  return full_mle(obs, profile, opt);
}

/// tc values t2 + offset + shift for offset in [min_offset, max_offset].
/// The half-day shift keeps tc off the integer observation times.
inline std::vector<double> make_tc_grid(double t2, double min_offset, double max_offset,
                                        double step, double shift = 0.5) {
  if (!(step > 0.0) || !(max_offset >= min_offset)) throw ConfigError("invalid tc grid range");
  std::vector<double> g;
  const auto count = static_cast<std::size_t>(std::floor((max_offset - min_offset) / step + 1e-9)) + 1;
  g.reserve(count);
  for (std::size_t k = 0; k < count; ++k)
    g.push_back(t2 + min_offset + static_cast<double>(k) * step + shift);
  return g;
}

}  // namespace lppls
