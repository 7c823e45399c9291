#pragma once

// Independent oracles and fixtures shared by the test binaries. Nothing here
// reuses the library's evaluation paths: the direct formulas are written out
// in long double and derivatives are taken numerically.

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "lppls/lppls.hpp"

namespace lppls::testing {

/// A + B|tc-t|^m + |tc-t|^m (C1 cos(w ln|tc-t|) + C2 sin(w ln|tc-t|)) in long double.
inline long double direct_lppls(long double t, long double tc, long double m, long double w,
                                long double A, long double B, long double C1, long double C2) {
  const long double d = fabsl(tc - t);
  const long double L = logl(d);
  const long double f = powl(d, m);
  return A + B * f + C1 * f * cosl(w * L) + C2 * f * sinl(w * L);
}

inline long double direct_lppls(double t, const LpplsParams& p) {
  return direct_lppls(t, p.nonlinear.tc, p.nonlinear.m, p.nonlinear.omega, p.linear.A, p.linear.B,
                      p.linear.C1, p.linear.C2);
}

inline long double direct_lppls_psi(double t, double tc, const Vector6& psi) {
  return direct_lppls(t, tc, psi[kM], psi[kOmega], psi[kA], psi[kB], psi[kC1], psi[kC2]);
}

/// Central difference of the long-double model in psi coordinate j.
inline double fd_gradient(double t, const LpplsParams& p, int j, double rel_step = 1e-6) {
  Vector6 psi = p.psi();
  const double h = rel_step * std::max(1.0, std::abs(psi[j]));
  Vector6 a = psi, b = psi;
  a[j] += h;
  b[j] -= h;
  return static_cast<double>((direct_lppls_psi(t, p.nonlinear.tc, a) -
                              direct_lppls_psi(t, p.nonlinear.tc, b)) /
                             (2.0L * h));
}

/// Central difference of the analytic gradient, column j.
inline Vector6 fd_hessian_column(double t, const LpplsParams& p, int j, double rel_step = 1e-6) {
  const Vector6 psi = p.psi();
  const double h = rel_step * std::max(1.0, std::abs(psi[j]));
  Vector6 a = psi, b = psi;
  a[j] += h;
  b[j] -= h;
  return (grad_psi(t, LpplsParams::from_psi(p.nonlinear.tc, a)) -
          grad_psi(t, LpplsParams::from_psi(p.nonlinear.tc, b))) /
         (2.0 * h);
}

/// Reference synthetic setup: generator defaults, window of `dt` days
/// ending `lead` days before tc0.
struct SyntheticWindow {
  GeneratorSpec spec;
  PriceSeries series;
  PriceSeries window;
  Observations obs;
  Date t2;
  double t2_time = 0.0;
  double tc_true = 0.0;
  LpplsParams truth;
};

inline SyntheticWindow make_window(double sigma, std::uint64_t seed, long lead = 39, long dt = 300) {
  SyntheticWindow w;
  w.spec = default_paper_spec();
  w.spec.sigma0 = sigma;
  w.spec.seed = seed;
  w.series = generate(w.spec).series;
  w.t2 = w.spec.tc0 - std::chrono::days{lead};
  w.window = window(w.series, Window::ending_at(w.t2, dt));
  w.obs = Observations::from(w.window);
  w.t2_time = w.series.time_of(w.t2);
  w.tc_true = w.series.time_of(w.spec.tc0);
  w.truth = true_params(w.spec, w.series);
  return w;
}

/// Plain SSE of the long-double model over the observations.
inline long double direct_sse(const Observations& obs, const LpplsParams& p) {
  long double s = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const long double e = obs.y[i] - direct_lppls(obs.t[i], p);
    s += e * e;
  }
  return s;
}

/// Second differences of the extended-precision SSE over psi, relative step
/// 1e-4 (absolute 1e-7 for coordinates near zero).
inline Matrix6 fd_sse_hessian(const Observations& obs, const LpplsParams& p) {
  const Vector6 psi = p.psi();
  Vector6 h;
  for (int j = 0; j < kPsiDim; ++j) h[j] = 1e-4 * std::max(std::abs(psi[j]), 1e-3);
  auto sse_at = [&](const Vector6& q) { return direct_sse(obs, LpplsParams::from_psi(p.nonlinear.tc, q)); };
  Matrix6 fd;
  for (int i = 0; i < kPsiDim; ++i)
    for (int j = 0; j < kPsiDim; ++j) {
      auto shifted = [&](double si, double sj) {
        Vector6 q = psi;
        q[i] += si * h[i];
        q[j] += sj * h[j];
        return sse_at(q);
      };
      const long double d = shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1);
      fd(i, j) = static_cast<double>(d / (4.0L * h[i] * h[j]));
    }
  return fd;
}

/// One score component as a quadratic a + b e + c e^2 in the shared error e.
struct Quadratic {
  long double a = 0, b = 0, c = 0;
};

/// E[p(e) q(e)] for e ~ N(0, s).
inline long double gaussian_expectation(const Quadratic& p, const Quadratic& q, long double s) {
  const std::array<long double, 5> mom{1.0L, 0.0L, s, 0.0L, 3.0L * s * s};
  const std::array<long double, 3> pc{p.a, p.b, p.c}, qc{q.a, q.b, q.c};
  long double e = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e += pc[i] * qc[j] * mom[i + j];
  return e;
}

/// Per-observation scores of -ln(2 pi s)/2 - e^2/(2 s) written as quadratics
/// in the error e.
inline std::array<Quadratic, 7> score_polynomial(double t, const LpplsParams& p) {
  const Vector6 g = grad_psi(t, p);
  std::array<Quadratic, 7> out;
  for (int k = 0; k < 6; ++k) out[k].b = g[k] / static_cast<long double>(p.s);
  out[6].a = -0.5L / p.s;
  out[6].c = 0.5L / (static_cast<long double>(p.s) * p.s);
  return out;
}

/// Sum over observations of the expected score product, expectation under
/// the variance of the second argument.
inline Matrix7 expected_score_product(const Observations& obs, const LpplsParams& a, const LpplsParams& b) {
  Eigen::Matrix<long double, 7, 7> acc = Eigen::Matrix<long double, 7, 7>::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto sa = score_polynomial(obs.t[i], a);
    const auto sb = score_polynomial(obs.t[i], b);
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 7; ++c) acc(r, c) += gaussian_expectation(sa[r], sb[c], b.s);
  }
  return acc.cast<double>();
}

/// Largest |a_ij - b_ij| / sqrt(|b_ii b_jj|).
template <class M>
double scaled_max_error(const M& a, const M& b) {
  double worst = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::sqrt(std::abs(b(i, i) * b(j, j))));
  return worst;
}

inline double rel_err(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Largest component-wise relative error; components smaller than
/// `floor_fraction` of the largest magnitude are compared against that floor.
template <class A, class B>
double max_component_rel_error(const A& a, const B& b, double floor_fraction = 1e-8) {
  double scale = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) scale = std::max({scale, std::abs(a(i)), std::abs(b(i))});
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = std::max({std::abs(a(i)), std::abs(b(i)), floor_fraction * scale, 1e-300});
    worst = std::max(worst, std::abs(a(i) - b(i)) / d);
  }
  return worst;
}

/// Random parameter/time point with |tc - t| in [2, 400] on either side of tc.
inline std::pair<double, LpplsParams> random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LpplsParams p;
  p.nonlinear.tc = 1000.0;
  p.nonlinear.m = 0.1 + 1.4 * u(rng);
  p.nonlinear.omega = 2.0 + 18.0 * u(rng);
  p.linear.A = 5.0 + 5.0 * u(rng);
  p.linear.B = -0.05 + 0.1 * u(rng);
  p.linear.C1 = -0.01 + 0.02 * u(rng);
  p.linear.C2 = -0.01 + 0.02 * u(rng);
  const double dist = 2.0 + 398.0 * u(rng);
  const double t = u(rng) < 0.8 ? p.nonlinear.tc - dist : p.nonlinear.tc + dist;
  return {t, p};
}

}  // namespace lppls::testing
