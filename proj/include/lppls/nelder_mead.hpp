#pragma once

// Fixed-dimension Nelder-Mead simplex minimizer with box constraints handled
// by reflection at the walls.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

namespace lppls {

template <std::size_t N>
using Point = std::array<double, N>;

template <std::size_t N>
struct Box {
  Point<N> lo;
  Point<N> hi;

  /// Mirrors coordinates that leave the box back inside; clamps if a single
  /// reflection is not enough.
  Point<N> reflect(Point<N> x) const {
    for (std::size_t k = 0; k < N; ++k) {
      if (x[k] < lo[k]) x[k] = lo[k] + (lo[k] - x[k]);
      if (x[k] > hi[k]) x[k] = hi[k] - (x[k] - hi[k]);
      x[k] = std::clamp(x[k], lo[k], hi[k]);
    }
    return x;
  }
};

struct NelderMeadOptions {
  double xtol = 1e-10;  ///< relative simplex size
  double ftol = 1e-10;  ///< relative spread of function values
  double fatol = 1e-24; ///< absolute spread floor for objectives whose minimum is ~0
  int max_iterations = 1000;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

template <std::size_t N>
struct NelderMeadResult {
  Point<N> x{};
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimizes `f` from `x0` with initial simplex x0 + step_k e_k.
/// Non-finite objective values are treated as +inf. Converged when the simplex
/// is below `xtol` relative size and the value spread is below
/// `ftol * |f_best| + fatol`, or when the simplex has collapsed to
/// floating-point resolution.
template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead(F&& f, const Point<N>& x0, const Point<N>& step,
                                const std::optional<Box<N>>& box = std::nullopt,
                                const NelderMeadOptions& opt = {}) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  NelderMeadResult<N> res;
  auto project = [&](Point<N> x) { return box ? box->reflect(x) : x; };
  auto eval = [&](const Point<N>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : inf;
  };

  std::array<Point<N>, N + 1> v;
  std::array<double, N + 1> fv;
  v[0] = project(x0);
  for (std::size_t k = 0; k < N; ++k) {
    Point<N> x = v[0];
    x[k] += step[k];
    if (box && (x[k] > box->hi[k])) x[k] = v[0][k] - step[k];
    v[k + 1] = project(x);
  }
  for (std::size_t i = 0; i <= N; ++i) fv[i] = eval(v[i]);

  std::array<std::size_t, N + 1> order;
  for (; res.iterations < opt.max_iterations; ++res.iterations) {
    for (std::size_t i = 0; i <= N; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      auto v2 = v;
      auto f2 = fv;
      for (std::size_t i = 0; i <= N; ++i) {
        v[i] = v2[order[i]];
        fv[i] = f2[order[i]];
      }
    }

    double xspread = 0.0;
    bool collapsed = true;
    for (std::size_t i = 1; i <= N; ++i)
      for (std::size_t k = 0; k < N; ++k) {
        const double d = std::abs(v[i][k] - v[0][k]);
        const double scale = std::max(std::abs(v[0][k]), 1.0);
        xspread = std::max(xspread, d / scale);
        if (d > 4.0 * std::numeric_limits<double>::epsilon() * scale) collapsed = false;
      }
    const double fspread = fv[N] - fv[0];
    if (std::isfinite(fv[0]) &&
        ((xspread <= opt.xtol && fspread <= opt.ftol * std::abs(fv[0]) + opt.fatol) || collapsed)) {
      res.converged = true;
      break;
    }

    Point<N> centroid{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) centroid[k] += v[i][k] / static_cast<double>(N);
    auto along = [&](double coef) {
      Point<N> x;
      for (std::size_t k = 0; k < N; ++k) x[k] = centroid[k] + coef * (v[N][k] - centroid[k]);
      return project(x);
    };

    const Point<N> xr = along(-opt.reflection);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      const Point<N> xe = along(-opt.reflection * opt.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        v[N] = xe;
        fv[N] = fe;
      } else {
        v[N] = xr;
        fv[N] = fr;
      }
      continue;
    }
    if (fr < fv[N - 1]) {
      v[N] = xr;
      fv[N] = fr;
      continue;
    }
    const bool outside = fr < fv[N];
    const Point<N> xc = along(outside ? -opt.reflection * opt.contraction : opt.contraction);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[N])) {
      v[N] = xc;
      fv[N] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= N; ++i) {
      for (std::size_t k = 0; k < N; ++k) v[i][k] = v[0][k] + opt.shrink * (v[i][k] - v[0][k]);
      v[i] = project(v[i]);
      fv[i] = eval(v[i]);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= N; ++i)
    if (fv[i] < fv[best]) best = i;
  res.x = v[best];
  res.f = fv[best];
  return res;
}

}  // namespace lppls
