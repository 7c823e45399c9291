#pragma once

// LPPLS function in the (C1, C2) form, its parameter derivatives, the damping
// quantity and the stylized-fact qualification filter.
//
//   LPPLS(t) = A + B f + C1 g + C2 h
//   f = |tc - t|^m,  g = f cos(omega ln|tc - t|),  h = f sin(omega ln|tc - t|)
//
// Nuisance vector ordering throughout the library is psi = (m, omega, A, B, C1, C2),
// extended with the residual variance s as the 7th component where needed.

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "lppls/error.hpp"

namespace lppls {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix7 = Eigen::Matrix<double, 7, 7>;

enum PsiIndex : int { kM = 0, kOmega = 1, kA = 2, kB = 3, kC1 = 4, kC2 = 5 };
inline constexpr int kPsiDim = 6;
/// psi plus the variance s.
inline constexpr int kEtaDim = 7;

/// Minimum |tc - t| in days at which the model may be evaluated.
inline constexpr double kSingularityGuard = 1e-9;

struct LinearParams {
  double A = 0.0;
  double B = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;

  /// |C| = sqrt(C1^2 + C2^2)
  double amplitude() const { return std::hypot(C1, C2); }
  /// phi with C1 = |C| cos(phi), C2 = |C| sin(phi)
  double phase() const { return std::atan2(C2, C1); }

  static LinearParams from_phase(double A, double B, double C, double phi) {
    return {A, B, C * std::cos(phi), C * std::sin(phi)};
  }
};

struct NonlinearParams {
  double tc = 0.0;
  double m = 0.0;
  double omega = 0.0;
};

struct LpplsParams {
  NonlinearParams nonlinear;
  LinearParams linear;
  double s = 0.0;  ///< residual variance

  Vector6 psi() const {
    Vector6 v;
    v << nonlinear.m, nonlinear.omega, linear.A, linear.B, linear.C1, linear.C2;
    return v;
  }
  static LpplsParams from_psi(double tc, const Vector6& psi, double s = 0.0) {
    return {{tc, psi[kM], psi[kOmega]}, {psi[kA], psi[kB], psi[kC1], psi[kC2]}, s};
  }
};

struct Basis {
  double f;
  double g;
  double h;
  double log_dist;  ///< ln|tc - t|
};

inline double checked_log_distance(double t, double tc) {
  const double d = std::abs(tc - t);
  if (!(d >= kSingularityGuard)) throw SingularityError("LPPLS evaluated at the critical time");
  return std::log(d);
}

/// f, g, h from a precomputed ln|tc - t|. Every evaluation path in the library
/// goes through this so that residuals are reproducible bit for bit.
inline Basis basis_from_log(double log_dist, double m, double omega) {
  const double f = std::exp(m * log_dist);
  const double phase = omega * log_dist;
  return {f, f * std::cos(phase), f * std::sin(phase), log_dist};
}

inline Basis basis(double t, double tc, double m, double omega) {
  return basis_from_log(checked_log_distance(t, tc), m, omega);
}

inline double lppls_from_basis(const Basis& b, const LinearParams& l) {
  return l.A + l.B * b.f + l.C1 * b.g + l.C2 * b.h;
}

inline double lppls_eval(double t, const NonlinearParams& p, const LinearParams& l) {
  return lppls_from_basis(basis(t, p.tc, p.m, p.omega), l);
}

/// Original four-nonlinear-parameter form A + B f + C f cos(omega ln|tc-t| - phi).
inline double lppls_eval_phase_form(double t, double tc, double m, double omega, double A,
                                    double B, double C, double phi) {
  const double L = checked_log_distance(t, tc);
  const double f = std::exp(m * L);
  return A + B * f + C * f * std::cos(omega * L - phi);
}

/// d LPPLS / d psi at one time point.
inline Vector6 grad_psi(double t, const LpplsParams& p) {
  const Basis b = basis(t, p.nonlinear.tc, p.nonlinear.m, p.nonlinear.omega);
  const auto& l = p.linear;
  const double fl = b.f * b.log_dist;
  const double c = std::cos(p.nonlinear.omega * b.log_dist);
  const double s = std::sin(p.nonlinear.omega * b.log_dist);
  Vector6 g;
  g[kM] = fl * (l.B + l.C1 * c + l.C2 * s);
  g[kOmega] = fl * (-l.C1 * s + l.C2 * c);
  g[kA] = 1.0;
  g[kB] = b.f;
  g[kC1] = b.g;
  g[kC2] = b.h;
  return g;
}

/// d LPPLS / d tc at one time point.
inline double grad_tc(double t, const LpplsParams& p) {
  const Basis b = basis(t, p.nonlinear.tc, p.nonlinear.m, p.nonlinear.omega);
  const auto& l = p.linear;
  const double kappa = 1.0 / (p.nonlinear.tc - t);  // d ln|tc - t| / d tc
  const double c = std::cos(p.nonlinear.omega * b.log_dist);
  const double s = std::sin(p.nonlinear.omega * b.log_dist);
  return kappa * b.f *
         (p.nonlinear.m * (l.B + l.C1 * c + l.C2 * s) + p.nonlinear.omega * (-l.C1 * s + l.C2 * c));
}

/// d^2 LPPLS / d psi d psi^T at one time point. The model is linear in
/// (A, B, C1, C2), so only rows/columns touching m or omega are non-zero.
inline Matrix6 hess_psi(double t, const LpplsParams& p) {
  const Basis b = basis(t, p.nonlinear.tc, p.nonlinear.m, p.nonlinear.omega);
  const auto& l = p.linear;
  const double L = b.log_dist;
  const double fl = b.f * L;
  const double fl2 = fl * L;
  const double c = std::cos(p.nonlinear.omega * L);
  const double s = std::sin(p.nonlinear.omega * L);
  Matrix6 H = Matrix6::Zero();
  H(kM, kM) = fl2 * (l.B + l.C1 * c + l.C2 * s);
  H(kM, kOmega) = fl2 * (-l.C1 * s + l.C2 * c);
  H(kM, kB) = fl;
  H(kM, kC1) = fl * c;
  H(kM, kC2) = fl * s;
  H(kOmega, kOmega) = -fl2 * (l.C1 * c + l.C2 * s);
  H(kOmega, kC1) = -fl * s;
  H(kOmega, kC2) = fl * c;
  for (int i = 0; i < kPsiDim; ++i)
    for (int j = 0; j < i; ++j) H(i, j) = H(j, i);
  return H;
}

/// D = m|B| / (omega |C|). Zero |C| yields +infinity.
inline double damping(double m, double B, double omega, double C1, double C2) {
  if (!(omega > 0.0)) throw DomainError("damping requires omega > 0");
  const double c = std::hypot(C1, C2);
  if (c == 0.0) return std::numeric_limits<double>::infinity();
  return m * std::abs(B) / (omega * c);
}

inline double damping(const LpplsParams& p) {
  return damping(p.nonlinear.m, p.linear.B, p.nonlinear.omega, p.linear.C1, p.linear.C2);
}

enum class NuisanceParameter { m, omega, damping };

inline const char* to_string(NuisanceParameter p) {
  switch (p) {
    case NuisanceParameter::m: return "m";
    case NuisanceParameter::omega: return "omega";
    case NuisanceParameter::damping: return "damping";
  }
  return "?";
}

/// Symmetric interval center +- half_width.
struct NuisanceInterval {
  NuisanceParameter parameter = NuisanceParameter::m;
  double center = 0.0;
  double half_width = 0.0;

  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
};

struct NuisanceIntervals {
  NuisanceInterval m;
  NuisanceInterval omega;
  NuisanceInterval damping;
};

/// Stylized-fact bounds; defaults 0.1 <= m <= 0.9, 6 <= omega <= 13, B < 0, D >= 0.8.
struct QualificationBounds {
  double m_min = 0.1;
  double m_max = 0.9;
  double omega_min = 6.0;
  double omega_max = 13.0;
  double damping_min = 0.8;
};

enum class QualificationMode { strict, confidence_aware };

struct QualificationFlags {
  bool m_ok = false;
  bool omega_ok = false;
  bool b_ok = false;
  bool d_ok = false;
  QualificationMode mode = QualificationMode::strict;

  bool all() const { return m_ok && omega_ok && b_ok && d_ok; }
};

/// Strict mode tests point estimates. Confidence-aware mode additionally
/// passes a criterion when the parameter's interval [lo, hi] overlaps the
/// allowed range, so it never rejects what strict mode accepts. B has no
/// interval and is tested on its point value in both modes.
inline QualificationFlags qualify(const LpplsParams& p,
                                  const std::optional<NuisanceIntervals>& intervals,
                                  QualificationMode mode,
                                  const QualificationBounds& bounds = {}) {
  if (mode == QualificationMode::confidence_aware && !intervals)
    throw ConfigError("confidence-aware qualification requires nuisance intervals");
  QualificationFlags q;
  q.mode = mode;
  const double d = damping(p);
  q.m_ok = p.nonlinear.m >= bounds.m_min && p.nonlinear.m <= bounds.m_max;
  q.omega_ok = p.nonlinear.omega >= bounds.omega_min && p.nonlinear.omega <= bounds.omega_max;
  q.b_ok = p.linear.B < 0.0;
  q.d_ok = d >= bounds.damping_min;
  if (mode == QualificationMode::strict) return q;

  auto overlaps = [](const NuisanceInterval& i, double lo, double hi) {
    return i.hi() >= lo && i.lo() <= hi;
  };
  constexpr double inf = std::numeric_limits<double>::infinity();
  q.m_ok = q.m_ok || overlaps(intervals->m, bounds.m_min, bounds.m_max);
  q.omega_ok = q.omega_ok || overlaps(intervals->omega, bounds.omega_min, bounds.omega_max);
  q.d_ok = q.d_ok || overlaps(intervals->damping, bounds.damping_min, inf);
  return q;
}

}  // namespace lppls
