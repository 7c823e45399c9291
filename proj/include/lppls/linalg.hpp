#pragma once

// Small dense helpers. Matrices here mix entries of very different magnitude
// (the A column is O(1), the m column O(f ln f)), so every factorization is
// done on the Jacobi- or column-scaled matrix and the scale is added back in
// log space.

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Dense>

namespace lppls::linalg {

/// log det of a symmetric positive-definite matrix, or nullopt if it is not.
template <class Derived>
std::optional<double> logdet_spd(const Eigen::MatrixBase<Derived>& a) {
  using Mat = Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  const Eigen::Index n = a.rows();
  Eigen::Matrix<double, Derived::RowsAtCompileTime, 1> d(n);
  double log_scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = a(i, i);
    if (!(v > 0.0) || !std::isfinite(v)) return std::nullopt;
    d[i] = 1.0 / std::sqrt(v);
    log_scale += std::log(v);
  }
  const Mat scaled = d.asDiagonal() * a.derived() * d.asDiagonal();
  Eigen::LLT<Mat> llt(scaled);
  if (llt.info() != Eigen::Success) return std::nullopt;
  double logdet = log_scale;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lii = l(i, i);
    if (!(lii > 0.0)) return std::nullopt;
    logdet += 2.0 * std::log(lii);
  }
  if (!std::isfinite(logdet)) return std::nullopt;
  return logdet;
}

/// log |det a| for a general square matrix, nullopt when numerically singular.
template <class Derived>
std::optional<double> log_abs_det(const Eigen::MatrixBase<Derived>& a, double rank_tol = 1e-13) {
  using Mat = Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  const Eigen::Index n = a.rows();
  Mat scaled = a.derived();
  double log_scale = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double c = scaled.col(j).cwiseAbs().maxCoeff();
    if (!(c > 0.0) || !std::isfinite(c)) return std::nullopt;
    scaled.col(j) /= c;
    log_scale += std::log(c);
  }
  Eigen::FullPivLU<Mat> lu(scaled);
  lu.setThreshold(rank_tol);
  if (!lu.isInvertible()) return std::nullopt;
  const auto& u = lu.matrixLU();
  double logdet = log_scale;
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(std::abs(u(i, i)));
  if (!std::isfinite(logdet)) return std::nullopt;
  return logdet;
}

/// Inverse of a symmetric positive-definite matrix.
template <class Derived>
auto inverse_spd(const Eigen::MatrixBase<Derived>& a)
    -> std::optional<Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>> {
  using Mat = Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  const Eigen::Index n = a.rows();
  Eigen::Matrix<double, Derived::RowsAtCompileTime, 1> d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = a(i, i);
    if (!(v > 0.0) || !std::isfinite(v)) return std::nullopt;
    d[i] = 1.0 / std::sqrt(v);
  }
  const Mat scaled = d.asDiagonal() * a.derived() * d.asDiagonal();
  Eigen::LLT<Mat> llt(scaled);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Mat inv_scaled = llt.solve(Mat::Identity(n, n));
  return Mat(d.asDiagonal() * inv_scaled * d.asDiagonal());
}

/// 2-norm condition number of a symmetric matrix after Jacobi scaling
/// (unit diagonal); +inf when the diagonal is not positive.
template <class Derived>
double scaled_condition_number(const Eigen::MatrixBase<Derived>& a) {
  using Mat = Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  const Eigen::Index n = a.rows();
  Eigen::Matrix<double, Derived::RowsAtCompileTime, 1> d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = a(i, i);
    if (!(v > 0.0) || !std::isfinite(v)) return std::numeric_limits<double>::infinity();
    d[i] = 1.0 / std::sqrt(v);
  }
  const Mat scaled = d.asDiagonal() * a.derived() * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(scaled, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace lppls::linalg
