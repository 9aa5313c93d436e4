#pragma once

#include <complex>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "qcm/errors.hpp"

namespace qcm {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Largest absolute entry; 0 for empty objects.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

// σ_max / σ_min from a singular value decomposition. Infinite when the
// smallest singular value is exactly zero; 1 for an empty matrix.
inline double condition_number(const Mat& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

// Dense direct inverse. Callers decide singularity from condition_number().
inline Mat dense_inverse(const Mat& m) { return m.fullPivLu().inverse(); }

// Wrap an angle into [0, 2π).
inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

// Signed angular difference a − b folded into (−π, π].
inline double angle_difference(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -kPi) d += kTwoPi;
  return d;
}

inline void require_same_size(Index a, Index b, const char* what) {
  if (a != b) throw DomainError(std::string("dimension mismatch: ") + what);
}

}  // namespace qcm
