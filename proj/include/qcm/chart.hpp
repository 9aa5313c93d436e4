#pragma once

#include <algorithm>
#include <string>
#include <utility>

#include "qcm/linalg.hpp"

namespace qcm {

// Points closer than this to the chart boundary (any p_ν or the residual
// action 1 − Σp) are rejected: g and g⁻¹ have 1/p entries there.
inline constexpr double kChartGuard = 1e-9;

// Real coordinates of a pure state in an action-angle chart, ordered
// (q_1..q_m, p_1..p_m) with m = n − 1.
class ChartPoint {
 public:
  ChartPoint() = default;

  ChartPoint(const Vec& q, const Vec& p) : x_(q.size() + p.size()) {
    require_same_size(q.size(), p.size(), "angle and action coordinate counts");
    x_ << q, p;
  }

  static ChartPoint from_coordinates(Vec x) {
    if (x.size() % 2 != 0) throw DomainError("chart coordinates must have even length");
    ChartPoint c;
    c.x_ = std::move(x);
    return c;
  }

  // Number of (q, p) pairs.
  Index pairs() const { return x_.size() / 2; }
  Index dimension() const { return x_.size(); }

  const Vec& coordinates() const { return x_; }
  Vec& coordinates() { return x_; }

  auto q() const { return x_.head(pairs()); }
  auto p() const { return x_.tail(pairs()); }
  double q(Index nu) const { return x_(nu); }
  double p(Index nu) const { return x_(pairs() + nu); }

  // p_n = 1 − Σ p_ν, the weight of the reference level.
  double residual_action() const { return 1.0 - p().sum(); }

  // Distance to the chart boundary measured in the action coordinates.
  double boundary_margin() const {
    double m = residual_action();
    for (Index nu = 0; nu < pairs(); ++nu) m = std::min(m, p(nu));
    return m;
  }

  bool in_interior(double guard = kChartGuard) const { return boundary_margin() >= guard; }

  // Copy with every angle folded into [0, 2π).
  ChartPoint wrapped() const {
    ChartPoint c = *this;
    for (Index nu = 0; nu < pairs(); ++nu) c.x_(nu) = wrap_angle(c.x_(nu));
    return c;
  }

 private:
  Vec x_;
};

// Complex amplitudes ψ^α of a ray; never the zero vector.
class StateVector {
 public:
  explicit StateVector(CVec amplitudes) : psi_(std::move(amplitudes)) {
    if (psi_.size() == 0 || psi_.squaredNorm() == 0.0) {
      throw DomainError("state vector must be nonzero");
    }
  }

  const CVec& amplitudes() const { return psi_; }
  Index size() const { return psi_.size(); }
  double norm_squared() const { return psi_.squaredNorm(); }
  StateVector normalized() const { return StateVector(psi_ / psi_.norm()); }

  // ⟨this|other⟩
  Complex inner(const StateVector& other) const { return psi_.dot(other.psi_); }

  template <class Op>
  double expectation(const Op& op) const {
    return (psi_.dot(op * psi_)).real() / norm_squared();
  }

 private:
  CVec psi_;
};

// Fubini–Study distance θ ∈ [0, π] with ½(1 + cos θ) equal to the transition
// probability between the two rays.
inline double fubini_study_distance(const StateVector& a, const StateVector& b) {
  require_same_size(a.size(), b.size(), "state vectors");
  // cos(θ/2) = |⟨â|b̂⟩| and sin(θ/2) = ‖b̂ − â⟨â|b̂⟩‖; atan2 keeps both ends accurate.
  const CVec ua = a.amplitudes() / a.amplitudes().norm();
  const CVec ub = b.amplitudes() / b.amplitudes().norm();
  const Complex overlap = ua.dot(ub);
  const double perp = (ub - overlap * ua).norm();
  return 2.0 * std::atan2(perp, std::abs(overlap));
}

inline bool same_ray(const StateVector& a, const StateVector& b, double tol = 1e-12) {
  return fubini_study_distance(a, b) <= tol;
}

// Action-angle chart of projective Hilbert space. Every level except the
// reference level carries ψ = √p_ν e^{−i q_ν}; the reference level carries the
// real amplitude √(1 − Σp).
class ActionAngleChart {
 public:
  ActionAngleChart() = default;

  explicit ActionAngleChart(Index levels, Index reference_level = -1)
      : n_(levels), reference_(reference_level < 0 ? levels - 1 : reference_level) {
    if (n_ < 2) throw DomainError("Hilbert dimension must be at least 2");
    if (reference_ >= n_) throw DomainError("reference level out of range");
  }

  Index levels() const { return n_; }
  Index pairs() const { return n_ - 1; }
  Index dimension() const { return 2 * (n_ - 1); }
  Index reference_level() const { return reference_; }

  // Basis index carrying the coordinate pair ν.
  Index level_of(Index nu) const { return nu < reference_ ? nu : nu + 1; }

  void require_interior(const ChartPoint& x) const {
    if (x.pairs() != pairs()) throw DomainError("chart point has wrong coordinate count");
    if (!x.in_interior()) {
      throw DomainError("point outside chart interior (boundary margin " +
                        std::to_string(x.boundary_margin()) + ")");
    }
  }

  StateVector embed(const ChartPoint& x) const {
    require_interior(x);
    CVec psi(n_);
    for (Index nu = 0; nu < pairs(); ++nu) {
      psi(level_of(nu)) = std::sqrt(x.p(nu)) * std::polar(1.0, -x.q(nu));
    }
    psi(reference_) = std::sqrt(x.residual_action());
    return StateVector(std::move(psi));
  }

  // Columns are ∂ψ/∂x^a in coordinate order (q_1..q_m, p_1..p_m).
  CMat derivatives(const ChartPoint& x) const {
    require_interior(x);
    const Index m = pairs();
    CMat d = CMat::Zero(n_, 2 * m);
    const double residual_slope = -0.5 / std::sqrt(x.residual_action());
    for (Index nu = 0; nu < m; ++nu) {
      const Complex phase = std::polar(1.0, -x.q(nu));
      const double root = std::sqrt(x.p(nu));
      d(level_of(nu), nu) = Complex(0.0, -1.0) * root * phase;
      d(level_of(nu), m + nu) = phase / (2.0 * root);
      d(reference_, m + nu) = residual_slope;
    }
    return d;
  }

  // Central-difference counterpart of derivatives(), used as a cross-check.
  CMat finite_difference_derivatives(const ChartPoint& x, double step = 1e-6) const {
    require_interior(x);
    CMat d(n_, x.dimension());
    for (Index a = 0; a < x.dimension(); ++a) {
      ChartPoint fwd = x;
      ChartPoint bwd = x;
      fwd.coordinates()(a) += step;
      bwd.coordinates()(a) -= step;
      d.col(a) = (embed(fwd).amplitudes() - embed(bwd).amplitudes()) / (2.0 * step);
    }
    return d;
  }

  // Chart coordinates of a ray; angles in [0, 2π).
  ChartPoint extract(const StateVector& state) const {
    require_same_size(state.size(), n_, "state vector and chart");
    const CVec& psi = state.amplitudes();
    const double norm2 = state.norm_squared();
    const Complex ref = psi(reference_);
    if (std::abs(ref) == 0.0) throw DomainError("reference amplitude vanishes; ray not in chart");
    const Index m = pairs();
    Vec q(m), p(m);
    for (Index nu = 0; nu < m; ++nu) {
      const Complex a = psi(level_of(nu));
      p(nu) = std::norm(a) / norm2;
      q(nu) = wrap_angle(-std::arg(a / ref));
    }
    return ChartPoint(q, p);
  }

 private:
  Index n_ = 2;
  Index reference_ = 1;
};

}  // namespace qcm
