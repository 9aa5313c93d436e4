#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "qcm/dynamics.hpp"
#include "qcm/system.hpp"

namespace qcm {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Tolerance for "on the constraint surface" checks made by closed-form oracles.
inline constexpr double kSurfaceTolerance = 1e-10;

// Uniform point of the chart with every action (including the residual) at
// least `margin`, angles uniform in [0, 2π).
inline ChartPoint sample_interior_point(Index levels, std::mt19937_64& rng, double margin = 0.02) {
  const Index m = levels - 1;
  for (;;) {
    Vec weights(levels);
    for (Index a = 0; a < levels; ++a) weights(a) = -std::log1p(-uniform01(rng));
    weights /= weights.sum();
    if (weights.minCoeff() < margin) continue;
    Vec q(m);
    for (Index nu = 0; nu < m; ++nu) q(nu) = uniform(rng, 0.0, kTwoPi);
    return ChartPoint(q, weights.head(m));
  }
}

// ---------------------------------------------------------------------------
// Two spin-½ particles constrained to product states.

namespace product {

inline double p4(const ChartPoint& x) { return x.residual_action(); }

// Φ¹ = q1 − q2 − q3
inline double phase_constraint(const ChartPoint& x) { return x.q(0) - x.q(1) - x.q(2); }

// Φ² = p1(1 − p1 − p2 − p3) − p2 p3
inline double action_constraint(const ChartPoint& x) {
  return x.p(0) * p4(x) - x.p(1) * x.p(2);
}

inline bool on_surface(const ChartPoint& x, double tol = kSurfaceTolerance) {
  return std::abs(angle_difference(x.q(0), x.q(1) + x.q(2))) < tol &&
         std::abs(action_constraint(x)) < tol;
}

/// Constrained equations of motion on the product surface, simplified with
/// p1 p4 = p2 p3:
///   q̇1 = Ω1 − (1 − 2p1 − p2 − p3) κ,  q̇2 = Ω2 + (p1 + p3) κ,
///   q̇3 = Ω3 + (p1 + p2) κ,  ṗ = 0,  with κ = Ω1 − Ω2 − Ω3.
inline Vec surface_field(const ChartPoint& x, const Vec& gaps) {
  if (!on_surface(x)) throw DomainError("product-state oracle evaluated off the constraint surface");
  const double p1 = x.p(0), p2 = x.p(1), p3 = x.p(2);
  const double kappa = gaps(0) - gaps(1) - gaps(2);
  Vec v = Vec::Zero(6);
  v(0) = gaps(0) - (1.0 - 2.0 * p1 - p2 - p3) * kappa;
  v(1) = gaps(1) + (p1 + p3) * kappa;
  v(2) = gaps(2) + (p1 + p2) * kappa;
  return v;
}

}  // namespace product

inline SystemDefinition two_qubit_product_system(const Vec& energies) {
  SystemDefinition s;
  s.name = "two-qubit-product";
  s.chart = ActionAngleChart(4);
  s.spectrum = SpectrumData::from_energies(energies, s.chart);
  s.constraints.push_back(Constraint::algebraic(
      "phase", product::phase_constraint, [](const ChartPoint&) {
        Vec g = Vec::Zero(6);
        g << 1.0, -1.0, -1.0, 0.0, 0.0, 0.0;
        return g;
      }));
  s.constraints.push_back(Constraint::algebraic(
      "action", product::action_constraint, [](const ChartPoint& x) {
        const double p1 = x.p(0), p2 = x.p(1), p3 = x.p(2);
        Vec g = Vec::Zero(6);
        g(3) = 1.0 - 2.0 * p1 - p2 - p3;
        g(4) = -p1 - p3;
        g(5) = -p1 - p2;
        return g;
      }));
  const Vec gaps = s.spectrum.gaps;
  s.oracle = [gaps](const ChartPoint& x) { return product::surface_field(x, gaps); };
  return s;
}

/// Reproducible point on Φ¹ = Φ² = 0: draw p2, p3, take a root p1 of
/// p1(1 − p1 − p2 − p3) = p2 p3 (the other root is then p4), draw q2, q3 and
/// set q1 = q2 + q3. Every action stays at least `margin`.
inline ChartPoint product_surface_sample(std::uint64_t seed, double margin = 0.02) {
  std::mt19937_64 rng(seed);
  for (;;) {
    const double p2 = uniform(rng, margin, 1.0);
    const double p3 = uniform(rng, margin, 1.0);
    const double sum = 1.0 - p2 - p3;  // p1 + p4
    const double disc = sum * sum - 4.0 * p2 * p3;
    const bool larger = uniform01(rng) < 0.5;
    if (sum <= 0.0 || disc < 0.0) continue;
    const double root = std::sqrt(disc);
    // Product of roots is p2 p3; use it for the small root to avoid cancellation.
    const double big = 0.5 * (sum + root);
    const double small = p2 * p3 / big;
    const double p1 = larger ? big : small;
    const double p4 = larger ? small : big;
    if (std::min(p1, p4) < margin) continue;
    const double q2 = uniform(rng, 0.0, kTwoPi);
    const double q3 = uniform(rng, 0.0, kTwoPi);
    Vec q(3), p(3);
    q << q2 + q3, q2, q3;
    p << p1, p2, p3;
    return ChartPoint(q, p);
  }
}

// ---------------------------------------------------------------------------
// Single spin-½ in a unit z-field with ⟨σx⟩ conserved.

namespace spin {

inline CMat sigma_x() {
  CMat m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline CMat sigma_z() {
  CMat m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

// M = (1 − 2p)² cos²q + sin²q
inline double gram_scalar(double q, double p) {
  const double c = std::cos(q), s = std::sin(q), u = 1.0 - 2.0 * p;
  return u * u * c * c + s * s;
}

/// Displayed constrained flow in (q, p):
///   q̇ = −2(1 − 2p)² cos²q / M,  ṗ = 4(1 − 2p)(p − 1)p sin q cos q / M.
inline Vec field(const ChartPoint& x) {
  const double q = x.q(0), p = x.p(0);
  const double m = gram_scalar(q, p);
  if (!(m > 0.0)) throw SingularGramError("spin-half-sx flow undefined at a sigma_x eigenstate");
  const double c = std::cos(q), s = std::sin(q), u = 1.0 - 2.0 * p;
  Vec v(2);
  v(0) = -2.0 * u * u * c * c / m;
  v(1) = 4.0 * u * (p - 1.0) * p * s * c / m;
  return v;
}

}  // namespace spin

// Basis (E1, E2) = (+1, −1) for σz; the chart carries p, q on |E2⟩ and the
// real amplitude √(1 − p) on |E1⟩, so H = 1 − 2p.
inline SystemDefinition single_spin_conserved_sx() {
  SystemDefinition s;
  s.name = "spin-half-sx";
  s.chart = ActionAngleChart(2, 0);
  Vec e(2);
  e << 1.0, -1.0;
  s.spectrum = SpectrumData::from_energies(e, s.chart);
  s.constraints.push_back(Constraint::observable(
      "sigma_x", spin::sigma_x(),
      [](const ChartPoint& x) {
        const double p = x.p(0);
        return 2.0 * std::sqrt(p * (1.0 - p)) * std::cos(x.q(0));
      },
      [](const ChartPoint& x) {
        const double q = x.q(0), p = x.p(0);
        const double root = std::sqrt(p * (1.0 - p));
        Vec g(2);
        g << -2.0 * root * std::sin(q), (1.0 - 2.0 * p) * std::cos(q) / root;
        return g;
      }));
  s.oracle = spin::field;
  Vec q0(1), q1(1), half(1);
  q0 << 0.0;
  q1 << kPi;
  half << 0.5;
  s.singular_points = {ChartPoint(q0, half), ChartPoint(q1, half)};
  return s;
}

// Bloch-sphere angles: p = sin²(θ/2), q = −φ.
struct AngularPoint {
  double theta = 0.0;  // (0, π)
  double phi = 0.0;    // [0, 2π)
};

inline AngularPoint to_angular(const ChartPoint& x) {
  if (x.pairs() != 1) throw DomainError("angular coordinates need a two-level chart");
  if (!x.in_interior()) throw DomainError("pole or chart boundary has no interior angular point");
  const double p = x.p(0);
  return {2.0 * std::atan2(std::sqrt(p), std::sqrt(1.0 - p)), wrap_angle(-x.q(0))};
}

inline ChartPoint from_angular(const AngularPoint& a) {
  if (!(a.theta > 0.0 && a.theta < kPi)) throw DomainError("polar angle must lie in (0, π)");
  const double s = std::sin(0.5 * a.theta);
  Vec q(1), p(1);
  q << -a.phi;
  p << s * s;
  ChartPoint x(q, p);
  if (!x.in_interior()) throw DomainError("polar angle too close to a pole");
  return x;
}

// (θ̇, φ̇) from a (q̇, ṗ) velocity: θ̇ = ṗ/√(p(1 − p)), φ̇ = −q̇.
inline Vec pushforward_to_angular(const ChartPoint& x, const Vec& velocity) {
  const double p = x.p(0);
  Vec v(2);
  v << velocity(1) / std::sqrt(p * (1.0 - p)), -velocity(0);
  return v;
}

/// Angular form of the constrained spin flow:
///   θ̇ = ½ sin2θ sin2φ / (1 − sin²θ cos²φ),  φ̇ = 2 cos²θ cos²φ / (1 − sin²θ cos²φ).
inline Vec bloch_angular_field(const AngularPoint& a) {
  const double st = std::sin(a.theta), ct = std::cos(a.theta), cp = std::cos(a.phi);
  const double denom = 1.0 - st * st * cp * cp;
  if (!(denom > 0.0)) throw SingularGramError("angular flow undefined at a sigma_x eigenstate");
  Vec v(2);
  v << 0.5 * std::sin(2.0 * a.theta) * std::sin(2.0 * a.phi) / denom, 2.0 * ct * ct * cp * cp / denom;
  return v;
}

// ---------------------------------------------------------------------------

inline SystemDefinition diagonal_system(Index levels, const Vec& energies,
                                        ConstraintSet constraints = {},
                                        Index reference_level = -1) {
  if (levels < 2) throw DomainError("diagonal_system needs at least two levels");
  SystemDefinition s;
  s.name = "diagonal";
  s.chart = ActionAngleChart(levels, reference_level);
  s.spectrum = SpectrumData::from_energies(energies, s.chart);
  s.constraints = std::move(constraints);
  return s;
}

}  // namespace qcm
