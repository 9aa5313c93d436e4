#pragma once

#include <utility>
#include <vector>

#include "qcm/chart.hpp"

namespace qcm {

// g is declared degenerate above this condition number.
inline constexpr double kMetricConditionLimit = 1e12;

// Kähler structures at one chart point. Lower indices are covariant:
// g(a, b) = g_ab, omega(a, b) = ω_ab, omega_inv(a, b) = ω^ab,
// big_omega(a, b) = Ω_ab, j(a, b) = J^a_b.
struct PointGeometry {
  Mat g;
  Mat g_inv;
  Mat omega;
  Mat omega_inv;
  Mat big_omega;
  Mat j;
  double metric_condition = 1.0;

  Index dimension() const { return g.rows(); }

  // Ω^ab = g^ac g^db Ω_cd
  Mat big_omega_raised() const { return g_inv * big_omega * g_inv; }
};

/// Pulls the Fubini–Study line element back through the chart embedding.
///
/// With G_ab = ⟨∂aψ|∂bψ⟩/⟨ψ|ψ⟩ − ⟨∂aψ|ψ⟩⟨ψ|∂bψ⟩/⟨ψ|ψ⟩² the metric is
/// g = 4 Re G and the Kähler form is Ω = 4 Im G; ω = Ω/2, ω^ab = 2Ω^ab and
/// J^a_b = g^ac Ω_cb.
inline PointGeometry geometry_at(const ChartPoint& x, const ActionAngleChart& chart) {
  const StateVector state = chart.embed(x);
  const CVec& psi = state.amplitudes();
  const CMat d = chart.derivatives(x);
  const double norm2 = state.norm_squared();

  const CMat overlaps = d.adjoint() * d / norm2;       // ⟨∂aψ|∂bψ⟩/N
  const CVec along = d.adjoint() * psi / norm2;        // ⟨∂aψ|ψ⟩/N
  const CMat fs = overlaps - along * along.adjoint();  // G_ab

  PointGeometry geo;
  geo.g = 4.0 * fs.real();
  geo.g = 0.5 * (geo.g + geo.g.transpose());
  geo.big_omega = 4.0 * fs.imag();
  geo.big_omega = 0.5 * (geo.big_omega - geo.big_omega.transpose());

  geo.metric_condition = condition_number(geo.g);
  if (!(geo.metric_condition < kMetricConditionLimit)) {
    throw DegenerateGeometryError("Fubini-Study metric is singular at this point (condition " +
                                  std::to_string(geo.metric_condition) + ")");
  }
  geo.g_inv = dense_inverse(geo.g);
  geo.g_inv = 0.5 * (geo.g_inv + geo.g_inv.transpose());
  geo.omega = 0.5 * geo.big_omega;
  geo.omega_inv = 2.0 * geo.big_omega_raised();
  geo.j = geo.g_inv * geo.big_omega;
  return geo;
}

// Residuals of the algebraic Kähler compatibility conditions at one point.
struct CompatibilityResiduals {
  double j_squared = 0.0;            // J J + I
  double hermiticity = 0.0;          // Jᵀ g J − g
  double omega_antisymmetry = 0.0;   // ω + ωᵀ
  double omega_inverse = 0.0;        // ω^ac ω_bc − δ
  double big_omega_inverse = 0.0;    // Ω^ac Ω_bc − δ
  double kahler_form_invariance = 0.0;  // J^c_a J^d_b Ω_cd − Ω_ab
  double metric_asymmetry = 0.0;     // g − gᵀ

  double max() const {
    return std::max({j_squared, hermiticity, omega_antisymmetry, omega_inverse,
                     big_omega_inverse, kahler_form_invariance, metric_asymmetry});
  }
};

inline CompatibilityResiduals compatibility_residuals(const PointGeometry& geo) {
  const Index d = geo.dimension();
  const Mat id = Mat::Identity(d, d);
  CompatibilityResiduals r;
  r.j_squared = max_abs(geo.j * geo.j + id);
  r.hermiticity = max_abs(geo.j.transpose() * geo.g * geo.j - geo.g);
  r.omega_antisymmetry = max_abs(geo.omega + geo.omega.transpose());
  r.omega_inverse = max_abs(geo.omega_inv * geo.omega.transpose() - id);
  r.big_omega_inverse = max_abs(geo.big_omega_raised() * geo.big_omega.transpose() - id);
  r.kahler_form_invariance =
      max_abs(geo.j.transpose() * geo.big_omega * geo.j - geo.big_omega);
  r.metric_asymmetry = max_abs(geo.g - geo.g.transpose());
  return r;
}

// [[0, I], [−I, 0]] in (q, p) ordering.
inline Mat canonical_symplectic(Index pairs) {
  Mat s = Mat::Zero(2 * pairs, 2 * pairs);
  s.topRightCorner(pairs, pairs).setIdentity();
  s.bottomLeftCorner(pairs, pairs) = -Mat::Identity(pairs, pairs);
  return s;
}

// How far ω_ab (and ω^ab) are from the canonical block form.
inline double canonical_omega_residual(const PointGeometry& geo) {
  const Mat s = canonical_symplectic(geo.dimension() / 2);
  return std::max(max_abs(geo.omega - s), max_abs(geo.omega_inv - s));
}

// N^c_ab stored as tensor[c](a, b).
struct NijenhuisTensor {
  std::vector<Mat> components;

  double max_norm() const {
    double m = 0.0;
    for (const Mat& c : components) m = std::max(m, max_abs(c));
    return m;
  }
};

/// N^c_ab = J^c_d ∂_[a J^d_b] − J^d_[a ∂_|d| J^c_b] with central differences of
/// step `step` standing in for the derivative. N is independent of the
/// symmetric connection, so coordinate partials are admissible.
inline NijenhuisTensor nijenhuis_tensor(const ChartPoint& x, const ActionAngleChart& chart,
                                        double step) {
  chart.require_interior(x);
  const Index dim = x.dimension();
  // dj[e](c, b) = ∂_e J^c_b
  std::vector<Mat> dj(static_cast<std::size_t>(dim));
  for (Index e = 0; e < dim; ++e) {
    ChartPoint fwd = x;
    ChartPoint bwd = x;
    fwd.coordinates()(e) += step;
    bwd.coordinates()(e) -= step;
    if (!fwd.in_interior() || !bwd.in_interior()) {
      throw DomainError("finite-difference stencil leaves the chart");
    }
    dj[static_cast<std::size_t>(e)] =
        (geometry_at(fwd, chart).j - geometry_at(bwd, chart).j) / (2.0 * step);
  }
  const Mat j = geometry_at(x, chart).j;

  NijenhuisTensor n;
  n.components.assign(static_cast<std::size_t>(dim), Mat::Zero(dim, dim));
  for (Index c = 0; c < dim; ++c) {
    Mat& nc = n.components[static_cast<std::size_t>(c)];
    for (Index a = 0; a < dim; ++a) {
      for (Index b = 0; b < dim; ++b) {
        if (a == b) continue;
        double first = 0.0;
        double second = 0.0;
        for (Index d = 0; d < dim; ++d) {
          const double skew = dj[static_cast<std::size_t>(a)](d, b) -
                              dj[static_cast<std::size_t>(b)](d, a);
          first += j(c, d) * (0.5 * skew);
          const double mixed = j(d, a) * dj[static_cast<std::size_t>(d)](c, b) -
                               j(d, b) * dj[static_cast<std::size_t>(d)](c, a);
          second += 0.5 * mixed;
        }
        nc(a, b) = first - second;
      }
    }
  }
  return n;
}

inline double nijenhuis_residual(const ChartPoint& x, const ActionAngleChart& chart, double step) {
  return nijenhuis_tensor(x, chart, step).max_norm();
}

// Positive and negative type parts of a real covector:
// v± = ½(v ∓ i Jᵀv), so that J^b_a v±_b = ±i v±_a.
inline std::pair<CVec, CVec> type_decompose(const Vec& v, const PointGeometry& geo) {
  require_same_size(v.size(), geo.dimension(), "covector and geometry");
  const CVec real = v.cast<Complex>();
  const CVec rotated = (geo.j.transpose() * v).cast<Complex>();
  const Complex i(0.0, 1.0);
  return {0.5 * (real - i * rotated), 0.5 * (real + i * rotated)};
}

}  // namespace qcm
