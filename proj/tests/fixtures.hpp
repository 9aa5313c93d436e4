#pragma once

// Closed-form expressions for the worked examples, written out by hand from
// the displayed formulas. They are independent of the pullback code path and
// serve as oracles only.

#include <cmath>

#include "qcm/qcm.hpp"

namespace qcm::fixtures {

// Example 1 metric g_ab (p4 = 1 − p1 − p2 − p3).
inline Mat product_metric(double p1, double p2, double p3) {
  const double p4 = 1.0 - p1 - p2 - p3;
  Mat g = Mat::Zero(6, 6);
  g(0, 0) = 4 * (1 - p1) * p1;
  g(0, 1) = g(1, 0) = -4 * p1 * p2;
  g(0, 2) = g(2, 0) = -4 * p1 * p3;
  g(1, 1) = 4 * (1 - p2) * p2;
  g(1, 2) = g(2, 1) = -4 * p2 * p3;
  g(2, 2) = 4 * (1 - p3) * p3;
  g(3, 3) = (1 - p2 - p3) / (p1 * p4);
  g(4, 4) = (1 - p1 - p3) / (p2 * p4);
  g(5, 5) = (1 - p1 - p2) / (p3 * p4);
  g(3, 4) = g(4, 3) = g(3, 5) = g(5, 3) = g(4, 5) = g(5, 4) = 1 / p4;
  return g;
}

// Example 1 inverse metric g^ab.
inline Mat product_inverse_metric(double p1, double p2, double p3) {
  const double p4 = 1.0 - p1 - p2 - p3;
  Mat h = Mat::Zero(6, 6);
  h(0, 0) = (1 - p2 - p3) / (4 * p1 * p4);
  h(1, 1) = (1 - p1 - p3) / (4 * p2 * p4);
  h(2, 2) = (1 - p1 - p2) / (4 * p3 * p4);
  h(0, 1) = h(1, 0) = h(0, 2) = h(2, 0) = h(1, 2) = h(2, 1) = 1 / (4 * p4);
  h(3, 3) = (1 - p1) * p1;
  h(4, 4) = (1 - p2) * p2;
  h(5, 5) = (1 - p3) * p3;
  h(3, 4) = h(4, 3) = -p1 * p2;
  h(3, 5) = h(5, 3) = -p1 * p3;
  h(4, 5) = h(5, 4) = -p2 * p3;
  return h;
}

// Example 1 complex structure J^a_b.
inline Mat product_complex_structure(double p1, double p2, double p3) {
  const double p4 = 1.0 - p1 - p2 - p3;
  Mat j = Mat::Zero(6, 6);
  j(0, 3) = (1 - p2 - p3) / (2 * p1 * p4);
  j(1, 4) = (1 - p1 - p3) / (2 * p2 * p4);
  j(2, 5) = (1 - p1 - p2) / (2 * p3 * p4);
  j(0, 4) = j(0, 5) = j(1, 3) = j(1, 5) = j(2, 3) = j(2, 4) = 1 / (2 * p4);
  j(3, 0) = 2 * (p1 - 1) * p1;
  j(4, 1) = 2 * (p2 - 1) * p2;
  j(5, 2) = 2 * (p3 - 1) * p3;
  j(3, 1) = j(4, 0) = 2 * p1 * p2;
  j(3, 2) = j(5, 0) = 2 * p1 * p3;
  j(4, 2) = j(5, 1) = 2 * p2 * p3;
  return j;
}

// Example 1 Gram matrix M^ij for the separable constraints.
inline Mat product_gram(double p1, double p2, double p3) {
  const double p4 = 1.0 - p1 - p2 - p3;
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 0.25 * (1 / p1 + 1 / p2 + 1 / p3 + 1 / p4);
  m(1, 1) = p1 * p4 * (1 - 4 * p1 * p4 + 4 * p2 * p3) +
            (p2 + p3 - 4 * p2 * p3) * (p2 * p3 - p1 * p4);
  return m;
}

// Example 1 equations of motion before simplification on the surface.
inline Vec product_field_unsimplified(double p1, double p2, double p3, const Vec& gaps) {
  const double kappa = gaps(0) - gaps(1) - gaps(2);
  const double den = p2 * p3 * (1 - p2 - p3) - p1 * p1 * (p2 + p3) + p1 * (1 - p2 - p3) * (p2 + p3);
  Vec v = Vec::Zero(6);
  v(0) = gaps(0) - p2 * p3 * (1 - 2 * p1 - p2 - p3) * kappa / den;
  v(1) = gaps(1) + p1 * p3 * (1 - p1 - p3) * kappa / den;
  v(2) = gaps(2) + p1 * p2 * (1 - p1 - p2) * kappa / den;
  return v;
}

// Example 1 constraints in trigonometric form.
inline double product_trig_real(const ChartPoint& x) {
  const double p4 = x.residual_action();
  return std::sqrt(x.p(0) * p4) * std::cos(x.q(0)) -
         std::sqrt(x.p(1) * x.p(2)) * std::cos(x.q(1) + x.q(2));
}

inline double product_trig_imag(const ChartPoint& x) {
  const double p4 = x.residual_action();
  return std::sqrt(x.p(0) * p4) * std::sin(x.q(0)) -
         std::sqrt(x.p(1) * x.p(2)) * std::sin(x.q(1) + x.q(2));
}

// Bloch-sphere metric and complex structure in (q, p).
inline Mat bloch_metric(double p) {
  Mat g = Mat::Zero(2, 2);
  g(0, 0) = 4 * (1 - p) * p;
  g(1, 1) = 1 / ((1 - p) * p);
  return g;
}

inline Mat bloch_complex_structure(double p) {
  Mat j = Mat::Zero(2, 2);
  j(0, 1) = 1 / (2 * (1 - p) * p);
  j(1, 0) = -2 * (1 - p) * p;
  return j;
}

inline ChartPoint point(std::initializer_list<double> q, std::initializer_list<double> p) {
  Vec qv(static_cast<Index>(q.size())), pv(static_cast<Index>(p.size()));
  Index i = 0;
  for (double v : q) qv(i++) = v;
  i = 0;
  for (double v : p) pv(i++) = v;
  return ChartPoint(qv, pv);
}

inline Vec vec(std::initializer_list<double> values) {
  Vec v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// Energies with gaps Ω = (1, 2, 3) relative to E4 = 0.5.
inline Vec example_energies() { return vec({1.5, 2.5, 3.5, 0.5}); }

}  // namespace qcm::fixtures
