#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qcm/chart.hpp"
#include "qcm/geometry.hpp"

namespace qcm {

inline constexpr double kGramConditionLimit = 1e12;
// A 1×1 Gram matrix is always well conditioned; this catches vanishing ∇Φ.
inline constexpr double kGramFloor = 1e-20;
inline constexpr double kGradientStep = 1e-6;
inline constexpr double kHermiticityTolerance = 1e-12;

enum class ConstraintKind { observable, algebraic };

using ScalarField = std::function<double(const ChartPoint&)>;
using CovectorField = std::function<Vec(const ChartPoint&)>;

// Central differences with step h·max(1, |x^a|).
inline Vec finite_difference_gradient(const ScalarField& f, const ChartPoint& x,
                                      double step = kGradientStep) {
  Vec grad(x.dimension());
  for (Index a = 0; a < x.dimension(); ++a) {
    const double h = step * std::max(1.0, std::abs(x.coordinates()(a)));
    ChartPoint fwd = x;
    ChartPoint bwd = x;
    fwd.coordinates()(a) += h;
    bwd.coordinates()(a) -= h;
    grad(a) = (f(fwd) - f(bwd)) / (2.0 * h);
  }
  return grad;
}

inline void require_hermitian(const CMat& op) {
  if (op.rows() != op.cols()) throw DomainError("observable must be square");
  const double scale = std::max(1.0, max_abs(op));
  if (max_abs(op - op.adjoint()) > kHermiticityTolerance * scale) {
    throw DomainError("observable is not Hermitian");
  }
}

// A real function Φ on state space with its gradient ∇aΦ. Observable
// constraints are expectation values ⟨ψ|Φ̂|ψ⟩/⟨ψ|ψ⟩ seen through a chart.
class Constraint {
 public:
  static Constraint algebraic(std::string name, ScalarField value, CovectorField gradient = {}) {
    Constraint c;
    c.kind_ = ConstraintKind::algebraic;
    c.name_ = std::move(name);
    c.value_ = std::move(value);
    c.gradient_ = std::move(gradient);
    return c;
  }

  // Expectation value and gradient computed through the chart embedding.
  static Constraint observable(std::string name, const ActionAngleChart& chart, CMat op) {
    require_hermitian(op);
    if (op.rows() != chart.levels()) throw DomainError("observable dimension does not match chart");
    Constraint c;
    c.kind_ = ConstraintKind::observable;
    c.name_ = std::move(name);
    c.op_ = op;
    c.value_ = [chart, op](const ChartPoint& x) { return chart.embed(x).expectation(op); };
    c.gradient_ = [chart, op](const ChartPoint& x) {
      const StateVector state = chart.embed(x);
      const CVec& psi = state.amplitudes();
      const double norm2 = state.norm_squared();
      const double mean = state.expectation(op);
      const CMat d = chart.derivatives(x);
      const CVec op_psi = op * psi;
      // ∂a⟨Φ̂⟩ = 2 Re⟨∂aψ|Φ̂|ψ⟩/N − 2⟨Φ̂⟩ Re⟨∂aψ|ψ⟩/N
      Vec grad(d.cols());
      for (Index a = 0; a < d.cols(); ++a) {
        grad(a) = 2.0 * (d.col(a).dot(op_psi)).real() / norm2 -
                  2.0 * mean * (d.col(a).dot(psi)).real() / norm2;
      }
      return grad;
    };
    return c;
  }

  // Observable with closed-form evaluator and gradient supplied by the caller.
  static Constraint observable(std::string name, CMat op, ScalarField value,
                               CovectorField gradient) {
    require_hermitian(op);
    Constraint c;
    c.kind_ = ConstraintKind::observable;
    c.name_ = std::move(name);
    c.op_ = std::move(op);
    c.value_ = std::move(value);
    c.gradient_ = std::move(gradient);
    return c;
  }

  ConstraintKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::optional<CMat>& observable_matrix() const { return op_; }
  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }

  double value(const ChartPoint& x) const { return scale_ * value_(x); }

  Vec gradient(const ChartPoint& x) const {
    if (gradient_) return scale_ * gradient_(x);
    return scale_ * finite_difference_gradient(value_, x);
  }

  // c·Φ; observable constraints stay observables of c·Φ̂.
  Constraint scaled(double factor) const {
    Constraint c = *this;
    c.scale_ *= factor;
    if (c.op_) *c.op_ *= factor;
    return c;
  }

 private:
  Constraint() = default;

  ConstraintKind kind_ = ConstraintKind::algebraic;
  std::string name_;
  std::optional<CMat> op_;
  ScalarField value_;
  CovectorField gradient_;
  double scale_ = 1.0;
};

using ConstraintSet = std::vector<Constraint>;

// Columns are ∇Φ^i.
inline Mat constraint_gradients(const ConstraintSet& constraints, const ChartPoint& x) {
  Mat grads(x.dimension(), static_cast<Index>(constraints.size()));
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    grads.col(static_cast<Index>(i)) = constraints[i].gradient(x);
  }
  return grads;
}

inline Vec constraint_values(const ConstraintSet& constraints, const ChartPoint& x) {
  Vec v(static_cast<Index>(constraints.size()));
  for (std::size_t i = 0; i < constraints.size(); ++i) v(static_cast<Index>(i)) = constraints[i].value(x);
  return v;
}

struct GramMatrix {
  Mat m;
  std::optional<Mat> m_inv;
  double condition_number = 1.0;

  Index size() const { return m.rows(); }
  bool invertible() const { return m_inv.has_value(); }

  const Mat& inverse() const {
    if (!m_inv) throw SingularGramError("Gram matrix is singular");
    return *m_inv;
  }
};

// M^ij = g^ab ∇aΦ^i ∇bΦ^j from precomputed gradient columns. Never throws on
// singularity; m_inv is left empty instead.
inline GramMatrix assemble_gram(const Mat& gradients, const PointGeometry& geo) {
  require_same_size(gradients.rows(), geo.dimension(), "constraint gradients and geometry");
  const Index n = gradients.cols();
  const Mat raised = geo.g_inv * gradients;
  GramMatrix gram;
  gram.m.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double v = gradients.col(i).dot(raised.col(j));
      gram.m(i, j) = v;
      gram.m(j, i) = v;
    }
  }
  gram.condition_number = condition_number(gram.m);
  const double smallest = n == 0 ? 1.0 : Eigen::JacobiSVD<Mat>(gram.m).singularValues()(n - 1);
  if (gram.condition_number < kGramConditionLimit && smallest > kGramFloor) {
    gram.m_inv = dense_inverse(gram.m);
  }
  return gram;
}

namespace detail {

// Names the near-null combination of constraints responsible for a singular M.
inline std::string describe_redundancy(const Mat& m, const ConstraintSet& constraints) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const Vec null = svd.matrixV().col(m.cols() - 1);
  const double top = max_abs(null);
  std::ostringstream os;
  os << "Gram matrix singular (condition " << condition_number(m) << ", smallest singular value "
     << svd.singularValues()(m.cols() - 1) << "); redundant combination:";
  for (Index i = 0; i < null.size(); ++i) {
    if (std::abs(null(i)) > 1e-6 * top) {
      os << ' ' << (null(i) >= 0 ? '+' : '-') << std::abs(null(i)) << '*'
         << constraints[static_cast<std::size_t>(i)].name();
    }
  }
  return os.str();
}

}  // namespace detail

inline GramMatrix gram_matrix(const ConstraintSet& constraints, const ChartPoint& x,
                              const PointGeometry& geo) {
  if (constraints.empty()) throw DomainError("gram_matrix needs at least one constraint");
  GramMatrix gram = assemble_gram(constraint_gradients(constraints, x), geo);
  if (!gram.invertible()) throw SingularGramError(detail::describe_redundancy(gram.m, constraints));
  return gram;
}

/// Symmetrized covariance ½⟨Φ̂iΦ̂j + Φ̂jΦ̂i⟩ − ⟨Φ̂i⟩⟨Φ̂j⟩ in the normalized state.
inline Mat covariance_matrix(const std::vector<CMat>& observables, const StateVector& state) {
  const StateVector unit = state.normalized();
  const CVec& psi = unit.amplitudes();
  const Index n = static_cast<Index>(observables.size());
  Vec means(n);
  for (Index i = 0; i < n; ++i) {
    const CMat& op = observables[static_cast<std::size_t>(i)];
    require_hermitian(op);
    require_same_size(op.rows(), psi.size(), "observable and state");
    means(i) = psi.dot(op * psi).real();
  }
  Mat cov(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const CMat& a = observables[static_cast<std::size_t>(i)];
      const CMat& b = observables[static_cast<std::size_t>(j)];
      const CMat sym = 0.5 * (a * b + b * a);
      const double v = psi.dot(sym * psi).real() - means(i) * means(j);
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

/// ‖M(metric) − covariance(Hilbert space)‖∞ for observable constraints.
inline double gram_covariance_check(const ConstraintSet& constraints, const ChartPoint& x,
                                    const ActionAngleChart& chart) {
  std::vector<CMat> ops;
  ops.reserve(constraints.size());
  for (const Constraint& c : constraints) {
    if (c.kind() != ConstraintKind::observable || !c.observable_matrix()) {
      throw DomainError("gram_covariance_check requires observable constraints (" + c.name() + ")");
    }
    ops.push_back(*c.observable_matrix());
  }
  const PointGeometry geo = geometry_at(x, chart);
  const GramMatrix gram = assemble_gram(constraint_gradients(constraints, x), geo);
  return max_abs(gram.m - covariance_matrix(ops, chart.embed(x)));
}

struct TwoConstraintDeterminant {
  double delta = 0.0;  // (1 − ρ²) var(A) var(B)
  double rho = 0.0;    // correlation in [−1, 1]
};

inline TwoConstraintDeterminant two_constraint_determinant(const GramMatrix& gram) {
  if (gram.size() != 2) throw DomainError("two_constraint_determinant needs exactly two constraints");
  const double var_a = gram.m(0, 0);
  const double var_b = gram.m(1, 1);
  // Variances at roundoff level relative to the larger one count as zero.
  const double floor = 1e-14 * std::max(var_a, var_b);
  if (!(var_a > floor) || !(var_b > floor)) {
    throw EigenstateDegenerateError("a constraint has zero variance (eigenstate)");
  }
  TwoConstraintDeterminant r;
  r.rho = std::clamp(gram.m(0, 1) / (std::sqrt(var_a) * std::sqrt(var_b)), -1.0, 1.0);
  r.delta = (1.0 - r.rho * r.rho) * var_a * var_b;
  return r;
}

}  // namespace qcm
