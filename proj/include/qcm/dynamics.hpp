#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qcm/constraints.hpp"
#include "qcm/geometry.hpp"
#include "qcm/system.hpp"

namespace qcm {

// Everything the constrained flow needs at one point, computed once.
struct ConstraintFrame {
  PointGeometry geometry;
  Vec grad_h;
  Mat gradients;  // columns ∇Φ^i
  GramMatrix gram;

  Index count() const { return gradients.cols(); }
};

inline ConstraintFrame constraint_frame(const ChartPoint& x, const SystemDefinition& system,
                                        const ConstraintSet& constraints) {
  ConstraintFrame f;
  f.geometry = geometry_at(x, system.chart);
  f.grad_h = system.hamiltonian().gradient(x);
  if (!constraints.empty()) f.gram = gram_matrix(constraints, x, f.geometry);
  f.gradients = constraint_gradients(constraints, x);
  return f;
}

// ẋ^a = ω^ab ∇bH
inline Vec schrodinger_field(const ChartPoint& x, const SystemDefinition& system) {
  const PointGeometry geo = geometry_at(x, system.chart);
  return geo.omega_inv * system.hamiltonian().gradient(x);
}

inline Vec multipliers(const ConstraintFrame& f) {
  if (f.count() == 0) return Vec();
  // ω^ab ∇aΦ^j ∇bH
  const Vec coupling = f.gradients.transpose() * f.geometry.omega_inv * f.grad_h;
  return f.gram.inverse() * coupling;
}

/// λ_i = M_ij ω^ab ∇aΦ^j ∇bH
inline Vec multipliers(const ChartPoint& x, const SystemDefinition& system,
                       const ConstraintSet& constraints) {
  return multipliers(constraint_frame(x, system, constraints));
}

inline Vec constrained_field(const ConstraintFrame& f) {
  Vec v = f.geometry.omega_inv * f.grad_h;
  if (f.count() == 0) return v;
  v -= f.geometry.g_inv * (f.gradients * multipliers(f));
  return v;
}

/// Schrödinger flow with its g-normal part relative to the constraint
/// surface removed: ẋ^a = ω^ab∇bH − λ_i g^ab ∇bΦ^i.
inline Vec constrained_field(const ChartPoint& x, const SystemDefinition& system,
                             const ConstraintSet& constraints) {
  return constrained_field(constraint_frame(x, system, constraints));
}

inline Vec constrained_field(const ChartPoint& x, const SystemDefinition& system) {
  return constrained_field(x, system, system.constraints);
}

// Exact evolution for a Hamiltonian diagonal in the chart basis: phases
// e^{−iE_α t} applied to the amplitudes, chart coordinates re-extracted.
inline ChartPoint exact_unitary_oracle(const SystemDefinition& system, const ChartPoint& x0,
                                       double t) {
  CVec psi = system.embed(x0).amplitudes();
  for (Index a = 0; a < psi.size(); ++a) psi(a) *= std::polar(1.0, -system.spectrum.energies(a) * t);
  return system.chart.extract(StateVector(std::move(psi)));
}

enum class ExitFlag { none = 0, chart_exit = 1, singular_gram = 2 };

inline const char* to_string(ExitFlag f) {
  switch (f) {
    case ExitFlag::none: return "none";
    case ExitFlag::chart_exit: return "chart_exit";
    case ExitFlag::singular_gram: return "singular_gram";
  }
  return "unknown";
}

struct TrajectorySample {
  double t = 0.0;
  ChartPoint point;  // angles unwrapped
  Vec constraint_values;
  double energy = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  ExitFlag exit = ExitFlag::none;
  std::string diagnostic;

  bool truncated() const { return exit != ExitFlag::none; }
  const TrajectorySample& back() const { return samples.back(); }
};

enum class FlowKind { schrodinger, constrained };

struct IntegrationOptions {
  FlowKind flow = FlowKind::constrained;
  // Newton restoration of Φ after each step (constrained flows only).
  bool projection = true;
  int max_newton_iterations = 5;
  double projection_tolerance = 1e-10;
  // Level values Φ^i is held at; defaults to Φ(x0).
  std::optional<Vec> targets;
};

using VectorField = std::function<Vec(const ChartPoint&)>;

// One classical fourth-order Runge–Kutta step on chart coordinates.
template <class Field>
ChartPoint rk4_step(Field&& field, const ChartPoint& x, double h) {
  const Vec& x0 = x.coordinates();
  const Vec k1 = field(x);
  const Vec k2 = field(ChartPoint::from_coordinates(x0 + 0.5 * h * k1));
  const Vec k3 = field(ChartPoint::from_coordinates(x0 + 0.5 * h * k2));
  const Vec k4 = field(ChartPoint::from_coordinates(x0 + h * k3));
  return ChartPoint::from_coordinates(x0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Moves x along g⁻¹∇Φ directions until |Φ^i − target_i| < tolerance or the
/// iteration budget runs out. Returns the final max residual.
inline double project_to_level_set(ChartPoint& x, const SystemDefinition& system,
                                   const ConstraintSet& constraints, const Vec& targets,
                                   int max_iterations, double tolerance) {
  double residual = max_abs(constraint_values(constraints, x) - targets);
  for (int it = 0; it < max_iterations && residual >= tolerance; ++it) {
    const PointGeometry geo = geometry_at(x, system.chart);
    const Mat grads = constraint_gradients(constraints, x);
    const GramMatrix gram = gram_matrix(constraints, x, geo);
    const Vec r = constraint_values(constraints, x) - targets;
    x.coordinates() -= geo.g_inv * (grads * (gram.inverse() * r));
    system.chart.require_interior(x);
    residual = max_abs(constraint_values(constraints, x) - targets);
  }
  return residual;
}

/// Fixed-step RK4 from x0 to t_end. Samples land on multiples of dt; a final
/// shortened step lands exactly on t_end. Leaving the chart or hitting a
/// singular Gram matrix truncates the trajectory with the matching flag.
inline Trajectory integrate(const SystemDefinition& system, const ChartPoint& x0, double t_end,
                            double dt, const IntegrationOptions& options = {}) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!(t_end >= 0.0)) throw DomainError("t_end must be nonnegative");
  system.chart.require_interior(x0);

  const bool constrained = options.flow == FlowKind::constrained && !system.constraints.empty();
  const ConstraintSet& monitored = system.constraints;
  const HamiltonianFunction h = system.hamiltonian();

  Vec targets = constraint_values(monitored, x0);
  if (options.targets) {
    require_same_size(options.targets->size(), targets.size(), "constraint targets");
    if (max_abs(targets - *options.targets) > 1e-10) {
      throw DomainError("initial point is not on the requested constraint surface");
    }
    targets = *options.targets;
  }

  VectorField field;
  if (constrained) {
    field = [&system](const ChartPoint& x) { return constrained_field(x, system); };
  } else {
    field = [&system](const ChartPoint& x) { return schrodinger_field(x, system); };
  }

  Trajectory traj;
  auto record = [&](double t, const ChartPoint& x) {
    traj.samples.push_back({t, x, constraint_values(monitored, x), h.value(x)});
  };

  ChartPoint x = x0;
  record(0.0, x);
  const auto full_steps = static_cast<long long>(std::floor(t_end / dt));
  const double tail = t_end - static_cast<double>(full_steps) * dt;
  const long long total = full_steps + (tail > 1e-12 * dt ? 1 : 0);

  for (long long k = 0; k < total; ++k) {
    const double t0 = static_cast<double>(k) * dt;
    const double step = k < full_steps ? dt : tail;
    const double t1 = k < full_steps ? static_cast<double>(k + 1) * dt : t_end;
    try {
      ChartPoint next = rk4_step(field, x, step);
      system.chart.require_interior(next);
      if (constrained && options.projection) {
        project_to_level_set(next, system, monitored, targets, options.max_newton_iterations,
                             options.projection_tolerance);
      }
      x = std::move(next);
    } catch (const SingularGramError& e) {
      traj.exit = ExitFlag::singular_gram;
      traj.diagnostic = "t=" + std::to_string(t0) + ": " + e.what();
      break;
    } catch (const DomainError& e) {
      traj.exit = ExitFlag::chart_exit;
      traj.diagnostic = "t=" + std::to_string(t0) + ": " + e.what();
      break;
    } catch (const DegenerateGeometryError& e) {
      traj.exit = ExitFlag::chart_exit;
      traj.diagnostic = "t=" + std::to_string(t0) + ": " + e.what();
      break;
    }
    record(t1, x);
  }
  return traj;
}

}  // namespace qcm
