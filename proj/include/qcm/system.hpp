#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcm/chart.hpp"
#include "qcm/constraints.hpp"

namespace qcm {

// Energies in basis order and the gaps Ω_ν = E_{level(ν)} − E_ref seen by the
// action coordinates of a chart.
struct SpectrumData {
  Vec energies;
  Vec gaps;

  static SpectrumData from_energies(const Vec& energies, const ActionAngleChart& chart) {
    require_same_size(energies.size(), chart.levels(), "energies and chart");
    SpectrumData s;
    s.energies = energies;
    s.gaps.resize(chart.pairs());
    const double ref = energies(chart.reference_level());
    for (Index nu = 0; nu < chart.pairs(); ++nu) s.gaps(nu) = energies(chart.level_of(nu)) - ref;
    return s;
  }
};

// H(x) = ⟨ψ|Ĥ|ψ⟩/⟨ψ|ψ⟩ for Ĥ diagonal in the chart basis, which in
// action-angle form is E_ref + Σ Ω_ν p_ν.
class HamiltonianFunction {
 public:
  HamiltonianFunction(SpectrumData spectrum, ActionAngleChart chart)
      : spectrum_(std::move(spectrum)), chart_(std::move(chart)) {}

  const SpectrumData& spectrum() const { return spectrum_; }

  double value(const ChartPoint& x) const {
    return spectrum_.energies(chart_.reference_level()) + spectrum_.gaps.dot(x.p());
  }

  Vec gradient(const ChartPoint& x) const {
    Vec grad = Vec::Zero(x.dimension());
    grad.tail(x.pairs()) = spectrum_.gaps;
    return grad;
  }

  CMat operator_matrix() const { return spectrum_.energies.cast<Complex>().asDiagonal(); }

 private:
  SpectrumData spectrum_;
  ActionAngleChart chart_;
};

// Closed-form velocity field ẋ(x), used as an oracle for constrained flows.
using FieldOracle = std::function<Vec(const ChartPoint&)>;

// An n-level system in an action-angle chart with its operative constraints.
// Immutable after construction.
struct SystemDefinition {
  std::string name;
  ActionAngleChart chart;
  SpectrumData spectrum;
  ConstraintSet constraints;
  FieldOracle oracle;
  // Points where the constrained flow is undefined, with the exclusion radius
  // grids should keep from them.
  std::vector<ChartPoint> singular_points;
  double singular_radius = 1e-3;

  Index levels() const { return chart.levels(); }
  Index dimension() const { return chart.dimension(); }
  HamiltonianFunction hamiltonian() const { return HamiltonianFunction(spectrum, chart); }
  StateVector embed(const ChartPoint& x) const { return chart.embed(x); }

  // Euclidean distance in (q, p) to the nearest singular point, angles folded.
  double distance_to_singular(const ChartPoint& x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const ChartPoint& s : singular_points) {
      double d2 = 0.0;
      for (Index nu = 0; nu < x.pairs(); ++nu) {
        const double dq = angle_difference(x.q(nu), s.q(nu));
        const double dp = x.p(nu) - s.p(nu);
        d2 += dq * dq + dp * dp;
      }
      best = std::min(best, std::sqrt(d2));
    }
    return best;
  }
};

}  // namespace qcm
