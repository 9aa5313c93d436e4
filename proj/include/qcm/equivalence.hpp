#pragma once

#include <algorithm>
#include <string>

#include "qcm/dynamics.hpp"

namespace qcm {

inline constexpr double kEquivalenceTolerance = 1e-8;
// Relative size below which a τ type block counts as vanishing.
inline constexpr double kBlockTolerance = 1e-8;

// μ_bc = M_ij ∇bΦ^i ∇cΦ^j, symmetrized.
inline Mat mu_tensor(const ConstraintFrame& f) {
  const Index d = f.geometry.dimension();
  if (f.count() == 0) return Mat::Zero(d, d);
  const Mat mu = f.gradients * f.gram.inverse() * f.gradients.transpose();
  return 0.5 * (mu + mu.transpose());
}

inline Mat mu_tensor(const ChartPoint& x, const SystemDefinition& system,
                     const ConstraintSet& constraints) {
  return mu_tensor(constraint_frame(x, system, constraints));
}

// ω̃^ab = ω^ab − g^ad ω^cb μ_dc
inline Mat modified_symplectic(const ConstraintFrame& f) {
  const PointGeometry& geo = f.geometry;
  return geo.omega_inv - geo.g_inv * mu_tensor(f) * geo.omega_inv;
}

inline Mat modified_symplectic(const ChartPoint& x, const SystemDefinition& system,
                               const ConstraintSet& constraints) {
  return modified_symplectic(constraint_frame(x, system, constraints));
}

// ‖J^c_a J^d_b μ_cd − μ_ab‖∞; zero exactly when the projected flow is a
// Hamiltonian flow of ω̃ with the original H.
inline double j_invariance_residual(const ConstraintFrame& f) {
  const Mat mu = mu_tensor(f);
  const Mat& j = f.geometry.j;
  return max_abs(j.transpose() * mu * j - mu);
}

inline double j_invariance_residual(const ChartPoint& x, const SystemDefinition& system,
                                    const ConstraintSet& constraints) {
  return j_invariance_residual(constraint_frame(x, system, constraints));
}

// |g^ab (Jᵀ∇Φ)_a ∇bΦ|: J∇Φ and ∇Φ are always g-orthogonal, which is why a
// single constraint can never satisfy J-invariance.
inline double single_constraint_orthogonality(const ChartPoint& x, const SystemDefinition& system,
                                              const Constraint& constraint) {
  const PointGeometry geo = geometry_at(x, system.chart);
  const Vec grad = constraint.gradient(x);
  const Vec rotated = geo.j.transpose() * grad;
  return std::abs(rotated.dot(geo.g_inv * grad));
}

struct AnnihilationResiduals {
  double right = 0.0;  // max_k ‖ω̃^ad ∇aΦ^k‖∞
  double left = 0.0;   // max_k ‖ω̃^ad ∇dΦ^k‖∞
};

inline AnnihilationResiduals annihilation_check(const ConstraintFrame& f) {
  AnnihilationResiduals r;
  if (f.count() == 0) return r;
  const Mat tilde = modified_symplectic(f);
  r.right = max_abs(tilde.transpose() * f.gradients);
  r.left = max_abs(tilde * f.gradients);
  return r;
}

inline AnnihilationResiduals annihilation_check(const ChartPoint& x, const SystemDefinition& system,
                                                const ConstraintSet& constraints) {
  return annihilation_check(constraint_frame(x, system, constraints));
}

enum class TauSign { plus, minus, neither };

inline const char* to_string(TauSign s) {
  switch (s) {
    case TauSign::plus: return "plus";
    case TauSign::minus: return "minus";
    case TauSign::neither: return "neither";
  }
  return "unknown";
}

// Type blocks of a real two-form: P± = ½(I ∓ iJᵀ) applied on both indices.
struct TypeBlocks {
  CMat pp;  // τ_αβ
  CMat pm;  // τ_αβ′
  CMat mp;  // τ_α′β
  CMat mm;  // τ_α′β′

  double pure_norm() const { return std::max(max_abs(pp), max_abs(mm)); }
  double mixed_norm() const { return std::max(max_abs(pm), max_abs(mp)); }
};

inline TypeBlocks type_blocks(const Mat& form, const PointGeometry& geo) {
  const Index d = geo.dimension();
  const Complex i(0.0, 1.0);
  const CMat id = CMat::Identity(d, d);
  const CMat jt = geo.j.transpose().cast<Complex>();
  const CMat plus = 0.5 * (id - i * jt);
  const CMat minus = 0.5 * (id + i * jt);
  const CMat t = form.cast<Complex>();
  return {plus * t * plus.transpose(), plus * t * minus.transpose(),
          minus * t * plus.transpose(), minus * t * minus.transpose()};
}

struct TauAnalysis {
  Mat tau;  // τ_ab = ∇aA ∇bB − ∇aB ∇bA
  TauSign sign = TauSign::neither;
  double pure_block_norm = 0.0;   // τ^(−) part: (αβ) and (α′β′) blocks
  double mixed_block_norm = 0.0;  // τ^(+) part: (αβ′) and (α′β) blocks
  TypeBlocks blocks;
};

/// Two-constraint structure test. τ = τ^(+) (mixed blocks only) satisfies
/// J^c_a J^d_b τ_cd = +τ_ab; τ = τ^(−) (pure blocks only) gives the minus sign.
inline TauAnalysis tau_analysis(const ChartPoint& x, const SystemDefinition& system,
                                const ConstraintSet& constraints) {
  if (constraints.size() != 2) throw DomainError("tau_analysis needs exactly two constraints");
  const PointGeometry geo = geometry_at(x, system.chart);
  const Vec a = constraints[0].gradient(x);
  const Vec b = constraints[1].gradient(x);
  TauAnalysis r;
  r.tau = a * b.transpose() - b * a.transpose();
  r.blocks = type_blocks(r.tau, geo);
  r.pure_block_norm = r.blocks.pure_norm();
  r.mixed_block_norm = r.blocks.mixed_norm();
  const double scale = max_abs(r.tau);
  // τ ≡ 0 satisfies both structures and fixes no sign.
  if (scale > 0.0) {
    if (r.pure_block_norm < kBlockTolerance * scale) {
      r.sign = TauSign::plus;
    } else if (r.mixed_block_norm < kBlockTolerance * scale) {
      r.sign = TauSign::minus;
    }
  }
  return r;
}

enum class Verdict { equivalent, not_equivalent };

inline const char* to_string(Verdict v) {
  return v == Verdict::equivalent ? "equivalent" : "not_equivalent";
}

struct EquivalenceReport {
  double j_invariance_residual = 0.0;
  double right_annihilation_residual = 0.0;
  double left_annihilation_residual = 0.0;
  double antisymmetry_residual = 0.0;  // ‖ω̃ + ω̃ᵀ‖∞
  std::optional<TauSign> tau_sign;     // two constraints only
  Verdict verdict = Verdict::not_equivalent;
};

inline EquivalenceReport equivalence_report(const ChartPoint& x, const SystemDefinition& system,
                                            const ConstraintSet& constraints) {
  const ConstraintFrame f = constraint_frame(x, system, constraints);
  EquivalenceReport r;
  r.j_invariance_residual = j_invariance_residual(f);
  const AnnihilationResiduals ann = annihilation_check(f);
  r.right_annihilation_residual = ann.right;
  r.left_annihilation_residual = ann.left;
  const Mat tilde = modified_symplectic(f);
  r.antisymmetry_residual = max_abs(tilde + tilde.transpose());
  if (constraints.size() == 2) r.tau_sign = tau_analysis(x, system, constraints).sign;
  r.verdict = r.j_invariance_residual < kEquivalenceTolerance ? Verdict::equivalent
                                                              : Verdict::not_equivalent;
  return r;
}

inline EquivalenceReport equivalence_report(const ChartPoint& x, const SystemDefinition& system) {
  return equivalence_report(x, system, system.constraints);
}

}  // namespace qcm
