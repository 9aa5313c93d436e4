// Acceptance checks, one line per criterion. `acceptance` runs all of them;
// `acceptance --criterion N` runs one (exit status 1 on failure).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"

using namespace qcm;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Max coordinate error of a trajectory endpoint against the exact evolution.
double endpoint_error(const SystemDefinition& sys, const ChartPoint& x0, double t_end, double dt) {
  IntegrationOptions opt;
  opt.flow = FlowKind::schrodinger;
  const Trajectory traj = integrate(sys, x0, t_end, dt, opt);
  const ChartPoint exact = exact_unitary_oracle(sys, x0, t_end);
  const ChartPoint& end = traj.back().point;
  double err = max_abs(end.p() - exact.p());
  for (Index nu = 0; nu < end.pairs(); ++nu) err = std::max(err, std::abs(angle_difference(end.q(nu), exact.q(nu))));
  return err;
}

const ChartPoint& unconstrained_start() {
  static const ChartPoint x0 = fixtures::point({0.3, 1.1, 2.0}, {0.15, 0.25, 0.35});
  return x0;
}

Outcome criterion_1() {
  const auto start = Clock::now();
  const auto sys = diagonal_system(4, fixtures::example_energies());
  const ChartPoint& x0 = unconstrained_start();
  IntegrationOptions opt;
  opt.flow = FlowKind::schrodinger;
  const Trajectory traj = integrate(sys, x0, 2 * kPi, 1e-3, opt);
  double err = 0.0;
  for (const auto& s : traj.samples) {
    const ChartPoint exact = exact_unitary_oracle(sys, x0, s.t);
    err = std::max(err, max_abs(s.point.p() - exact.p()));
    for (Index nu = 0; nu < 3; ++nu) err = std::max(err, std::abs(angle_difference(s.point.q(nu), exact.q(nu))));
  }
  const double elapsed = seconds_since(start);
  return {!traj.truncated() && err < 1e-8 && elapsed < 5.0,
          "max error " + num(err) + " (tol 1e-08), runtime " + num(elapsed) + " s (limit 5 s)"};
}

Outcome criterion_2() {
  const auto sys = two_qubit_product_system(fixtures::example_energies());
  double field_err = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const ChartPoint x = product_surface_sample(seed);
    const Vec v = constrained_field(x, sys);
    field_err = std::max(field_err, max_abs(v - sys.oracle(x)));
    field_err = std::max(field_err, max_abs(v - fixtures::product_field_unsimplified(x.p(0), x.p(1), x.p(2), sys.spectrum.gaps)));
  }
  double p_drift = 0.0, phi_drift = 0.0;
  bool truncated = false;
  for (std::uint64_t seed : {101u, 102u, 103u}) {
    const ChartPoint x0 = product_surface_sample(seed);
    const Trajectory traj = integrate(sys, x0, 2 * kPi, 1e-3);
    truncated = truncated || traj.truncated();
    for (const auto& s : traj.samples) {
      p_drift = std::max(p_drift, max_abs(s.point.p() - x0.p()));
      phi_drift = std::max(phi_drift, max_abs(s.constraint_values));
    }
  }
  return {!truncated && field_err < 1e-10 && p_drift < 1e-10 && phi_drift < 1e-8,
          "field error " + num(field_err) + " (tol 1e-10), p drift " + num(p_drift) + " (tol 1e-10), constraint drift " +
              num(phi_drift) + " (tol 1e-08)"};
}

Outcome criterion_3() {
  std::mt19937_64 rng(2024);
  const ActionAngleChart chart(4);
  double err = 0.0;
  for (int k = 0; k < 20; ++k) {
    const ChartPoint x = sample_interior_point(4, rng);
    const PointGeometry geo = geometry_at(x, chart);
    const double p1 = x.p(0), p2 = x.p(1), p3 = x.p(2);
    err = std::max(err, max_abs(geo.g - fixtures::product_metric(p1, p2, p3)));
    err = std::max(err, max_abs(geo.g_inv - fixtures::product_inverse_metric(p1, p2, p3)));
    err = std::max(err, max_abs(geo.j - fixtures::product_complex_structure(p1, p2, p3)));
  }
  return {err < 1e-10, "max entry error " + num(err) + " over 20 points (tol 1e-10)"};
}

Outcome criterion_4() {
  const auto spin = single_spin_conserved_sx();
  double chart_err = 0.0, angular_err = 0.0, fixed_norm = 0.0;
  int evaluated = 0, excluded = 0;
  for (int k = 0; k < 24; ++k) {
    const double theta = kPi / 2 + (k - 12) * kPi / 25;
    for (int j = 0; j < 24; ++j) {
      const double phi = kTwoPi * j / 24;
      const ChartPoint x = from_angular({theta, phi});
      if (spin.distance_to_singular(x) < spin.singular_radius) {
        ++excluded;
        continue;
      }
      const Vec v = constrained_field(x, spin);
      chart_err = std::max(chart_err, max_abs(v - spin::field(x)));
      const Vec w = pushforward_to_angular(x, v);
      angular_err = std::max(angular_err, max_abs(w - bloch_angular_field({theta, phi})));
      if (k == 12 || j == 6 || j == 18) fixed_norm = std::max(fixed_norm, w.norm());
      ++evaluated;
    }
  }
  return {chart_err < 1e-9 && angular_err < 1e-9 && fixed_norm < 1e-10 && evaluated + excluded == 576,
          "chart error " + num(chart_err) + ", angular error " + num(angular_err) + " (tol 1e-09), fixed-row norm " +
              num(fixed_norm) + " (tol 1e-10), " + std::to_string(excluded) + " grid points excluded"};
}

Outcome criterion_5() {
  const auto product = two_qubit_product_system(fixtures::example_energies());
  const auto spin = single_spin_conserved_sx();
  double worst_product = 0.0, best_spin = 1e300;
  bool agree = true;
  auto agrees = [](const EquivalenceReport& r) {
    const bool a = r.j_invariance_residual < kEquivalenceTolerance;
    const bool b = r.left_annihilation_residual < kEquivalenceTolerance;
    const bool c = r.antisymmetry_residual < kEquivalenceTolerance;
    return a == b && b == c;
  };
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const EquivalenceReport r = equivalence_report(product_surface_sample(seed), product);
    worst_product = std::max(worst_product, r.j_invariance_residual);
    agree = agree && agrees(r);
  }
  std::mt19937_64 rng(55);
  for (int k = 0; k < 50; ++k) {
    const EquivalenceReport r = equivalence_report(sample_interior_point(2, rng, 0.05), spin);
    best_spin = std::min(best_spin, r.j_invariance_residual);
    agree = agree && agrees(r);
  }
  return {worst_product < 1e-8 && best_spin > 0.01 && agree,
          "product max residual " + num(worst_product) + " (tol 1e-08), spin min residual " + num(best_spin) +
              " (floor 0.01), criteria agree: " + (agree ? "yes" : "no")};
}

Outcome criterion_6() {
  const auto product = two_qubit_product_system(fixtures::example_energies());
  const auto spin = single_spin_conserved_sx();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    worst = std::max(worst, annihilation_check(product_surface_sample(seed), product, product.constraints).right);
  }
  std::mt19937_64 rng(55);
  for (int k = 0; k < 50; ++k) {
    worst = std::max(worst, annihilation_check(sample_interior_point(2, rng, 0.05), spin, spin.constraints).right);
  }
  return {worst < 1e-10, "max right residual " + num(worst) + " (tol 1e-10)"};
}

CMat random_hermitian(Index n, std::mt19937_64& rng) {
  CMat a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
  return 0.5 * (a + a.adjoint());
}

Outcome criterion_7() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (Index n : {Index{2}, Index{4}}) {
    const ActionAngleChart chart(n);
    for (int k = 0; k < 50; ++k) {
      ConstraintSet cs;
      for (int i = 0; i < 3; ++i) cs.push_back(Constraint::observable("A" + std::to_string(i), chart, random_hermitian(n, rng)));
      worst = std::max(worst, gram_covariance_check(cs, sample_interior_point(n, rng), chart));
    }
  }
  return {worst < 1e-10, "max |M - covariance| " + num(worst) + " over 100 states (tol 1e-10)"};
}

Outcome criterion_8() {
  const auto sys = two_qubit_product_system(fixtures::example_energies());
  double worst = 0.0;
  bool plus = true;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const TauAnalysis t = tau_analysis(product_surface_sample(seed), sys, sys.constraints);
    worst = std::max(worst, t.pure_block_norm / max_abs(t.tau));
    plus = plus && t.sign == TauSign::plus;
  }
  const TauAnalysis same = tau_analysis(product_surface_sample(1), sys, {sys.constraints[0], sys.constraints[0]});
  const double zero = max_abs(same.tau);
  return {worst < 1e-8 && plus && zero == 0.0,
          "max relative pure-block norm " + num(worst) + " (tol 1e-08), A=B gives |tau| = " + num(zero)};
}

Outcome criterion_9() {
  const auto start = Clock::now();
  std::mt19937_64 rng(99);
  double algebraic = 0.0, nijenhuis = 0.0;
  for (Index n : {Index{2}, Index{3}, Index{4}}) {
    const ActionAngleChart chart(n);
    for (int k = 0; k < 50; ++k) {
      const ChartPoint x = sample_interior_point(n, rng, 0.05);
      const PointGeometry geo = geometry_at(x, chart);
      algebraic = std::max({algebraic, compatibility_residuals(geo).max(), canonical_omega_residual(geo)});
      nijenhuis = std::max(nijenhuis, nijenhuis_residual(x, chart, 1e-5));
    }
  }
  const double elapsed = seconds_since(start);
  return {algebraic < 1e-8 && nijenhuis < 1e-4 && elapsed < 10.0,
          "algebraic residual " + num(algebraic) + " (tol 1e-08), Nijenhuis " + num(nijenhuis) + " (tol 1e-04), runtime " +
              num(elapsed) + " s (limit 10 s)"};
}

Outcome criterion_10() {
  const auto sys = diagonal_system(4, fixtures::example_energies());
  const double coarse = endpoint_error(sys, unconstrained_start(), 2 * kPi, 1e-3);
  const double fine = endpoint_error(sys, unconstrained_start(), 2 * kPi, 5e-4);
  const double ratio = coarse / fine;
  return {ratio >= 12.0 && ratio <= 20.0,
          "endpoint error " + num(coarse) + " at dt=1e-3, " + num(fine) + " at dt=5e-4, ratio " + num(ratio) +
              " (required [12, 20])"};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list = {
      {"unconstrained flow matches exact evolution", criterion_1},
      {"product-state equations of motion", criterion_2},
      {"product-state metric, inverse metric, complex structure", criterion_3},
      {"spin equations of motion on the angular grid", criterion_4},
      {"equivalence verdicts", criterion_5},
      {"right annihilation identity", criterion_6},
      {"Gram matrix equals covariance", criterion_7},
      {"tau type structure", criterion_8},
      {"geometry invariant suite", criterion_9},
      {"RK4 convergence ratio", criterion_10},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc == 3 && std::string(argv[1]) == "--criterion") {
    only = std::atoi(argv[2]);
    if (only < 1 || only > static_cast<int>(criteria().size())) {
      std::fprintf(stderr, "criterion must be 1..%zu\n", criteria().size());
      return 2;
    }
  } else if (argc != 1) {
    std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
    return 2;
  }
  bool all_pass = true;
  for (std::size_t i = 0; i < criteria().size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria()[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all_pass = all_pass && o.pass;
    std::printf("criterion %zu %s: %s; %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria()[i].first.c_str(), o.detail.c_str());
  }
  return all_pass ? 0 : 1;
}
