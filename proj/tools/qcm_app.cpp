#include "qcm_app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qcm/qcm.hpp"

namespace qcm::app {
namespace {

using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vec read_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(what + " must be an array of numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

Mat read_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a nonempty array of rows");
  const auto rows = static_cast<Index>(j.size());
  Mat m(rows, rows);
  for (Index r = 0; r < rows; ++r) {
    const Vec row = read_vector(j[static_cast<std::size_t>(r)], what);
    if (row.size() != rows) throw ConfigError(what + " must be square");
    m.row(r) = row.transpose();
  }
  return m;
}

double number(const json& obj, const char* key, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(std::string("missing numeric field \"") + key + "\"");
  }
  if (!obj[key].is_number()) throw ConfigError(std::string("field \"") + key + "\" must be a number");
  return obj[key].get<double>();
}

// Constraint entries for the "diagonal" system:
//   {"type": "observable", "name": ..., "matrix": [[..]], "matrix_imag": [[..]]}
//   {"type": "action", "index": k}                Φ = p_k (1-based)
//   {"type": "linear", "coefficients": [..], "offset": c}   Φ = c·x + offset
Constraint read_constraint(const json& j, const ActionAngleChart& chart, std::size_t position) {
  const std::string type = j.value("type", "");
  const std::string name = j.value("name", type + "_" + std::to_string(position + 1));
  if (type == "observable") {
    if (!j.contains("matrix")) throw ConfigError("observable constraint needs \"matrix\"");
    CMat op = read_matrix(j["matrix"], "matrix").cast<Complex>();
    if (j.contains("matrix_imag")) {
      const Mat im = read_matrix(j["matrix_imag"], "matrix_imag");
      if (im.rows() != op.rows()) throw ConfigError("matrix_imag must match matrix");
      op += Complex(0.0, 1.0) * im.cast<Complex>();
    }
    if (op.rows() != chart.levels()) throw ConfigError("observable dimension does not match the system");
    return Constraint::observable(name, chart, op);
  }
  if (type == "action") {
    const int k = j.value("index", 0);
    if (k < 1 || k > chart.pairs()) throw ConfigError("action constraint index out of range");
    const Index nu = k - 1;
    const Index m = chart.pairs();
    return Constraint::algebraic(
        name, [nu](const ChartPoint& x) { return x.p(nu); },
        [nu, m](const ChartPoint&) {
          Vec g = Vec::Zero(2 * m);
          g(m + nu) = 1.0;
          return g;
        });
  }
  if (type == "linear") {
    const Vec c = read_vector(j.value("coefficients", json::array()), "coefficients");
    if (c.size() != chart.dimension()) throw ConfigError("linear constraint needs 2(n-1) coefficients");
    const double offset = number(j, "offset", 0.0);
    return Constraint::algebraic(
        name, [c, offset](const ChartPoint& x) { return c.dot(x.coordinates()) + offset; },
        [c](const ChartPoint&) { return c; });
  }
  throw ConfigError("unknown constraint type \"" + type + "\"");
}

SystemDefinition read_system(const json& cfg) {
  if (!cfg.contains("system")) throw ConfigError("missing \"system\"");
  const json spec = cfg["system"].is_string() ? json{{"name", cfg["system"]}} : cfg["system"];
  if (!spec.is_object()) throw ConfigError("\"system\" must be a name or an object");
  const std::string name = spec.value("name", "");
  if (name == "spin-half-sx") return single_spin_conserved_sx();
  if (name == "two-qubit-product") {
    if (!spec.contains("energies")) throw ConfigError("two-qubit-product needs \"energies\" (4 values)");
    const Vec e = read_vector(spec["energies"], "energies");
    if (e.size() != 4) throw ConfigError("two-qubit-product needs exactly 4 energies");
    return two_qubit_product_system(e);
  }
  if (name == "diagonal") {
    if (!spec.contains("energies")) throw ConfigError("diagonal needs \"energies\"");
    const Vec e = read_vector(spec["energies"], "energies");
    if (e.size() < 2) throw ConfigError("diagonal needs at least two energies");
    const int ref = spec.value("reference_level", -1);
    if (ref >= e.size()) throw ConfigError("reference_level out of range");
    SystemDefinition sys = diagonal_system(e.size(), e, {}, ref);
    const json list = spec.value("constraints", json::array());
    if (!list.is_array()) throw ConfigError("\"constraints\" must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) sys.constraints.push_back(read_constraint(list[i], sys.chart, i));
    return sys;
  }
  throw ConfigError("unknown system \"" + name + "\" (expected two-qubit-product, spin-half-sx or diagonal)");
}

// {"q": [..], "p": [..]} or, for two-level systems, {"theta": .., "phi": ..}.
ChartPoint read_point(const json& j, const SystemDefinition& sys) {
  if (!j.is_object()) throw ConfigError("a point must be an object");
  ChartPoint x;
  if (j.contains("theta") || j.contains("phi")) {
    if (sys.levels() != 2) throw ConfigError("angular points need a two-level system");
    try {
      x = from_angular({number(j, "theta"), number(j, "phi")});
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  } else {
    const Vec q = read_vector(j.value("q", json()), "q");
    const Vec p = read_vector(j.value("p", json()), "p");
    if (q.size() != sys.chart.pairs() || p.size() != sys.chart.pairs()) {
      throw ConfigError("point needs " + std::to_string(sys.chart.pairs()) + " q and p values");
    }
    x = ChartPoint(q, p);
  }
  if (!x.in_interior()) throw ConfigError("point lies outside the chart interior");
  return x;
}

// Axis: {"values": [..]} or {"start": a, "step": h, "count": k}.
std::vector<double> read_axis(const json& grid, const char* key) {
  if (!grid.contains(key)) throw ConfigError(std::string("grid needs axis \"") + key + "\"");
  const json& a = grid[key];
  std::vector<double> values;
  if (a.contains("values")) {
    const Vec v = read_vector(a["values"], key);
    values.assign(v.data(), v.data() + v.size());
  } else {
    const double start = number(a, "start");
    const double step = number(a, "step", 0.0);
    const int count = a.value("count", 0);
    for (int k = 0; k < count; ++k) values.push_back(start + k * step);
  }
  if (values.empty()) throw ConfigError(std::string("grid axis \"") + key + "\" is empty");
  return values;
}

struct Settings {
  std::string command;
  std::string config_path;
  std::optional<double> t_end;
  std::optional<double> dt;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  bool no_projection = false;
};

struct Context {
  json cfg;
  SystemDefinition system;
  std::uint64_t seed = 0;
  std::string output;
};

void emit(const Context& ctx, const std::string& text, std::ostream& out) {
  if (ctx.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(ctx.output, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file " + ctx.output);
  f << text;
}

int cmd_simulate(const Context& ctx, const Settings& s, std::ostream& out, std::ostream& err) {
  const json& cfg = ctx.cfg;
  const double t_end = s.t_end ? *s.t_end : number(cfg, "t_end");
  const double dt = s.dt ? *s.dt : number(cfg, "dt");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
  if (!cfg.contains("initial_point")) throw ConfigError("simulate needs \"initial_point\"");
  const ChartPoint x0 = read_point(cfg["initial_point"], ctx.system);

  IntegrationOptions opt;
  opt.projection = cfg.value("projection", true) && !s.no_projection;
  const Trajectory traj = integrate(ctx.system, x0, t_end, dt, opt);

  const Index m = ctx.system.chart.pairs();
  std::ostringstream csv;
  csv << 't';
  for (Index nu = 1; nu <= m; ++nu) csv << ",q_" << nu;
  for (Index nu = 1; nu <= m; ++nu) csv << ",p_" << nu;
  for (std::size_t i = 1; i <= ctx.system.constraints.size(); ++i) csv << ",phi_" << i;
  csv << ",H,exit_flag\n";
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const TrajectorySample& row = traj.samples[k];
    const ChartPoint w = row.point.wrapped();
    csv << fmt(row.t);
    for (Index a = 0; a < w.dimension(); ++a) csv << ',' << fmt(w.coordinates()(a));
    for (Index i = 0; i < row.constraint_values.size(); ++i) csv << ',' << fmt(row.constraint_values(i));
    const bool last = k + 1 == traj.samples.size();
    csv << ',' << fmt(row.energy) << ',' << to_string(last ? traj.exit : ExitFlag::none) << '\n';
  }
  emit(ctx, csv.str(), out);
  if (traj.truncated()) {
    err << "trajectory truncated (" << to_string(traj.exit) << "): " << traj.diagnostic << '\n';
    return kTruncated;
  }
  return kSuccess;
}

int cmd_field(const Context& ctx, std::ostream& out) {
  const SystemDefinition& sys = ctx.system;
  if (sys.levels() != 2) throw ConfigError("field scans need a two-level system");
  if (!ctx.cfg.contains("grid")) throw ConfigError("field needs \"grid\"");
  const json& grid = ctx.cfg["grid"];
  const bool angular = grid.value("coordinates", "angular") == "angular";
  const auto first = read_axis(grid, angular ? "theta" : "q");
  const auto second = read_axis(grid, angular ? "phi" : "p");
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::ostringstream csv;
  csv << (angular ? "theta,phi,theta_dot,phi_dot,flag\n" : "q,p,q_dot,p_dot,flag\n");
  for (double a : first) {
    for (double b : second) {
      ChartPoint x;
      if (angular) {
        if (!(a > 0.0 && a < kPi)) throw ConfigError("grid theta must lie in (0, pi)");
        x = from_angular({a, b});
      } else {
        if (!(b > 0.0 && b < 1.0)) throw ConfigError("grid p must lie in (0, 1)");
        x = ChartPoint(Vec::Constant(1, a), Vec::Constant(1, b));
      }
      double u = nan, v = nan;
      const char* flag = "ok";
      if (sys.distance_to_singular(x) < sys.singular_radius) {
        flag = "singular";
      } else {
        try {
          Vec f = constrained_field(x, sys);
          if (angular) f = pushforward_to_angular(x, f);
          u = f(0);
          v = f(1);
        } catch (const SingularGramError&) {
          flag = "singular";
        }
      }
      csv << fmt(a) << ',' << fmt(b) << ',' << fmt(u) << ',' << fmt(v) << ',' << flag << '\n';
    }
  }
  emit(ctx, csv.str(), out);
  return kSuccess;
}

std::vector<ChartPoint> check_points(const Context& ctx) {
  std::vector<ChartPoint> points;
  const json& cfg = ctx.cfg;
  if (cfg.contains("points")) {
    if (!cfg["points"].is_array()) throw ConfigError("\"points\" must be an array");
    for (const json& j : cfg["points"]) points.push_back(read_point(j, ctx.system));
    return points;
  }
  const int count = cfg.value("samples", 10);
  if (count < 1) throw ConfigError("\"samples\" must be positive");
  std::mt19937_64 rng(ctx.seed);
  for (int k = 0; k < count; ++k) {
    if (ctx.system.name == "two-qubit-product") {
      points.push_back(product_surface_sample(rng()));
    } else {
      points.push_back(sample_interior_point(ctx.system.levels(), rng, 0.05));
    }
  }
  return points;
}

json point_json(const ChartPoint& x) {
  const ChartPoint w = x.wrapped();
  json q = json::array(), p = json::array();
  for (Index nu = 0; nu < w.pairs(); ++nu) {
    q.push_back(w.q(nu));
    p.push_back(w.p(nu));
  }
  return {{"q", q}, {"p", p}};
}

int cmd_check(const Context& ctx, std::ostream& out) {
  json entries = json::array();
  int excluded = 0;
  int equivalent = 0;
  for (const ChartPoint& x : check_points(ctx)) {
    json e = {{"point", point_json(x)}};
    try {
      const EquivalenceReport r = equivalence_report(x, ctx.system);
      e["status"] = "ok";
      e["j_invariance_residual"] = r.j_invariance_residual;
      e["right_annihilation_residual"] = r.right_annihilation_residual;
      e["left_annihilation_residual"] = r.left_annihilation_residual;
      e["antisymmetry_residual"] = r.antisymmetry_residual;
      if (r.tau_sign) e["tau_sign"] = to_string(*r.tau_sign);
      e["verdict"] = to_string(r.verdict);
      if (r.verdict == Verdict::equivalent) ++equivalent;
    } catch (const SingularGramError& ex) {
      e["status"] = "singular";
      e["message"] = ex.what();
      ++excluded;
    }
    entries.push_back(std::move(e));
  }
  const int evaluated = static_cast<int>(entries.size()) - excluded;
  json report = {{"system", ctx.system.name},
                 {"constraints", ctx.system.constraints.size()},
                 {"points", entries},
                 {"evaluated", evaluated},
                 {"excluded", excluded},
                 {"tolerance", kEquivalenceTolerance}};
  if (evaluated == 0) {
    report["verdict"] = "undetermined";
  } else {
    report["verdict"] = to_string(equivalent == evaluated ? Verdict::equivalent : Verdict::not_equivalent);
  }
  emit(ctx, report.dump(2) + "\n", out);
  return kSuccess;
}

int cmd_validate(const Context& ctx, std::ostream& out) {
  const SystemDefinition& sys = ctx.system;
  const int count = ctx.cfg.value("samples", 50);
  if (count < 1) throw ConfigError("\"samples\" must be positive");
  std::mt19937_64 rng(ctx.seed);

  bool observables = !sys.constraints.empty();
  for (const Constraint& c : sys.constraints) observables = observables && c.observable_matrix().has_value();

  std::vector<std::pair<std::string, double>> tolerances = {
      {"j_squared", 1e-8},       {"hermiticity", 1e-8},     {"omega_antisymmetry", 1e-8},
      {"omega_inverse", 1e-8},   {"big_omega_inverse", 1e-8}, {"kahler_form_invariance", 1e-8},
      {"canonical_omega", 1e-8}, {"nijenhuis", 1e-4}};
  if (observables) tolerances.emplace_back("gram_covariance", 1e-8);
  std::vector<double> worst(tolerances.size(), 0.0);

  for (int k = 0; k < count; ++k) {
    const ChartPoint x = sample_interior_point(sys.levels(), rng, 0.05);
    const PointGeometry geo = geometry_at(x, sys.chart);
    const CompatibilityResiduals r = compatibility_residuals(geo);
    const double values[] = {r.j_squared,
                             r.hermiticity,
                             r.omega_antisymmetry,
                             r.omega_inverse,
                             r.big_omega_inverse,
                             r.kahler_form_invariance,
                             canonical_omega_residual(geo),
                             nijenhuis_residual(x, sys.chart, 1e-5),
                             observables ? gram_covariance_check(sys.constraints, x, sys.chart) : 0.0};
    for (std::size_t i = 0; i < worst.size(); ++i) worst[i] = std::max(worst[i], values[i]);
  }

  json list = json::array();
  bool pass = true;
  for (std::size_t i = 0; i < tolerances.size(); ++i) {
    const bool ok = worst[i] < tolerances[i].second;
    pass = pass && ok;
    list.push_back({{"name", tolerances[i].first},
                    {"max_residual", worst[i]},
                    {"tolerance", tolerances[i].second},
                    {"pass", ok}});
  }
  const json report = {{"system", sys.name}, {"samples", count}, {"seed", ctx.seed},
                       {"invariants", list}, {"pass", pass}};
  emit(ctx, report.dump(2) + "\n", out);
  return pass ? kSuccess : kInvariantFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Constrained quantum dynamics on projective Hilbert space"};
  app.add_option("command", s.command, "simulate | field | check | validate")
      ->required()
      ->check(CLI::IsMember({"simulate", "field", "check", "validate"}));
  app.add_option("config", s.config_path, "JSON run configuration")->required();
  app.add_option("--t-end", s.t_end, "integration end time");
  app.add_option("--dt", s.dt, "RK4 step");
  app.add_option("--output", s.output, "output file (default: stdout)");
  app.add_option("--seed", s.seed, "sampling seed");
  app.add_flag("--no-projection", s.no_projection, "skip the Newton projection after each step");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    Context ctx;
    std::ifstream in(s.config_path);
    if (!in) throw ConfigError("cannot read config " + s.config_path);
    try {
      ctx.cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!ctx.cfg.is_object()) throw ConfigError("config must be a JSON object");
    ctx.system = read_system(ctx.cfg);
    ctx.seed = s.seed ? *s.seed : ctx.cfg.value("seed", std::uint64_t{0});
    ctx.output = s.output ? *s.output : ctx.cfg.value("output", std::string());

    if (s.command == "simulate") return cmd_simulate(ctx, s, out, err);
    if (s.command == "field") return cmd_field(ctx, out);
    if (s.command == "check") return cmd_check(ctx, out);
    return cmd_validate(ctx, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kConfigError;
}

}  // namespace qcm::app
