#include "geophase/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "geophase/validation.hpp"

namespace geophase {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "geophase 1.0.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// FNV-1a over the raw config bytes; written into every output header.
std::string config_hash(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[19];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int line_of_offset(const std::string& text, size_t byte) {
  int line = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

Vec vec_of(const json& j) {
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

Mat mat_of(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(j[0].size());
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

// Metric block entry: either a number (constant) or a list of polynomial
// terms { "coef": c, "powers": [p...] } in the base coordinates.
double eval_entry(const json& e, const Vec& b) {
  if (e.is_number()) return e.get<double>();
  double v = 0;
  for (const auto& term : e) {
    double t = term.at("coef").get<double>();
    const auto& powers = term.at("powers");
    for (size_t i = 0; i < powers.size(); ++i)
      t *= std::pow(b(static_cast<int>(i)), powers[i].get<int>());
    v += t;
  }
  return v;
}

Mat eval_block(const json& block, const Vec& b) {
  const int rows = static_cast<int>(block.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(block[0].size());
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = eval_entry(block[r][c], b);
  return m;
}

LieGroupDescriptor group_of(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "so3") return LieGroupDescriptor::so3();
  if (kind == "abelian")
    return LieGroupDescriptor::abelian(j.at("p").get<int>(), j.at("q").get<int>());
  if (kind == "product") {
    std::vector<LieGroupDescriptor> fs;
    for (const auto& f : j.at("factors")) fs.push_back(group_of(f));
    return LieGroupDescriptor::product(fs);
  }
  throw ConfigError("unknown group kind: " + kind);
}

ExampleSystem system_of(const json& cfg) {
  const auto& sysj = cfg.at("system");
  const std::string name = sysj.at("name").get<std::string>();
  if (name != "custom") {
    std::map<std::string, double> params;
    if (sysj.contains("params"))
      for (const auto& [k, v] : sysj.at("params").items()) params[k] = v.get<double>();
    return make_system_by_name(name, params);
  }
  ExampleSystem ex;
  ex.sys.name = "custom";
  ex.sys.base_dim = sysj.at("base_dim").get<int>();
  ex.sys.group = group_of(sysj.at("group"));
  const json metric = sysj.at("metric");
  ex.sys.metric = [metric](const Vec& b) {
    MetricBlocks k;
    k.k_BB = eval_block(metric.at("k_BB"), b);
    k.k_Bg = eval_block(metric.at("k_Bg"), b);
    k.k_gg = eval_block(metric.at("k_gg"), b);
    return k;
  };
  if (sysj.contains("constraints")) {
    const json cj = sysj.at("constraints");
    const Mat A = mat_of(cj.at("A")), W = mat_of(cj.at("W"));
    ex.cons.m = static_cast<int>(W.rows());
    ex.cons.rows = [A, W](const Vec&) { return ConstraintRows{A, W}; };
    if (cj.contains("gamma")) {
      const Vec gamma = vec_of(cj.at("gamma"));
      ex.cons.affine = [gamma](const Vec&, double) { return gamma; };
    }
  } else {
    ex.cons.m = 0;
    ex.cons.rows = [dim = ex.sys.group.dim](const Vec&) {
      return ConstraintRows{Mat::Zero(0, 0), Mat::Zero(0, dim)};
    };
  }
  return ex;
}

BaseCurve base_curve_of(const json& cfg, int base_dim) {
  if (base_dim == 0)
    return BaseCurve::analytic([](double) { return Vec(); }, [](double) { return Vec(); });
  const auto& bj = cfg.at("base_curve");
  const std::string family = bj.at("family").get<std::string>();
  if (family == "static") {
    const Vec b0 = vec_of(bj.at("b0"));
    return BaseCurve::analytic([b0](double) { return b0; },
                               [n = b0.size()](double) { return Vec(Vec::Zero(n)); });
  }
  if (family == "linear") {
    const Vec b0 = vec_of(bj.at("b0")), rate = vec_of(bj.at("rate"));
    return BaseCurve::analytic([=](double t) { return Vec(b0 + t * rate); },
                               [=](double) { return rate; });
  }
  if (family == "circle") {
    const double rho = bj.at("rho").get<double>();
    const Vec center = vec_of(bj.at("center"));
    const double T = bj.value("period", 1.0), phase = bj.value("phase", 0.0);
    return BaseCurve::analytic(
        [=](double t) {
          Vec b = center;
          b(0) += rho * std::cos(2 * std::numbers::pi * t / T + phase);
          b(1) += rho * std::sin(2 * std::numbers::pi * t / T + phase);
          return b;
        },
        [=](double t) {
          Vec b = Vec::Zero(center.size());
          const double w = 2 * std::numbers::pi / T;
          b(0) = -rho * w * std::sin(w * t + phase);
          b(1) = rho * w * std::cos(w * t + phase);
          return b;
        });
  }
  if (family == "samples") {
    const std::string path = bj.at("path").get<std::string>();
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open base-curve sample file: " + path);
    std::vector<double> ts;
    std::vector<Vec> bs;
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      std::string cell;
      std::vector<double> row;
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
      if (row.size() < 2) throw ConfigError("base-curve sample rows need t plus coordinates");
      ts.push_back(row[0]);
      Vec b(row.size() - 1);
      for (size_t i = 1; i < row.size(); ++i) b(i - 1) = row[i];
      bs.push_back(b);
    }
    return BaseCurve::from_samples(ts, bs);
  }
  throw ConfigError("unknown base-curve family: " + family);
}

struct LoadedConfig {
  json j;
  ExampleSystem system;
  BaseCurve base;
  Grid grid;
  GroupElement g1;
  AlgebraVector xi1;
  unsigned seed = 0;
  double tol_constraint = 1e-8;
  double tol_momentum = 1e-6;
  std::string hash;
};

LoadedConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  LoadedConfig lc;
  try {
    lc.j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at line " + std::to_string(line_of_offset(text, e.byte)) +
                      ": " + e.what());
  }
  lc.hash = config_hash(text);
  try {
    lc.system = system_of(lc.j);
    lc.base = base_curve_of(lc.j, lc.system.sys.base_dim);
    const auto& gj = lc.j.at("grid");
    lc.grid = Grid{gj.at("t1").get<double>(), gj.at("t2").get<double>(), gj.at("h").get<double>()};
    if (lc.grid.h <= 0 || lc.grid.t2 <= lc.grid.t1)
      throw ConfigError("grid needs h > 0 and t2 > t1");
    const auto& G = lc.system.sys.group;
    lc.g1 = identity(G);
    lc.xi1 = AlgebraVector::zero(G);
    if (lc.j.contains("initial")) {
      const auto& ij = lc.j.at("initial");
      if (ij.contains("g")) lc.g1 = deserialize(G, vec_of(ij.at("g")));
      if (ij.contains("xi")) lc.xi1 = AlgebraVector(vec_of(ij.at("xi")));
    }
    lc.seed = lc.j.value("seed", 0u);
    if (lc.j.contains("tolerances")) {
      lc.tol_constraint = lc.j.at("tolerances").value("constraint", 1e-8);
      lc.tol_momentum = lc.j.at("tolerances").value("momentum", 1e-6);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  return lc;
}

GaugeCurve make_gauge(const LoadedConfig& lc) {
  std::string tag = "nonholonomic";
  AffineSelector sel;
  if (lc.j.contains("gauge")) {
    tag = lc.j.at("gauge").value("tag", "nonholonomic");
    if (lc.j.at("gauge").contains("selector_pins")) {
      sel.kind = AffineSelector::PinComponents;
      for (const auto& p : lc.j.at("gauge").at("selector_pins"))
        sel.pins.push_back({p[0].get<int>(), p[1].get<double>()});
    }
  }
  const BundleState q0{lc.base.position(lc.grid.t1), identity(lc.system.sys.group)};
  if (tag == "nonholonomic")
    return lift_nonholonomic(lc.system.sys, lc.system.cons, lc.base, q0, lc.grid);
  if (tag == "mechanical") return lift_mechanical(lc.system.sys, lc.base, q0, lc.grid);
  if (tag == "affine")
    return lift_affine(lc.system.sys, lc.system.cons, lc.base, q0, lc.grid, sel);
  if (tag == "trivial") return lift_trivial(lc.system.sys, lc.base, q0, lc.grid);
  throw ConfigError("unknown gauge tag: " + tag);
}

std::vector<std::pair<std::string, std::string>> header_of(const LoadedConfig& lc) {
  return {{"version", kVersion},
          {"config_hash", lc.hash},
          {"seed", std::to_string(lc.seed)}};
}

}  // namespace

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& format, std::ostream& log) {
  LoadedConfig lc;
  try {
    lc = load_config(config_path);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  }
  Trajectory traj;
  try {
    const GaugeCurve gauge = make_gauge(lc);
    const std::string mode = lc.j.value("mode", "simulate");
    if (mode == "conserved_momentum") {
      const Vec mu = vec_of(lc.j.at("mu"));
      SimOptions opts;
      opts.momentum_residual_tol = lc.tol_momentum;
      traj = solve_conserved_momentum(lc.system.sys, gauge, MomentumCovector(mu), lc.g1, opts);
    } else {
      traj = simulate(lc.system.sys, lc.system.cons, gauge, lc.g1, lc.xi1);
    }
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "integration error: " << e.what() << "\n";
    return 3;
  }

  const auto header = header_of(lc);
  if (format == "json") {
    write_trajectory_json(traj, out_path, header);
  } else {
    std::vector<std::string> lines;
    for (const auto& [k, v] : header) lines.push_back(k + " " + v);
    write_trajectory_csv(traj, out_path, lines);
  }
  log << "max residuals: constraint " << traj.max_res_constraint() << ", momentum "
      << traj.max_res_momentum() << "\n";
  if (traj.max_res_constraint() > lc.tol_constraint ||
      traj.max_res_momentum() > lc.tol_momentum) {
    log << "residual tolerance breached\n";
    return 4;
  }
  return 0;
}

int cmd_phases(const std::string& config_path, const std::string& out_path, std::ostream& log) {
  LoadedConfig lc;
  try {
    lc = load_config(config_path);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  }

  PhaseReport rep;
  try {
    const auto& G = lc.system.sys.group;
    if (lc.system.dipolar.has_value()) {
      const auto& spec = *lc.system.dipolar;
      const auto res = dipole_phase_pipeline(
          lc.system.sys, lc.base, spec.B_field, spec.gamma_gyro, spec.L0,
          {lc.base.position(lc.grid.t1), identity(G)}, lc.grid);
      rep.mu = spec.L0.coords;
      rep.theta_dyn = res.decomposition.theta_dyn.back();
      rep.theta_geom = res.decomposition.theta_geom;
      rep.solid_angle = res.solid_angle_value;
      rep.g_NH = serialize(G, identity(G));
      rep.g_MP = serialize(G, identity(G));
      rep.factor_residual_max = res.decomposition.max_factor_residual();
      rep.extras = {{"conservation_drift", res.conservation_drift},
                    {"loop_gap", res.loop_gap},
                    {"phase_formula_residual", res.phase_formula_residual},
                    {"theta_dyn_integral", res.theta_dyn_integral}};
    } else if (lc.j.value("mode", "") == "conserved_momentum") {
      const Vec mu = vec_of(lc.j.at("mu"));
      const GaugeCurve gauge = make_gauge(lc);
      const auto traj =
          solve_conserved_momentum(lc.system.sys, gauge, MomentumCovector(mu), lc.g1);
      const auto P =
          isotropy_projector(G, MomentumCovector(mu), Mat::Identity(G.dim, G.dim));
      const auto dec = reconstruct_phases(group_curve_of(traj), P, &traj.Pi);
      rep.mu = mu;
      rep.theta_dyn = dec.theta_dyn.back();
      rep.theta_geom = dec.theta_geom;
      const double gap = (traj.Pi.back() - traj.Pi.front()).norm();
      if (gap < 1e-6 * (1.0 + mu.norm()) && G.kind == GroupKind::SO3) {
        std::vector<Eigen::Vector3d> loop(traj.n_nodes());
        for (int i = 0; i < traj.n_nodes(); ++i) loop[i] = traj.Pi[i].head<3>();
        loop.back() = loop.front();
        rep.solid_angle = solid_angle(loop);
      }
      rep.g_NH = serialize(G, identity(G));
      rep.g_MP = serialize(G, identity(G));
      rep.factor_residual_max = dec.max_factor_residual();
      rep.extras = {{"Pi_loop_gap", gap}};
    } else if (!lc.system.horizontal_symmetry.empty()) {
      const GaugeCurve gauge = make_gauge(lc);
      const auto traj = simulate(lc.system.sys, lc.system.cons, gauge, lc.g1, lc.xi1);
      const auto hs = horizontal_symmetry_phases(lc.system.sys, lc.system.cons, gauge, traj,
                                                 lc.system.horizontal_symmetry);
      rep.mu = hs.mu_h;
      rep.theta_dyn = hs.decomposition.theta_dyn.back();
      rep.theta_geom = hs.decomposition.theta_geom;
      rep.solid_angle = 0.0;
      rep.g_NH = serialize(lc.system.sys.group, hs.g_NH_effective);
      // mechanical-phase factor from the closed-base holonomy report when available
      try {
        const auto hol = nonholonomic_holonomy(lc.system.sys, lc.system.cons, lc.base,
                                               {lc.base.position(lc.grid.t1), identity(G)},
                                               lc.grid);
        rep.g_MP = serialize(G, hol.g_MP);
      } catch (const PreconditionError&) {
        rep.g_MP = serialize(G, identity(G));
      }
      rep.factor_residual_max = hs.decomposition.max_factor_residual();
      rep.extras = {{"conservation_drift", hs.conservation_drift},
                    {"phase_relation_residual", hs.phase_relation_residual},
                    {"conserved_ihJ_norm", hs.mu_h.norm()}};
    } else {
      log << "error: scenario is not compatible with a phase pipeline (needs a dipolar system, "
             "mode=conserved_momentum, or a registered horizontal-symmetry subalgebra)\n";
      return 5;
    }
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "integration error: " << e.what() << "\n";
    return 3;
  }
  write_phase_report_json(rep, out_path, header_of(lc));
  return 0;
}

int cmd_validate(unsigned seed, std::ostream& log) {
  double override_tol = 0.0;
  if (const char* env = std::getenv("GEOPHASE_TOL")) override_tol = std::atof(env);
  const ValidationSummary summary = run_all_acceptance(seed, override_tol);
  char buf[64];
  for (const auto& c : summary.checks) {
    snprintf(buf, sizeof buf, "%.6e <= %.1e", c.value, c.threshold);
    log << (c.passed() ? "PASS " : "FAIL ") << c.name << " " << buf << "\n";
  }
  int failed = 0;
  for (const auto& c : summary.checks)
    if (!c.passed()) ++failed;
  log << (failed == 0 ? "OK" : "FAILED") << " " << summary.checks.size() - failed << "/"
      << summary.checks.size() << " checks passed (seed " << seed << ")\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace geophase
