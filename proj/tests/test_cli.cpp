#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "geophase/cli.hpp"

using nlohmann::json;

namespace {

std::string tmp_path(const std::string& name) { return "/tmp/geophase_cli_" + name; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string disk_config() {
  json j;
  j["system"] = {{"name", "vertical_disk"},
                 {"params", {{"m", 1.0}, {"I", 1.0}, {"J_roll", 1.0}, {"R", 1.0}}}};
  j["base_curve"] = {{"family", "linear"}, {"b0", {0.0}}, {"rate", {1.0}}};
  j["gauge"] = {{"tag", "nonholonomic"}};
  j["initial"] = {{"xi", {0.5, 0.0, 0.5}}};
  j["grid"] = {{"t1", 0.0}, {"t2", 1.0}, {"h", 1e-3}};
  j["seed"] = 3;
  return j.dump(2);
}

}  // namespace

TEST_CASE("simulate: disk run exits 0 and theta is linear in t") {
  const std::string cfg = tmp_path("disk.json"), out = tmp_path("disk.csv");
  write_text(cfg, disk_config());
  std::ostringstream log;
  CHECK(geophase::cmd_simulate(cfg, out, "csv", log) == 0);
  CHECK(log.str().find("max residuals") != std::string::npos);

  std::ifstream f(out);
  std::string line;
  std::getline(f, line);
  CHECK(line.rfind("# version", 0) == 0);
  std::getline(f, line);
  CHECK(line.rfind("# config_hash", 0) == 0);
  std::getline(f, line);
  CHECK(line.rfind("# seed 3", 0) == 0);
  std::getline(f, line);  // column header
  CHECK(line.rfind("t,g0,g1,g2,", 0) == 0);
  // theta column (g2, fourth field) must be 0.5 * t
  double worst = 0;
  while (std::getline(f, line)) {
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    worst = std::max(worst, std::fabs(row[3] - 0.5 * row[0]));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("simulate: byte-identical outputs for identical config and seed") {
  const std::string cfg = tmp_path("det.json");
  write_text(cfg, disk_config());
  std::ostringstream log;
  CHECK(geophase::cmd_simulate(cfg, tmp_path("det1.csv"), "csv", log) == 0);
  CHECK(geophase::cmd_simulate(cfg, tmp_path("det2.csv"), "csv", log) == 0);
  CHECK(read_text(tmp_path("det1.csv")) == read_text(tmp_path("det2.csv")));
  CHECK(geophase::cmd_simulate(cfg, tmp_path("det1.json"), "json", log) == 0);
  CHECK(geophase::cmd_simulate(cfg, tmp_path("det2.json"), "json", log) == 0);
  CHECK(read_text(tmp_path("det1.json")) == read_text(tmp_path("det2.json")));
}

TEST_CASE("simulate: stationary base gives a constant-g trajectory") {
  json j = json::parse(disk_config());
  j["base_curve"] = {{"family", "static"}, {"b0", {0.4}}};
  j["initial"] = {{"xi", {0.0, 0.0, 0.0}}};
  const std::string cfg = tmp_path("static.json");
  write_text(cfg, j.dump());
  std::ostringstream log;
  CHECK(geophase::cmd_simulate(cfg, tmp_path("static.json.out"), "json", log) == 0);
  const json out = json::parse(read_text(tmp_path("static.json.out")));
  const auto& g = out.at("g");
  for (const auto& row : g)
    for (size_t k = 0; k < row.size(); ++k)
      CHECK(std::fabs(row[k].get<double>() - g[0][k].get<double>()) < 1e-13);
}

TEST_CASE("simulate: malformed config exits 2 with a line-anchored message") {
  const std::string cfg = tmp_path("broken.json");
  write_text(cfg, "{\n  \"system\": {\n    oops\n}\n");
  std::ostringstream log;
  CHECK(geophase::cmd_simulate(cfg, tmp_path("broken.out"), "csv", log) == 2);
  CHECK(log.str().find("line 3") != std::string::npos);

  std::ostringstream log2;
  CHECK(geophase::cmd_simulate(tmp_path("missing-file.json"), tmp_path("x"), "csv", log2) == 2);
}

TEST_CASE("simulate: custom system with polynomial metric and constant affine rows") {
  json j;
  j["system"] = {{"name", "custom"},
                 {"base_dim", 1},
                 {"group", {{"kind", "abelian"}, {"p", 1}, {"q", 0}}},
                 {"metric",
                  {{"k_BB", {{1.0}}},
                   {"k_Bg", {{0.0}}},
                   {"k_gg",
                    {{json::array({{{"coef", 2.0}, {"powers", {0}}},
                                   {{"coef", 0.5}, {"powers", {2}}}})}}}}},
                 {"constraints", {{"A", {{0.0}}}, {"W", {{1.0}}}, {"gamma", {0.3}}}}};
  j["base_curve"] = {{"family", "linear"}, {"b0", {0.1}}, {"rate", {0.5}}};
  j["gauge"] = {{"tag", "affine"}};
  j["initial"] = {{"xi", {0.0}}};
  j["grid"] = {{"t1", 0.0}, {"t2", 1.0}, {"h", 1e-3}};
  const std::string cfg = tmp_path("custom.json");
  write_text(cfg, j.dump());
  std::ostringstream log;
  CHECK(geophase::cmd_simulate(cfg, tmp_path("custom.out"), "json", log) == 0);
}

TEST_CASE("phases: dipole closed loop report") {
  json j;
  j["system"] = {{"name", "magnetic_dipole"},
                 {"params",
                  {{"I", 2.0},
                   {"gamma_gyro", -0.5},
                   {"Bx", 0.0},
                   {"By", 0.0},
                   {"Bz", 1.0},
                   {"L0x", std::sqrt(3.0) / 2.0},
                   {"L0y", 0.0},
                   {"L0z", 1.5}}}};
  const double T = 4 * std::numbers::pi;
  j["grid"] = {{"t1", 0.0}, {"t2", T}, {"h", T / 12566}};
  const std::string cfg = tmp_path("dipole.json"), out = tmp_path("dipole_report.json");
  write_text(cfg, j.dump());
  std::ostringstream log;
  CHECK(geophase::cmd_phases(cfg, out, log) == 0);
  const json rep = json::parse(read_text(out));
  for (const char* key :
       {"mu", "theta_dyn", "theta_geom", "solid_angle", "g_NH", "g_MP", "factor_residual_max"})
    CHECK(rep.contains(key));
  const double wrapped = std::remainder(
      rep["theta_geom"].get<double>() + rep["solid_angle"].get<double>(), 2 * std::numbers::pi);
  CHECK(std::fabs(wrapped) < 1e-4);
  CHECK(rep["factor_residual_max"].get<double>() < 1e-8);
}

TEST_CASE("phases: two-ball horizontal-symmetry report carries the conserved momentum") {
  json j;
  j["system"] = {{"name", "two_ball"},
                 {"params", {{"m1", 10.0}, {"m2", 1.0}, {"r", 1.0}, {"a", 0.2}}}};
  j["base_curve"] = {{"family", "circle"}, {"rho", 0.25}, {"center", {0.05, -0.05}},
                     {"period", 1.0}, {"phase", 0.0}};
  j["gauge"] = {{"tag", "nonholonomic"}};
  j["initial"] = {{"xi", {0.3, -0.1, 0.2, 0.0, 0.0, 0.0}}};
  j["grid"] = {{"t1", 0.0}, {"t2", 1.0}, {"h", 1e-3}};
  const std::string cfg = tmp_path("twoball.json"), out = tmp_path("twoball_report.json");
  write_text(cfg, j.dump());
  std::ostringstream log;
  CHECK(geophase::cmd_phases(cfg, out, log) == 0);
  const json rep = json::parse(read_text(out));
  CHECK(rep["extras"].contains("conserved_ihJ_norm"));
  CHECK(rep["extras"]["conservation_drift"].get<double>() < 1e-6);
  CHECK(rep["extras"]["phase_relation_residual"].get<double>() < 1e-5);
}

TEST_CASE("phases: relative equilibrium has zero geometric phase") {
  json j;
  j["system"] = {{"name", "free_body"}, {"params", {{"I1", 1.0}, {"I2", 2.0}, {"I3", 3.0}}}};
  j["mode"] = "conserved_momentum";
  j["mu"] = {0.0, 0.0, 1.5};
  j["gauge"] = {{"tag", "trivial"}};
  j["grid"] = {{"t1", 0.0}, {"t2", 2.0}, {"h", 1e-3}};
  const std::string cfg = tmp_path("releq.json"), out = tmp_path("releq_report.json");
  write_text(cfg, j.dump());
  std::ostringstream log;
  CHECK(geophase::cmd_phases(cfg, out, log) == 0);
  const json rep = json::parse(read_text(out));
  CHECK(std::fabs(rep["theta_geom"].get<double>()) < 1e-8);
}

TEST_CASE("phases: incompatible scenario exits 5 with an explanation") {
  json j;
  j["system"] = {{"name", "vertical_disk"}};
  j["base_curve"] = {{"family", "linear"}, {"b0", {0.0}}, {"rate", {1.0}}};
  j["grid"] = {{"t1", 0.0}, {"t2", 1.0}, {"h", 1e-3}};
  const std::string cfg = tmp_path("incompat.json");
  write_text(cfg, j.dump());
  std::ostringstream log;
  CHECK(geophase::cmd_phases(cfg, tmp_path("incompat.out"), log) == 5);
  CHECK(log.str().find("not compatible") != std::string::npos);
}

TEST_CASE("simulate: residual tolerance breach exits 4") {
  json j = json::parse(disk_config());
  j["tolerances"] = {{"constraint", 1e-18}, {"momentum", 1e-18}};
  const std::string cfg = tmp_path("breach.json");
  write_text(cfg, j.dump());
  std::ostringstream log;
  CHECK(geophase::cmd_simulate(cfg, tmp_path("breach.out"), "csv", log) == 4);
  CHECK(log.str().find("breached") != std::string::npos);
}

TEST_CASE("simulate: integration failure exits 3") {
  json j;
  j["system"] = {{"name", "two_ball"}};
  // base curve that leaves the two-ball chart
  j["base_curve"] = {{"family", "linear"}, {"b0", {0.0, 0.0}}, {"rate", {4.0, 0.0}}};
  j["grid"] = {{"t1", 0.0}, {"t2", 1.0}, {"h", 1e-2}};
  const std::string cfg = tmp_path("escape.json");
  write_text(cfg, j.dump());
  std::ostringstream log;
  CHECK(geophase::cmd_simulate(cfg, tmp_path("escape.out"), "csv", log) == 3);
}

TEST_CASE("simulate: sample-table base curve from CSV") {
  // t, phi columns with cubic Hermite interpolation
  std::ostringstream table;
  table << "# t,phi\n";
  for (int i = 0; i <= 1500; ++i) {
    const double t = i * 1e-3;
    table << t << "," << t + 0.1 * std::sin(t) << "\n";
  }
  write_text(tmp_path("base.csv"), table.str());
  json j = json::parse(disk_config());
  j["base_curve"] = {{"family", "samples"}, {"path", tmp_path("base.csv")}};
  j["initial"] = {{"xi", {0.5, 0.0, 0.5}}};  // phi(0)=0, so the rolling relation holds
  j["grid"] = {{"t1", 0.0}, {"t2", 1.0}, {"h", 1e-3}};
  // sampled curves carry interpolation error; keep the run but relax checks
  j["tolerances"] = {{"constraint", 1e-6}, {"momentum", 1e-4}};
  const std::string cfg = tmp_path("sampled.json");
  write_text(cfg, j.dump());
  std::ostringstream log;
  CHECK(geophase::cmd_simulate(cfg, tmp_path("sampled.out"), "csv", log) == 0);
}

TEST_CASE("validate: summary is deterministic for a fixed seed") {
  std::ostringstream a, b;
  // small deterministic sample: rerun and compare the full printed summary
  const int ra = geophase::cmd_validate(5, a);
  const int rb = geophase::cmd_validate(5, b);
  CHECK(ra == 0);
  CHECK(rb == 0);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("OK") != std::string::npos);
}
