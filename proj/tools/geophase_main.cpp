#include <CLI11.hpp>
#include <iostream>

#include "geophase/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"geophase: base-controlled nonholonomic simulation and reconstruction phases"};
  app.require_subcommand(1);

  std::string config, out, format = "csv";
  unsigned seed = 0;

  auto* sim = app.add_subcommand("simulate", "integrate a configured run and write the trajectory");
  sim->add_option("--config", config, "run configuration (JSON)")->required();
  sim->add_option("--out", out, "output path")->required();
  sim->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* ph = app.add_subcommand("phases", "run a phase pipeline and write the report");
  ph->add_option("--config", config, "run configuration (JSON)")->required();
  ph->add_option("--out", out, "output path")->required();

  auto* val = app.add_subcommand("validate", "run the invariant and acceptance suite");
  val->add_option("--seed", seed, "seed for the randomized checks");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) return geophase::cmd_simulate(config, out, format, std::cout);
  if (ph->parsed()) return geophase::cmd_phases(config, out, std::cout);
  return geophase::cmd_validate(seed, std::cout);
}
