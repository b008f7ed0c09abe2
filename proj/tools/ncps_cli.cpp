#include "ncps/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Simulation and condition checks for ordered particle systems with singular repulsion"};
  app.require_subcommand(1);

  ncps::CommandOptions opts;
  std::uint64_t seed = 0;

  const auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opts.config_path, "Run configuration file");
    if (needs_config) c->required();
    sub->add_option("--out", opts.out, "Output file (default: the config's output key, else stdout)");
  };

  auto* check = app.add_subcommand("check", "Check the non-collision conditions; exit 0 pass, 1 fail, 2 unknown");
  add_common(check, true);

  auto* run = app.add_subcommand("run", "Simulate one path and write a trajectory CSV");
  add_common(run, true);
  auto* run_seed = run->add_option("--seed", seed, "Override the config seed");

  auto* ens = app.add_subcommand("ensemble", "Simulate n_paths paths and write ensemble statistics as JSON");
  add_common(ens, true);
  auto* ens_seed = ens->add_option("--seed", seed, "Override the config seed");
  ens->add_option("--workers", opts.workers, "Worker threads (0 = all cores); results do not depend on it");

  auto* val = app.add_subcommand("validate", "Run the acceptance suite and write the scorecard JSON");
  val->add_option("--out", opts.out, "Scorecard file (default stdout)");
  val->add_option("--workers", opts.workers, "Worker threads (0 = all cores)");
  val->add_option("--only", opts.only, "Criterion ids to run")->check(CLI::Range(1, 10));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ncps::exit_codes::kConfigError;
  }
  if (run_seed->count() || ens_seed->count()) opts.seed = seed;

  if (check->parsed()) return ncps::cmd_check(opts, std::cout, std::cerr);
  if (run->parsed()) return ncps::cmd_run(opts, std::cout, std::cerr);
  if (ens->parsed()) return ncps::cmd_ensemble(opts, std::cout, std::cerr);
  return ncps::cmd_validate(opts, std::cout, std::cerr);
}
