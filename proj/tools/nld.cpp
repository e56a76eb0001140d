// Command-line front end: nld <command> --config <path> [--out dir] [--seed u64] [--threads k]

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nld/cli/config.hpp"
#include "nld/cli/dispatch.hpp"

int main(int argc, char** argv) {
  using namespace nld::cli;
  CLI::App app{"Nonlocal dispersal spectral and R0 solver"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;

  for (const auto& name : commands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " command");
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--threads", threads, "sweep worker count (overrides the config)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const bool seed_given = app.get_subcommands().front()->count("--seed") > 0;

  RunConfig cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    write_error_record(out_dir.empty() ? "." : out_dir, command, "error", e.what(), "", seed);
    return kExitError;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed_given) cfg.seed = seed;
  if (threads > 0) cfg.threads = threads;
  return dispatch(command, cfg);
}
