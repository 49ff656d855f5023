// Command-line front end: one subcommand per experiment kind.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "breather/config.hpp"
#include "breather/error.hpp"
#include "breather/runner.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

std::optional<std::size_t> threads_from_env() {
  const char* raw = std::getenv("BREATHER_LAB_THREADS");
  if (!raw || !*raw) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long value = std::stoul(raw, &used);
    if (used != std::string(raw).size() || value == 0) throw std::invalid_argument(raw);
    return value;
  } catch (const std::exception&) {
    throw breather::ConfigError(std::string("BREATHER_LAB_THREADS: not a positive integer: ") + raw);
  }
}

int run(breather::ExperimentKind kind, const Overrides& o) {
  try {
    breather::ExperimentConfig config = breather::load_config(o.config_path);
    if (config.experiment.kind && *config.experiment.kind != kind)
      throw breather::ConfigError(o.config_path + ": experiment.kind: file says \"" +
                                  std::string(to_string(*config.experiment.kind)) + "\" but the subcommand is \"" +
                                  std::string(to_string(kind)) + "\"");
    config.experiment.kind = kind;
    if (o.out_dir) config.run.out_dir = *o.out_dir;
    if (o.seed) config.run.master_seed = *o.seed;
    // Precedence: --threads, then the config file, then the environment.
    if (o.threads) config.run.threads = *o.threads;
    else if (!config.run.threads) config.run.threads = threads_from_env();
    config.validate();
    return breather::run_experiment_status(config, std::cerr);
  } catch (const breather::ConfigError& err) {
    std::cerr << "configuration error: " << err.what() << "\n";
    return breather::kExitConfigError;
  } catch (const breather::DomainError& err) {
    std::cerr << "configuration error: " << err.what() << "\n";
    return breather::kExitConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for random breather Schroedinger operators", "breather-lab"};
  app.set_version_flag("--version", std::string(breather::software_version()));
  app.require_subcommand(1);

  Overrides overrides;
  std::optional<breather::ExperimentKind> chosen;
  for (const char* name : {"spectrum", "ucp", "lifting", "ssf", "wegner", "ids"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", overrides.config_path, "TOML configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", overrides.out_dir, "output directory (overrides run.out_dir)");
    sub->add_option("--seed", overrides.seed, "master seed (overrides run.master_seed)");
    sub->add_option("--threads", overrides.threads, "worker threads (overrides run.threads)")
        ->check(CLI::PositiveNumber);
    sub->callback([&chosen, name] { chosen = breather::experiment_kind_from_string(name); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : breather::kExitConfigError;
  }
  return run(*chosen, overrides);
}
