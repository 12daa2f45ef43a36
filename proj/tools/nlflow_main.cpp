// Command-line front end: simulate, verify <check>, bounds, corpus list.
//
// Exit codes: 0 success, 1 failed check or other error, 2 configuration or
// usage error (including an unknown check), 3 simulation overflow, 4 domain
// error while evaluating bounds.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "nlflow/config.hpp"
#include "nlflow/errors.hpp"
#include "nlflow/experiment.hpp"

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitOverflow = 3;
constexpr int kExitDomain = 4;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Experiment configuration (INI)");
  cmd->add_option("--out", opts.out_dir, "Output directory (overrides NLFLOW_OUT and the config)");
  cmd->add_option("--seed", opts.seed, "Base seed (overrides the config)");
  cmd->add_option("--replications", opts.replications, "Monte Carlo replications");
}

nlflow::ExperimentConfig resolve(const CommonOptions& opts) {
  nlflow::ExperimentConfig config;
  if (!opts.config_path.empty()) config = nlflow::load_config(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.replications) config.replications = *opts.replications;
  if (!opts.out_dir.empty()) {
    config.output_dir = opts.out_dir;
  } else if (const char* env = std::getenv("NLFLOW_OUT"); env && *env) {
    config.output_dir = env;
  }
  nlflow::validate_config(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and verification of stochastic flows with non-Lipschitz coefficients"};
  app.set_version_flag("--version", std::string(nlflow::tool_version()));
  app.require_subcommand(1);

  CommonOptions opts;
  std::string check;

  auto* simulate = app.add_subcommand("simulate", "Simulate an ensemble of initial points");
  add_common(simulate, opts);
  auto* verify = app.add_subcommand("verify", "Run a property check (or 'all')");
  verify->add_option("check", check, "Check name")->required();
  add_common(verify, opts);
  auto* bounds = app.add_subcommand("bounds", "Evaluate transforms, bounds and comparison ODEs");
  add_common(bounds, opts);
  auto* corpus = app.add_subcommand("corpus", "Inspect the field corpus");
  corpus->require_subcommand(1);
  auto* corpus_list = corpus->add_subcommand("list", "List corpus fields and their defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (corpus_list->parsed()) {
      nlflow::print_corpus(std::cout);
      return 0;
    }
    const nlflow::ExperimentConfig config = resolve(opts);
    const std::filesystem::path out = config.output_dir;
    if (simulate->parsed()) {
      nlflow::run_simulate(config, out, std::cout);
      return 0;
    }
    if (verify->parsed()) {
      const auto verdict = nlflow::run_verify(config, check, out, std::cout);
      return verdict == nlflow::Verdict::Fail ? kExitFailed : 0;
    }
    if (bounds->parsed()) {
      try {
        nlflow::run_bounds(config, out, std::cout);
      } catch (const nlflow::DomainError& e) {
        fmt::print(std::cerr, "domain error: {}\n", e.what());
        return kExitDomain;
      } catch (const nlflow::OrderingError& e) {
        fmt::print(std::cerr, "ordering error: {}\n", e.what());
        return kExitDomain;
      } catch (const nlflow::FamilyError& e) {
        fmt::print(std::cerr, "family error: {}\n", e.what());
        return kExitDomain;
      } catch (const nlflow::QuadratureError& e) {
        fmt::print(std::cerr, "quadrature error: {}\n", e.what());
        return kExitDomain;
      }
      return 0;
    }
  } catch (const nlflow::ConfigError& e) {
    fmt::print(std::cerr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const nlflow::UnknownNameError& e) {
    fmt::print(std::cerr, "{}; known checks: all", e.what());
    for (const auto& n : nlflow::check_names()) fmt::print(std::cerr, ", {}", n);
    fmt::print(std::cerr, "\n");
    return kExitConfig;
  } catch (const nlflow::OverflowError& e) {
    fmt::print(std::cerr, "overflow at step {}: {}\n", e.step(), e.what());
    return kExitOverflow;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kExitFailed;
  }
  return 0;
}
