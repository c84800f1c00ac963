#include <iostream>

#include <CLI11.hpp>

#include "gmix/commands.hpp"
#include "gmix/error.hpp"
#include "gmix/gibbs.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bayesian Gaussian mixture sampler: simulate, fit, summarize, replicate"};
  app.require_subcommand(1);

  std::string config_path;
  std::string dir;
  std::string table;

  auto* simulate = app.add_subcommand("simulate", "Simulate a data set from the configured scenario");
  simulate->add_option("config", config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
  auto* fit = app.add_subcommand("fit", "Run the configured replicate chains");
  fit->add_option("config", config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
  auto* summarize = app.add_subcommand("summarize", "Post-process the traces of a fit directory");
  summarize->add_option("dir", dir, "Output directory of a fit")->required()->check(CLI::ExistingDirectory);
  auto* replicate = app.add_subcommand("replicate", "Reproduce a reference table and check it");
  replicate->add_option("--table", table, "phidet | overlap | counts | clustering")
      ->required()
      ->check(CLI::IsMember({"phidet", "overlap", "counts", "clustering"}));
  replicate->add_option("config", config_path, "Optional configuration (seed, output.dir, replicate.*)")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? gmix::kExitOk : gmix::kExitValidation;
  }

  try {
    nlohmann::json out;
    if (*simulate) {
      out = gmix::cmd_simulate(gmix::RunConfig::load(config_path), std::cerr);
    } else if (*fit) {
      out = gmix::cmd_fit(gmix::RunConfig::load(config_path), std::cerr);
    } else if (*summarize) {
      out = gmix::cmd_summarize(dir, std::cerr);
    } else {
      const bool have_config = !config_path.empty();
      const gmix::RunConfig config = have_config ? gmix::RunConfig::load(config_path) : gmix::RunConfig{};
      out = gmix::cmd_replicate(table, config, have_config, std::cerr);
      std::cout << out.dump(2) << std::endl;
      return out.at("ok").get<bool>() ? gmix::kExitOk : gmix::kExitMismatch;
    }
    std::cout << out.dump(2) << std::endl;
    return gmix::kExitOk;
  } catch (const gmix::ChainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.numerical() ? gmix::kExitNumerical : gmix::kExitValidation;
  } catch (const gmix::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return gmix::kExitNumerical;
  } catch (const gmix::NotPositiveDefinite& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return gmix::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gmix::kExitValidation;
  }
}
