#include <CLI11.hpp>
#include <iostream>

#include "bloch/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bloch varieties of periodic Schrodinger and Dirac operators on flat tori"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  int threads = -1;
  long long seed = -1;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "path to a JSON run configuration")
        ->required();
    sub->add_option("--output", output, "output directory override");
    sub->add_option("--threads", threads, "worker thread count override");
    sub->add_option("--seed", seed, "seed override for randomized suites");
  };
  CLI::App* run = app.add_subcommand("run", "execute the configured task");
  CLI::App* verify =
      app.add_subcommand("verify", "run the invariant suite for the config");
  add_common(run);
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  bloch::CliOverrides overrides;
  if (!output.empty()) overrides.output = output;
  if (threads >= 0) overrides.threads = threads;
  if (seed >= 0) overrides.seed = static_cast<unsigned>(seed);

  try {
    const auto cfg = bloch::parse_config_file(config_path);
    if (run->parsed()) return bloch::run_task(cfg, overrides, std::cout);
    return bloch::verify_task(cfg, overrides, std::cout);
  } catch (const bloch::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const bloch::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const bloch::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
