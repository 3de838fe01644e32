// devlab: run one experiment from a JSON config, or list the experiments.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "devlab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"devlab: numerical checks of large and moderate deviation limits"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment");
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::string out_dir;
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  auto* reps_opt = run->add_option("--reps", reps, "override the replicate count");
  auto* out_opt = run->add_option("--out", out_dir, "output directory");

  app.add_subcommand("list", "list experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : devlab::kExitConfig;
  }

  if (app.got_subcommand("list")) {
    std::cout << devlab::list_experiments();
    return 0;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "devlab: cannot read " << config_path << "\n";
    return devlab::kExitConfig;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    devlab::ExperimentConfig cfg = devlab::parse_config(buf.str());
    if (*seed_opt) cfg.seed = seed;
    if (*reps_opt) cfg.reps = reps;
    if (*out_opt) cfg.output_dir = out_dir;
    const int code = devlab::run_and_write(cfg);
    std::cout << (code == devlab::kExitPass ? "PASS" : "FAIL") << " " << cfg.experiment << " -> " << cfg.output_dir
              << "\n";
    return code;
  } catch (const devlab::ConfigError& e) {
    std::cerr << config_path << ":" << e.what() << "\n";
    return devlab::kExitConfig;
  } catch (const devlab::UnsupportedRegime& e) {
    std::cerr << "devlab: regime mismatch: " << e.what() << "\n";
    return devlab::kExitRegime;
  } catch (const std::invalid_argument& e) {
    std::cerr << config_path << ": invalid config: " << e.what() << "\n";
    return devlab::kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << config_path << ": invalid config: " << e.what() << "\n";
    return devlab::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "devlab: " << e.what() << "\n";
    return devlab::kExitFail;
  }
}
