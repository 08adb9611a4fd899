// annealab <experiment-kind> --config <path> [--out <dir>] [--seed <u64>] [--quiet]
//
// Exit codes: 0 success, 2 invalid invocation or config, 3 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "annealab/experiment.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

void report(const annealab::Error& e) {
  std::cerr << "annealab: " << e.what() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Annealed Langevin dynamics of contrastive embeddings: experiment runner"};
  std::string kind_name;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("experiment-kind", kind_name, "equilibrium | escape | anneal-sweep | sharpening | gradcheck")
      ->required();
  app.add_option("--config", config_path, "JSON experiment config")->required();
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config's \"out\")");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config's \"seed\")");
  app.add_flag("--quiet", quiet, "print nothing on success");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  annealab::ExperimentConfig cfg;
  try {
    const auto kind = annealab::parse_experiment_kind(kind_name);
    cfg = annealab::load_config(config_path, kind);
    if (*seed_opt) {
      cfg.seed = seed;
      cfg.echo["seed"] = seed;
    }
    if (*out_opt) {
      cfg.out_dir = out_dir;
      cfg.echo["out"] = cfg.out_dir.generic_string();
    }
  } catch (const annealab::Error& e) {
    report(e);
    return kExitValidation;
  }

  try {
    const auto manifest = annealab::run_experiment(cfg);
    if (!quiet) {
      std::cout << annealab::to_string(cfg.kind) << ": wrote";
      for (const auto& f : manifest.files) std::cout << " " << f.name;
      std::cout << " manifest.json to " << cfg.out_dir.string() << "\n";
      std::cout << manifest.summary.dump(2) << "\n";
    }
    if (!manifest.passed) {
      std::cerr << "annealab: built-in check failed; see manifest.json\n";
      return kExitRuntime;
    }
  } catch (const annealab::Error& e) {
    report(e);
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "annealab: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
