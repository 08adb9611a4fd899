#pragma once

// Experiment configurations and the runner behind the command-line tool.
// A config is a JSON object; every experiment kind has its own closed set of
// keys (unknown keys are rejected) and documented defaults.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "annealab/diagnostics.hpp"
#include "annealab/dynamics.hpp"
#include "annealab/landscape.hpp"
#include "annealab/similarity.hpp"

namespace annealab {

inline constexpr std::string_view kVersion = "0.1.0";

enum class ExperimentKind { Equilibrium, Escape, AnnealSweep, Sharpening, Gradcheck };

const char* to_string(ExperimentKind kind);
/// Throws ParseError listing the accepted kinds.
ExperimentKind parse_experiment_kind(std::string_view name);

struct LandscapeConfig {
  std::string family = "symmetric";  // symmetric | tilted | infonce-slice
  double gamma = 0.2;
  // infonce-slice only
  SimilarityKind similarity = CosineSimilarity{};
  std::vector<double> angles;
  std::vector<PositivePair> pairs;
  Index moving = 0;
  std::optional<double> beta;

  LandscapeSpec build() const;
};

struct EquilibriumParams {
  LandscapeConfig landscape;
  double beta = 2.0;
  std::size_t chains = 32;
  std::size_t bins = 64;
  std::size_t grid = 4096;
  IntegratorConfig integrator;
};

struct EscapeParams {
  LandscapeConfig landscape;
  std::vector<double> betas = {2, 3, 4, 5, 6};
  std::size_t chains = 200;
  std::size_t horizon = 100000000;
  std::optional<std::size_t> start_minimum;  // default: shallowest non-global minimum
  IntegratorConfig integrator;
};

enum class SuccessRule { Basin, Distance };

struct AnnealParams {
  LandscapeConfig landscape;
  std::vector<double> rates = {0.5, 1.0, 3.0};
  bool rates_relative = true;  // rates are multiples of c*
  double K = 2.0;
  std::size_t chains = 200;
  std::string init = "shallow";  // shallow | uniform
  SuccessRule success = SuccessRule::Basin;
  double epsilon = kDefaultEpsilon;
  std::vector<std::size_t> checkpoints = {10000, 100000, 1000000};
  IntegratorConfig integrator;
};

struct SharpeningParams {
  SimilarityKind similarity = GaussianSimilarity{1.0};
  Points points;  // d x N
  std::vector<PositivePair> pairs;
  Index anchor = 0;
  Index positive = 1;
  std::vector<double> betas = {10, 18, 32, 56, 100};
};

struct GradcheckParams {
  std::size_t trials = 100;
  std::vector<double> betas = {0.5, 5, 50};
  std::vector<std::string> kinds = {"cosine", "gaussian"};
  double sigma = 1.0;
  Index n_min = 3;
  Index n_max = 8;
  Index d_min = 2;
  Index d_max = 4;
  double tolerance = 1e-6;
  FdOrder order = FdOrder::Second;
};

using ExperimentParams = std::variant<EquilibriumParams, EscapeParams, AnnealParams, SharpeningParams, GradcheckParams>;

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Equilibrium;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::filesystem::path out_dir;
  ExperimentParams params;
  nlohmann::json echo;  // the input with every default filled in
};

/// Parses and validates a config. `kind` (from the command line) wins when
/// the file has no "experiment" key and must agree with it otherwise.
/// ParseError on malformed JSON or an unknown kind; ValidationError listing
/// every violated constraint otherwise.
ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<ExperimentKind> kind = std::nullopt);
ExperimentConfig parse_config_text(std::string_view text, std::optional<ExperimentKind> kind = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> kind = std::nullopt);

struct OutputFile {
  std::string name;
  std::string sha256;
};

struct RunManifest {
  ExperimentKind kind;
  std::vector<OutputFile> files;  // every emitted file except the manifest itself
  nlohmann::json summary;
  double wall_clock_seconds = 0.0;
  bool passed = true;  // false when a built-in check (gradcheck tolerance) fails
};

/// Runs the experiment and writes its CSV, SVG and manifest.json files into
/// cfg.out_dir. Every result is computed before the first file is written.
RunManifest run_experiment(const ExperimentConfig& cfg);

}  // namespace annealab
