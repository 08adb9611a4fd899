#pragma once

// Estimators and oracle checks: Gibbs-equilibrium histograms, exit-time
// statistics and Arrhenius fits, ensemble success probabilities, finite
// difference checks of the InfoNCE derivatives, and Hessian sharpening fits.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "annealab/dynamics.hpp"
#include "annealab/geometry.hpp"
#include "annealab/infonce.hpp"
#include "annealab/landscape.hpp"
#include "annealab/random.hpp"

namespace annealab {

inline constexpr double kBurnInFraction = 0.1;
inline constexpr double kDefaultEpsilon = 0.1;
inline constexpr double kZ95 = 1.959963984540054;

/// Counts of angles in B >= 8 equal bins over [-pi, pi).
class AngularHistogram {
 public:
  explicit AngularHistogram(std::size_t bins);

  void add(double theta);
  void merge(const AngularHistogram& other);

  std::size_t bins() const noexcept { return counts_.size(); }
  std::size_t total() const noexcept { return total_; }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }
  std::size_t bin_index(double theta) const;
  double bin_center(std::size_t b) const;
  Vector frequencies() const;

 private:
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

/// Per-bin mass of exp(-beta U) / Z on [-pi, pi) by the trapezoid rule with
/// at least `grid` (>= 256) subintervals overall.
Vector gibbs_reference_density(const LandscapeSpec& spec, double beta, std::size_t bins, std::size_t grid = 4096);
Vector gibbs_reference_density(const std::function<double(double)>& potential, double beta, std::size_t bins,
                               std::size_t grid = 4096);

/// (1/2) sum_b |p_b - q_b|.
double total_variation(const Vector& p, const Vector& q);
double total_variation(const AngularHistogram& h, const Vector& reference);

/// Pooled histogram of `chains` independent constant-beta chains started
/// uniformly on the circle, each run for cfg.steps steps with the first 10%
/// discarded. Chain c uses RandomStream(cfg.seed, c).
AngularHistogram equilibrium_histogram(const LandscapeSpec& spec, double beta, const IntegratorConfig& cfg,
                                       std::size_t chains, std::size_t bins, unsigned threads = 1);

struct ExitTimeSample {
  std::size_t chain = 0;
  std::size_t exit_step = 0;  // horizon when censored
  double exit_time = 0.0;     // schedule time at exit
  bool censored = false;
  double beta = 0.0;
  std::size_t basin = 0;  // basin escaped
};

struct ExitTimeEstimate {
  std::vector<ExitTimeSample> samples;
  double beta = 0.0;
  double mean_time = 0.0;  // over uncensored chains
  double ci_low = 0.0;     // 95%, normal approximation for log of the mean
  double ci_high = 0.0;
  std::size_t uncensored = 0;
  std::size_t censored = 0;
};

/// First step at which basin_of differs from the start basin, for m chains
/// started at its minimum under constant beta. Censored chains are reported,
/// not dropped; throws AllCensored when no chain exits within `horizon` steps.
ExitTimeEstimate estimate_exit_times(const LandscapeSpec& spec, double beta, const BasinLabel& start_basin,
                                     std::size_t m, std::size_t horizon, const IntegratorConfig& cfg,
                                     unsigned threads = 1);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_se = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = slope x + intercept; needs >= 3 points.
FitResult least_squares_fit(const std::vector<double>& x, const std::vector<double>& y);

/// ln(mean exit time) against beta: the slope estimates dE and the intercept -ln A.
FitResult arrhenius_fit(const std::vector<std::pair<double, double>>& beta_mean_time);

struct SuccessEstimate {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double fraction = 0.0;
  double low = 0.0;   // Wilson 95%
  double high = 0.0;
};

SuccessEstimate wilson_interval(std::size_t successes, std::size_t trials);

/// Fraction of finished chains whose final state satisfies `target`.
SuccessEstimate success_fraction(const EnsembleResult& ens, const std::function<bool(const Points&)>& target);

enum class FdOrder { Second, Fourth };

/// |a - f| / max(|a|, |f|, 1): relative for large entries, absolute near zero.
double fd_relative_error(double analytic, double numeric);

/// Step for coordinate value x: max(1e-6, eps^(1/3) max(1, |x|)).
double fd_step(double x);

/// Central differences of f with respect to every entry of x.
Points numerical_gradient(const std::function<double(const Points&)>& f, const Points& x,
                          FdOrder order = FdOrder::Second);

struct FdCheckSpec {
  SimilarityKind kind;
  Index n = 4;
  Index d = 3;
  double beta = 1.0;
  std::optional<PairSet> pairs;  // random per trial when empty
  FdOrder order = FdOrder::Second;
};

struct FdReport {
  double max_rel_err = 0.0;
  double max_symmetry_defect = 0.0;  // Hessian checks only: |H - H^T| / max(|H|, tiny)
  std::size_t trials = 0;
  bool passed = false;
};

/// Random pair set over n embeddings: between 1 and n distinct pairs.
PairSet random_pair_set(Index n, RandomStream& rng);

/// Analytic full gradient against central differences of the loss over
/// `trials` uniform configurations.
FdReport fd_check_gradient(const FdCheckSpec& spec, std::size_t trials, double tolerance, RandomStream& rng);

/// Analytic anchor Hessian against central differences of the anchor
/// gradient, for every pair of every trial.
FdReport fd_check_hessian(const FdCheckSpec& spec, std::size_t trials, double tolerance, RandomStream& rng);

/// Largest singular value by power iteration on H^T H (relative tolerance 1e-10).
double spectral_norm(const Eigen::MatrixXd& h, double tolerance = 1e-10);

struct SharpeningResult {
  FitResult fit;  // ln |H|_2 against ln beta
  std::vector<double> betas;
  std::vector<double> norms;
};

/// Throws NotSuboptimal when j is among the most similar candidates of i, and
/// InvalidArgument when the beta grid spans less than a decade.
SharpeningResult sharpening_fit(const Configuration& z, Index i, Index j, const std::vector<double>& betas,
                                const SimilarityKind& kind, const PairSet& pairs);

}  // namespace annealab
