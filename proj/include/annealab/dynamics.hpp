#pragma once

// Annealed stochastic gradient Langevin dynamics on a product of spheres.
//
// One step, per point z of the state:
//
//   step  = -eta_k P_z grad U(Z_k, beta_k) + sqrt(2 eta_k / beta_k) P_z xi,   xi ~ N(0, I_d)
//   z'    = (z + step) / |z + step|
//
// where P_z is the tangent projection at z. beta_k is read from the schedule
// at the start of the step, at SDE time sum_{l<k} eta_l (or at the raw step
// index k when the integrator is configured for it).

#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "annealab/error.hpp"
#include "annealab/geometry.hpp"
#include "annealab/infonce.hpp"
#include "annealab/landscape.hpp"
#include "annealab/parallel.hpp"
#include "annealab/random.hpp"
#include "annealab/schedule.hpp"

namespace annealab {

/// Anything the integrator can drive: an energy at inverse temperature beta,
/// its ambient Euclidean gradient, and the beta -> infinity energy recorded
/// alongside trajectories.
template <typename P>
concept LangevinPotential = requires(const P& p, const Points& z, double beta, Points& grad) {
  { p.energy(z, beta) } -> std::convertible_to<double>;
  { p.limit_energy(z) } -> std::convertible_to<double>;
  p.gradient(z, beta, grad);
};

/// InfoNCE loss as a Langevin potential. By default the drift is the gradient
/// of the unscaled loss; `scaled` switches to loss / beta.
class InfoNcePotential {
 public:
  InfoNcePotential(SimilarityKind kind, PairSet pairs, bool scaled = false);

  double energy(const Points& z, double beta) const;
  double limit_energy(const Points& z) const;
  void gradient(const Points& z, double beta, Points& grad) const;

  const SimilarityKind& kind() const noexcept { return kind_; }
  const PairSet& pairs() const noexcept { return pairs_; }
  bool scaled() const noexcept { return scaled_; }

 private:
  SimilarityKind kind_;
  PairSet pairs_;
  bool scaled_;
};

/// Single particle on S^1 (a 2 x 1 state) in a landscape U(theta); beta-independent.
class LandscapePotential {
 public:
  explicit LandscapePotential(const LandscapeSpec& spec) : spec_(&spec) {}

  double energy(const Points& z, double /*beta*/) const { return spec_->eval(circle_angle(z.col(0))).value; }
  double limit_energy(const Points& z) const { return energy(z, 0.0); }
  void gradient(const Points& z, double beta, Points& grad) const;

  const LandscapeSpec& spec() const noexcept { return *spec_; }

 private:
  const LandscapeSpec* spec_;
};

/// eta_k = eta0, or eta0 / (1 + k)^decay with decay in (1/2, 1].
struct LearningRate {
  double eta0 = 1e-3;
  std::optional<double> decay;

  double at(std::size_t k) const;
};

enum class TimeAxis { SdeTime, StepIndex };

const char* to_string(TimeAxis axis);

struct IntegratorConfig {
  LearningRate eta;
  std::size_t steps = 1;
  std::size_t record_every = 1;
  std::uint64_t seed = 0;
  bool noise_on = true;
  TimeAxis time_axis = TimeAxis::SdeTime;

  /// Throws InvalidArgument listing every violated constraint
  /// (eta0 > 0, steps >= 1, record_every >= 1, decay in (0.5, 1]).
  void validate() const;
};

/// Schedule time at the start of step k.
double schedule_time(const IntegratorConfig& cfg, std::size_t k);

/// Threshold on |step| per point above which the retraction is refused.
inline constexpr double kStepOverflowNorm = 1.5707963267948966;

namespace detail {

struct SgldWorkspace {
  Points grad;
  Points noise;
  Vector step;
};

template <LangevinPotential P>
void sgld_update(Points& z, std::size_t k, double eta, double beta, bool noise_on, const P& potential,
                 RandomStream& rng, SgldWorkspace& ws) {
  if (!(beta > 0.0) || !(eta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "SGLD needs beta > 0 and eta > 0 at step " + std::to_string(k));
  }
  potential.gradient(z, beta, ws.grad);
  tangent_project_columns(z, ws.grad);
  if (noise_on) sample_tangent_gaussian(z, rng, ws.noise);
  const double noise_scale = std::sqrt(2.0 * eta / beta);
  ws.step.resize(z.rows());
  for (Index i = 0; i < z.cols(); ++i) {
    ws.step = -eta * ws.grad.col(i);
    if (noise_on) ws.step += noise_scale * ws.noise.col(i);
    const double len = ws.step.norm();
    if (!(len < kStepOverflowNorm)) {
      throw Error(ErrorCode::StepOverflow, "step " + std::to_string(k) + ": |step| = " + std::to_string(len) +
                                               " for point " + std::to_string(i) + " exceeds pi/2");
    }
    if (len == 0.0) continue;
    z.col(i) += ws.step;
    const double norm = z.col(i).norm();
    if (!(norm >= kZeroNormThreshold)) {
      throw Error(ErrorCode::StepOverflow, "step " + std::to_string(k) + ": retraction hit the antipode");
    }
    z.col(i) /= norm;
  }
}

inline double schedule_beta(const Schedule& s, const IntegratorConfig& cfg, std::size_t k, double sde_time) {
  return s(cfg.time_axis == TimeAxis::SdeTime ? sde_time : static_cast<double>(k));
}

}  // namespace detail

/// One SGLD step from Z at step index k. Pure apart from the random stream.
template <LangevinPotential P>
Points sgld_step(const Points& z, std::size_t k, const Schedule& schedule, const IntegratorConfig& cfg,
                 const P& potential, RandomStream& rng) {
  Points out = z;
  detail::SgldWorkspace ws;
  const double beta = detail::schedule_beta(schedule, cfg, k, schedule_time(cfg, k));
  detail::sgld_update(out, k, cfg.eta.at(k), beta, cfg.noise_on, potential, rng, ws);
  return out;
}

template <LangevinPotential P>
Configuration sgld_step(const Configuration& z, std::size_t k, const Schedule& schedule, const IntegratorConfig& cfg,
                        const P& potential, RandomStream& rng) {
  return Configuration(sgld_step(z.points(), k, schedule, cfg, potential, rng));
}

/// Stateful integrator: owns the state, the random stream and the workspace.
template <LangevinPotential P>
class SgldIntegrator {
 public:
  SgldIntegrator(const P& potential, Schedule schedule, IntegratorConfig cfg, Points initial, RandomStream stream)
      : potential_(&potential),
        schedule_(std::move(schedule)),
        cfg_(std::move(cfg)),
        state_(std::move(initial)),
        stream_(std::move(stream)) {}

  void step() {
    detail::sgld_update(state_, k_, cfg_.eta.at(k_), current_beta(), cfg_.noise_on, *potential_, stream_, ws_);
    if (cfg_.eta.decay) accumulated_time_ += cfg_.eta.at(k_);
    ++k_;
  }

  const Points& state() const noexcept { return state_; }
  std::size_t step_index() const noexcept { return k_; }
  /// SDE time at the start of the next step; matches schedule_time(cfg, k) bit for bit.
  double time() const noexcept { return cfg_.eta.decay ? accumulated_time_ : static_cast<double>(k_) * cfg_.eta.eta0; }
  double current_beta() const { return detail::schedule_beta(schedule_, cfg_, k_, time()); }
  const IntegratorConfig& config() const noexcept { return cfg_; }
  const P& potential() const noexcept { return *potential_; }

 private:
  const P* potential_;
  Schedule schedule_;
  IntegratorConfig cfg_;
  Points state_;
  RandomStream stream_;
  detail::SgldWorkspace ws_;
  std::size_t k_ = 0;
  double accumulated_time_ = 0.0;
};

struct Trajectory {
  std::vector<std::size_t> steps;  // strictly increasing
  std::vector<double> times;       // schedule time at each record
  std::vector<Points> states;
  std::vector<double> beta_values;
  std::vector<double> loss_values;
  std::vector<double> u0_values;
  TimeAxis time_axis = TimeAxis::SdeTime;
};

/// Records Z0, every record_every-th state and the final state. StepOverflow
/// propagates with the offending step index in its message.
template <LangevinPotential P>
Trajectory run_trajectory(const Points& z0, const Schedule& schedule, const IntegratorConfig& cfg,
                          const P& potential, RandomStream stream) {
  if (cfg.record_every == 0) throw Error(ErrorCode::InvalidArgument, "record_every must be >= 1");
  SgldIntegrator<P> integ(potential, schedule, cfg, z0, std::move(stream));
  Trajectory traj;
  traj.time_axis = cfg.time_axis;
  auto record = [&] {
    const double beta = integ.current_beta();
    traj.steps.push_back(integ.step_index());
    traj.times.push_back(integ.time());
    traj.states.push_back(integ.state());
    traj.beta_values.push_back(beta);
    traj.loss_values.push_back(potential.energy(integ.state(), beta));
    traj.u0_values.push_back(potential.limit_energy(integ.state()));
  };
  record();
  while (integ.step_index() < cfg.steps) {
    integ.step();
    if (integ.step_index() % cfg.record_every == 0 || integ.step_index() == cfg.steps) record();
  }
  return traj;
}

template <LangevinPotential P>
Trajectory run_trajectory(const Points& z0, const Schedule& schedule, const IntegratorConfig& cfg,
                          const P& potential) {
  return run_trajectory(z0, schedule, cfg, potential, RandomStream(cfg.seed));
}

/// Outcome of an ensemble of independent chains. Chain i draws from
/// RandomStream(master_seed, i) for both its initial state and its noise.
struct EnsembleResult {
  std::uint64_t master_seed = 0;
  std::size_t chains = 0;
  std::vector<Points> final_states;
  std::vector<int> labels;                      // classifier on the final state
  std::vector<std::size_t> record_steps;        // steps at which label_history is sampled
  std::vector<std::vector<int>> label_history;  // per chain, per record
  std::vector<std::string> errors;              // empty string for chains that finished

  std::size_t failed() const;
};

using InitialCondition = std::function<Points(std::size_t chain, RandomStream& rng)>;
using StateClassifier = std::function<int(const Points&)>;

/// m independent chains. A chain that throws is reported in `errors` (its
/// label is -1) without stopping the others. Results do not depend on the
/// thread count or on the order chains are executed in.
template <LangevinPotential P>
EnsembleResult run_ensemble(std::size_t m, const InitialCondition& init, const Schedule& schedule,
                            const IntegratorConfig& cfg, const P& potential, const StateClassifier& classifier,
                            unsigned threads = 1) {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "an ensemble needs m >= 1 chains");
  if (cfg.record_every == 0) throw Error(ErrorCode::InvalidArgument, "record_every must be >= 1");
  EnsembleResult out;
  out.master_seed = cfg.seed;
  out.chains = m;
  out.final_states.resize(m);
  out.labels.assign(m, -1);
  out.label_history.resize(m);
  out.errors.assign(m, std::string{});
  for (std::size_t k = 0;; k += cfg.record_every) {
    if (k >= cfg.steps) {
      out.record_steps.push_back(cfg.steps);
      break;
    }
    out.record_steps.push_back(k);
  }

  parallel_for(m, threads, [&](std::size_t chain) {
    try {
      RandomStream stream(cfg.seed, chain);
      Points z0 = init(chain, stream);
      SgldIntegrator<P> integ(potential, schedule, cfg, std::move(z0), std::move(stream));
      auto& history = out.label_history[chain];
      history.push_back(classifier(integ.state()));
      while (integ.step_index() < cfg.steps) {
        integ.step();
        if (integ.step_index() % cfg.record_every == 0 || integ.step_index() == cfg.steps) {
          history.push_back(classifier(integ.state()));
        }
      }
      out.final_states[chain] = integ.state();
      out.labels[chain] = classifier(integ.state());
    } catch (const std::exception& e) {
      out.errors[chain] = e.what();
    }
  });
  return out;
}

}  // namespace annealab
