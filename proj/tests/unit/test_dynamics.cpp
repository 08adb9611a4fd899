#include <doctest.h>

#include <cmath>
#include <numbers>

#include "annealab/dynamics.hpp"

using namespace annealab;

namespace {

constexpr double kPi = std::numbers::pi;

Points circle_point(double theta) {
  Points z(2, 1);
  z << std::cos(theta), std::sin(theta);
  return z;
}

IntegratorConfig make_cfg(double eta, std::size_t steps, std::uint64_t seed = 1, bool noise = true) {
  IntegratorConfig cfg;
  cfg.eta.eta0 = eta;
  cfg.steps = steps;
  cfg.seed = seed;
  cfg.noise_on = noise;
  return cfg;
}

}  // namespace

TEST_CASE("noiseless step leaves a critical configuration unchanged") {
  Points z(3, 4);
  z.colwise() = Vector::Unit(3, 2);
  const InfoNcePotential pot(CosineSimilarity{}, PairSet::ring(4));
  RandomStream rng(1);
  const Points next = sgld_step(z, 0, Schedule::constant(2.0), make_cfg(0.1, 1, 1, false), pot, rng);
  CHECK(next == z);
}

TEST_CASE("noiseless descent does not increase the loss") {
  RandomStream init(3);
  const PairSet pairs({{0, 1}, {2, 3}}, 4);
  for (const SimilarityKind& kind : {SimilarityKind{CosineSimilarity{}}, SimilarityKind{GaussianSimilarity{1.0}}}) {
    const InfoNcePotential pot(kind, pairs);
    const Points z0 = sample_uniform_configuration(4, 3, init).points();
    const auto traj = run_trajectory(z0, Schedule::constant(2.0), make_cfg(1e-3, 100, 1, false), pot);
    REQUIRE(traj.loss_values.size() == 101);
    for (std::size_t k = 1; k < traj.loss_values.size(); ++k) {
      CHECK(traj.loss_values[k] <= traj.loss_values[k - 1] + 1e-12);
    }
  }
}

TEST_CASE("steps are deterministic for a fixed seed") {
  RandomStream init(5);
  const Points z = sample_uniform_configuration(5, 3, init).points();
  const InfoNcePotential pot(GaussianSimilarity{0.8}, PairSet::ring(5));
  RandomStream a(77);
  RandomStream b(77);
  const auto cfg = make_cfg(1e-2, 1);
  CHECK(sgld_step(z, 3, Schedule::constant(1.5), cfg, pot, a) == sgld_step(z, 3, Schedule::constant(1.5), cfg, pot, b));
}

TEST_CASE("trajectory records") {
  const auto spec = LandscapeSpec::symmetric_double_well();
  const LandscapePotential pot(spec);
  auto cfg = make_cfg(1e-2, 0);
  const auto empty = run_trajectory(circle_point(0.3), Schedule::constant(2.0), cfg, pot);
  CHECK(empty.states.size() == 1);
  CHECK(empty.states[0] == circle_point(0.3));

  cfg.steps = 10;
  cfg.record_every = 3;
  const auto traj = run_trajectory(circle_point(0.3), Schedule::constant(2.0), cfg, pot);
  CHECK(traj.steps == std::vector<std::size_t>{0, 3, 6, 9, 10});
  CHECK(traj.states.size() == 5);
  for (const auto& s : traj.states) CHECK(std::abs(s.col(0).norm() - 1.0) <= 1e-12);
  for (std::size_t k = 1; k < traj.times.size(); ++k) CHECK(traj.times[k] > traj.times[k - 1]);

  const auto again = run_trajectory(circle_point(0.3), Schedule::constant(2.0), cfg, pot);
  CHECK(again.states == traj.states);
  CHECK(again.loss_values == traj.loss_values);
}

TEST_CASE("noiseless flow settles at the basin minimum") {
  const auto spec = LandscapeSpec::symmetric_double_well();
  const LandscapePotential pot(spec);
  const auto traj = run_trajectory(circle_point(kPi / 2 + 0.4), Schedule::constant(6.0), make_cfg(1e-2, 5000, 1, false), pot);
  double lowest = 1e9;
  for (int k = 0; k < 100000; ++k) lowest = std::min(lowest, std::cos(2 * (-kPi + 2 * kPi * k / 100000.0)));
  CHECK(std::abs(traj.u0_values.back() - lowest) <= 1e-6);
}

TEST_CASE("schedule time axis") {
  const auto spec = LandscapeSpec::symmetric_double_well();
  const LandscapePotential pot(spec);
  const auto sched = Schedule::logarithmic(0.5, 2.0);
  auto cfg = make_cfg(0.1, 10);
  SgldIntegrator<LandscapePotential> sde(pot, sched, cfg, circle_point(0.2), RandomStream(1));
  for (int k = 0; k < 10; ++k) sde.step();
  CHECK(sde.time() == doctest::Approx(1.0));
  CHECK(sde.current_beta() == doctest::Approx(sched(1.0)));

  cfg.time_axis = TimeAxis::StepIndex;
  SgldIntegrator<LandscapePotential> raw(pot, sched, cfg, circle_point(0.2), RandomStream(1));
  for (int k = 0; k < 10; ++k) raw.step();
  CHECK(raw.current_beta() == doctest::Approx(sched(10.0)));

  cfg.time_axis = TimeAxis::SdeTime;
  cfg.eta.decay = 0.75;
  SgldIntegrator<LandscapePotential> decaying(pot, sched, cfg, circle_point(0.2), RandomStream(1));
  for (int k = 0; k < 25; ++k) decaying.step();
  CHECK(decaying.time() == schedule_time(cfg, 25));
  double sum = 0.0;
  for (int k = 0; k < 25; ++k) sum += 0.1 / std::pow(1.0 + k, 0.75);
  CHECK(decaying.time() == doctest::Approx(sum).epsilon(1e-14));
}

TEST_CASE("integrator configuration validation lists every problem") {
  IntegratorConfig cfg;
  cfg.eta.eta0 = 0.0;
  cfg.eta.decay = 0.5;
  cfg.steps = 0;
  cfg.record_every = 0;
  try {
    cfg.validate();
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(e.details().size() == 4);
  }
}

TEST_CASE("oversized steps are reported with their index") {
  const auto spec = LandscapeSpec::symmetric_double_well();
  const LandscapePotential pot(spec);
  try {
    run_trajectory(circle_point(0.7), Schedule::constant(1.0), make_cfg(5.0, 3, 1, false), pot);
    FAIL("expected StepOverflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StepOverflow);
    CHECK(std::string(e.what()).find("step 0") != std::string::npos);
  }
}

TEST_CASE("ensembles") {
  const auto spec = LandscapeSpec::symmetric_double_well();
  const LandscapePotential pot(spec);
  const auto sched = Schedule::constant(3.0);
  auto cfg = make_cfg(1e-2, 2000, 99);
  cfg.record_every = 500;
  const StateClassifier upper = [&](const Points& z) {
    return spec.basin_of(circle_angle(z.col(0))) == spec.basin_of(kPi / 2) ? 1 : 0;
  };

  SUBCASE("a singleton matches run_trajectory on the derived stream") {
    const InitialCondition fixed = [](std::size_t, RandomStream&) { return circle_point(1.0); };
    const auto ens = run_ensemble(1, fixed, sched, cfg, pot, upper);
    const auto traj = run_trajectory(circle_point(1.0), sched, cfg, pot, RandomStream(cfg.seed, 0));
    CHECK(ens.final_states[0] == traj.states.back());
    CHECK(ens.record_steps == std::vector<std::size_t>{0, 500, 1000, 1500, 2000});
    CHECK(ens.label_history[0].size() == 5);
  }

  const InitialCondition uniform = [](std::size_t, RandomStream& rng) { return sample_uniform_points(1, 2, rng); };

  SUBCASE("constant classifier") {
    const auto ens = run_ensemble(10, uniform, sched, cfg, pot, [](const Points&) { return 1; });
    for (int l : ens.labels) CHECK(l == 1);
  }

  SUBCASE("symmetric wells split evenly") {
    const auto ens = run_ensemble(200, uniform, sched, cfg, pot, upper);
    double ones = 0;
    for (int l : ens.labels) ones += l;
    CHECK(std::abs(ones / 200 - 0.5) <= 0.1);
  }

  SUBCASE("results do not depend on the thread count") {
    const auto one = run_ensemble(16, uniform, sched, cfg, pot, upper, 1);
    const auto four = run_ensemble(16, uniform, sched, cfg, pot, upper, 4);
    CHECK(one.final_states == four.final_states);
    CHECK(one.label_history == four.label_history);
  }

  SUBCASE("a failing chain does not stop the others") {
    const InitialCondition flaky = [](std::size_t chain, RandomStream& rng) {
      if (chain == 2) throw Error(ErrorCode::InvalidArgument, "bad start");
      return sample_uniform_points(1, 2, rng);
    };
    const auto ens = run_ensemble(5, flaky, sched, cfg, pot, upper, 2);
    CHECK(ens.failed() == 1);
    CHECK(ens.labels[2] == -1);
    CHECK(ens.errors[2].find("bad start") != std::string::npos);
    CHECK(ens.final_states[4].size() == 2);
  }
}
