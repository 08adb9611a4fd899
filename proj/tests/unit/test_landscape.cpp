#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "annealab/landscape.hpp"

using namespace annealab;

namespace {

constexpr double kPi = std::numbers::pi;

struct GridExtrema {
  std::vector<double> minima;
  std::vector<double> maxima;
};

// Brute-force local extrema of a periodic function on a fine grid.
template <typename F>
GridExtrema scan(F f, int n = 1 << 20) {
  GridExtrema out;
  const double h = 2 * kPi / n;
  auto at = [&](int k) { return f(-kPi + h * ((k % n + n) % n)); };
  for (int k = 0; k < n; ++k) {
    const double v = at(k);
    if (v < at(k - 1) && v <= at(k + 1)) out.minima.push_back(-kPi + h * k);
    if (v > at(k - 1) && v >= at(k + 1)) out.maxima.push_back(-kPi + h * k);
  }
  return out;
}

double tilted(double g, double t) { return std::cos(2 * t) + g * std::sin(t); }

}  // namespace

TEST_CASE("landscape_eval examples") {
  const auto sym = LandscapeSpec::symmetric_double_well();
  const auto a = landscape_eval(sym, kPi / 2);
  CHECK(a.value == doctest::Approx(-1.0));
  CHECK(std::abs(a.slope) <= 1e-15);
  CHECK(a.curvature == doctest::Approx(4.0));
  const auto b = landscape_eval(sym, 0.0);
  CHECK(b.value == 1.0);
  CHECK(b.slope == 0.0);
  CHECK(b.curvature == -4.0);

  const auto tilt = LandscapeSpec::tilted_double_well(0.2);
  const auto c = landscape_eval(tilt, -kPi / 2);
  CHECK(c.value == doctest::Approx(-1.2).epsilon(1e-15));
  CHECK(std::abs(c.slope) <= 1e-15);
  const double h = 1e-4;
  const double fd = (tilted(0.2, -kPi / 2 + h) - 2 * tilted(0.2, -kPi / 2) + tilted(0.2, -kPi / 2 - h)) / (h * h);
  CHECK(c.curvature == doctest::Approx(fd).epsilon(1e-6));
  CHECK(c.curvature == doctest::Approx(4.2));
}

TEST_CASE("symmetric double well critical structure") {
  const auto sym = LandscapeSpec::symmetric_double_well();
  const auto& cps = critical_points(sym);
  REQUIRE(cps.size() == 4);
  const double want[] = {-kPi, -kPi / 2, 0.0, kPi / 2};
  const CriticalType types[] = {CriticalType::Saddle, CriticalType::Minimum, CriticalType::Saddle,
                                CriticalType::Minimum};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto match = std::find_if(cps.begin(), cps.end(), [&](const CriticalPoint& cp) {
      return std::abs(angular_difference(cp.angle, want[k])) <= 1e-12;
    });
    REQUIRE(match != cps.end());
    CHECK(match->type == types[k]);
    CHECK(std::abs(landscape_eval(sym, match->angle).slope) <= 1e-10);
  }
  for (std::size_t k = 0; k < 4; ++k) CHECK(cps[k].type != cps[(k + 1) % 4].type);
  const auto& bar = barrier_heights(sym);
  CHECK(bar.delta_e_max == 2.0);
  CHECK(bar.c_star == 0.5);
  CHECK(kramers_prefactor(sym, BasinLabel::of_minimum(0)) == doctest::Approx(2.0 / kPi).epsilon(1e-12));
  CHECK(kramers_prefactor(sym, BasinLabel::of_minimum(1)) == doctest::Approx(2.0 / kPi).epsilon(1e-12));
}

TEST_CASE("tilted double well against a brute-force grid") {
  const double gamma = 0.2;
  const auto tilt = LandscapeSpec::tilted_double_well(gamma);
  const auto grid = scan([&](double t) { return tilted(gamma, t); });
  REQUIRE(grid.minima.size() == 2);
  REQUIRE(grid.maxima.size() == 2);
  REQUIRE(tilt.minima().size() == 2);
  REQUIRE(tilt.saddles().size() == 2);
  const double spacing = 2 * kPi / (1 << 20);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::abs(angular_difference(tilt.minimum(k).angle, grid.minima[k])) <= 2 * spacing);
    CHECK(std::abs(angular_difference(tilt.saddle(k).angle, grid.maxima[k])) <= 2 * spacing);
  }
  const auto global = tilt.minimum(tilt.global_minimum());
  CHECK(global.value < -1.0);
  CHECK(std::abs(global.angle + kPi / 2) <= 1e-9);

  double saddle_min = 1e9;
  for (double s : grid.maxima) saddle_min = std::min(saddle_min, tilted(gamma, s));
  const double shallow = tilted(gamma, kPi / 2);
  const auto& bar = barrier_heights(tilt);
  CHECK(bar.delta_e_max == doctest::Approx(saddle_min - shallow).epsilon(1e-9));
  CHECK(bar.delta_e_max == doctest::Approx(1.805).epsilon(1e-12));
  CHECK(bar.c_star == doctest::Approx(1.0 / 1.805).epsilon(1e-12));

  const std::size_t shallow_basin = tilt.shallowest_suboptimal_or_first();
  CHECK(std::abs(tilt.minimum(shallow_basin).angle - kPi / 2) <= 1e-9);
  const double saddle_curv = -4 * (1 - 2 * 0.05 * 0.05) - gamma * 0.05;
  const double expected_a = std::sqrt(3.8 * std::abs(saddle_curv)) / (2 * kPi);
  CHECK(kramers_prefactor(tilt, BasinLabel::of_minimum(shallow_basin)) == doctest::Approx(expected_a).epsilon(1e-9));
}

TEST_CASE("tilted well approaches the symmetric one as gamma -> 0") {
  const auto near = LandscapeSpec::tilted_double_well(1e-4);
  const auto sym = LandscapeSpec::symmetric_double_well();
  REQUIRE(near.critical_points().size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(std::abs(angular_difference(near.critical_points()[k].angle, sym.critical_points()[k].angle)) <= 1e-3);
  }
  CHECK(LandscapeSpec::tilted_double_well(0.0).barriers().delta_e_max == 2.0);
  CHECK_THROWS_AS(LandscapeSpec::tilted_double_well(0.5), Error);
  CHECK_THROWS_AS(LandscapeSpec::tilted_double_well(-0.1), Error);
}

TEST_CASE("Eyring-Kramers general form reduces to the one-dimensional prefactor") {
  Eigen::MatrixXd hmin(1, 1);
  Eigen::MatrixXd hsad(1, 1);
  hmin << 4.0;
  hsad << -4.0;
  CHECK(eyring_kramers_prefactor(hmin, hsad) == doctest::Approx(2.0 / kPi).epsilon(1e-14));
  Eigen::MatrixXd m2(2, 2);
  Eigen::MatrixXd s2(2, 2);
  m2 << 2.0, 0.0, 0.0, 3.0;
  s2 << -1.0, 0.0, 0.0, 5.0;
  CHECK(eyring_kramers_prefactor(m2, s2) == doctest::Approx(1.0 / (2 * kPi) * std::sqrt(6.0 / 5.0)).epsilon(1e-14));
  CHECK_THROWS_AS(eyring_kramers_prefactor(m2, Eigen::MatrixXd(m2 * -1.0)), Error);
}

TEST_CASE("basin_of examples and gradient-flow invariance") {
  const auto sym = LandscapeSpec::symmetric_double_well();
  const BasinLabel upper = sym.basin_of(kPi / 2);
  CHECK_FALSE(upper.saddle);
  CHECK(basin_of(sym, 0.1) == upper);
  CHECK(basin_of(sym, 0.0).saddle);
  CHECK(basin_of(sym, -kPi).saddle);
  CHECK(basin_of(sym, -0.1) == sym.basin_of(-kPi / 2));
  CHECK_FALSE(basin_of(sym, -0.1) == upper);

  const auto tilt = LandscapeSpec::tilted_double_well(0.2);
  for (int t = 0; t < 200; ++t) {
    double theta = -kPi + 2 * kPi * (t + 0.5) / 200;
    const BasinLabel start = tilt.basin_of(theta);
    if (start.saddle) continue;
    for (int k = 0; k < 50; ++k) {
      theta = wrap_angle(theta - 0.01 * tilt.eval(theta).slope);
      CHECK(tilt.basin_of(theta) == start);
    }
  }
}

TEST_CASE("InfoNCE slice with a single frozen positive") {
  const PairSet pairs({{0, 1}}, 3);
  const auto spec = build_infonce_micro(3, CosineSimilarity{}, pairs, 0, {0.0, 0.0, 2.5});
  CHECK(spec.eval(0.0).value == 0.0);
  const auto& global = spec.minimum(spec.global_minimum());
  CHECK(global.value == 0.0);
  // U0 vanishes on a whole arc containing the positive.
  CHECK(std::abs(angular_difference(0.0, global.angle)) <= global.plateau_halfwidth);
  CHECK_THROWS_AS(build_infonce_micro(2, CosineSimilarity{}, PairSet({{0, 1}}, 2), 0, {0.0, 0.0}), Error);
}

TEST_CASE("InfoNCE slice with coincident positives has no suboptimal basin") {
  const PairSet pairs({{0, 1}, {1, 0}, {2, 3}, {3, 2}}, 4);
  const auto spec = build_infonce_micro(4, CosineSimilarity{}, pairs, 0, {0.3, 0.3, 2.0, 2.0});
  for (std::size_t m = 0; m < spec.minima().size(); ++m) CHECK(spec.is_global(BasinLabel::of_minimum(m)));
}

TEST_CASE("InfoNCE slice with a cluster of negatives has a second well") {
  const PairSet pairs({{0, 1}}, 4);
  const auto spec = build_infonce_micro(4, GaussianSimilarity{1.0}, pairs, 0, {0.0, 0.0, 1.9, 2.5});
  bool found = false;
  for (std::size_t m = 0; m < spec.minima().size(); ++m) {
    const auto& cp = spec.minimum(m);
    if (!spec.is_global(BasinLabel::of_minimum(m)) && std::abs(cp.angle - 2.2) <= 0.05) {
      found = true;
      CHECK(cp.value > 0.0);
    }
  }
  CHECK(found);
  CHECK(spec.barriers().delta_e_max > 0.0);
}
