#include <doctest.h>

#include <cmath>

#include "annealab/similarity.hpp"

using namespace annealab;

namespace {

UnitVector at(double theta) { return UnitVector::on_circle(theta); }

}  // namespace

TEST_CASE("similarity examples") {
  const SimilarityKind cosine = CosineSimilarity{};
  const SimilarityKind gauss = GaussianSimilarity{1.0};
  CHECK(similarity(cosine, at(0.4), at(0.4)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(similarity(cosine, at(0.0), at(M_PI / 2))) <= 1e-15);
  CHECK(similarity(gauss, at(0.0), at(M_PI)) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(std::string(kind_name(cosine)) == "cosine");
  CHECK(std::string(kind_name(gauss)) == "gaussian");
}

TEST_CASE("similarity rejects mismatched dimensions and bad bandwidths") {
  Vector v3(3);
  v3 << 0, 0, 1;
  CHECK_THROWS_AS(similarity(CosineSimilarity{}, at(0.0), UnitVector::from_unit(v3)), Error);
  CHECK_THROWS_AS(validate(GaussianSimilarity{0.0}), Error);
  CHECK_THROWS_AS(validate(GaussianSimilarity{-1.0}), Error);
  CHECK_NOTHROW(validate(GaussianSimilarity{0.5}));
}

TEST_CASE("kernels are symmetric and bounded") {
  RandomStream rng(3);
  for (int t = 0; t < 200; ++t) {
    const Points p = sample_uniform_points(2, 2 + t % 3, rng);
    const auto a = UnitVector::from_unit(p.col(0));
    const auto b = UnitVector::from_unit(p.col(1));
    for (const SimilarityKind& k : {SimilarityKind{CosineSimilarity{}}, SimilarityKind{GaussianSimilarity{0.7}}}) {
      CHECK(similarity(k, a, b) == similarity(k, b, a));
      CHECK(similarity(k, a, b) <= 1.0);
      CHECK(similarity(k, a, b) >= -1.0);
    }
  }
}

TEST_CASE("kernel derivatives match central differences") {
  RandomStream rng(8);
  const GaussianSimilarity g{0.8};
  const CosineSimilarity c{};
  const double h = 1e-6;
  for (int t = 0; t < 20; ++t) {
    const Points p = sample_uniform_points(2, 3, rng);
    const Vector a = p.col(0);
    const Vector b = p.col(1);
    const Vector ga = g.grad_first(a, b);
    const Vector gb = g.grad_second(a, b);
    const Points ha = g.hessian_first(a, b);
    for (Index k = 0; k < 3; ++k) {
      Vector e = Vector::Zero(3);
      e[k] = h;
      CHECK(ga[k] == doctest::Approx((g.value(Vector(a + e), b) - g.value(Vector(a - e), b)) / (2 * h)).epsilon(1e-8));
      CHECK(gb[k] == doctest::Approx((g.value(a, Vector(b + e)) - g.value(a, Vector(b - e))) / (2 * h)).epsilon(1e-8));
      CHECK(c.grad_first(a, b)[k] ==
            doctest::Approx((c.value(Vector(a + e), b) - c.value(Vector(a - e), b)) / (2 * h)).epsilon(1e-8));
      const Vector col = (g.grad_first(Vector(a + e), b) - g.grad_first(Vector(a - e), b)) / (2 * h);
      for (Index r = 0; r < 3; ++r) CHECK(ha(r, k) == doctest::Approx(col[r]).epsilon(1e-7));
    }
    CHECK(c.hessian_first(a, b).isZero(0));
  }
}
