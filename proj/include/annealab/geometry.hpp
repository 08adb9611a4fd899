#pragma once

// Product of unit spheres (S^(d-1))^N. Points are stored column-wise: a
// configuration of N embeddings in R^d is a d x N matrix whose columns have
// unit norm.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "annealab/error.hpp"
#include "annealab/random.hpp"

namespace annealab {

template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using PointsT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorT<double>;
using Points = PointsT<double>;
using Index = Eigen::Index;

inline constexpr double kUnitTolerance = 1e-12;
inline constexpr double kTangentTolerance = 1e-10;
inline constexpr double kZeroNormThreshold = 1e-300;

/// v / |v|. Throws ZeroVector when |v| < 1e-300.
template <typename Derived>
VectorT<typename Derived::Scalar> normalized_or_throw(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = v.norm();
  if (!(norm >= Scalar(kZeroNormThreshold))) {
    throw Error(ErrorCode::ZeroVector, "cannot project a (near-)zero vector onto the sphere");
  }
  return v / norm;
}

/// g - (g.z) z, the component of g in the tangent plane at unit z.
template <typename DerivedZ, typename DerivedG>
VectorT<typename DerivedG::Scalar> tangent_project(const Eigen::MatrixBase<DerivedZ>& z,
                                                   const Eigen::MatrixBase<DerivedG>& g) {
  if (z.size() != g.size()) {
    throw Error(ErrorCode::DimensionMismatch, "tangent_project: base and vector differ in dimension");
  }
  return g - g.dot(z) * z;
}

/// Projection retraction: normalize(z + step). Returns z unchanged for a zero step.
template <typename DerivedZ, typename DerivedS>
VectorT<typename DerivedZ::Scalar> retract_vector(const Eigen::MatrixBase<DerivedZ>& z,
                                                  const Eigen::MatrixBase<DerivedS>& step) {
  if (z.size() != step.size()) {
    throw Error(ErrorCode::DimensionMismatch, "retract: base and step differ in dimension");
  }
  if (step.isZero(0)) return z;
  return normalized_or_throw(z + step);
}

/// Point on S^(d-1), d >= 2, with |v| = 1 within 1e-12.
class UnitVector {
 public:
  /// Wraps an already-normalized vector; throws if it is not unit or d < 2.
  static UnitVector from_unit(Vector v);

  const Vector& coords() const noexcept { return coords_; }
  Index dim() const noexcept { return coords_.size(); }
  double operator[](Index k) const { return coords_[k]; }

  /// Point on S^1 at angle theta.
  static UnitVector on_circle(double theta);

 private:
  explicit UnitVector(Vector v) : coords_(std::move(v)) {}
  friend UnitVector project_to_sphere(const Vector& v);
  Vector coords_;
};

UnitVector project_to_sphere(const Vector& v);
Vector tangent_project(const UnitVector& z, const Vector& g);
UnitVector retract(const UnitVector& z, const Vector& step);

/// arccos(clamp(a.b, -1, 1)).
double geodesic_distance(const UnitVector& a, const UnitVector& b);

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar geodesic_distance(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "geodesic_distance: dimensions differ");
  }
  using std::acos;
  return acos(std::clamp(a.dot(b), Scalar(-1), Scalar(1)));
}

/// Ordered list of N >= 2 unit vectors sharing one dimension d >= 2.
class Configuration {
 public:
  /// Validates every column; throws InvalidArgument on any breach.
  explicit Configuration(Points points);

  /// Normalizes every column first.
  static Configuration from_raw(const Points& raw);

  /// Points on S^1 at the given angles.
  static Configuration on_circle(const std::vector<double>& angles);

  const Points& points() const noexcept { return points_; }
  Index size() const noexcept { return points_.cols(); }
  Index dim() const noexcept { return points_.rows(); }
  UnitVector point(Index i) const { return UnitVector::from_unit(points_.col(i)); }

  /// Largest |1 - |z_i|| over the columns.
  static double unit_defect(const Points& points);

 private:
  Points points_;
};

/// Per-point tangent vectors attached to a base configuration.
class TangentVector {
 public:
  /// Throws InvalidArgument if any column fails |<v_i, z_i>| <= 1e-10.
  TangentVector(const Configuration& base, Points vectors);

  const Points& vectors() const noexcept { return vectors_; }
  Index size() const noexcept { return vectors_.cols(); }

  static double tangency_defect(const Points& base, const Points& vectors);

 private:
  Points vectors_;
};

/// Column-wise tangent projection (in place) of g against base.
void tangent_project_columns(const Points& base, Points& g);

/// N points drawn independently and uniformly on S^(d-1) (normalized
/// isotropic Gaussians). Requires n >= 2, d >= 2.
Configuration sample_uniform_configuration(Index n, Index d, RandomStream& rng);

/// Uniform points without the N >= 2 restriction (single-particle landscapes).
Points sample_uniform_points(Index n, Index d, RandomStream& rng);

/// Standard Gaussian in each tangent plane: ambient Gaussian, then projected.
TangentVector sample_tangent_gaussian(const Configuration& z, RandomStream& rng);

/// Allocation-free variant used by the integrator; `out` is resized on demand.
void sample_tangent_gaussian(const Points& base, RandomStream& rng, Points& out);

/// Angle of a point on S^1 in [-pi, pi).
double circle_angle(const Eigen::Ref<const Vector>& z);

/// Wraps any angle into [-pi, pi).
double wrap_angle(double theta);

}  // namespace annealab
