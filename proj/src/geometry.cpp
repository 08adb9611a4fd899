#include "annealab/geometry.hpp"

#include <numbers>
#include <string>

namespace annealab {

UnitVector UnitVector::from_unit(Vector v) {
  if (v.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "unit vectors need dimension d >= 2");
  }
  if (std::abs(v.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::InvalidArgument, "vector is not unit within 1e-12");
  }
  return UnitVector(std::move(v));
}

UnitVector UnitVector::on_circle(double theta) {
  Vector v(2);
  v << std::cos(theta), std::sin(theta);
  return UnitVector(std::move(v));
}

UnitVector project_to_sphere(const Vector& v) {
  if (v.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "unit vectors need dimension d >= 2");
  }
  return UnitVector(normalized_or_throw(v));
}

Vector tangent_project(const UnitVector& z, const Vector& g) {
  return tangent_project(z.coords(), g);
}

UnitVector retract(const UnitVector& z, const Vector& step) {
  return UnitVector::from_unit(retract_vector(z.coords(), step));
}

double geodesic_distance(const UnitVector& a, const UnitVector& b) {
  return geodesic_distance(a.coords(), b.coords());
}

double Configuration::unit_defect(const Points& points) {
  double worst = 0.0;
  for (Index i = 0; i < points.cols(); ++i) {
    worst = std::max(worst, std::abs(points.col(i).norm() - 1.0));
  }
  return worst;
}

Configuration::Configuration(Points points) : points_(std::move(points)) {
  if (points_.cols() < 2) {
    throw Error(ErrorCode::InvalidArgument, "a configuration needs N >= 2 points");
  }
  if (points_.rows() < 2) {
    throw Error(ErrorCode::InvalidArgument, "a configuration needs dimension d >= 2");
  }
  if (!points_.allFinite() || unit_defect(points_) > kUnitTolerance) {
    throw Error(ErrorCode::InvalidArgument, "configuration points must be unit within 1e-12");
  }
}

Configuration Configuration::from_raw(const Points& raw) {
  Points p(raw.rows(), raw.cols());
  for (Index i = 0; i < raw.cols(); ++i) p.col(i) = normalized_or_throw(raw.col(i));
  return Configuration(std::move(p));
}

Configuration Configuration::on_circle(const std::vector<double>& angles) {
  Points p(2, static_cast<Index>(angles.size()));
  for (std::size_t i = 0; i < angles.size(); ++i) {
    p(0, static_cast<Index>(i)) = std::cos(angles[i]);
    p(1, static_cast<Index>(i)) = std::sin(angles[i]);
  }
  return Configuration(std::move(p));
}

double TangentVector::tangency_defect(const Points& base, const Points& vectors) {
  double worst = 0.0;
  for (Index i = 0; i < base.cols(); ++i) {
    worst = std::max(worst, std::abs(base.col(i).dot(vectors.col(i))));
  }
  return worst;
}

TangentVector::TangentVector(const Configuration& base, Points vectors) : vectors_(std::move(vectors)) {
  if (vectors_.rows() != base.dim() || vectors_.cols() != base.size()) {
    throw Error(ErrorCode::DimensionMismatch, "tangent vector shape does not match its base");
  }
  if (tangency_defect(base.points(), vectors_) > kTangentTolerance) {
    throw Error(ErrorCode::InvalidArgument, "tangent vectors must be orthogonal to their base points");
  }
}

void tangent_project_columns(const Points& base, Points& g) {
  for (Index i = 0; i < base.cols(); ++i) {
    g.col(i) -= g.col(i).dot(base.col(i)) * base.col(i);
  }
}

Points sample_uniform_points(Index n, Index d, RandomStream& rng) {
  if (n < 1 || d < 2) {
    throw Error(ErrorCode::InvalidArgument, "uniform sampling needs n >= 1 and d >= 2");
  }
  Points p(d, n);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d; ++k) p(k, i) = rng.normal();
    p.col(i) = normalized_or_throw(p.col(i));
  }
  return p;
}

Configuration sample_uniform_configuration(Index n, Index d, RandomStream& rng) {
  if (n < 2 || d < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "sample_uniform_configuration needs n >= 2 and d >= 2 (got n=" + std::to_string(n) +
                    ", d=" + std::to_string(d) + ")");
  }
  return Configuration(sample_uniform_points(n, d, rng));
}

void sample_tangent_gaussian(const Points& base, RandomStream& rng, Points& out) {
  out.resize(base.rows(), base.cols());
  for (Index i = 0; i < base.cols(); ++i) {
    for (Index k = 0; k < base.rows(); ++k) out(k, i) = rng.normal();
  }
  tangent_project_columns(base, out);
}

TangentVector sample_tangent_gaussian(const Configuration& z, RandomStream& rng) {
  Points out;
  sample_tangent_gaussian(z.points(), rng, out);
  return TangentVector(z, std::move(out));
}

double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  if (theta >= -pi && theta < pi) return theta;
  double w = std::remainder(theta, 2.0 * pi);  // (-pi, pi]
  if (w >= pi) w -= 2.0 * pi;
  return w;
}

double circle_angle(const Eigen::Ref<const Vector>& z) {
  return wrap_angle(std::atan2(z[1], z[0]));
}

}  // namespace annealab
