#pragma once

// Similarity kernels. Each policy exposes the value s(a, b), its gradients in
// either argument, and its Hessian in the first argument, all in ambient
// coordinates and templated on the scalar type. Both kernels are symmetric
// and bounded by 1.

#include <Eigen/Dense>

#include <cmath>
#include <variant>

#include "annealab/geometry.hpp"

namespace annealab {

/// s(a, b) = a . b. Linear in each argument, so its ambient Hessian is zero.
struct CosineSimilarity {
  template <typename A, typename B>
  typename A::Scalar value(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
    return a.dot(b);
  }
  template <typename A, typename B>
  VectorT<typename A::Scalar> grad_first(const Eigen::MatrixBase<A>&, const Eigen::MatrixBase<B>& b) const {
    return b;
  }
  template <typename A, typename B>
  VectorT<typename A::Scalar> grad_second(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>&) const {
    return a;
  }
  template <typename A, typename B>
  PointsT<typename A::Scalar> hessian_first(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>&) const {
    return PointsT<typename A::Scalar>::Zero(a.size(), a.size());
  }
};

/// s(a, b) = exp(-|a - b|^2 / (2 sigma^2)).
struct GaussianSimilarity {
  double sigma = 1.0;

  template <typename A, typename B>
  typename A::Scalar value(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
    using Scalar = typename A::Scalar;
    using std::exp;
    const Scalar s2 = Scalar(sigma) * Scalar(sigma);
    return exp(-(a - b).squaredNorm() / (Scalar(2) * s2));
  }
  template <typename A, typename B>
  VectorT<typename A::Scalar> grad_first(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
    using Scalar = typename A::Scalar;
    const Scalar s2 = Scalar(sigma) * Scalar(sigma);
    return -(value(a, b) / s2) * (a - b);
  }
  template <typename A, typename B>
  VectorT<typename A::Scalar> grad_second(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
    using Scalar = typename A::Scalar;
    const Scalar s2 = Scalar(sigma) * Scalar(sigma);
    return (value(a, b) / s2) * (a - b);
  }
  template <typename A, typename B>
  PointsT<typename A::Scalar> hessian_first(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
    using Scalar = typename A::Scalar;
    const Scalar s2 = Scalar(sigma) * Scalar(sigma);
    const VectorT<Scalar> diff = a - b;
    PointsT<Scalar> h = diff * diff.transpose() / (s2 * s2);
    h.diagonal().array() -= Scalar(1) / s2;
    return value(a, b) * h;
  }
};

using SimilarityKind = std::variant<CosineSimilarity, GaussianSimilarity>;

/// Throws InvalidArgument when a Gaussian bandwidth is not positive and finite.
void validate(const SimilarityKind& kind);

/// Throws DimensionMismatch on unequal dimensions.
double similarity(const SimilarityKind& kind, const UnitVector& a, const UnitVector& b);

const char* kind_name(const SimilarityKind& kind);

}  // namespace annealab
