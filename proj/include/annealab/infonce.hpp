#pragma once

// InfoNCE potential on a configuration of unit embeddings.
//
// For an anchor i with candidate set {k != i} (the positive included) and
// inverse temperature beta,
//
//   p_i(k) = exp(beta s_ik) / sum_l exp(beta s_il),   l_ij = -log p_i(j),
//
// and the loss is the average of l_ij over the positive pairs. Every
// log-sum-exp factors out m_i = max_k s_ik, so the loss stays finite for any
// beta >= 0 and l_ij = beta (m_i - s_ij) + log sum_k exp(beta (s_ik - m_i)).
//
// The templated overloads take raw d x N matrices (columns need not be unit,
// which finite-difference checks rely on) and any similarity policy; the
// non-template overloads dispatch on SimilarityKind.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "annealab/error.hpp"
#include "annealab/geometry.hpp"
#include "annealab/similarity.hpp"

namespace annealab {

struct PositivePair {
  Index anchor = 0;
  Index positive = 0;
  bool operator==(const PositivePair&) const = default;
};

/// Positive pairs over N embeddings. Candidates of anchor i are all k != i.
class PairSet {
 public:
  /// Throws InvalidArgument on an empty list, out-of-range index or i == j.
  PairSet(std::vector<PositivePair> pairs, Index n);

  /// (i, i+1 mod n) for every i.
  static PairSet ring(Index n);

  const std::vector<PositivePair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  Index n() const noexcept { return n_; }
  bool contains(Index anchor, Index positive) const;

 private:
  std::vector<PositivePair> pairs_;
  Index n_;
};

inline constexpr double kTieTolerance = 1e-12;

namespace detail {

inline void check_instance(Index cols, const PairSet& pairs) {
  if (cols != pairs.n()) {
    throw Error(ErrorCode::DimensionMismatch, "pair set was built for a different number of embeddings");
  }
}

template <typename Scalar>
void check_beta(Scalar beta, bool strictly_positive) {
  using std::isfinite;
  const bool ok = isfinite(beta) && (strictly_positive ? beta > Scalar(0) : beta >= Scalar(0));
  if (!ok) {
    throw Error(ErrorCode::InvalidArgument,
                strictly_positive ? "beta must be finite and > 0" : "beta must be finite and >= 0");
  }
}

/// Similarities of anchor i to every column; entry i is left as -inf.
template <typename Scalar, typename Sim>
VectorT<Scalar> anchor_similarities(const PointsT<Scalar>& z, Index i, const Sim& sim) {
  VectorT<Scalar> s(z.cols());
  for (Index k = 0; k < z.cols(); ++k) {
    s[k] = (k == i) ? -std::numeric_limits<Scalar>::infinity() : sim.value(z.col(i), z.col(k));
  }
  return s;
}

/// log sum_{k != i} exp(beta (s_k - max_s)); always >= 0 since the max term is 1.
template <typename Scalar>
Scalar shifted_log_partition(const VectorT<Scalar>& s, Index i, Scalar max_s, Scalar beta) {
  using std::exp;
  using std::log;
  Scalar acc(0);
  for (Index k = 0; k < s.size(); ++k) {
    if (k != i) acc += exp(beta * (s[k] - max_s));
  }
  return log(acc);
}

template <typename Scalar>
Scalar max_candidate(const VectorT<Scalar>& s) {
  return s.maxCoeff();  // the anchor entry is -inf
}

}  // namespace detail

/// Gibbs probabilities over the candidates of anchor i, returned as a length-N
/// vector with entry i set to zero.
template <typename Scalar, typename Sim>
VectorT<Scalar> softmax_probs(const PointsT<Scalar>& z, Index i, Scalar beta, const Sim& sim) {
  using std::exp;
  detail::check_beta(beta, false);
  const VectorT<Scalar> s = detail::anchor_similarities(z, i, sim);
  const Scalar m = detail::max_candidate(s);
  VectorT<Scalar> p(z.cols());
  Scalar total(0);
  for (Index k = 0; k < z.cols(); ++k) {
    p[k] = (k == i) ? Scalar(0) : exp(beta * (s[k] - m));
    total += p[k];
  }
  return p / total;
}

template <typename Scalar, typename Sim>
Scalar pair_loss(const PointsT<Scalar>& z, Index i, Index j, Scalar beta, const Sim& sim) {
  const VectorT<Scalar> s = detail::anchor_similarities(z, i, sim);
  const Scalar m = detail::max_candidate(s);
  return beta * (m - s[j]) + detail::shifted_log_partition(s, i, m, beta);
}

template <typename Scalar, typename Sim>
Scalar infonce_loss(const PointsT<Scalar>& z, Scalar beta, const Sim& sim, const PairSet& pairs) {
  detail::check_instance(z.cols(), pairs);
  detail::check_beta(beta, false);
  Scalar total(0);
  for (const auto& pr : pairs.pairs()) total += pair_loss(z, pr.anchor, pr.positive, beta, sim);
  return total / Scalar(pairs.size());
}

/// U0(Z) = mean over pairs of (max_{k != i} s_ik - s_ij); the beta -> infinity
/// limit of loss / beta.
template <typename Scalar, typename Sim>
Scalar limiting_potential(const PointsT<Scalar>& z, const Sim& sim, const PairSet& pairs) {
  detail::check_instance(z.cols(), pairs);
  Scalar total(0);
  for (const auto& pr : pairs.pairs()) {
    const VectorT<Scalar> s = detail::anchor_similarities(z, pr.anchor, sim);
    total += detail::max_candidate(s) - s[pr.positive];
  }
  return total / Scalar(pairs.size());
}

/// loss / beta - U0, evaluated in the factored form
/// mean over pairs of (1/beta) log sum_k exp(beta (s_ik - m_i)).
template <typename Scalar, typename Sim>
Scalar scaled_loss_gap(const PointsT<Scalar>& z, Scalar beta, const Sim& sim, const PairSet& pairs) {
  detail::check_instance(z.cols(), pairs);
  detail::check_beta(beta, true);
  Scalar total(0);
  for (const auto& pr : pairs.pairs()) {
    const VectorT<Scalar> s = detail::anchor_similarities(z, pr.anchor, sim);
    total += detail::shifted_log_partition(s, pr.anchor, detail::max_candidate(s), beta) / beta;
  }
  return total / Scalar(pairs.size());
}

/// Candidates of anchor i whose similarity is within 1e-12 of the maximum,
/// in increasing index order (the first entry is the canonical witness).
template <typename Scalar, typename Sim>
std::vector<Index> argmax_candidates(const PointsT<Scalar>& z, Index i, const Sim& sim) {
  const VectorT<Scalar> s = detail::anchor_similarities(z, i, sim);
  const Scalar m = detail::max_candidate(s);
  std::vector<Index> out;
  for (Index k = 0; k < s.size(); ++k) {
    if (k != i && m - s[k] <= Scalar(kTieTolerance)) out.push_back(k);
  }
  return out;
}

/// Gradient of l_ij with respect to the anchor z_i only: beta (mu_i - grad s_ij),
/// with mu_i the p_i-expectation of grad_{z_i} s_ik.
template <typename Scalar, typename Sim>
VectorT<Scalar> infonce_anchor_gradient(const PointsT<Scalar>& z, Index i, Index j, Scalar beta, const Sim& sim) {
  detail::check_beta(beta, true);
  const VectorT<Scalar> p = softmax_probs(z, i, beta, sim);
  VectorT<Scalar> mu = VectorT<Scalar>::Zero(z.rows());
  for (Index k = 0; k < z.cols(); ++k) {
    if (k != i) mu += p[k] * sim.grad_first(z.col(i), z.col(k));
  }
  return beta * (mu - sim.grad_first(z.col(i), z.col(j)));
}

/// Euclidean gradient of the averaged loss with respect to every embedding
/// (d x N). Each z_m collects its anchor, positive and candidate roles.
template <typename Scalar, typename Sim>
PointsT<Scalar> infonce_euclidean_gradient(const PointsT<Scalar>& z, Scalar beta, const Sim& sim,
                                           const PairSet& pairs) {
  detail::check_instance(z.cols(), pairs);
  detail::check_beta(beta, true);
  const Scalar w = Scalar(1) / Scalar(pairs.size());
  PointsT<Scalar> g = PointsT<Scalar>::Zero(z.rows(), z.cols());
  for (const auto& pr : pairs.pairs()) {
    const Index i = pr.anchor;
    const Index j = pr.positive;
    const VectorT<Scalar> p = softmax_probs(z, i, beta, sim);
    for (Index k = 0; k < z.cols(); ++k) {
      if (k == i || p[k] == Scalar(0)) continue;
      const Scalar c = w * beta * p[k];
      g.col(i) += c * sim.grad_first(z.col(i), z.col(k));
      g.col(k) += c * sim.grad_second(z.col(i), z.col(k));
    }
    g.col(i) -= w * beta * sim.grad_first(z.col(i), z.col(j));
    g.col(j) -= w * beta * sim.grad_second(z.col(i), z.col(j));
  }
  return g;
}

/// Hessian of l_ij with respect to z_i in ambient coordinates:
///   beta^2 Cov_{k~p_i}[grad s_ik] + beta (E_{k~p_i}[H_ik] - H_ij).
template <typename Scalar, typename Sim>
PointsT<Scalar> infonce_hessian_anchor(const PointsT<Scalar>& z, Index i, Index j, Scalar beta, const Sim& sim) {
  detail::check_beta(beta, true);
  const Index d = z.rows();
  const VectorT<Scalar> p = softmax_probs(z, i, beta, sim);
  VectorT<Scalar> mu = VectorT<Scalar>::Zero(d);
  PointsT<Scalar> second_moment = PointsT<Scalar>::Zero(d, d);
  PointsT<Scalar> expected_hessian = PointsT<Scalar>::Zero(d, d);
  for (Index k = 0; k < z.cols(); ++k) {
    if (k == i) continue;
    const VectorT<Scalar> gk = sim.grad_first(z.col(i), z.col(k));
    mu += p[k] * gk;
    second_moment += p[k] * gk * gk.transpose();
    expected_hessian += p[k] * sim.hessian_first(z.col(i), z.col(k));
  }
  const PointsT<Scalar> cov = second_moment - mu * mu.transpose();
  PointsT<Scalar> h = beta * beta * cov + beta * (expected_hessian - sim.hessian_first(z.col(i), z.col(j)));
  // Cov is symmetric in exact arithmetic; remove rounding asymmetry.
  return Scalar(0.5) * (h + h.transpose());
}

/// Loss value plus both gradients at a configuration.
struct PotentialEval {
  double loss = 0.0;
  Points euclidean_gradient;  // d x N
  TangentVector riemannian_gradient;
};

template <typename F>
decltype(auto) visit_similarity(const SimilarityKind& kind, F&& f) {
  return std::visit(std::forward<F>(f), kind);
}

VectorT<double> softmax_probs(const Configuration& z, Index i, double beta, const SimilarityKind& kind,
                              const PairSet& pairs);
double infonce_loss(const Points& z, double beta, const SimilarityKind& kind, const PairSet& pairs);
double infonce_loss(const Configuration& z, double beta, const SimilarityKind& kind, const PairSet& pairs);
/// F_beta = loss / beta.
double scaled_loss(const Configuration& z, double beta, const SimilarityKind& kind, const PairSet& pairs);
Points infonce_euclidean_gradient(const Points& z, double beta, const SimilarityKind& kind, const PairSet& pairs);
PotentialEval infonce_gradient(const Configuration& z, double beta, const SimilarityKind& kind, const PairSet& pairs);
Vector infonce_anchor_gradient(const Points& z, Index i, Index j, double beta, const SimilarityKind& kind);
/// Requires (i, j) in pairs; throws InvalidArgument otherwise.
Points infonce_hessian_anchor(const Configuration& z, Index i, Index j, double beta, const SimilarityKind& kind,
                              const PairSet& pairs);
Points infonce_hessian_anchor(const Points& z, Index i, Index j, double beta, const SimilarityKind& kind);
double limiting_potential(const Points& z, const SimilarityKind& kind, const PairSet& pairs);
double limiting_potential(const Configuration& z, const SimilarityKind& kind, const PairSet& pairs);
double scaled_loss_gap(const Configuration& z, double beta, const SimilarityKind& kind, const PairSet& pairs);
std::vector<Index> argmax_candidates(const Configuration& z, Index i, const SimilarityKind& kind);

}  // namespace annealab
