#include "annealab/infonce.hpp"

#include <algorithm>
#include <string>

namespace annealab {

PairSet::PairSet(std::vector<PositivePair> pairs, Index n) : pairs_(std::move(pairs)), n_(n) {
  if (pairs_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "a pair set needs at least one positive pair");
  }
  if (n_ < 2) {
    throw Error(ErrorCode::InvalidArgument, "a pair set needs N >= 2 embeddings");
  }
  for (const auto& p : pairs_) {
    if (p.anchor < 0 || p.anchor >= n_ || p.positive < 0 || p.positive >= n_) {
      throw Error(ErrorCode::InvalidArgument, "pair (" + std::to_string(p.anchor) + ", " +
                                                  std::to_string(p.positive) + ") is out of range [0, " +
                                                  std::to_string(n_) + ")");
    }
    if (p.anchor == p.positive) {
      throw Error(ErrorCode::InvalidArgument, "pair (" + std::to_string(p.anchor) + ", " +
                                                  std::to_string(p.positive) + ") pairs an embedding with itself");
    }
  }
}

PairSet PairSet::ring(Index n) {
  std::vector<PositivePair> pairs;
  for (Index i = 0; i < n; ++i) pairs.push_back({i, (i + 1) % n});
  return PairSet(std::move(pairs), n);
}

bool PairSet::contains(Index anchor, Index positive) const {
  return std::find(pairs_.begin(), pairs_.end(), PositivePair{anchor, positive}) != pairs_.end();
}

VectorT<double> softmax_probs(const Configuration& z, Index i, double beta, const SimilarityKind& kind,
                              const PairSet& pairs) {
  detail::check_instance(z.size(), pairs);
  if (i < 0 || i >= z.size()) throw Error(ErrorCode::InvalidArgument, "anchor index out of range");
  return visit_similarity(kind, [&](const auto& sim) { return softmax_probs(z.points(), i, beta, sim); });
}

double infonce_loss(const Points& z, double beta, const SimilarityKind& kind, const PairSet& pairs) {
  return visit_similarity(kind, [&](const auto& sim) { return infonce_loss(z, beta, sim, pairs); });
}

double infonce_loss(const Configuration& z, double beta, const SimilarityKind& kind, const PairSet& pairs) {
  return infonce_loss(z.points(), beta, kind, pairs);
}

double scaled_loss(const Configuration& z, double beta, const SimilarityKind& kind, const PairSet& pairs) {
  detail::check_beta(beta, true);
  return infonce_loss(z, beta, kind, pairs) / beta;
}

Points infonce_euclidean_gradient(const Points& z, double beta, const SimilarityKind& kind, const PairSet& pairs) {
  return visit_similarity(kind,
                          [&](const auto& sim) { return infonce_euclidean_gradient(z, beta, sim, pairs); });
}

PotentialEval infonce_gradient(const Configuration& z, double beta, const SimilarityKind& kind,
                               const PairSet& pairs) {
  Points g = infonce_euclidean_gradient(z.points(), beta, kind, pairs);
  Points r = g;
  tangent_project_columns(z.points(), r);
  return PotentialEval{infonce_loss(z, beta, kind, pairs), std::move(g), TangentVector(z, std::move(r))};
}

Vector infonce_anchor_gradient(const Points& z, Index i, Index j, double beta, const SimilarityKind& kind) {
  return visit_similarity(kind, [&](const auto& sim) { return infonce_anchor_gradient(z, i, j, beta, sim); });
}

Points infonce_hessian_anchor(const Points& z, Index i, Index j, double beta, const SimilarityKind& kind) {
  return visit_similarity(kind, [&](const auto& sim) { return infonce_hessian_anchor(z, i, j, beta, sim); });
}

Points infonce_hessian_anchor(const Configuration& z, Index i, Index j, double beta, const SimilarityKind& kind,
                              const PairSet& pairs) {
  detail::check_instance(z.size(), pairs);
  if (!pairs.contains(i, j)) {
    throw Error(ErrorCode::InvalidArgument, "anchor Hessian requested for a pair outside the pair set");
  }
  return infonce_hessian_anchor(z.points(), i, j, beta, kind);
}

double limiting_potential(const Points& z, const SimilarityKind& kind, const PairSet& pairs) {
  return visit_similarity(kind, [&](const auto& sim) { return limiting_potential(z, sim, pairs); });
}

double limiting_potential(const Configuration& z, const SimilarityKind& kind, const PairSet& pairs) {
  return limiting_potential(z.points(), kind, pairs);
}

double scaled_loss_gap(const Configuration& z, double beta, const SimilarityKind& kind, const PairSet& pairs) {
  return visit_similarity(kind, [&](const auto& sim) { return scaled_loss_gap(z.points(), beta, sim, pairs); });
}

std::vector<Index> argmax_candidates(const Configuration& z, Index i, const SimilarityKind& kind) {
  return visit_similarity(kind, [&](const auto& sim) { return argmax_candidates(z.points(), i, sim); });
}

}  // namespace annealab
