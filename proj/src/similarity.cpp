#include "annealab/similarity.hpp"

namespace annealab {

void validate(const SimilarityKind& kind) {
  if (const auto* g = std::get_if<GaussianSimilarity>(&kind)) {
    if (!(g->sigma > 0.0) || !std::isfinite(g->sigma)) {
      throw Error(ErrorCode::InvalidArgument, "gaussian similarity needs a finite bandwidth sigma > 0");
    }
  }
}

double similarity(const SimilarityKind& kind, const UnitVector& a, const UnitVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "similarity: dimensions differ");
  }
  return std::visit([&](const auto& sim) { return sim.value(a.coords(), b.coords()); }, kind);
}

const char* kind_name(const SimilarityKind& kind) {
  return std::holds_alternative<CosineSimilarity>(kind) ? "cosine" : "gaussian";
}

}  // namespace annealab
