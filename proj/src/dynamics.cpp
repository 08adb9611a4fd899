#include "annealab/dynamics.hpp"

#include <cmath>

namespace annealab {

InfoNcePotential::InfoNcePotential(SimilarityKind kind, PairSet pairs, bool scaled)
    : kind_(kind), pairs_(std::move(pairs)), scaled_(scaled) {
  validate(kind_);
}

double InfoNcePotential::energy(const Points& z, double beta) const {
  const double loss = infonce_loss(z, beta, kind_, pairs_);
  return scaled_ ? loss / beta : loss;
}

double InfoNcePotential::limit_energy(const Points& z) const { return limiting_potential(z, kind_, pairs_); }

void InfoNcePotential::gradient(const Points& z, double beta, Points& grad) const {
  grad = infonce_euclidean_gradient(z, beta, kind_, pairs_);
  if (scaled_) grad /= beta;
}

void LandscapePotential::gradient(const Points& z, double /*beta*/, Points& grad) const {
  if (z.rows() != 2 || z.cols() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "landscape potentials drive a single point on S^1");
  }
  const double slope = spec_->eval(circle_angle(z.col(0))).slope;
  grad.resize(2, 1);
  // dtheta/dz on the unit circle is the tangent (-y, x).
  grad(0, 0) = -z(1, 0) * slope;
  grad(1, 0) = z(0, 0) * slope;
}

double LearningRate::at(std::size_t k) const {
  if (!decay) return eta0;
  return eta0 / std::pow(1.0 + static_cast<double>(k), *decay);
}

const char* to_string(TimeAxis axis) { return axis == TimeAxis::SdeTime ? "sde_time" : "step_index"; }

void IntegratorConfig::validate() const {
  std::vector<std::string> problems;
  if (!(eta.eta0 > 0.0) || !std::isfinite(eta.eta0)) problems.emplace_back("eta0 must be finite and > 0");
  if (eta.decay && !(*eta.decay > 0.5 && *eta.decay <= 1.0)) {
    problems.emplace_back("learning-rate decay exponent must lie in (0.5, 1]");
  }
  if (steps < 1) problems.emplace_back("steps must be >= 1");
  if (record_every < 1) problems.emplace_back("record_every must be >= 1");
  if (!problems.empty()) throw Error(ErrorCode::InvalidArgument, "invalid integrator configuration", problems);
}

double schedule_time(const IntegratorConfig& cfg, std::size_t k) {
  if (!cfg.eta.decay) return static_cast<double>(k) * cfg.eta.eta0;
  double t = 0.0;
  for (std::size_t l = 0; l < k; ++l) t += cfg.eta.at(l);
  return t;
}

std::size_t EnsembleResult::failed() const {
  std::size_t n = 0;
  for (const auto& e : errors) n += e.empty() ? 0 : 1;
  return n;
}

}  // namespace annealab
