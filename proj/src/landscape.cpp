#include "annealab/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace annealab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBisectionTolerance = 1e-12;
constexpr double kDuplicateTolerance = 1e-9;
constexpr double kPlateauTolerance = 1e-12;
constexpr double kGlobalTolerance = 1e-9;
constexpr double kSaddleProximity = 1e-10;

LandscapeValue eval_symmetric(double t) {
  return {std::cos(2.0 * t), -2.0 * std::sin(2.0 * t), -4.0 * std::cos(2.0 * t)};
}

LandscapeValue eval_tilted(double gamma, double t) {
  const auto base = eval_symmetric(t);
  return {base.value + gamma * std::sin(t), base.slope + gamma * std::cos(t), base.curvature - gamma * std::sin(t)};
}

Points slice_points(const InfoNceSlice& s, double t) {
  Points z = s.frozen;
  z(0, s.moving) = std::cos(t);
  z(1, s.moving) = std::sin(t);
  return z;
}

// Active-branch derivatives of U0 with respect to the moving point x. Each
// pair term is max_k s_ik - s_ij; the max is represented by its lowest-index
// witness.
template <typename Sim>
LandscapeValue eval_slice_limit(const InfoNceSlice& s, const Sim& sim, double t) {
  const Points z = slice_points(s, t);
  const Index m = s.moving;
  const Vector x = z.col(m);
  Vector tangent(2);
  tangent << -std::sin(t), std::cos(t);

  Vector grad = Vector::Zero(2);
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
  double value = 0.0;
  for (const auto& pr : s.pairs.pairs()) {
    const Index i = pr.anchor;
    const Index j = pr.positive;
    const Vector si = detail::anchor_similarities<double>(z, i, sim);
    Index witness = -1;
    const double top = si.maxCoeff();
    for (Index k = 0; k < si.size(); ++k) {
      if (k != i && top - si[k] <= kTieTolerance) {
        witness = k;
        break;
      }
    }
    value += top - si[j];
    // s is symmetric, so derivatives in the second slot equal those of s(x, .) in the first.
    if (i == m) {
      grad += sim.grad_first(x, z.col(witness)) - sim.grad_first(x, z.col(j));
      hess += sim.hessian_first(x, z.col(witness)) - sim.hessian_first(x, z.col(j));
    } else {
      if (witness == m) {
        grad += sim.grad_first(x, z.col(i));
        hess += sim.hessian_first(x, z.col(i));
      }
      if (j == m) {
        grad -= sim.grad_first(x, z.col(i));
        hess -= sim.hessian_first(x, z.col(i));
      }
    }
  }
  const double w = 1.0 / static_cast<double>(s.pairs.size());
  value *= w;
  grad *= w;
  hess *= w;
  // d/dt x = tangent, d2/dt2 x = -x.
  return {value, grad.dot(tangent), tangent.dot(hess * tangent) - grad.dot(x)};
}

double slice_scaled_slope(const InfoNceSlice& s, double beta, double t) {
  const Points z = slice_points(s, t);
  const Points g = infonce_euclidean_gradient(z, beta, s.kind, s.pairs);
  Vector tangent(2);
  tangent << -std::sin(t), std::cos(t);
  return g.col(s.moving).dot(tangent) / beta;
}

LandscapeValue eval_slice(const InfoNceSlice& s, double t) {
  if (!s.beta) {
    return visit_similarity(s.kind, [&](const auto& sim) { return eval_slice_limit(s, sim, t); });
  }
  const double beta = *s.beta;
  const Points z = slice_points(s, t);
  const double value = infonce_loss(z, beta, s.kind, s.pairs) / beta;
  const double slope = slice_scaled_slope(s, beta, t);
  constexpr double h = 1e-5;
  const double curvature = (slice_scaled_slope(s, beta, t + h) - slice_scaled_slope(s, beta, t - h)) / (2.0 * h);
  return {value, slope, curvature};
}

double grid_angle(int g) { return -kPi + 2.0 * kPi * static_cast<double>(g) / kCriticalGridSize; }

}  // namespace

double angular_difference(double a, double b) {
  if (const double raw = a - b; raw > -kPi && raw <= kPi) return raw;
  double d = std::remainder(a - b, 2.0 * kPi);
  if (d <= -kPi) d += 2.0 * kPi;
  return d;
}

LandscapeSpec::LandscapeSpec(LandscapeFamily family) : family_(std::move(family)) {
  if (const auto* tilt = std::get_if<TiltedDoubleWell>(&family_)) {
    if (!(tilt->gamma >= 0.0 && tilt->gamma < 0.5)) {
      throw Error(ErrorCode::InvalidArgument, "tilted double well needs 0 <= gamma < 0.5");
    }
  }
  if (const auto* slice = std::get_if<InfoNceSlice>(&family_)) {
    if (slice->frozen.rows() != 2 || slice->frozen.cols() != slice->pairs.n()) {
      throw Error(ErrorCode::DimensionMismatch, "an InfoNCE slice lives on S^1 and needs one column per embedding");
    }
    if (slice->moving < 0 || slice->moving >= slice->frozen.cols()) {
      throw Error(ErrorCode::InvalidArgument, "moving embedding index out of range");
    }
    if (slice->beta && !(*slice->beta > 0.0 && std::isfinite(*slice->beta))) {
      throw Error(ErrorCode::InvalidArgument, "slice beta must be finite and > 0");
    }
    validate(slice->kind);
  }
  if (smooth()) {
    scan_smooth();
  } else {
    scan_values();
  }
  finish_structure();
}

bool LandscapeSpec::smooth() const noexcept { return !std::holds_alternative<InfoNceSlice>(family_); }

std::string LandscapeSpec::name() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, SymmetricDoubleWell>) os << "symmetric_double_well";
        if constexpr (std::is_same_v<T, TiltedDoubleWell>) os << "tilted_double_well(gamma=" << f.gamma << ")";
        if constexpr (std::is_same_v<T, InfoNceSlice>) {
          os << "infonce_slice(n=" << f.frozen.cols() << ", moving=" << f.moving << ", " << kind_name(f.kind);
          if (f.beta) os << ", beta=" << *f.beta;
          os << ")";
        }
      },
      family_);
  return os.str();
}

LandscapeValue LandscapeSpec::eval(double theta) const {
  return std::visit(
      [&](const auto& f) -> LandscapeValue {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, SymmetricDoubleWell>) return eval_symmetric(theta);
        if constexpr (std::is_same_v<T, TiltedDoubleWell>) return eval_tilted(f.gamma, theta);
        if constexpr (std::is_same_v<T, InfoNceSlice>) return eval_slice(f, theta);
      },
      family_);
}

void LandscapeSpec::scan_smooth() {
  const int n = kCriticalGridSize;
  std::vector<double> slope(n);
  for (int g = 0; g < n; ++g) slope[g] = eval(grid_angle(g)).slope;

  std::vector<double> roots;
  for (int g = 0; g < n; ++g) {
    double a = grid_angle(g);
    double b = a + 2.0 * kPi / n;
    const double fa = slope[g];
    const double fb = slope[(g + 1) % n];
    if (fa == 0.0) {
      roots.push_back(a);
      continue;
    }
    if (!(fa * fb < 0.0)) continue;
    const bool rising = fa < 0.0;
    while (b - a > kBisectionTolerance) {
      const double mid = 0.5 * (a + b);
      const double fm = eval(mid).slope;
      if ((fm < 0.0) == rising) {
        a = mid;
      } else {
        b = mid;
      }
    }
    roots.push_back(0.5 * (a + b));
  }

  for (double& r : roots) r = wrap_angle(r);
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double r : roots) {
    if (unique.empty() || std::abs(angular_difference(r, unique.back())) > kDuplicateTolerance) unique.push_back(r);
  }
  if (unique.size() > 1 && std::abs(angular_difference(unique.front(), unique.back())) <= kDuplicateTolerance) {
    unique.pop_back();
  }

  for (double r : unique) {
    const auto v = eval(r);
    if (std::abs(v.curvature) < kCurvatureFloor) {
      std::ostringstream os;
      os << "flat critical point at angle " << r << " (|U''| = " << std::abs(v.curvature) << ")";
      throw Error(ErrorCode::DegenerateCritical, os.str());
    }
    critical_.push_back({r, v.value, v.curvature > 0.0 ? CriticalType::Minimum : CriticalType::Saddle, v.curvature});
  }
}

void LandscapeSpec::scan_values() {
  const int n = kCriticalGridSize;
  const double h = 2.0 * kPi / n;
  std::vector<double> v(n);
  for (int g = 0; g < n; ++g) v[g] = eval(grid_angle(g)).value;

  // Start at a run boundary so no run wraps past the scan origin.
  int start = -1;
  for (int g = 0; g < n; ++g) {
    if (std::abs(v[g] - v[(g + n - 1) % n]) > kPlateauTolerance) {
      start = g;
      break;
    }
  }
  if (start < 0) throw Error(ErrorCode::DegenerateCritical, "the slice is flat");

  struct Run {
    int first;
    int length;
    double value;
  };
  std::vector<Run> runs;
  for (int off = 0; off < n; ++off) {
    const int g = (start + off) % n;
    if (!runs.empty() && std::abs(v[g] - v[(g + n - 1) % n]) <= kPlateauTolerance) {
      ++runs.back().length;
    } else {
      runs.push_back({g, 1, v[g]});
    }
  }
  const std::size_t r = runs.size();
  for (std::size_t k = 0; k < r; ++k) {
    const double prev = runs[(k + r - 1) % r].value;
    const double next = runs[(k + 1) % r].value;
    const double here = runs[k].value;
    const bool is_min = prev > here && next > here;
    const bool is_max = prev < here && next < here;
    if (!is_min && !is_max) continue;
    const double center = wrap_angle(grid_angle(runs[k].first) + 0.5 * (runs[k].length - 1) * h);
    const auto val = eval(center);
    critical_.push_back({center, val.value, is_min ? CriticalType::Minimum : CriticalType::Saddle, val.curvature,
                         0.5 * (runs[k].length - 1) * h});
  }
  std::sort(critical_.begin(), critical_.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.angle < b.angle; });
}

void LandscapeSpec::finish_structure() {
  for (std::size_t k = 0; k < critical_.size(); ++k) {
    (critical_[k].type == CriticalType::Minimum ? minima_ : saddles_).push_back(k);
  }
  if (minima_.empty() || minima_.size() != saddles_.size()) {
    throw Error(ErrorCode::DegenerateCritical, "minima and saddles do not alternate around the circle");
  }
  for (std::size_t k = 0; k < critical_.size(); ++k) {
    if (critical_[k].type == critical_[(k + 1) % critical_.size()].type) {
      throw Error(ErrorCode::DegenerateCritical, "minima and saddles do not alternate around the circle");
    }
  }

  // Arc after saddle s (counter-clockwise) holds exactly one minimum.
  const std::size_t ns = saddles_.size();
  arc_minimum_.assign(ns, 0);
  for (std::size_t s = 0; s < ns; ++s) {
    const std::size_t next_crit = (saddles_[s] + 1) % critical_.size();
    arc_minimum_[s] = static_cast<std::size_t>(std::find(minima_.begin(), minima_.end(), next_crit) - minima_.begin());
  }

  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t m : minima_) lowest = std::min(lowest, critical_[m].value);

  const std::size_t nm = minima_.size();
  barriers_.delta_e.assign(nm, 0.0);
  barriers_.escape_saddle.assign(nm, 0);
  barriers_.global.assign(nm, false);
  for (std::size_t s = 0; s < ns; ++s) {
    const std::size_t m = arc_minimum_[s];
    const std::size_t right = (s + 1) % ns;
    const double left_height = critical_[saddles_[s]].value;
    const double right_height = critical_[saddles_[right]].value;
    barriers_.escape_saddle[m] = left_height <= right_height ? s : right;
    barriers_.delta_e[m] = std::min(left_height, right_height) - critical_[minima_[m]].value;
    barriers_.global[m] = critical_[minima_[m]].value <= lowest + kGlobalTolerance;
  }

  if (nm == 1) {
    barriers_.delta_e_max = 0.0;
    barriers_.c_star = std::numeric_limits<double>::infinity();
    return;
  }
  const bool any_suboptimal = std::any_of(barriers_.global.begin(), barriers_.global.end(), [](bool g) { return !g; });
  double worst = 0.0;
  for (std::size_t m = 0; m < nm; ++m) {
    if (!any_suboptimal || !barriers_.global[m]) worst = std::max(worst, barriers_.delta_e[m]);
  }
  barriers_.delta_e_max = worst;
  barriers_.c_star = 1.0 / worst;
}

BasinLabel LandscapeSpec::basin_of(double theta) const {
  const double t = wrap_angle(theta);
  const std::size_t ns = saddles_.size();
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& sp = critical_[saddles_[s]];
    if (std::abs(angular_difference(t, sp.angle)) <= sp.plateau_halfwidth + kSaddleProximity) {
      return BasinLabel::of_saddle();
    }
  }
  // Saddles are sorted by angle; the arc containing t starts at the last
  // saddle at or below t (wrapping to the final saddle).
  std::size_t arc = ns - 1;
  for (std::size_t s = 0; s < ns; ++s) {
    if (critical_[saddles_[s]].angle <= t) arc = s;
  }
  return BasinLabel::of_minimum(arc_minimum_[arc]);
}

std::size_t LandscapeSpec::global_minimum() const {
  for (std::size_t m = 0; m < minima_.size(); ++m) {
    if (barriers_.global[m]) return m;
  }
  return 0;
}

std::size_t LandscapeSpec::shallowest_suboptimal_or_first() const {
  std::size_t best = minima_.size();
  for (std::size_t m = 0; m < minima_.size(); ++m) {
    if (barriers_.global[m]) continue;
    if (best == minima_.size() || critical_[minima_[m]].value > critical_[minima_[best]].value) best = m;
  }
  return best == minima_.size() ? 0 : best;
}

LandscapeValue landscape_eval(const LandscapeSpec& spec, double theta) { return spec.eval(theta); }
const std::vector<CriticalPoint>& critical_points(const LandscapeSpec& spec) { return spec.critical_points(); }
const BarrierSummary& barrier_heights(const LandscapeSpec& spec) { return spec.barriers(); }
BasinLabel basin_of(const LandscapeSpec& spec, double theta) { return spec.basin_of(theta); }

double kramers_prefactor(const LandscapeSpec& spec, const BasinLabel& basin) {
  if (basin.saddle || basin.minimum >= spec.minima().size()) {
    throw Error(ErrorCode::InvalidArgument, "kramers_prefactor needs the label of a minimum");
  }
  const auto& mn = spec.minimum(basin.minimum);
  const auto& sd = spec.saddle(spec.barriers().escape_saddle[basin.minimum]);
  if (std::abs(mn.curvature) < kCurvatureFloor || std::abs(sd.curvature) < kCurvatureFloor) {
    throw Error(ErrorCode::DegenerateCritical, "prefactor undefined at a flat minimum or saddle");
  }
  return std::sqrt(mn.curvature * std::abs(sd.curvature)) / (2.0 * kPi);
}

double eyring_kramers_prefactor(const Eigen::MatrixXd& hessian_min, const Eigen::MatrixXd& hessian_saddle) {
  if (hessian_min.rows() != hessian_saddle.rows() || hessian_min.rows() != hessian_min.cols() ||
      hessian_saddle.rows() != hessian_saddle.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "Hessians must be square and of equal size");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> at_min(hessian_min, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> at_saddle(hessian_saddle, Eigen::EigenvaluesOnly);
  const Vector lm = at_min.eigenvalues();
  const Vector ls = at_saddle.eigenvalues();  // ascending
  if (lm.minCoeff() < kCurvatureFloor) {
    throw Error(ErrorCode::DegenerateCritical, "Hessian at the minimum is not positive definite");
  }
  const Index negatives = (ls.array() < 0.0).count();
  if (negatives != 1 || ls.cwiseAbs().minCoeff() < kCurvatureFloor) {
    throw Error(ErrorCode::DegenerateCritical, "saddle Hessian must have exactly one negative eigenvalue");
  }
  const double det_min = lm.prod();
  const double det_saddle = std::abs(ls.prod());
  return std::abs(ls[0]) / (2.0 * kPi) * std::sqrt(det_min / det_saddle);
}

LandscapeSpec build_infonce_micro(Index n, const SimilarityKind& kind, const PairSet& pairs, Index moving,
                                  const std::vector<double>& angles, std::optional<double> beta) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "an InfoNCE slice needs n >= 3 embeddings");
  if (static_cast<Index>(angles.size()) != n || pairs.n() != n) {
    throw Error(ErrorCode::DimensionMismatch, "angles and pair set must both cover n embeddings");
  }
  Points frozen(2, n);
  for (Index k = 0; k < n; ++k) {
    frozen(0, k) = std::cos(angles[static_cast<std::size_t>(k)]);
    frozen(1, k) = std::sin(angles[static_cast<std::size_t>(k)]);
  }
  return LandscapeSpec(InfoNceSlice{std::move(frozen), moving, kind, pairs, beta});
}

}  // namespace annealab
