#pragma once

// Benchmark potentials on the circle S^1 with exactly computable critical
// structure: minima, saddles, barrier heights and Eyring-Kramers prefactors.
//
//   SymmetricDoubleWell   U(theta) = cos 2 theta
//   TiltedDoubleWell      U(theta) = cos 2 theta + gamma sin theta,  0 <= gamma < 1/2
//   InfoNceSlice          one embedding of an InfoNCE instance on S^1 moving,
//                         the others frozen; U0 (limit) or loss / beta.
//
// Analytic families locate critical points as sign changes of U' on a
// 2^16-point grid refined by bisection to 1e-12. InfoNCE slices are
// piecewise smooth (U0 has kinks and flat stretches), so their critical
// structure comes from a scan of the grid values with plateaus collapsed to
// their midpoint; angles are then accurate to the grid spacing.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "annealab/geometry.hpp"
#include "annealab/infonce.hpp"
#include "annealab/similarity.hpp"

namespace annealab {

struct SymmetricDoubleWell {};

struct TiltedDoubleWell {
  double gamma = 0.2;
};

struct InfoNceSlice {
  Points frozen;  // 2 x N; column `moving` is replaced by the slice point
  Index moving = 0;
  SimilarityKind kind;
  PairSet pairs;
  std::optional<double> beta;  // empty: limiting potential U0
};

using LandscapeFamily = std::variant<SymmetricDoubleWell, TiltedDoubleWell, InfoNceSlice>;

struct LandscapeValue {
  double value;
  double slope;      // dU/dtheta
  double curvature;  // d2U/dtheta2
};

enum class CriticalType { Minimum, Saddle };

struct CriticalPoint {
  double angle;  // in [-pi, pi)
  double value;
  CriticalType type;
  double curvature;
  double plateau_halfwidth = 0.0;  // nonzero only for flat stretches of slices
};

/// Basin of the index-th minimum (ordinal among minima), or a saddle point.
struct BasinLabel {
  bool saddle = false;
  std::size_t minimum = 0;

  static BasinLabel of_saddle() { return {true, 0}; }
  static BasinLabel of_minimum(std::size_t m) { return {false, m}; }
  bool operator==(const BasinLabel&) const = default;
};

struct BarrierSummary {
  std::vector<double> delta_e;              // per minimum: cheapest adjacent saddle minus the minimum
  std::vector<std::size_t> escape_saddle;   // per minimum: ordinal of that saddle
  std::vector<bool> global;                 // per minimum: value within 1e-9 of the lowest
  double delta_e_max = 0.0;                 // 0 when the landscape has a single basin
  double c_star = 0.0;                      // 1 / delta_e_max, +inf for a single basin
  bool has_barrier() const { return delta_e_max > 0.0; }
};

inline constexpr double kCurvatureFloor = 1e-8;
inline constexpr int kCriticalGridSize = 1 << 16;

class LandscapeSpec {
 public:
  /// Scans and caches the critical structure. Throws DegenerateCritical on a
  /// flat critical point of an analytic family or a flat slice.
  explicit LandscapeSpec(LandscapeFamily family);

  static LandscapeSpec symmetric_double_well() { return LandscapeSpec(SymmetricDoubleWell{}); }
  static LandscapeSpec tilted_double_well(double gamma) { return LandscapeSpec(TiltedDoubleWell{gamma}); }

  const LandscapeFamily& family() const noexcept { return family_; }
  bool smooth() const noexcept;
  std::string name() const;

  LandscapeValue eval(double theta) const;

  /// Sorted by angle; minima and saddles alternate around the circle.
  const std::vector<CriticalPoint>& critical_points() const noexcept { return critical_; }
  /// Ordinals into critical_points(), sorted by angle.
  const std::vector<std::size_t>& minima() const noexcept { return minima_; }
  const std::vector<std::size_t>& saddles() const noexcept { return saddles_; }
  const CriticalPoint& minimum(std::size_t m) const { return critical_.at(minima_.at(m)); }
  const CriticalPoint& saddle(std::size_t s) const { return critical_.at(saddles_.at(s)); }

  const BarrierSummary& barriers() const noexcept { return barriers_; }

  BasinLabel basin_of(double theta) const;
  bool is_global(const BasinLabel& b) const { return !b.saddle && barriers_.global.at(b.minimum); }
  /// Lowest-index global minimum.
  std::size_t global_minimum() const;
  /// Lowest-index non-global minimum; falls back to minimum 0 when every minimum is global.
  std::size_t shallowest_suboptimal_or_first() const;

 private:
  void scan_smooth();
  void scan_values();
  void finish_structure();

  LandscapeFamily family_;
  std::vector<CriticalPoint> critical_;
  std::vector<std::size_t> minima_;
  std::vector<std::size_t> saddles_;
  std::vector<std::size_t> arc_minimum_;  // minimum ordinal for the arc after saddle k
  BarrierSummary barriers_;
};

LandscapeValue landscape_eval(const LandscapeSpec& spec, double theta);
const std::vector<CriticalPoint>& critical_points(const LandscapeSpec& spec);
const BarrierSummary& barrier_heights(const LandscapeSpec& spec);
BasinLabel basin_of(const LandscapeSpec& spec, double theta);

/// A = sqrt(U''(min) |U''(saddle)|) / (2 pi) for the basin's escape saddle.
/// Throws DegenerateCritical when either curvature is below 1e-8 and
/// InvalidArgument for a saddle label.
double kramers_prefactor(const LandscapeSpec& spec, const BasinLabel& basin);

/// General form lambda_saddle / (2 pi) * sqrt(det H_min / |det H_saddle|),
/// lambda_saddle the magnitude of the unique negative eigenvalue at the saddle.
double eyring_kramers_prefactor(const Eigen::MatrixXd& hessian_min, const Eigen::MatrixXd& hessian_saddle);

/// Slice of an InfoNCE instance on S^1: embedding `moving` sweeps the circle,
/// the others sit at `angles` (the entry for `moving` is ignored). Without
/// beta the slice is U0; with beta it is loss / beta. Requires n >= 3.
LandscapeSpec build_infonce_micro(Index n, const SimilarityKind& kind, const PairSet& pairs, Index moving,
                                  const std::vector<double>& angles, std::optional<double> beta = std::nullopt);

/// Smallest signed difference a - b on the circle, in (-pi, pi].
double angular_difference(double a, double b);

}  // namespace annealab
