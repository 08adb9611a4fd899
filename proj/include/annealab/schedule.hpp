#pragma once

// Inverse-temperature schedules beta(t) and their classification against the
// critical logarithmic rate c* = 1 / dE_max.

#include <string>
#include <variant>

namespace annealab {

struct ConstantSchedule {
  double beta0;
};

/// beta(t) = c ln(t + K), K > 1 so that beta(0) > 0.
struct LogarithmicSchedule {
  double c;
  double K;
};

/// beta(t) = beta0 (1 + t)^exponent.
struct PowerSchedule {
  double beta0;
  double exponent;
};

/// Half-cosine ramp from beta_start up to beta_end over [0, horizon], flat afterwards.
struct CosineSchedule {
  double beta_start;
  double beta_end;
  double horizon;
};

/// A validated schedule. Construction throws InvalidSchedule on any
/// violated constraint, so beta_at never fails for t >= 0.
class Schedule {
 public:
  using Variant = std::variant<ConstantSchedule, LogarithmicSchedule, PowerSchedule, CosineSchedule>;

  Schedule(Variant v);  // NOLINT(google-explicit-constructor)

  static Schedule constant(double beta0) { return Schedule(ConstantSchedule{beta0}); }
  static Schedule logarithmic(double c, double K) { return Schedule(LogarithmicSchedule{c, K}); }
  static Schedule power(double beta0, double exponent) { return Schedule(PowerSchedule{beta0, exponent}); }
  static Schedule cosine(double beta_start, double beta_end, double horizon) {
    return Schedule(CosineSchedule{beta_start, beta_end, horizon});
  }

  const Variant& variant() const noexcept { return v_; }
  double operator()(double t) const;
  std::string describe() const;

 private:
  Variant v_;
};

double beta_at(const Schedule& s, double t);

/// Critical rate of a landscape: c* = 1 / dE_max, 0 < dE_max < inf.
class CriticalRate {
 public:
  explicit CriticalRate(double delta_e_max);
  double delta_e_max() const noexcept { return delta_e_max_; }
  double c_star() const noexcept { return c_star_; }

 private:
  double delta_e_max_;
  double c_star_;
};

enum class ScheduleClass { Subcritical, Critical, Supercritical, NonLogarithmic };

const char* to_string(ScheduleClass c);

/// Logarithmic schedules compare c with c* (|c - c*| <= 1e-12 is critical);
/// every other variant is NonLogarithmic.
ScheduleClass classify_schedule(const Schedule& s, const CriticalRate& rate);

}  // namespace annealab
