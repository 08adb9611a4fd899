#include "annealab/schedule.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "annealab/error.hpp"

namespace annealab {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidSchedule, what);
}

struct Validator {
  void operator()(const ConstantSchedule& s) const { check(positive_finite(s.beta0), "constant schedule needs beta0 > 0"); }
  void operator()(const LogarithmicSchedule& s) const {
    check(positive_finite(s.c), "logarithmic schedule needs c > 0");
    check(std::isfinite(s.K) && s.K > 1.0, "logarithmic schedule needs K > 1");
  }
  void operator()(const PowerSchedule& s) const {
    check(positive_finite(s.beta0), "power schedule needs beta0 > 0");
    check(positive_finite(s.exponent), "power schedule needs exponent > 0");
  }
  void operator()(const CosineSchedule& s) const {
    check(positive_finite(s.beta_start), "cosine schedule needs beta_start > 0");
    check(std::isfinite(s.beta_end) && s.beta_end >= s.beta_start, "cosine schedule needs beta_end >= beta_start");
    check(positive_finite(s.horizon), "cosine schedule needs horizon > 0");
  }
};

struct Evaluator {
  double t;
  double operator()(const ConstantSchedule& s) const { return s.beta0; }
  double operator()(const LogarithmicSchedule& s) const { return s.c * std::log(t + s.K); }
  double operator()(const PowerSchedule& s) const { return s.beta0 * std::pow(1.0 + t, s.exponent); }
  double operator()(const CosineSchedule& s) const {
    if (t >= s.horizon) return s.beta_end;
    const double ramp = 0.5 * (1.0 - std::cos(std::numbers::pi * t / s.horizon));
    return s.beta_start + (s.beta_end - s.beta_start) * ramp;
  }
};

}  // namespace

Schedule::Schedule(Variant v) : v_(v) { std::visit(Validator{}, v_); }

double Schedule::operator()(double t) const {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "schedules are defined for t >= 0");
  return std::visit(Evaluator{t}, v_);
}

std::string Schedule::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantSchedule>) os << "constant(beta0=" << s.beta0 << ")";
        if constexpr (std::is_same_v<T, LogarithmicSchedule>) os << "logarithmic(c=" << s.c << ", K=" << s.K << ")";
        if constexpr (std::is_same_v<T, PowerSchedule>) os << "power(beta0=" << s.beta0 << ", p=" << s.exponent << ")";
        if constexpr (std::is_same_v<T, CosineSchedule>)
          os << "cosine(" << s.beta_start << " -> " << s.beta_end << " over " << s.horizon << ")";
      },
      v_);
  return os.str();
}

double beta_at(const Schedule& s, double t) { return s(t); }

CriticalRate::CriticalRate(double delta_e_max) : delta_e_max_(delta_e_max), c_star_(1.0 / delta_e_max) {
  if (!positive_finite(delta_e_max)) {
    throw Error(ErrorCode::InvalidArgument, "critical rate needs 0 < dE_max < inf");
  }
}

const char* to_string(ScheduleClass c) {
  switch (c) {
    case ScheduleClass::Subcritical: return "subcritical";
    case ScheduleClass::Critical: return "critical";
    case ScheduleClass::Supercritical: return "supercritical";
    case ScheduleClass::NonLogarithmic: return "non-logarithmic";
  }
  return "unknown";
}

ScheduleClass classify_schedule(const Schedule& s, const CriticalRate& rate) {
  const auto* log_s = std::get_if<LogarithmicSchedule>(&s.variant());
  if (log_s == nullptr) return ScheduleClass::NonLogarithmic;
  if (std::abs(log_s->c - rate.c_star()) <= 1e-12) return ScheduleClass::Critical;
  return log_s->c < rate.c_star() ? ScheduleClass::Subcritical : ScheduleClass::Supercritical;
}

}  // namespace annealab
