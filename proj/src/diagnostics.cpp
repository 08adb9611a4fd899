#include "annealab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

namespace annealab {

namespace {
constexpr double kPi = std::numbers::pi;
}

AngularHistogram::AngularHistogram(std::size_t bins) : counts_(bins, 0) {
  if (bins < 8) throw Error(ErrorCode::InvalidArgument, "angular histograms need at least 8 bins");
}

std::size_t AngularHistogram::bin_index(double theta) const {
  const double u = (wrap_angle(theta) + kPi) / (2.0 * kPi);
  const auto b = static_cast<std::size_t>(u * static_cast<double>(counts_.size()));
  return std::min(b, counts_.size() - 1);
}

void AngularHistogram::add(double theta) {
  ++counts_[bin_index(theta)];
  ++total_;
}

void AngularHistogram::merge(const AngularHistogram& other) {
  if (other.bins() != bins()) throw Error(ErrorCode::DimensionMismatch, "histograms differ in bin count");
  for (std::size_t b = 0; b < counts_.size(); ++b) counts_[b] += other.counts_[b];
  total_ += other.total_;
}

double AngularHistogram::bin_center(std::size_t b) const {
  return -kPi + (static_cast<double>(b) + 0.5) * 2.0 * kPi / static_cast<double>(counts_.size());
}

Vector AngularHistogram::frequencies() const {
  Vector f(static_cast<Index>(counts_.size()));
  for (std::size_t b = 0; b < counts_.size(); ++b) {
    f[static_cast<Index>(b)] = total_ == 0 ? 0.0 : static_cast<double>(counts_[b]) / static_cast<double>(total_);
  }
  return f;
}

Vector gibbs_reference_density(const LandscapeSpec& spec, double beta, std::size_t bins, std::size_t grid) {
  return gibbs_reference_density([&spec](double theta) { return spec.eval(theta).value; }, beta, bins, grid);
}

Vector gibbs_reference_density(const std::function<double(double)>& potential, double beta, std::size_t bins,
                               std::size_t grid) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::InvalidArgument, "Gibbs density needs beta > 0");
  if (grid < 256) throw Error(ErrorCode::InvalidArgument, "Gibbs quadrature needs grid >= 256");
  if (bins < 1) throw Error(ErrorCode::InvalidArgument, "Gibbs density needs at least one bin");
  const std::size_t per_bin = std::max<std::size_t>(1, (grid + bins - 1) / bins);
  const std::size_t n = per_bin * bins;
  const double h = 2.0 * kPi / static_cast<double>(n);

  std::vector<double> u(n + 1);
  for (std::size_t g = 0; g <= n; ++g) u[g] = potential(-kPi + h * static_cast<double>(g));
  const double u_min = *std::min_element(u.begin(), u.end());

  Vector mass(static_cast<Index>(bins));
  for (std::size_t b = 0; b < bins; ++b) {
    double acc = 0.0;
    for (std::size_t s = 0; s < per_bin; ++s) {
      const std::size_t g = b * per_bin + s;
      acc += 0.5 * h * (std::exp(-beta * (u[g] - u_min)) + std::exp(-beta * (u[g + 1] - u_min)));
    }
    mass[static_cast<Index>(b)] = acc;
  }
  return mass / mass.sum();
}

double total_variation(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::DimensionMismatch, "total variation needs equal bin counts");
  return 0.5 * (p - q).cwiseAbs().sum();
}

double total_variation(const AngularHistogram& h, const Vector& reference) {
  return total_variation(h.frequencies(), reference);
}

AngularHistogram equilibrium_histogram(const LandscapeSpec& spec, double beta, const IntegratorConfig& cfg,
                                       std::size_t chains, std::size_t bins, unsigned threads) {
  if (chains == 0) throw Error(ErrorCode::InvalidArgument, "equilibrium runs need at least one chain");
  cfg.validate();
  const LandscapePotential potential(spec);
  const Schedule schedule = Schedule::constant(beta);
  const auto burn_in = static_cast<std::size_t>(std::floor(kBurnInFraction * static_cast<double>(cfg.steps)));

  std::vector<AngularHistogram> per_chain(chains, AngularHistogram(bins));
  parallel_for(chains, threads, [&](std::size_t c) {
    RandomStream stream(cfg.seed, c);
    Points z0 = sample_uniform_points(1, 2, stream);
    SgldIntegrator<LandscapePotential> integ(potential, schedule, cfg, std::move(z0), std::move(stream));
    auto& hist = per_chain[c];
    while (integ.step_index() < cfg.steps) {
      integ.step();
      if (integ.step_index() > burn_in) hist.add(circle_angle(integ.state().col(0)));
    }
  });
  AngularHistogram pooled(bins);
  for (const auto& h : per_chain) pooled.merge(h);
  return pooled;
}

ExitTimeEstimate estimate_exit_times(const LandscapeSpec& spec, double beta, const BasinLabel& start_basin,
                                     std::size_t m, std::size_t horizon, const IntegratorConfig& cfg,
                                     unsigned threads) {
  if (start_basin.saddle || start_basin.minimum >= spec.minima().size()) {
    throw Error(ErrorCode::InvalidArgument, "exit times need a start basin that is a minimum");
  }
  if (m == 0 || horizon == 0) throw Error(ErrorCode::InvalidArgument, "exit times need m >= 1 and horizon >= 1");
  IntegratorConfig run_cfg = cfg;
  run_cfg.steps = horizon;
  run_cfg.validate();

  const LandscapePotential potential(spec);
  const Schedule schedule = Schedule::constant(beta);
  const double start_angle = spec.minimum(start_basin.minimum).angle;

  ExitTimeEstimate est;
  est.beta = beta;
  est.samples.resize(m);
  parallel_for(m, threads, [&](std::size_t c) {
    Points z0(2, 1);
    z0 << std::cos(start_angle), std::sin(start_angle);
    SgldIntegrator<LandscapePotential> integ(potential, schedule, run_cfg, std::move(z0), RandomStream(run_cfg.seed, c));
    ExitTimeSample s;
    s.chain = c;
    s.beta = beta;
    s.basin = start_basin.minimum;
    s.censored = true;
    s.exit_step = horizon;
    while (integ.step_index() < horizon) {
      integ.step();
      if (spec.basin_of(circle_angle(integ.state().col(0))) != start_basin) {
        s.censored = false;
        s.exit_step = integ.step_index();
        break;
      }
    }
    s.exit_time = integ.time();
    est.samples[c] = s;
  });

  std::vector<double> times;
  for (const auto& s : est.samples) {
    if (s.censored) {
      ++est.censored;
    } else {
      times.push_back(s.exit_time);
    }
  }
  est.uncensored = times.size();
  if (times.empty()) {
    throw Error(ErrorCode::AllCensored, "no chain left the start basin within " + std::to_string(horizon) + " steps");
  }
  const double n = static_cast<double>(times.size());
  const double mean = std::accumulate(times.begin(), times.end(), 0.0) / n;
  double var = 0.0;
  for (double t : times) var += (t - mean) * (t - mean);
  var = times.size() > 1 ? var / (n - 1.0) : 0.0;
  // Delta method: se(ln mean) = sd / (mean sqrt(n)).
  const double se_log = std::sqrt(var / n) / mean;
  est.mean_time = mean;
  est.ci_low = mean * std::exp(-kZ95 * se_log);
  est.ci_high = mean * std::exp(kZ95 * se_log);
  return est;
}

FitResult least_squares_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "fit needs as many x as y values");
  if (x.size() < 3) throw Error(ErrorCode::InsufficientData, "a fit needs at least 3 points");
  const auto n = static_cast<Index>(x.size());
  Eigen::MatrixXd design(n, 2);
  Vector rhs(n);
  for (Index k = 0; k < n; ++k) {
    const auto u = static_cast<std::size_t>(k);
    if (!std::isfinite(x[u]) || !std::isfinite(y[u])) {
      throw Error(ErrorCode::InsufficientData, "fit inputs must be finite");
    }
    design(k, 0) = x[u];
    design(k, 1) = 1.0;
    rhs[k] = y[u];
  }
  const Vector coef = design.colPivHouseholderQr().solve(rhs);
  const Vector resid = rhs - design * coef;
  FitResult fit;
  fit.slope = coef[0];
  fit.intercept = coef[1];
  fit.n = x.size();
  fit.residual_se = std::sqrt(resid.squaredNorm() / static_cast<double>(n - 2));
  return fit;
}

FitResult arrhenius_fit(const std::vector<std::pair<double, double>>& beta_mean_time) {
  if (beta_mean_time.size() < 3) throw Error(ErrorCode::InsufficientData, "an Arrhenius fit needs >= 3 beta values");
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [beta, tau] : beta_mean_time) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw Error(ErrorCode::InsufficientData, "Arrhenius fit needs finite positive mean exit times");
    }
    x.push_back(beta);
    y.push_back(std::log(tau));
  }
  return least_squares_fit(x, y);
}

SuccessEstimate wilson_interval(std::size_t successes, std::size_t trials) {
  SuccessEstimate e;
  e.successes = successes;
  e.trials = trials;
  if (trials == 0) return e;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  e.fraction = p;
  e.low = successes == 0 ? 0.0 : std::max(0.0, center - half);
  e.high = successes == trials ? 1.0 : std::min(1.0, center + half);
  return e;
}

SuccessEstimate success_fraction(const EnsembleResult& ens, const std::function<bool(const Points&)>& target) {
  std::size_t ok = 0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < ens.chains; ++c) {
    if (!ens.errors[c].empty()) continue;
    ++n;
    if (target(ens.final_states[c])) ++ok;
  }
  return wilson_interval(ok, n);
}

double fd_relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1.0});
}

double fd_step(double x) {
  static const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
  return std::max(1e-6, cbrt_eps * std::max(1.0, std::abs(x)));
}

Points numerical_gradient(const std::function<double(const Points&)>& f, const Points& x, FdOrder order) {
  Points g(x.rows(), x.cols());
  Points probe = x;
  for (Index c = 0; c < x.cols(); ++c) {
    for (Index r = 0; r < x.rows(); ++r) {
      const double x0 = x(r, c);
      const double h = fd_step(x0);
      auto at = [&](double offset) {
        probe(r, c) = x0 + offset;
        const double v = f(probe);
        probe(r, c) = x0;
        return v;
      };
      if (order == FdOrder::Second) {
        g(r, c) = (at(h) - at(-h)) / (2.0 * h);
      } else {
        g(r, c) = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
      }
    }
  }
  return g;
}

PairSet random_pair_set(Index n, RandomStream& rng) {
  std::uniform_int_distribution<Index> count_dist(1, n);
  std::uniform_int_distribution<Index> index_dist(0, n - 1);
  const Index count = count_dist(rng.engine());
  std::set<std::pair<Index, Index>> seen;
  std::vector<PositivePair> pairs;
  while (static_cast<Index>(pairs.size()) < count) {
    const Index i = index_dist(rng.engine());
    const Index j = index_dist(rng.engine());
    if (i == j || !seen.insert({i, j}).second) continue;
    pairs.push_back({i, j});
  }
  return PairSet(std::move(pairs), n);
}

FdReport fd_check_gradient(const FdCheckSpec& spec, std::size_t trials, double tolerance, RandomStream& rng) {
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "fd checks need at least one trial");
  FdReport rep;
  rep.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const Points z = sample_uniform_configuration(spec.n, spec.d, rng).points();
    const PairSet pairs = spec.pairs ? *spec.pairs : random_pair_set(spec.n, rng);
    const Points analytic = infonce_euclidean_gradient(z, spec.beta, spec.kind, pairs);
    const Points numeric = numerical_gradient(
        [&](const Points& p) { return infonce_loss(p, spec.beta, spec.kind, pairs); }, z, spec.order);
    for (Index k = 0; k < z.size(); ++k) {
      rep.max_rel_err = std::max(rep.max_rel_err, fd_relative_error(analytic(k), numeric(k)));
    }
  }
  rep.passed = rep.max_rel_err <= tolerance;
  return rep;
}

FdReport fd_check_hessian(const FdCheckSpec& spec, std::size_t trials, double tolerance, RandomStream& rng) {
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "fd checks need at least one trial");
  FdReport rep;
  rep.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const Points z = sample_uniform_configuration(spec.n, spec.d, rng).points();
    const PairSet pairs = spec.pairs ? *spec.pairs : random_pair_set(spec.n, rng);
    for (const auto& pr : pairs.pairs()) {
      const Points h = infonce_hessian_anchor(z, pr.anchor, pr.positive, spec.beta, spec.kind);
      const double scale = std::max(h.norm(), std::numeric_limits<double>::min());
      rep.max_symmetry_defect = std::max(rep.max_symmetry_defect, (h - h.transpose()).norm() / scale);
      // Column c of the numerical Hessian differentiates the anchor gradient along coordinate c.
      Points probe = z;
      for (Index c = 0; c < z.rows(); ++c) {
        const double x0 = z(c, pr.anchor);
        const double step = fd_step(x0);
        auto grad_at = [&](double offset) {
          probe(c, pr.anchor) = x0 + offset;
          Vector g = infonce_anchor_gradient(probe, pr.anchor, pr.positive, spec.beta, spec.kind);
          probe(c, pr.anchor) = x0;
          return g;
        };
        Vector col;
        if (spec.order == FdOrder::Second) {
          col = (grad_at(step) - grad_at(-step)) / (2.0 * step);
        } else {
          col = (-grad_at(2.0 * step) + 8.0 * grad_at(step) - 8.0 * grad_at(-step) + grad_at(-2.0 * step)) /
                (12.0 * step);
        }
        for (Index r = 0; r < z.rows(); ++r) {
          rep.max_rel_err = std::max(rep.max_rel_err, fd_relative_error(h(r, c), col[r]));
        }
      }
    }
  }
  rep.passed = rep.max_rel_err <= tolerance;
  return rep;
}

double spectral_norm(const Eigen::MatrixXd& h, double tolerance) {
  if (h.size() == 0) return 0.0;
  const Eigen::MatrixXd m = h.transpose() * h;
  if (m.isZero(0)) return 0.0;
  Vector v(m.cols());
  for (Index k = 0; k < v.size(); ++k) v[k] = 1.0 + 0.1 * static_cast<double>(k);
  v.normalize();
  double lambda = v.dot(m * v);
  for (int it = 0; it < 100000; ++it) {
    Vector w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) break;
    v = w / norm;
    const double next = v.dot(m * v);
    const bool done = std::abs(next - lambda) <= tolerance * std::abs(next);
    lambda = next;
    if (done) break;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

SharpeningResult sharpening_fit(const Configuration& z, Index i, Index j, const std::vector<double>& betas,
                                const SimilarityKind& kind, const PairSet& pairs) {
  if (!pairs.contains(i, j)) throw Error(ErrorCode::InvalidArgument, "sharpening needs (i, j) to be a positive pair");
  const auto top = argmax_candidates(z, i, kind);
  if (std::find(top.begin(), top.end(), j) != top.end()) {
    throw Error(ErrorCode::NotSuboptimal, "the positive is already the most similar candidate of the anchor");
  }
  if (betas.size() < 3) throw Error(ErrorCode::InsufficientData, "sharpening fit needs >= 3 beta values");
  const auto [lo, hi] = std::minmax_element(betas.begin(), betas.end());
  if (!(*lo > 0.0) || *hi < 10.0 * *lo) {
    throw Error(ErrorCode::InvalidArgument, "sharpening beta grid must be positive and span at least a decade");
  }
  SharpeningResult res;
  std::vector<double> log_beta;
  std::vector<double> log_norm;
  for (double beta : betas) {
    const double norm = spectral_norm(infonce_hessian_anchor(z, i, j, beta, kind, pairs));
    res.betas.push_back(beta);
    res.norms.push_back(norm);
    log_beta.push_back(std::log(beta));
    log_norm.push_back(std::log(norm));
  }
  res.fit = least_squares_fit(log_beta, log_norm);
  return res;
}

}  // namespace annealab
