#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "annealab/experiment.hpp"
#include "annealab/output.hpp"

namespace annealab {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSeedStride = 0x9E3779B97F4A7C15ULL;

// Master seed for the b-th sub-experiment (one beta, one rate) of a run.
std::uint64_t sub_seed(std::uint64_t seed, std::size_t b) { return seed + kSeedStride * static_cast<std::uint64_t>(b); }

std::string num(double x) { return format_number(x); }
std::string num(std::size_t x) { return format_number(static_cast<std::uint64_t>(x)); }

struct Pending {
  std::string name;
  std::string bytes;
};

struct Outcome {
  std::vector<Pending> files;
  json summary = json::object();
  bool passed = true;
};

SvgSeries series(std::string label, std::string color, bool line, bool markers) {
  SvgSeries s;
  s.label = std::move(label);
  s.color = std::move(color);
  s.line = line;
  s.markers = markers;
  return s;
}

SvgPlot make_plot(std::string title, std::string x_label, std::string y_label, std::vector<SvgSeries> series,
                  bool log_x = false) {
  SvgPlot p;
  p.title = std::move(title);
  p.x_label = std::move(x_label);
  p.y_label = std::move(y_label);
  p.series = std::move(series);
  p.log_x = log_x;
  return p;
}

Points circle_point(double theta) {
  Points z(2, 1);
  z << std::cos(theta), std::sin(theta);
  return z;
}

Outcome run_equilibrium(const ExperimentConfig& cfg, const EquilibriumParams& p) {
  const LandscapeSpec spec = p.landscape.build();
  IntegratorConfig icfg = p.integrator;
  icfg.seed = cfg.seed;
  const auto hist = equilibrium_histogram(spec, p.beta, icfg, p.chains, p.bins, cfg.threads);
  const Vector ref = gibbs_reference_density(spec, p.beta, p.bins, p.grid);
  const Vector freq = hist.frequencies();

  CsvTable csv({"bin_index", "bin_center_rad", "empirical_freq", "gibbs_ref", "abs_diff"});
  SvgSeries emp = series("empirical", "#d62728", false, true);
  SvgSeries gibbs = series("Gibbs reference", "#1f77b4", true, false);
  for (std::size_t b = 0; b < p.bins; ++b) {
    const auto k = static_cast<Index>(b);
    csv.row({num(b), num(hist.bin_center(b)), num(freq[k]), num(ref[k]), num(std::abs(freq[k] - ref[k]))});
    emp.x.push_back(hist.bin_center(b));
    emp.y.push_back(freq[k]);
    gibbs.x.push_back(hist.bin_center(b));
    gibbs.y.push_back(ref[k]);
  }
  const SvgPlot plot = make_plot("Occupation vs Gibbs density, " + spec.name() + ", beta = " + num(p.beta), "angle (rad)",
               "probability per bin", {gibbs, emp});

  Outcome out;
  out.files.push_back({"equilibrium.csv", csv.text()});
  out.files.push_back({"equilibrium.svg", render_svg(plot)});
  out.summary = {{"landscape", spec.name()},
                 {"beta", p.beta},
                 {"total_variation", total_variation(freq, ref)},
                 {"samples", hist.total()},
                 {"burn_in_fraction", kBurnInFraction}};
  return out;
}

Outcome run_escape(const ExperimentConfig& cfg, const EscapeParams& p) {
  const LandscapeSpec spec = p.landscape.build();
  const std::size_t start = p.start_minimum.value_or(spec.shallowest_suboptimal_or_first());
  const BasinLabel basin = BasinLabel::of_minimum(start);

  CsvTable escape({"beta", "chain", "exit_step", "censored"});
  CsvTable arrhenius({"beta", "mean_exit", "ci_low", "ci_high", "log_mean_exit"});
  std::vector<std::pair<double, double>> means;
  json per_beta = json::array();
  SvgSeries measured = series("ln mean exit time (95% CI)", "#d62728", false, true);
  for (std::size_t b = 0; b < p.betas.size(); ++b) {
    IntegratorConfig icfg = p.integrator;
    icfg.seed = sub_seed(cfg.seed, b);
    const double beta = p.betas[b];
    const auto est = estimate_exit_times(spec, beta, basin, p.chains, p.horizon, icfg, cfg.threads);
    for (const auto& s : est.samples) escape.row({num(beta), num(s.chain), num(s.exit_step), s.censored ? "1" : "0"});
    arrhenius.row({num(beta), num(est.mean_time), num(est.ci_low), num(est.ci_high), num(std::log(est.mean_time))});
    means.emplace_back(beta, est.mean_time);
    measured.x.push_back(beta);
    measured.y.push_back(std::log(est.mean_time));
    measured.y_low.push_back(std::log(est.ci_low));
    measured.y_high.push_back(std::log(est.ci_high));
    per_beta.push_back({{"beta", beta}, {"uncensored", est.uncensored}, {"censored", est.censored}});
  }
  const FitResult fit = arrhenius_fit(means);
  const double delta_e = spec.barriers().delta_e.at(start);
  const double prefactor = kramers_prefactor(spec, basin);

  SvgSeries fitted = series("least-squares fit", "#1f77b4", true, false);
  SvgSeries theory = series("beta dE - ln A", "#2ca02c", true, false);
  for (double beta : p.betas) {
    fitted.x.push_back(beta);
    fitted.y.push_back(fit.slope * beta + fit.intercept);
    theory.x.push_back(beta);
    theory.y.push_back(beta * delta_e - std::log(prefactor));
  }
  const SvgPlot plot = make_plot("Arrhenius plot, " + spec.name(), "beta", "ln mean exit time (SDE time)", {measured, fitted, theory});

  Outcome out;
  out.files.push_back({"escape.csv", escape.text()});
  out.files.push_back({"arrhenius.csv", arrhenius.text()});
  out.files.push_back({"arrhenius.svg", render_svg(plot)});
  out.summary = {{"landscape", spec.name()},
                 {"start_minimum", start},
                 {"start_angle", spec.minimum(start).angle},
                 {"delta_e", delta_e},
                 {"kramers_prefactor", prefactor},
                 {"minus_log_prefactor", -std::log(prefactor)},
                 {"fit_slope", fit.slope},
                 {"fit_intercept", fit.intercept},
                 {"fit_residual_se", fit.residual_se},
                 {"exit_time_unit", "sde_time"},
                 {"per_beta", per_beta}};
  return out;
}

Outcome run_anneal(const ExperimentConfig& cfg, const AnnealParams& p) {
  const LandscapeSpec spec = p.landscape.build();
  const auto& bar = spec.barriers();
  const std::size_t shallow = spec.shallowest_suboptimal_or_first();
  const double start_angle = spec.minimum(shallow).angle;
  const auto& global = spec.minimum(spec.global_minimum());

  IntegratorConfig icfg = p.integrator;
  icfg.record_every = icfg.steps;
  for (std::size_t c : p.checkpoints) icfg.record_every = std::gcd(icfg.record_every, c);

  const InitialCondition init = [&](std::size_t, RandomStream& rng) -> Points {
    if (p.init == "uniform") return sample_uniform_points(1, 2, rng);
    return circle_point(start_angle);
  };
  // Label 1 marks success: the global basin, or within epsilon of the global minimum.
  const StateClassifier success = [&](const Points& z) {
    const double theta = circle_angle(z.col(0));
    if (p.success == SuccessRule::Basin) return spec.is_global(spec.basin_of(theta)) ? 1 : 0;
    return std::abs(angular_difference(theta, global.angle)) <= p.epsilon ? 1 : 0;
  };

  CsvTable anneal({"c", "chain", "final_angle_or_dist", "success", "final_u0"});
  CsvTable checkpoints({"c", "step", "successes", "chains", "success_fraction", "wilson_low", "wilson_high"});
  json per_rate = json::array();
  std::vector<SvgSeries> curves;
  const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  const CriticalRate rate = bar.has_barrier() ? CriticalRate(bar.delta_e_max) : CriticalRate(1.0);

  for (std::size_t r = 0; r < p.rates.size(); ++r) {
    const double c = p.rates_relative ? p.rates[r] * bar.c_star : p.rates[r];
    const Schedule schedule = Schedule::logarithmic(c, p.K);
    icfg.seed = sub_seed(cfg.seed, r);
    const LandscapePotential potential(spec);
    const auto ens = run_ensemble(p.chains, init, schedule, icfg, potential, success, cfg.threads);
    for (std::size_t k = 0; k < ens.chains; ++k) {
      if (!ens.errors[k].empty()) {
        throw Error(ErrorCode::StepOverflow, "chain " + std::to_string(k) + " at c = " + num(c) + ": " + ens.errors[k]);
      }
    }
    for (std::size_t k = 0; k < ens.chains; ++k) {
      const double theta = circle_angle(ens.final_states[k].col(0));
      const double reported =
          p.success == SuccessRule::Basin ? theta : std::abs(angular_difference(theta, global.angle));
      anneal.row({num(c), num(k), num(reported), ens.labels[k] == 1 ? "1" : "0", num(spec.eval(theta).value)});
    }
    SvgSeries curve = series("c = " + num(c), palette[r % 6], true, true);
    json cps = json::array();
    for (std::size_t cp : p.checkpoints) {
      const auto idx = static_cast<std::size_t>(
          std::find(ens.record_steps.begin(), ens.record_steps.end(), cp) - ens.record_steps.begin());
      std::size_t ok = 0;
      for (const auto& h : ens.label_history) ok += h.at(idx) == 1 ? 1 : 0;
      const auto w = wilson_interval(ok, ens.chains);
      checkpoints.row({num(c), num(cp), num(ok), num(ens.chains), num(w.fraction), num(w.low), num(w.high)});
      curve.x.push_back(static_cast<double>(cp));
      curve.y.push_back(1.0 - w.fraction);
      curve.y_low.push_back(1.0 - w.high);
      curve.y_high.push_back(1.0 - w.low);
      cps.push_back({{"step", cp}, {"success_fraction", w.fraction}, {"wilson_low", w.low}, {"wilson_high", w.high}});
    }
    curves.push_back(curve);
    per_rate.push_back({{"c", c},
                        {"c_over_c_star", bar.has_barrier() ? c / bar.c_star : 0.0},
                        {"class", bar.has_barrier() ? to_string(classify_schedule(schedule, rate)) : "no-barrier"},
                        {"checkpoints", cps}});
  }
  const SvgPlot plot = make_plot("Failure probability under logarithmic annealing, " + spec.name(), "step", "failure fraction",
               curves, true);

  Outcome out;
  out.files.push_back({"anneal.csv", anneal.text()});
  out.files.push_back({"anneal_checkpoints.csv", checkpoints.text()});
  out.files.push_back({"anneal.svg", render_svg(plot)});
  out.summary = {{"landscape", spec.name()},
                 {"delta_e_max", bar.delta_e_max},
                 {"c_star", bar.has_barrier() ? json(bar.c_star) : json(nullptr)},
                 {"K", p.K},
                 {"start", p.init == "uniform" ? json("uniform") : json(start_angle)},
                 {"success_rule", p.success == SuccessRule::Basin ? "basin" : "distance"},
                 {"time_axis", to_string(icfg.time_axis)},
                 {"rates", per_rate}};
  return out;
}

Outcome run_sharpening(const ExperimentConfig&, const SharpeningParams& p) {
  const Configuration z(p.points);
  const PairSet pairs(p.pairs, z.size());
  const auto res = sharpening_fit(z, p.anchor, p.positive, p.betas, p.similarity, pairs);
  CsvTable csv({"beta", "hessian_spectral_norm"});
  SvgSeries pts = series("|H|_2", "#d62728", false, true);
  SvgSeries line = series("fit", "#1f77b4", true, false);
  for (std::size_t k = 0; k < res.betas.size(); ++k) {
    csv.row({num(res.betas[k]), num(res.norms[k])});
    pts.x.push_back(res.betas[k]);
    pts.y.push_back(std::log(res.norms[k]));
    line.x.push_back(res.betas[k]);
    line.y.push_back(res.fit.slope * std::log(res.betas[k]) + res.fit.intercept);
  }
  const SvgPlot plot = make_plot("Anchor Hessian sharpening", "beta", "ln |H|_2", {pts, line}, true);
  Outcome out;
  out.files.push_back({"sharpening.csv", csv.text()});
  out.files.push_back({"sharpening.svg", render_svg(plot)});
  out.summary = {{"similarity", kind_name(p.similarity)},
                 {"anchor", p.anchor},
                 {"positive", p.positive},
                 {"fit_slope", res.fit.slope},
                 {"fit_intercept", res.fit.intercept},
                 {"fit_residual_se", res.fit.residual_se}};
  return out;
}

Outcome run_gradcheck(const ExperimentConfig& cfg, const GradcheckParams& p) {
  struct Row {
    std::string kind;
    Index n = 0;
    Index d = 0;
    double beta = 0.0;
    double err = 0.0;
  };
  std::vector<Row> rows(p.trials);
  parallel_for(p.trials, cfg.threads, [&](std::size_t t) {
    const std::string& name = p.kinds[t % p.kinds.size()];
    const double beta = p.betas[(t / p.kinds.size()) % p.betas.size()];
    RandomStream rng(cfg.seed, t);
    std::uniform_int_distribution<Index> nd(p.n_min, p.n_max);
    std::uniform_int_distribution<Index> dd(p.d_min, p.d_max);
    const Index n = nd(rng.engine());
    const Index d = dd(rng.engine());
    const SimilarityKind kind = name == "cosine" ? SimilarityKind{CosineSimilarity{}}
                                                 : SimilarityKind{GaussianSimilarity{p.sigma}};
    const FdCheckSpec spec{kind, n, d, beta, std::nullopt, p.order};
    rows[t] = {name, n, d, beta, fd_check_gradient(spec, 1, p.tolerance, rng).max_rel_err};
  });
  CsvTable csv({"trial", "kind", "n", "d", "beta", "max_rel_err"});
  double worst = 0.0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto& r = rows[t];
    csv.row({num(t), r.kind, num(static_cast<std::size_t>(r.n)), num(static_cast<std::size_t>(r.d)), num(r.beta),
             num(r.err)});
    worst = std::max(worst, r.err);
  }
  Outcome out;
  out.files.push_back({"gradcheck.csv", csv.text()});
  out.passed = worst <= p.tolerance;
  out.summary = {{"trials", p.trials}, {"max_rel_err", worst}, {"tolerance", p.tolerance}, {"passed", out.passed}};
  return out;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = std::visit(
        [&](const auto& p) -> Outcome {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, EquilibriumParams>) return run_equilibrium(cfg, p);
          else if constexpr (std::is_same_v<T, EscapeParams>) return run_escape(cfg, p);
          else if constexpr (std::is_same_v<T, AnnealParams>) return run_anneal(cfg, p);
          else if constexpr (std::is_same_v<T, SharpeningParams>) return run_sharpening(cfg, p);
          else return run_gradcheck(cfg, p);
        },
        cfg.params);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(to_string(cfg.kind)) + " experiment: " + e.message(), e.details());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunManifest manifest{cfg.kind, {}, outcome.summary, seconds, outcome.passed};
  json outputs = json::array();
  for (const auto& f : outcome.files) {
    manifest.files.push_back({f.name, sha256_hex(f.bytes)});
    outputs.push_back({{"file", f.name}, {"sha256", manifest.files.back().sha256}, {"bytes", f.bytes.size()}});
  }
  const json doc = {{"artifact", "annealab"},
                    {"version", std::string(kVersion)},
                    {"experiment", to_string(cfg.kind)},
                    {"seed", cfg.seed},
                    {"threads", cfg.threads},
                    {"config", cfg.echo},
                    {"outputs", outputs},
                    {"summary", outcome.summary},
                    {"passed", outcome.passed},
                    {"wall_clock_seconds", seconds}};
  for (const auto& f : outcome.files) write_file_atomic(cfg.out_dir / f.name, f.bytes);
  write_file_atomic(cfg.out_dir / "manifest.json", doc.dump(2) + "\n");
  return manifest;
}

}  // namespace annealab
