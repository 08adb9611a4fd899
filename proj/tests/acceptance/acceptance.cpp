// Acceptance run: one PASS/FAIL line per criterion A1..A10, exit 1 if any fails.
//
//   acceptance [--out <dir>] [--only A4,A8,...] [--threads <n>]

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "annealab/experiment.hpp"
#include "annealab/infonce.hpp"

using namespace annealab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string g(double x) { return fmt("%.6g", x); }

struct Context {
  fs::path out;
  unsigned threads = 1;
};

ExperimentConfig config(ExperimentKind kind, json doc, const fs::path& out, unsigned threads) {
  doc["seed"] = 20240501;
  doc["threads"] = threads;
  doc["out"] = out.string();
  return parse_config(doc, kind);
}

// A1: full gradient vs central differences, both kinds, beta in {0.5, 5, 50}.
Verdict a1(const Context& ctx) {
  const auto m = run_experiment(config(ExperimentKind::Gradcheck,
                                       {{"trials", 120}, {"betas", {0.5, 5.0, 50.0}}, {"kinds", {"cosine", "gaussian"}},
                                        {"n_min", 3}, {"n_max", 8}, {"d_min", 2}, {"d_max", 4}, {"tolerance", 1e-6}},
                                       ctx.out / "A1_gradcheck", ctx.threads));
  const double err = m.summary["max_rel_err"];
  return {err <= 1e-6, "instances=120 max_rel_err=" + g(err) + " (tol 1e-06)"};
}

// A2: anchor Hessian vs differences of the anchor gradient; symmetry of the analytic Hessian.
Verdict a2(const Context&) {
  RandomStream rng(7, 2);
  double worst = 0.0;
  double sym = 0.0;
  std::size_t instances = 0;
  const std::vector<double> betas = {0.5, 5.0, 50.0};
  for (std::size_t t = 0; t < 24; ++t) {
    FdCheckSpec spec;
    spec.kind = t % 2 == 0 ? SimilarityKind{CosineSimilarity{}} : SimilarityKind{GaussianSimilarity{1.0}};
    spec.n = 3 + static_cast<Index>(rng.uniform() * 6);
    spec.d = 2 + static_cast<Index>(rng.uniform() * 3);
    spec.beta = betas[(t / 2) % 3];
    const auto r = fd_check_hessian(spec, 1, 1e-4, rng);
    worst = std::max(worst, r.max_rel_err);
    sym = std::max(sym, r.max_symmetry_defect);
    ++instances;
  }
  return {worst <= 1e-4 && sym <= 1e-9,
          "instances=" + std::to_string(instances) + " max_rel_err=" + g(worst) + " (tol 1e-04) symmetry=" + g(sym) +
              " (tol 1e-09)"};
}

// A3: 0 <= loss/beta - U0 <= log(N-1)/beta with the loss and U0 evaluated independently.
Verdict a3(const Context&) {
  RandomStream rng(7, 3);
  const std::vector<double> betas = {1.0, 10.0, 100.0, 1000.0};
  constexpr double kSlack = 1e-12;
  std::size_t violations = 0;
  double min_gap = 1e300;
  double max_ratio = 0.0;
  for (std::size_t t = 0; t < 1000; ++t) {
    const Index n = 3 + static_cast<Index>(rng.uniform() * 6);
    const Index d = 2 + static_cast<Index>(rng.uniform() * 3);
    const Points z = sample_uniform_points(n, d, rng);
    const PairSet pairs = random_pair_set(n, rng);
    const SimilarityKind kind = t % 2 == 0 ? SimilarityKind{CosineSimilarity{}} : SimilarityKind{GaussianSimilarity{0.7}};
    const double u0 = limiting_potential(z, kind, pairs);
    for (double beta : betas) {
      const double gap = infonce_loss(z, beta, kind, pairs) / beta - u0;
      const double bound = std::log(static_cast<double>(n - 1)) / beta;
      if (gap < -kSlack || gap > bound + kSlack) ++violations;
      min_gap = std::min(min_gap, gap);
      max_ratio = std::max(max_ratio, gap / bound);
    }
  }
  return {violations == 0, "configs=1000 checks=4000 violations=" + std::to_string(violations) +
                               " min_gap=" + g(min_gap) + " max_gap/bound=" + g(max_ratio)};
}

// A4: occupation histogram at constant beta = 2 vs the quadrature Gibbs reference.
Verdict a4(const Context& ctx) {
  const auto m = run_experiment(config(ExperimentKind::Equilibrium,
                                       {{"landscape", {{"family", "symmetric"}}},
                                        {"beta", 2.0},
                                        {"chains", 32},
                                        {"bins", 64},
                                        {"integrator", {{"eta", 1e-3}, {"steps", 1000000}}}},
                                       ctx.out / "A4_equilibrium", ctx.threads));
  const double tv = m.summary["total_variation"];
  return {tv < 0.05, "chains=32 steps/chain=1e6 burn_in=0.1 samples=" + m.summary["samples"].dump() +
                         " TV=" + g(tv) + " (tol < 0.05)"};
}

// A5: Arrhenius fit of mean exit times from a well of the symmetric double well.
Verdict a5(const Context& ctx) {
  const auto m = run_experiment(config(ExperimentKind::Escape,
                                       {{"landscape", {{"family", "symmetric"}}},
                                        {"betas", {2.0, 3.0, 4.0, 5.0, 6.0}},
                                        {"chains", 200},
                                        {"integrator", {{"eta", 1e-2}}}},
                                       ctx.out / "A5_escape", ctx.threads));
  const double slope = m.summary["fit_slope"];
  const double intercept = m.summary["fit_intercept"];
  const double target = -std::log(2.0 / std::numbers::pi);
  const bool slope_ok = std::abs(slope - 2.0) <= 0.15 * 2.0;
  // "within a factor of 3": same sign and |intercept| within [target/3, 3 target]
  const bool intercept_ok = intercept / target >= 1.0 / 3.0 && intercept / target <= 3.0;
  std::string detail = "slope=" + g(slope) + " (target 2 +/- 15%: " + (slope_ok ? "ok" : "out") +
                       ") intercept=" + g(intercept) + " (target " + g(target) + " within x3: [" + g(target / 3) +
                       ", " + g(3 * target) + "]: " + (intercept_ok ? "ok" : "out") + ")";
  detail += "; two-saddle first-hitting prediction ln(pi/8)=" + g(std::log(std::numbers::pi / 8.0));
  return {slope_ok && intercept_ok, detail};
}

json anneal_summary(const Context& ctx, const fs::path& dir, std::size_t chains, std::size_t steps,
                    const std::vector<std::size_t>& checkpoints) {
  const auto m = run_experiment(config(ExperimentKind::AnnealSweep,
                                       {{"landscape", {{"family", "tilted"}, {"gamma", 0.2}}},
                                        {"c_multiples", {0.5, 3.0}},
                                        {"K", 2.0},
                                        {"chains", chains},
                                        {"init", "shallow"},
                                        {"success", "basin"},
                                        {"checkpoints", checkpoints},
                                        {"integrator", {{"eta", 1e-3}, {"steps", steps}}}},
                                       dir, ctx.threads));
  return m.summary;
}

json cached_anneal;

const json& anneal(const Context& ctx) {
  if (cached_anneal.is_null()) {
    cached_anneal = anneal_summary(ctx, ctx.out / "A6_anneal", 200, 1000000, {10000, 100000, 1000000});
  }
  return cached_anneal;
}

// A6: subcritical beats supercritical by >= 0.2 and supercritical stays <= 0.9.
Verdict a6(const Context& ctx) {
  const json& s = anneal(ctx);
  const double sub = s["rates"][0]["checkpoints"].back()["success_fraction"];
  const double sup = s["rates"][1]["checkpoints"].back()["success_fraction"];
  return {sub - sup >= 0.2 && sup <= 0.9,
          "m=200 steps=1e6 success(0.5 c*)=" + g(sub) + " success(3 c*)=" + g(sup) + " diff=" + g(sub - sup) +
              " (need >= 0.2, super <= 0.9) classes=" + s["rates"][0]["class"].get<std::string>() + "/" +
              s["rates"][1]["class"].get<std::string>()};
}

// A7: subcritical failure non-increasing over checkpoints, up to Wilson-interval overlap.
Verdict a7(const Context& ctx) {
  const json& cps = anneal(ctx)["rates"][0]["checkpoints"];
  bool ok = true;
  std::string detail = "failure at 0.5 c*:";
  for (std::size_t k = 0; k < cps.size(); ++k) {
    const double f = 1.0 - cps[k]["success_fraction"].get<double>();
    detail += " t=" + cps[k]["step"].dump() + ":" + g(f) + " [" + g(1.0 - cps[k]["wilson_high"].get<double>()) + "," +
              g(1.0 - cps[k]["wilson_low"].get<double>()) + "]";
    if (k == 0) continue;
    const double prev = 1.0 - cps[k - 1]["success_fraction"].get<double>();
    const double prev_high = 1.0 - cps[k - 1]["wilson_low"].get<double>();
    const double low = 1.0 - cps[k]["wilson_high"].get<double>();
    if (f > prev && low > prev_high) ok = false;
  }
  return {ok, detail};
}

// A8: log-log slope of the anchor Hessian norm on a suboptimal configuration.
Verdict a8(const Context& ctx) {
  const auto m = run_experiment(config(ExperimentKind::Sharpening,
                                       {{"similarity", {{"kind", "gaussian"}, {"sigma", 1.0}}},
                                        {"angles", {0.0, 2.0, 0.3}},
                                        {"pairs", {{0, 1}}},
                                        {"betas", {10.0, 17.78279410038923, 31.622776601683793, 56.23413251903491, 100.0}}},
                                       ctx.out / "A8_sharpening", ctx.threads));
  const double slope = m.summary["fit_slope"];
  return {slope >= 0.8 && slope <= 1.2, "beta in [10, 100] slope=" + g(slope) + " (need [0.8, 1.2])"};
}

// A9: two triples of coincident embeddings, positives arranged as a 3-cycle in
// each triple. U0 vanishes exactly; any generic perturbation breaks the cycle.
Verdict a9(const Context&) {
  const Index d = 3;
  Vector a(d), b(d);
  a << 1.0, 0.0, 0.0;
  b << 0.0, 0.6, 0.8;
  Points z(d, 6);
  for (Index k = 0; k < 3; ++k) {
    z.col(k) = a;
    z.col(3 + k) = b;
  }
  const PairSet pairs({{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}}, 6);
  bool ok = true;
  std::string detail;
  for (const SimilarityKind& kind : {SimilarityKind{CosineSimilarity{}}, SimilarityKind{GaussianSimilarity{1.0}}}) {
    const double u0 = limiting_potential(z, kind, pairs);
    ok = ok && u0 == 0.0;
    RandomStream rng(7, 9);
    std::size_t positive = 0;
    double min_u0 = 1e300;
    for (int t = 0; t < 100; ++t) {
      Points p = z;
      for (Index k = 0; k < p.cols(); ++k) {
        Vector dir(d);
        for (Index r = 0; r < d; ++r) dir[r] = rng.normal();
        dir -= dir.dot(p.col(k)) * p.col(k);
        dir.normalize();
        p.col(k) = std::cos(0.05) * p.col(k) + std::sin(0.05) * dir;
      }
      const double u = limiting_potential(p, kind, pairs);
      positive += u > 0.0 ? 1 : 0;
      min_u0 = std::min(min_u0, u);
    }
    ok = ok && positive == 100;
    detail += std::string(detail.empty() ? "" : "; ") + kind_name(kind) + ": U0(coincident)=" + g(u0) +
              " perturbed>0: " + std::to_string(positive) + "/100 min=" + g(min_u0);
  }
  return {ok, detail};
}

// A10: every experiment rerun with the same seed, on 1 and 4 worker threads.
Verdict a10(const Context& ctx) {
  const std::vector<std::pair<ExperimentKind, json>> runs = {
      {ExperimentKind::Equilibrium, {{"chains", 8}, {"integrator", {{"steps", 100000}}}}},
      {ExperimentKind::Escape, {{"betas", {1.0, 2.0, 3.0}}, {"chains", 16}}},
      {ExperimentKind::AnnealSweep, {{"chains", 16}, {"checkpoints", {1000, 10000, 100000}}}},
      {ExperimentKind::Sharpening, json::object()},
      {ExperimentKind::Gradcheck, {{"trials", 30}}},
  };
  bool ok = true;
  std::size_t compared = 0;
  std::string mismatched;
  for (const auto& [kind, doc] : runs) {
    const std::string name = to_string(kind);
    const auto a = run_experiment(config(kind, doc, ctx.out / "A10" / (name + "_t1a"), 1));
    const auto b = run_experiment(config(kind, doc, ctx.out / "A10" / (name + "_t1b"), 1));
    const auto c = run_experiment(config(kind, doc, ctx.out / "A10" / (name + "_t4"), 4));
    if (a.files.size() != b.files.size() || a.files.size() != c.files.size()) {
      ok = false;
      mismatched += " " + name;
      continue;
    }
    for (std::size_t k = 0; k < a.files.size(); ++k) {
      ++compared;
      if (a.files[k].sha256 != b.files[k].sha256 || a.files[k].sha256 != c.files[k].sha256) {
        ok = false;
        mismatched += " " + name + "/" + a.files[k].name;
      }
    }
  }
  return {ok, "experiments=5 files compared=" + std::to_string(compared) + " (threads 1, 1, 4)" +
                  (mismatched.empty() ? std::string(" all checksums equal") : " mismatched:" + mismatched)};
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_seconds;  // 0: no runtime bound
  std::function<Verdict(const Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria A1..A10"};
  Context ctx;
  std::string out = "acceptance_out";
  std::string only;
  app.add_option("--out", out, "directory for experiment outputs");
  app.add_option("--only", only, "comma-separated subset, e.g. A1,A8");
  app.add_option("--threads", ctx.threads, "worker threads for the experiment runs");
  CLI11_PARSE(app, argc, argv);
  ctx.out = out;

  std::set<std::string> selected;
  std::stringstream ss(only);
  for (std::string id; std::getline(ss, id, ',');) selected.insert(id);

  const std::vector<Criterion> criteria = {
      {"A1", "gradient oracle", 10, a1},
      {"A2", "Hessian oracle", 10, a2},
      {"A3", "uniform convergence bound", 5, a3},
      {"A4", "fixed-temperature equilibrium", 60, a4},
      {"A5", "Arrhenius law", 600, a5},
      {"A6", "annealing dichotomy", 900, a6},
      {"A7", "finite-time failure shape", 0, a7},
      {"A8", "Hessian sharpening", 5, a8},
      {"A9", "global minima characterization", 1, a9},
      {"A10", "determinism", 0, a10},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run(ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt("%.2fs", secs);
    if (c.budget_seconds > 0) {
      timing += " of " + fmt("%.0fs", c.budget_seconds);
      if (secs > c.budget_seconds) {
        v.pass = false;
        timing += " OVER BUDGET";
      }
    }
    if (!v.pass) ++failures;
    std::printf("%s %s %s: %s [%s]\n", c.id, v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
