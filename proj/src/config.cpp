#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "annealab/experiment.hpp"

namespace annealab {

using nlohmann::json;

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Equilibrium: return "equilibrium";
    case ExperimentKind::Escape: return "escape";
    case ExperimentKind::AnnealSweep: return "anneal-sweep";
    case ExperimentKind::Sharpening: return "sharpening";
    case ExperimentKind::Gradcheck: return "gradcheck";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (auto k : {ExperimentKind::Equilibrium, ExperimentKind::Escape, ExperimentKind::AnnealSweep,
                 ExperimentKind::Sharpening, ExperimentKind::Gradcheck}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown experiment kind '" + std::string(name) +
                                         "'; accepted kinds: equilibrium, escape, anneal-sweep, sharpening, gradcheck");
}

LandscapeSpec LandscapeConfig::build() const {
  if (family == "symmetric") return LandscapeSpec::symmetric_double_well();
  if (family == "tilted") return LandscapeSpec::tilted_double_well(gamma);
  const auto n = static_cast<Index>(angles.size());
  return build_infonce_micro(n, similarity, PairSet(pairs, n), moving, angles, beta);
}

namespace {

// One JSON object being read: remembers which keys were consumed, records
// the effective value of each into `echo`, and appends failures to a shared
// list instead of stopping at the first one.
class Section {
 public:
  Section(const json* obj, std::string path, std::vector<std::string>* errors, json* echo)
      : obj_(obj), path_(std::move(path)), errors_(errors), echo_(echo) {
    *echo_ = json::object();
    if (obj_ && !obj_->is_object()) {
      fail("", "expected an object");
      obj_ = nullptr;
    }
  }

  bool has(const char* key) const { return obj_ && obj_->contains(key); }

  void fail(const std::string& key, const std::string& msg) const {
    const std::string where = key.empty() ? path_ : (path_.empty() ? key : path_ + "." + key);
    errors_->push_back((where.empty() ? std::string("config") : where) + ": " + msg);
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    if (!obj_) return nullptr;
    auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
  }

  double number(const char* key, double def, const std::function<bool(double)>& ok, const char* rule) {
    double v = def;
    if (const json* j = raw(key)) {
      if (!j->is_number()) {
        fail(key, "expected a number");
      } else {
        v = j->get<double>();
        if (!ok(v)) fail(key, std::string("must satisfy ") + rule + " (got " + j->dump() + ")");
      }
    }
    (*echo_)[key] = v;
    return v;
  }

  std::optional<double> optional_number(const char* key, const std::function<bool(double)>& ok, const char* rule) {
    const json* j = raw(key);
    if (!j || j->is_null()) {
      (*echo_)[key] = nullptr;
      return std::nullopt;
    }
    if (!j->is_number()) {
      fail(key, "expected a number or null");
      return std::nullopt;
    }
    const double v = j->get<double>();
    if (!ok(v)) fail(key, std::string("must satisfy ") + rule + " (got " + j->dump() + ")");
    (*echo_)[key] = v;
    return v;
  }

  static std::optional<std::uint64_t> as_count(const json& j) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
      const auto v = j.get<std::int64_t>();
      if (v < 0) return std::nullopt;
      return static_cast<std::uint64_t>(v);
    }
    if (j.is_number_float()) {
      const double v = j.get<double>();
      if (v >= 0 && v <= 9007199254740992.0 && std::floor(v) == v) return static_cast<std::uint64_t>(v);
    }
    return std::nullopt;
  }

  std::uint64_t count(const char* key, std::uint64_t def, std::uint64_t min) {
    std::uint64_t v = def;
    if (const json* j = raw(key)) {
      const auto c = as_count(*j);
      if (!c) {
        fail(key, "expected a non-negative integer");
      } else if (*c < min) {
        fail(key, "must be >= " + std::to_string(min) + " (got " + std::to_string(*c) + ")");
      } else {
        v = *c;
      }
    }
    (*echo_)[key] = v;
    return v;
  }

  std::optional<std::uint64_t> optional_count(const char* key) {
    const json* j = raw(key);
    if (!j || j->is_null()) {
      (*echo_)[key] = nullptr;
      return std::nullopt;
    }
    const auto c = as_count(*j);
    if (!c) {
      fail(key, "expected a non-negative integer or null");
      return std::nullopt;
    }
    (*echo_)[key] = *c;
    return c;
  }

  bool boolean(const char* key, bool def) {
    bool v = def;
    if (const json* j = raw(key)) {
      if (!j->is_boolean()) {
        fail(key, "expected true or false");
      } else {
        v = j->get<bool>();
      }
    }
    (*echo_)[key] = v;
    return v;
  }

  std::string choice(const char* key, const std::string& def, const std::vector<std::string>& allowed) {
    std::string v = def;
    if (const json* j = raw(key)) {
      if (!j->is_string()) {
        fail(key, "expected a string");
      } else if (std::find(allowed.begin(), allowed.end(), j->get<std::string>()) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(key, "'" + j->get<std::string>() + "' is not one of: " + list);
      } else {
        v = j->get<std::string>();
      }
    }
    (*echo_)[key] = v;
    return v;
  }

  std::vector<double> numbers(const char* key, std::vector<double> def, const std::function<bool(double)>& ok,
                              const char* rule, std::size_t min_size) {
    std::vector<double> v = std::move(def);
    if (const json* j = raw(key)) {
      if (!j->is_array()) {
        fail(key, "expected an array of numbers");
      } else {
        std::vector<double> got;
        bool good = true;
        for (const auto& e : *j) {
          if (!e.is_number()) {
            good = false;
            fail(key, "expected an array of numbers");
            break;
          }
          got.push_back(e.get<double>());
          if (!ok(got.back())) {
            good = false;
            fail(key, std::string("every entry must satisfy ") + rule + " (got " + e.dump() + ")");
          }
        }
        if (good) v = std::move(got);
      }
    }
    if (v.size() < min_size) fail(key, "needs at least " + std::to_string(min_size) + " entries");
    (*echo_)[key] = v;
    return v;
  }

  std::vector<std::uint64_t> counts(const char* key, std::vector<std::uint64_t> def, std::size_t min_size) {
    std::vector<std::uint64_t> v = std::move(def);
    if (const json* j = raw(key)) {
      std::vector<std::uint64_t> got;
      bool good = j->is_array();
      if (good) {
        for (const auto& e : *j) {
          const auto c = as_count(e);
          if (!c) {
            good = false;
            break;
          }
          got.push_back(*c);
        }
      }
      if (good) {
        v = std::move(got);
      } else {
        fail(key, "expected an array of non-negative integers");
      }
    }
    if (v.size() < min_size) fail(key, "needs at least " + std::to_string(min_size) + " entries");
    (*echo_)[key] = v;
    return v;
  }

  std::vector<std::string> strings(const char* key, std::vector<std::string> def,
                                   const std::vector<std::string>& allowed) {
    std::vector<std::string> v = std::move(def);
    if (const json* j = raw(key)) {
      std::vector<std::string> got;
      bool good = j->is_array() && !j->empty();
      if (good) {
        for (const auto& e : *j) {
          if (!e.is_string() || std::find(allowed.begin(), allowed.end(), e.get<std::string>()) == allowed.end()) {
            good = false;
            break;
          }
          got.push_back(e.get<std::string>());
        }
      }
      if (good) {
        v = std::move(got);
      } else {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(key, "expected a non-empty array drawn from: " + list);
      }
    }
    (*echo_)[key] = v;
    return v;
  }

  std::vector<PositivePair> pair_list(const char* key, std::vector<PositivePair> def) {
    std::vector<PositivePair> v = std::move(def);
    if (const json* j = raw(key)) {
      std::vector<PositivePair> got;
      bool good = j->is_array() && !j->empty();
      if (good) {
        for (const auto& e : *j) {
          if (!e.is_array() || e.size() != 2 || !as_count(e[0]) || !as_count(e[1])) {
            good = false;
            break;
          }
          got.push_back({static_cast<Index>(*as_count(e[0])), static_cast<Index>(*as_count(e[1]))});
        }
      }
      if (good) {
        v = std::move(got);
      } else {
        fail(key, "expected a non-empty array of [anchor, positive] index pairs");
      }
    }
    json echo = json::array();
    for (const auto& p : v) echo.push_back({p.anchor, p.positive});
    (*echo_)[key] = echo;
    return v;
  }

  Section sub(const char* key) {
    const json* j = raw(key);
    (*echo_)[key] = json::object();
    return Section(j, path_.empty() ? key : path_ + "." + key, errors_, &(*echo_)[key]);
  }

  /// Stores an arbitrary effective value in the echo (used for derived defaults).
  void echo(const char* key, json value) { (*echo_)[key] = std::move(value); }

  void finish() const {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown key");
    }
  }

  std::vector<std::string>& errors() const { return *errors_; }

 private:
  const json* obj_;
  std::string path_;
  std::vector<std::string>* errors_;
  json* echo_;
  std::set<std::string> seen_;
};

const auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
const auto finite = [](double x) { return std::isfinite(x); };

SimilarityKind read_similarity(Section s, const std::string& default_kind) {
  const std::string kind = s.choice("kind", default_kind, {"cosine", "gaussian"});
  SimilarityKind out = CosineSimilarity{};
  if (kind == "gaussian") {
    out = GaussianSimilarity{s.number("sigma", 1.0, positive, "sigma > 0")};
  }
  s.finish();
  return out;
}

LandscapeConfig read_landscape(Section s, const std::string& default_family) {
  LandscapeConfig c;
  c.family = s.choice("family", default_family, {"symmetric", "tilted", "infonce-slice"});
  if (c.family == "tilted") {
    c.gamma = s.number("gamma", 0.2, [](double g) { return g >= 0.0 && g < 0.5; }, "0 <= gamma < 0.5");
  } else if (c.family == "infonce-slice") {
    c.similarity = read_similarity(s.sub("similarity"), "cosine");
    if (!s.has("angles")) s.fail("angles", "required for infonce-slice landscapes");
    c.angles = s.numbers("angles", {}, finite, "finite", 3);
    c.pairs = s.pair_list("pairs", {{0, 1}});
    c.moving = static_cast<Index>(s.count("moving", 0, 0));
    c.beta = s.optional_number("beta", positive, "beta > 0");
    const auto n = static_cast<Index>(c.angles.size());
    for (const auto& p : c.pairs) {
      if (p.anchor >= n || p.positive >= n || p.anchor == p.positive) {
        s.fail("pairs", "pairs must be distinct indices below the number of angles");
        break;
      }
    }
    if (c.moving >= n) s.fail("moving", "must index one of the angles");
  }
  s.finish();
  return c;
}

IntegratorConfig read_integrator(Section s, double eta_default, std::optional<std::uint64_t> steps_default,
                                 bool allow_time_axis) {
  IntegratorConfig c;
  c.eta.eta0 = s.number("eta", eta_default, positive, "eta > 0");
  c.eta.decay = s.optional_number("eta_decay", [](double a) { return a > 0.5 && a <= 1.0; }, "0.5 < eta_decay <= 1");
  if (steps_default) c.steps = s.count("steps", *steps_default, 1);
  c.noise_on = s.boolean("noise", true);
  if (allow_time_axis) {
    c.time_axis = s.choice("time_axis", "sde_time", {"sde_time", "step_index"}) == "sde_time" ? TimeAxis::SdeTime
                                                                                               : TimeAxis::StepIndex;
  }
  s.finish();
  return c;
}

// Landscape construction can fail (flat slices, bad tilt); report it as a
// validation failure instead of a runtime one.
std::optional<LandscapeSpec> try_build(const LandscapeConfig& c, Section& s, std::size_t errors_before) {
  if (s.errors().size() != errors_before) return std::nullopt;
  try {
    return c.build();
  } catch (const Error& e) {
    s.fail("landscape", e.what());
    return std::nullopt;
  }
}

EquilibriumParams read_equilibrium(Section& s) {
  EquilibriumParams p;
  const auto before = s.errors().size();
  p.landscape = read_landscape(s.sub("landscape"), "symmetric");
  p.beta = s.number("beta", 2.0, positive, "beta > 0");
  p.chains = s.count("chains", 32, 1);
  p.bins = s.count("bins", 64, 8);
  p.grid = s.count("grid", 4096, 256);
  p.integrator = read_integrator(s.sub("integrator"), 1e-3, 1000000, false);
  try_build(p.landscape, s, before);
  return p;
}

EscapeParams read_escape(Section& s) {
  EscapeParams p;
  const auto before = s.errors().size();
  p.landscape = read_landscape(s.sub("landscape"), "symmetric");
  p.betas = s.numbers("betas", p.betas, positive, "beta > 0", 3);
  p.chains = s.count("chains", 200, 1);
  p.horizon = s.count("horizon", 100000000, 1);
  const auto start = s.optional_count("start_minimum");
  if (start) p.start_minimum = *start;
  p.integrator = read_integrator(s.sub("integrator"), 1e-2, std::nullopt, false);
  if (const auto spec = try_build(p.landscape, s, before)) {
    if (p.start_minimum && *p.start_minimum >= spec->minima().size()) {
      s.fail("start_minimum", "landscape has only " + std::to_string(spec->minima().size()) + " minima");
    }
  }
  return p;
}

AnnealParams read_anneal(Section& s) {
  AnnealParams p;
  const auto before = s.errors().size();
  p.landscape = read_landscape(s.sub("landscape"), "tilted");
  if (s.has("c_values") && s.has("c_multiples")) s.fail("c_values", "give either c_values or c_multiples, not both");
  if (s.has("c_values")) {
    p.rates_relative = false;
    p.rates = s.numbers("c_values", {}, positive, "c > 0", 1);
  } else {
    p.rates = s.numbers("c_multiples", p.rates, positive, "multiple > 0", 1);
  }
  p.K = s.number("K", 2.0, [](double k) { return std::isfinite(k) && k > 1.0; }, "K > 1");
  p.chains = s.count("chains", 200, 1);
  p.init = s.choice("init", "shallow", {"shallow", "uniform"});
  p.success = s.choice("success", "basin", {"basin", "distance"}) == "basin" ? SuccessRule::Basin
                                                                             : SuccessRule::Distance;
  p.epsilon = s.number("epsilon", kDefaultEpsilon, [](double e) { return e > 0.0 && e <= std::numbers::pi; },
                       "0 < epsilon <= pi");
  const auto cps = s.counts("checkpoints", {10000, 100000, 1000000}, 1);
  p.checkpoints.assign(cps.begin(), cps.end());
  for (std::size_t k = 0; k < p.checkpoints.size(); ++k) {
    if (p.checkpoints[k] == 0 || (k > 0 && p.checkpoints[k] <= p.checkpoints[k - 1])) {
      s.fail("checkpoints", "must be positive and strictly increasing");
      break;
    }
  }
  const std::uint64_t last = p.checkpoints.empty() ? 1 : p.checkpoints.back();
  p.integrator = read_integrator(s.sub("integrator"), 1e-3, last, true);
  if (!p.checkpoints.empty() && p.checkpoints.back() > p.integrator.steps) {
    s.fail("checkpoints", "checkpoints must not exceed integrator.steps");
  }
  if (const auto spec = try_build(p.landscape, s, before)) {
    if (p.rates_relative && !spec->barriers().has_barrier()) {
      s.fail("c_multiples", "landscape has a single basin (c* is infinite); use c_values");
    }
  }
  return p;
}

SharpeningParams read_sharpening(Section& s) {
  SharpeningParams p;
  p.similarity = read_similarity(s.sub("similarity"), "gaussian");
  if (s.has("angles") && s.has("points")) s.fail("angles", "give either angles or points, not both");
  if (s.has("points")) {
    const json* j = s.raw("points");
    std::vector<std::vector<double>> cols;
    bool good = j->is_array() && j->size() >= 2;
    if (good) {
      for (const auto& c : *j) {
        if (!c.is_array() || c.size() < 2 || (!cols.empty() && c.size() != cols.front().size())) {
          good = false;
          break;
        }
        std::vector<double> col;
        for (const auto& x : c) {
          if (!x.is_number()) {
            good = false;
            break;
          }
          col.push_back(x.get<double>());
        }
        cols.push_back(col);
      }
    }
    if (!good) {
      s.fail("points", "expected >= 2 embeddings, each an array of >= 2 numbers of equal length");
    } else {
      Points raw(static_cast<Index>(cols.front().size()), static_cast<Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) {
        for (std::size_t r = 0; r < cols[c].size(); ++r) raw(static_cast<Index>(r), static_cast<Index>(c)) = cols[c][r];
      }
      try {
        p.points = Configuration::from_raw(raw).points();
      } catch (const Error& e) {
        s.fail("points", e.what());
      }
      s.echo("points", *j);
    }
  } else {
    const auto angles = s.numbers("angles", {0.0, 2.0, 0.3}, finite, "finite", 2);
    p.points = Configuration::on_circle(angles).points();
  }
  p.pairs = s.pair_list("pairs", {{0, 1}});
  p.anchor = static_cast<Index>(s.count("anchor", static_cast<std::uint64_t>(p.pairs.front().anchor), 0));
  p.positive = static_cast<Index>(s.count("positive", static_cast<std::uint64_t>(p.pairs.front().positive), 0));
  p.betas = s.numbers("betas", p.betas, positive, "beta > 0", 3);
  if (!p.betas.empty()) {
    const auto [lo, hi] = std::minmax_element(p.betas.begin(), p.betas.end());
    if (*hi < 10.0 * *lo) s.fail("betas", "must span at least one decade");
  }
  const Index n = p.points.cols();
  if (n > 0) {
    bool in_range = true;
    for (const auto& pr : p.pairs) in_range = in_range && pr.anchor < n && pr.positive < n && pr.anchor != pr.positive;
    if (!in_range) {
      s.fail("pairs", "pairs must be distinct indices below the number of embeddings");
    } else if (std::find(p.pairs.begin(), p.pairs.end(), PositivePair{p.anchor, p.positive}) == p.pairs.end()) {
      s.fail("anchor", "(anchor, positive) must be one of the pairs");
    } else {
      const auto top = argmax_candidates(Configuration(p.points), p.anchor, p.similarity);
      if (std::find(top.begin(), top.end(), p.positive) != top.end()) {
        s.fail("points", "the positive is already the most similar candidate; sharpening needs a suboptimal configuration");
      }
    }
  }
  return p;
}

GradcheckParams read_gradcheck(Section& s) {
  GradcheckParams p;
  p.trials = s.count("trials", 100, 1);
  p.betas = s.numbers("betas", p.betas, positive, "beta > 0", 1);
  p.kinds = s.strings("kinds", p.kinds, {"cosine", "gaussian"});
  p.sigma = s.number("sigma", 1.0, positive, "sigma > 0");
  p.n_min = static_cast<Index>(s.count("n_min", 3, 2));
  p.n_max = static_cast<Index>(s.count("n_max", 8, 2));
  p.d_min = static_cast<Index>(s.count("d_min", 2, 2));
  p.d_max = static_cast<Index>(s.count("d_max", 4, 2));
  if (p.n_max < p.n_min) s.fail("n_max", "must be >= n_min");
  if (p.d_max < p.d_min) s.fail("d_max", "must be >= d_min");
  p.tolerance = s.number("tolerance", 1e-6, positive, "tolerance > 0");
  p.order = s.choice("fd_order", "second", {"second", "fourth"}) == "second" ? FdOrder::Second : FdOrder::Fourth;
  return p;
}

}  // namespace

ExperimentConfig parse_config(const json& doc, std::optional<ExperimentKind> kind) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  ExperimentConfig cfg;
  if (auto it = doc.find("experiment"); it != doc.end()) {
    if (!it->is_string()) throw Error(ErrorCode::ParseError, "experiment must be a string");
    const ExperimentKind named = parse_experiment_kind(it->get<std::string>());
    if (kind && *kind != named) {
      throw Error(ErrorCode::ValidationError, std::string("config is for '") + to_string(named) +
                                                  "' but the command asked for '" + to_string(*kind) + "'");
    }
    cfg.kind = named;
  } else if (kind) {
    cfg.kind = *kind;
  } else {
    throw Error(ErrorCode::ParseError,
                "no experiment kind given; accepted kinds: equilibrium, escape, anneal-sweep, sharpening, gradcheck");
  }

  std::vector<std::string> errors;
  Section top(&doc, "", &errors, &cfg.echo);
  top.raw("experiment");
  top.echo("experiment", to_string(cfg.kind));
  cfg.seed = top.count("seed", 0, 0);
  cfg.threads = static_cast<unsigned>(top.count("threads", 1, 0));
  if (const json* out = top.raw("out")) {
    if (!out->is_string() || out->get<std::string>().empty()) {
      top.fail("out", "expected a non-empty path string");
    } else {
      cfg.out_dir = out->get<std::string>();
    }
  }
  if (cfg.out_dir.empty()) cfg.out_dir = std::filesystem::path("results") / to_string(cfg.kind);
  top.echo("out", cfg.out_dir.generic_string());

  switch (cfg.kind) {
    case ExperimentKind::Equilibrium: cfg.params = read_equilibrium(top); break;
    case ExperimentKind::Escape: cfg.params = read_escape(top); break;
    case ExperimentKind::AnnealSweep: cfg.params = read_anneal(top); break;
    case ExperimentKind::Sharpening: cfg.params = read_sharpening(top); break;
    case ExperimentKind::Gradcheck: cfg.params = read_gradcheck(top); break;
  }
  top.finish();
  if (!errors.empty()) {
    throw Error(ErrorCode::ValidationError,
                "invalid " + std::string(to_string(cfg.kind)) + " config (" + std::to_string(errors.size()) +
                    (errors.size() == 1 ? " problem)" : " problems)"),
                errors);
  }
  return cfg;
}

ExperimentConfig parse_config_text(std::string_view text, std::optional<ExperimentKind> kind) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc, kind);
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), kind);
}

}  // namespace annealab
