#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "chemostat/cli.hpp"
#include "chemostat/errors.hpp"

namespace chemostat::cli {

using nlohmann::json;

namespace {

enum class Sign { Any, NonNegative, Positive };

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void error(const std::string& msg) { errors_.push_back(msg); }

  // Object at `key` (absent: nullptr); `allowed` lists its permitted keys.
  const json* object(const json& parent, const std::string& key, const std::string& path,
                     const std::set<std::string>& allowed) {
    if (!parent.contains(key)) return nullptr;
    const json& o = parent.at(key);
    const std::string here = join(path, key);
    if (!o.is_object()) {
      error(here + ": expected an object");
      return nullptr;
    }
    check_keys(o, here, allowed);
    return &o;
  }

  void check_keys(const json& o, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = o.begin(); it != o.end(); ++it) {
      if (!allowed.count(it.key())) error(join(path, it.key()) + ": unknown key");
    }
  }

  double number(const json& o, const std::string& path, const std::string& key, double fallback,
                Sign sign = Sign::Any) {
    if (!o.contains(key)) return fallback;
    const json& v = o.at(key);
    const std::string here = join(path, key);
    if (!v.is_number()) {
      error(here + ": expected a number");
      return fallback;
    }
    const double d = v.get<double>();
    check_sign(here, d, sign);
    return d;
  }

  double required_number(const json& o, const std::string& path, const std::string& key,
                         Sign sign) {
    if (!o.contains(key)) {
      error(join(path, key) + ": missing required key");
      return 1.0;
    }
    return number(o, path, key, 1.0, sign);
  }

  std::int64_t integer(const json& o, const std::string& path, const std::string& key,
                       std::int64_t fallback, std::int64_t min_value) {
    if (!o.contains(key)) return fallback;
    const json& v = o.at(key);
    const std::string here = join(path, key);
    if (!v.is_number_integer()) {
      error(here + ": expected an integer");
      return fallback;
    }
    const auto i = v.get<std::int64_t>();
    if (i < min_value) {
      error(here + ": must be >= " + std::to_string(min_value) + " (got " + std::to_string(i) +
            ")");
    }
    return i;
  }

  bool boolean(const json& o, const std::string& path, const std::string& key, bool fallback) {
    if (!o.contains(key)) return fallback;
    if (!o.at(key).is_boolean()) {
      error(join(path, key) + ": expected true or false");
      return fallback;
    }
    return o.at(key).get<bool>();
  }

  std::string string(const json& o, const std::string& path, const std::string& key,
                     const std::string& fallback) {
    if (!o.contains(key)) return fallback;
    if (!o.at(key).is_string()) {
      error(join(path, key) + ": expected a string");
      return fallback;
    }
    return o.at(key).get<std::string>();
  }

  std::vector<double> numbers(const json& o, const std::string& path, const std::string& key,
                              std::vector<double> fallback, Sign sign = Sign::Any) {
    if (!o.contains(key)) return fallback;
    const json& v = o.at(key);
    const std::string here = join(path, key);
    if (!v.is_array()) {
      error(here + ": expected an array of numbers");
      return fallback;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string el = here + "[" + std::to_string(i) + "]";
      if (!v[i].is_number()) {
        error(el + ": expected a number");
        continue;
      }
      out.push_back(v[i].get<double>());
      check_sign(el, out.back(), sign);
    }
    return out;
  }

  std::vector<std::int64_t> integers(const json& o, const std::string& path,
                                     const std::string& key, std::vector<std::int64_t> fallback,
                                     std::int64_t min_value) {
    if (!o.contains(key)) return fallback;
    const json& v = o.at(key);
    const std::string here = join(path, key);
    if (!v.is_array()) {
      error(here + ": expected an array of integers");
      return fallback;
    }
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string el = here + "[" + std::to_string(i) + "]";
      if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < min_value) {
        error(el + ": expected an integer >= " + std::to_string(min_value));
        continue;
      }
      out.push_back(v[i].get<std::int64_t>());
    }
    return out;
  }

  // A state written as [x, s].
  std::optional<HybridState> state(const json& v, const std::string& here) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number()) {
      error(here + ": expected [x, s] with integer x");
      return std::nullopt;
    }
    HybridState h{v[0].get<std::int64_t>(), v[1].get<double>()};
    if (h.x < 0) error(here + ": x must be >= 0");
    if (!(h.s >= 0.0)) error(here + ": s must be >= 0");
    return h;
  }

  std::vector<HybridState> states(const json& o, const std::string& path, const std::string& key) {
    if (!o.contains(key)) return {};
    const json& v = o.at(key);
    const std::string here = join(path, key);
    if (!v.is_array()) {
      error(here + ": expected an array of [x, s] pairs");
      return {};
    }
    std::vector<HybridState> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (auto h = state(v[i], here + "[" + std::to_string(i) + "]")) out.push_back(*h);
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  void check_sign(const std::string& here, double d, Sign sign) {
    if (!std::isfinite(d)) {
      error(here + ": must be finite");
    } else if (sign == Sign::Positive && !(d > 0.0)) {
      error(here + ": must be positive (got " + json(d).dump() + ")");
    } else if (sign == Sign::NonNegative && d < 0.0) {
      error(here + ": must be >= 0 (got " + json(d).dump() + ")");
    }
  }

  std::vector<std::string>& errors_;
};

json parse_strict(const std::string& text, std::vector<std::string>& errors) {
  // One key set per open object; a repeated key is reported with its path.
  std::vector<std::set<std::string>> seen;
  std::vector<std::string> keys;
  auto cb = [&](int, json::parse_event_t ev, json& parsed) {
    switch (ev) {
      case json::parse_event_t::object_start:
        seen.emplace_back();
        keys.emplace_back();
        break;
      case json::parse_event_t::key: {
        const auto k = parsed.get<std::string>();
        std::string path;
        for (std::size_t i = 0; i + 1 < keys.size(); ++i) path = Reader::join(path, keys[i]);
        if (!seen.back().insert(k).second) {
          errors.push_back(Reader::join(path, k) + ": duplicate key");
        }
        keys.back() = k;
        break;
      }
      case json::parse_event_t::object_end:
        seen.pop_back();
        keys.pop_back();
        break;
      default:
        break;
    }
    return true;
  };
  try {
    return json::parse(text, cb);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

GrowthLaw read_growth(Reader& r, const json& model, std::vector<std::string>& errors) {
  const json* g = r.object(model, "growth", "model", {"kind", "c", "m", "K"});
  if (!g) {
    if (!model.contains("growth")) errors.push_back("model.growth: missing required key");
    return GrowthLaw::linear(1.0);
  }
  const bool has_linear = g->contains("c");
  const bool has_monod = g->contains("m") || g->contains("K");
  std::string kind = r.string(*g, "model.growth", "kind", "");
  if (has_linear && has_monod) {
    r.error("model.growth: mixes the linear key 'c' with monod keys 'm'/'K'");
    return GrowthLaw::linear(1.0);
  }
  if (kind.empty()) {
    if (has_linear) kind = "linear";
    else if (has_monod) kind = "monod";
    else {
      r.error("model.growth.kind: missing required key");
      return GrowthLaw::linear(1.0);
    }
  }
  if (kind == "linear") {
    if (has_monod) r.error("model.growth: kind 'linear' does not take 'm' or 'K'");
    return GrowthLaw::linear(r.required_number(*g, "model.growth", "c", Sign::Positive));
  }
  if (kind == "monod") {
    if (has_linear) r.error("model.growth: kind 'monod' does not take 'c'");
    const double m = r.required_number(*g, "model.growth", "m", Sign::Positive);
    const double K = r.required_number(*g, "model.growth", "K", Sign::Positive);
    return GrowthLaw::monod(m, K);
  }
  r.error("model.growth.kind: expected 'linear' or 'monod' (got '" + kind + "')");
  return GrowthLaw::linear(1.0);
}

DriftGrid read_grid(Reader& r, const json& parent, const std::string& path) {
  DriftGrid g;
  const json* o = r.object(parent, "grid", path,
                           {"x_min", "x_max", "s_lo_fraction", "s_hi_fraction", "s_points"});
  if (!o) return g;
  const std::string here = Reader::join(path, "grid");
  g.x_min = r.integer(*o, here, "x_min", g.x_min, 1);
  g.x_max = r.integer(*o, here, "x_max", g.x_max, 1);
  g.s_lo_fraction = r.number(*o, here, "s_lo_fraction", g.s_lo_fraction, Sign::Positive);
  g.s_hi_fraction = r.number(*o, here, "s_hi_fraction", g.s_hi_fraction, Sign::Positive);
  g.s_points = static_cast<int>(r.integer(*o, here, "s_points", g.s_points, 8));
  if (g.x_max < g.x_min) r.error(here + ": x_max must be >= x_min");
  return g;
}

std::optional<CompactSpec> read_compact(Reader& r, const json& parent, const std::string& path,
                                        const std::string& key) {
  const json* o = r.object(parent, key, path, {"x_max", "s_lo", "s_hi"});
  if (!o) return std::nullopt;
  const std::string here = Reader::join(path, key);
  CompactSpec K;
  K.x_max = r.integer(*o, here, "x_max", K.x_max, 1);
  K.s_lo = r.number(*o, here, "s_lo", K.s_lo, Sign::Positive);
  K.s_hi = r.number(*o, here, "s_hi", K.s_hi, Sign::Positive);
  if (K.s_hi < K.s_lo) r.error(here + ": s_hi must be >= s_lo");
  return K;
}

void read_flow(Reader& r, const json& root, FlowBlock& b) {
  const json* o = r.object(root, "flow", "", {"ell", "s0", "times", "equilibria"});
  if (!o) return;
  b.ell = r.integers(*o, "flow", "ell", b.ell, 0);
  b.s0 = r.numbers(*o, "flow", "s0", b.s0, Sign::NonNegative);
  b.times = r.numbers(*o, "flow", "times", b.times, Sign::NonNegative);
  b.equilibria = r.integer(*o, "flow", "equilibria", b.equilibria, 1);
}

void read_simulate(Reader& r, const json& root, SimulateBlock& b) {
  const json* o = r.object(root, "simulate", "", {"x0", "s0", "horizon"});
  if (!o) return;
  b.x0 = r.integer(*o, "simulate", "x0", b.x0, 0);
  b.s0 = r.number(*o, "simulate", "s0", b.s0, Sign::NonNegative);
  b.horizon = r.number(*o, "simulate", "horizon", b.horizon, Sign::Positive);
}

void read_lyapunov(Reader& r, const json& root, LyapunovBlock& b) {
  const json* o = r.object(root, "verify_lyapunov", "",
                           {"rho", "p", "alpha", "theta", "eta", "zeta", "fit_zeta", "grid",
                            "g_check", "g_x_max", "g_s_points"});
  if (!o) return;
  const std::string path = "verify_lyapunov";
  b.rho = r.number(*o, path, "rho", b.rho, Sign::Positive);
  if (o->contains("rho") && !(b.rho > 1.0)) r.error(path + ".rho: must be > 1");
  b.p = r.number(*o, path, "p", b.p, Sign::NonNegative);
  const bool any_explicit = o->contains("alpha") || o->contains("theta") || o->contains("eta") ||
                            o->contains("zeta");
  if (any_explicit) {
    for (const char* k : {"alpha", "theta", "eta"}) {
      if (!o->contains(k)) r.error(path + "." + k + ": required when any of alpha/theta/eta/zeta is given");
    }
    if (!o->contains("p")) r.error(path + ".p: required when alpha/theta/eta/zeta are given");
    LyapunovConfig c;
    c.rho = b.rho;
    c.p = b.p;
    c.alpha = r.number(*o, path, "alpha", c.alpha, Sign::Positive);
    c.theta = r.number(*o, path, "theta", c.theta, Sign::Positive);
    c.eta = r.number(*o, path, "eta", c.eta, Sign::Positive);
    c.zeta = r.number(*o, path, "zeta", c.zeta, Sign::NonNegative);
    b.explicit_config = c;
  }
  b.fit_zeta = r.boolean(*o, path, "fit_zeta", b.fit_zeta);
  if (b.fit_zeta && !any_explicit) r.error(path + ".fit_zeta: only meaningful with explicit alpha/theta/eta");
  b.grid = read_grid(r, *o, path);
  b.g_check = r.boolean(*o, path, "g_check", b.g_check);
  b.g_x_max = r.integer(*o, path, "g_x_max", b.g_x_max, 3);
  b.g_s_points = static_cast<int>(r.integer(*o, path, "g_s_points", b.g_s_points, 8));
}

void read_qsd(Reader& r, const json& root, QsdBlock& b) {
  const json* o = r.object(root, "qsd", "",
                           {"method", "x0", "s0", "t", "N", "s_bins", "lambda", "yaglom", "h",
                            "mass_ratio"});
  if (!o) return;
  const std::string path = "qsd";
  b.method = r.string(*o, path, "method", b.method);
  if (b.method != "fleming_viot" && b.method != "naive") {
    r.error(path + ".method: expected 'fleming_viot' or 'naive'");
  }
  b.x0 = r.integer(*o, path, "x0", b.x0, 1);
  b.s0 = r.number(*o, path, "s0", b.s0, Sign::NonNegative);
  b.t = r.number(*o, path, "t", b.t, Sign::NonNegative);
  b.n = r.integer(*o, path, "N", b.n, 1);
  b.s_bins = static_cast<int>(r.integer(*o, path, "s_bins", b.s_bins, 1));
  if (const json* l = r.object(*o, "lambda", path, {"grid", "N"})) {
    b.lambda_grid = r.numbers(*l, "qsd.lambda", "grid", {}, Sign::Positive);
    b.lambda_n = r.integer(*l, "qsd.lambda", "N", b.lambda_n, 1);
    if (!l->contains("grid")) r.error("qsd.lambda.grid: missing required key");
  }
  if (const json* y = r.object(*o, "yaglom", path, {"initial", "times", "N"})) {
    b.yaglom_initial = r.states(*y, "qsd.yaglom", "initial");
    b.yaglom_times = r.numbers(*y, "qsd.yaglom", "times", b.yaglom_times, Sign::Positive);
    b.yaglom_n = r.integer(*y, "qsd.yaglom", "N", b.yaglom_n, 1);
    if (b.yaglom_initial.size() < 2) r.error("qsd.yaglom.initial: needs at least 2 states");
  }
  if (const json* h = r.object(*o, "h", path, {"points", "t_large", "N"})) {
    b.h_points = r.states(*h, "qsd.h", "points");
    b.h_t_large = r.number(*h, "qsd.h", "t_large", b.h_t_large, Sign::Positive);
    b.h_n = r.integer(*h, "qsd.h", "N", b.h_n, 1);
    if (b.lambda_grid.empty()) r.error("qsd.h: requires qsd.lambda for the rate estimate");
  }
  if (const json* m = r.object(*o, "mass_ratio", path, {"K", "times", "N"})) {
    b.mass_ratio_K = read_compact(r, *m, "qsd.mass_ratio", "K");
    if (!b.mass_ratio_K) r.error("qsd.mass_ratio.K: missing required key");
    b.mass_ratio_times = r.numbers(*m, "qsd.mass_ratio", "times", b.mass_ratio_times, Sign::NonNegative);
    b.mass_ratio_n = r.integer(*m, "qsd.mass_ratio", "N", b.mass_ratio_n, 1);
  }
}

void read_bounds(Reader& r, const json& root, BoundsBlock& b) {
  const json* o =
      r.object(root, "bounds", "", {"small_set", "hitting", "inv_substrate", "exp_moment"});
  if (!o) return;
  if (const json* s = r.object(*o, "small_set", "bounds",
                               {"tau0", "s0", "s1", "N", "starts", "subintervals"})) {
    SmallSetBlock ss;
    const std::string p = "bounds.small_set";
    ss.tau0 = r.number(*s, p, "tau0", ss.tau0, Sign::Positive);
    ss.s0 = r.number(*s, p, "s0", ss.s0, Sign::Positive);
    ss.s1 = r.number(*s, p, "s1", ss.s1, Sign::Positive);
    ss.n = r.integer(*s, p, "N", ss.n, 1);
    ss.starts = static_cast<int>(r.integer(*s, p, "starts", ss.starts, 1));
    ss.subintervals = static_cast<int>(r.integer(*s, p, "subintervals", ss.subintervals, 1));
    b.small_set = ss;
  }
  if (o->contains("hitting")) {
    const json& arr = o->at("hitting");
    if (!arr.is_array()) {
      r.error("bounds.hitting: expected an array of scenarios");
    } else {
      std::set<std::string> ids;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = "bounds.hitting[" + std::to_string(i) + "]";
        const json& h = arr[i];
        if (!h.is_object()) {
          r.error(p + ": expected an object");
          continue;
        }
        r.check_keys(h, p, {"id", "K", "start", "target", "tau0", "tau", "eps", "delta", "N",
                            "half_width"});
        HittingBlock hb;
        auto& sc = hb.scenario;
        sc.id = r.string(h, p, "id", "scenario" + std::to_string(i));
        if (!ids.insert(sc.id).second) r.error(p + ".id: duplicate scenario id '" + sc.id + "'");
        if (auto K = read_compact(r, h, p, "K")) sc.K = *K;
        else r.error(p + ".K: missing required key");
        if (h.contains("start")) {
          if (auto st = r.state(h.at("start"), p + ".start")) sc.start = *st;
        } else {
          r.error(p + ".start: missing required key");
        }
        if (h.contains("target")) {
          if (auto st = r.state(h.at("target"), p + ".target")) sc.target = *st;
        } else {
          r.error(p + ".target: missing required key");
        }
        sc.tau0 = r.number(h, p, "tau0", sc.tau0, Sign::Positive);
        sc.tau = r.number(h, p, "tau", sc.tau, Sign::Positive);
        sc.eps = r.number(h, p, "eps", sc.eps, Sign::Positive);
        sc.delta = r.number(h, p, "delta", sc.delta, Sign::NonNegative);
        hb.n = r.integer(h, p, "N", hb.n, 1);
        hb.half_width = r.number(h, p, "half_width", hb.half_width, Sign::NonNegative);
        b.hitting.push_back(hb);
      }
    }
  }
  if (const json* s = r.object(*o, "inv_substrate", "bounds", {"x", "t", "N"})) {
    InvSubstrateBlock ib;
    ib.x = r.integer(*s, "bounds.inv_substrate", "x", ib.x, 1);
    ib.t = r.number(*s, "bounds.inv_substrate", "t", ib.t, Sign::Positive);
    ib.n = r.integer(*s, "bounds.inv_substrate", "N", ib.n, 1);
    b.inv_substrate = ib;
  }
  if (const json* s = r.object(*o, "exp_moment", "bounds", {"x", "s", "t_cap", "N"})) {
    ExpMomentBlock eb;
    eb.x = r.integer(*s, "bounds.exp_moment", "x", eb.x, 0);
    eb.s = r.number(*s, "bounds.exp_moment", "s", eb.s, Sign::NonNegative);
    eb.t_cap = r.number(*s, "bounds.exp_moment", "t_cap", eb.t_cap, Sign::Positive);
    eb.n = r.integer(*s, "bounds.exp_moment", "N", eb.n, 1);
    b.exp_moment = eb;
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  std::vector<std::string> errors;
  json root = parse_strict(text, errors);
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  Reader r(errors);
  r.check_keys(root, "", {"model", "solver", "seed", "replicas", "output_dir", "flow",
                          "simulate", "verify_lyapunov", "qsd", "bounds", "report"});

  RunConfig cfg;
  if (const json* m = r.object(root, "model", "", {"D", "s_in", "k", "growth"})) {
    cfg.params.D = r.required_number(*m, "model", "D", Sign::Positive);
    cfg.params.s_in = r.required_number(*m, "model", "s_in", Sign::Positive);
    cfg.params.k = r.required_number(*m, "model", "k", Sign::Positive);
    cfg.params.growth = read_growth(r, *m, errors);
  } else if (!root.contains("model")) {
    errors.push_back("model: missing required key");
  }
  if (const json* s = r.object(root, "solver", "",
                               {"abs_tol", "rel_tol", "max_step", "root_tol", "max_steps"})) {
    auto& sv = cfg.solver;
    sv.abs_tol = r.number(*s, "solver", "abs_tol", sv.abs_tol, Sign::Positive);
    sv.rel_tol = r.number(*s, "solver", "rel_tol", sv.rel_tol, Sign::Positive);
    sv.max_step = r.number(*s, "solver", "max_step", sv.max_step, Sign::Positive);
    sv.root_tol = r.number(*s, "solver", "root_tol", sv.root_tol, Sign::Positive);
    sv.max_steps = static_cast<std::size_t>(
        r.integer(*s, "solver", "max_steps", static_cast<std::int64_t>(sv.max_steps), 1));
  }
  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (s.is_number_unsigned()) cfg.seed = s.get<std::uint64_t>();
    else if (s.is_number_integer() && s.get<std::int64_t>() >= 0) cfg.seed = s.get<std::uint64_t>();
    else errors.push_back("seed: expected a non-negative 64-bit integer");
  }
  cfg.replicas = r.integer(root, "", "replicas", cfg.replicas, 1);
  cfg.output_dir = r.string(root, "", "output_dir", cfg.output_dir);
  read_flow(r, root, cfg.flow);
  read_simulate(r, root, cfg.simulate);
  read_lyapunov(r, root, cfg.lyapunov);
  read_qsd(r, root, cfg.qsd);
  read_bounds(r, root, cfg.bounds);
  if (const json* rep = r.object(root, "report", "", {"manifests"})) {
    if (rep->contains("manifests")) {
      const json& arr = rep->at("manifests");
      if (!arr.is_array()) {
        errors.push_back("report.manifests: expected an array of paths");
      } else {
        for (std::size_t i = 0; i < arr.size(); ++i) {
          if (arr[i].is_string()) cfg.report.manifests.push_back(arr[i].get<std::string>());
          else errors.push_back("report.manifests[" + std::to_string(i) + "]: expected a path string");
        }
      }
    }
  }

  if (!errors.empty()) {
    std::ostringstream msg;
    msg << "invalid config (" << errors.size() << (errors.size() == 1 ? " error" : " errors")
        << "):";
    for (const auto& e : errors) msg << "\n  - " << e;
    throw ConfigError(msg.str());
  }
  cfg.echo = std::move(root);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config file not found or unreadable: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

bool is_stochastic(const std::string& subcommand) {
  return subcommand == "simulate" || subcommand == "qsd" || subcommand == "bounds";
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"flow", "simulate", "verify-lyapunov",
                                              "qsd",  "bounds",   "report"};
  return names;
}

}  // namespace chemostat::cli
