#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "chemostat/cli.hpp"
#include "chemostat/errors.hpp"
#include "chemostat/flow.hpp"
#include "chemostat/parallel.hpp"
#include "chemostat/qsd.hpp"
#include "chemostat/rng.hpp"
#include "chemostat/simulate.hpp"

namespace chemostat::cli {

using nlohmann::json;

namespace {

// Non-finite values are not representable in JSON numbers.
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

std::uint64_t task_seed(const RunConfig& cfg, std::uint64_t tag) {
  return substream(*cfg.seed, tag);
}

json proportion_json(const Proportion& p) {
  return {{"p", num(p.p())}, {"stderr", num(p.stderr_())}, {"hits", p.hits}, {"n", p.n}};
}

json mean_json(const MeanEstimate& m) {
  return {{"mean", num(m.mean)}, {"stderr", num(m.stderr_)}, {"n", m.n}};
}

json lambda_json(const LambdaEstimate& l) {
  return {{"method", to_string(l.method)}, {"lambda_hat", num(l.lambda_hat)},
          {"ci_low", num(l.ci_low)},       {"ci_high", num(l.ci_high)},
          {"stderr", num(l.stderr_)},      {"window", {num(l.window_lo), num(l.window_hi)}}};
}

json validation_json(const ValidationReport& v) {
  json j = {{"assumption_holds", v.assumption_holds},
            {"persistence", v.persistence},
            {"s_bar1", num(v.s_bar1)},
            {"mu_s_bar1", num(v.mu_s_bar1)},
            {"dmu_s_bar1", num(v.dmu_s_bar1)},
            {"failures", v.failures}};
  j["p_max"] = v.p_max ? num(*v.p_max) : json(nullptr);
  return j;
}

void require_count(std::int64_t n, std::int64_t minimum, const std::string& what) {
  if (n < minimum) {
    throw PowerError(what + " = " + std::to_string(n) + " is below the minimum " +
                     std::to_string(minimum) + " for a usable estimate");
  }
}

// ---------------------------------------------------------------------------

int run_flow(const RunConfig& cfg, const Model& model, OutputSet& out) {
  std::string eq = "ell,s_bar,mu_s_bar,residual\n";
  for (std::int64_t ell = 1; ell <= cfg.flow.equilibria; ++ell) {
    const double s = model.s_bar(ell);
    const double res = model.D() * (model.s_in() - s) - model.k() * model.mu(s) * ell;
    eq += fmt::format("{},{},{},{}\n", ell, g17(s), g17(model.mu(s)), g17(res));
  }
  out.write("equilibria.csv", eq);

  std::string fl = "ell,s0,t,phi,mu_integral,phi_tilde,phi_inverse\n";
  for (std::int64_t ell : cfg.flow.ell) {
    for (double s0 : cfg.flow.s0) {
      for (double t : cfg.flow.times) {
        const auto fg = flow_with_growth(model, ell, s0, t);
        const double back = t == 0.0 ? 0.0 : time_to_reach(model, ell, s0, fg.s).or_infinity();
        const double inv = initial_for(model, ell, fg.s, t);
        fl += fmt::format("{},{},{},{},{},{},{}\n", ell, g17(s0), g17(t), g17(fg.s),
                          g17(fg.mu_integral), g17(back), g17(inv));
      }
    }
  }
  out.write("flow.csv", fl);
  return 0;
}

int run_simulate(const RunConfig& cfg, const Model& model, OutputSet& out, unsigned threads) {
  const auto& b = cfg.simulate;
  const auto R = static_cast<std::size_t>(cfg.replicas);
  std::vector<Trajectory> paths(R);
  parallel_for(R, threads, [&](std::size_t i) {
    RngStream rng(*cfg.seed, i);
    paths[i] = simulate_path(model, b.x0, b.s0, b.horizon, rng);
  });
  std::string csv = "replica,t,kind,x_after,s\n";
  std::string summary;
  for (std::size_t i = 0; i < R; ++i) {
    const auto& tr = paths[i];
    csv += fmt::format("{},{},initial,{},{}\n", i, g17(0.0), tr.initial.x, g17(tr.initial.s));
    std::size_t div = 0, wash = 0;
    for (const auto& e : tr.events) {
      csv += fmt::format("{},{},{},{},{}\n", i, g17(e.time), to_string(e.kind), e.x_after,
                         g17(e.s_at_jump));
      (e.kind == JumpKind::Division ? div : wash) += 1;
    }
    const auto end = tr.state_at(model, tr.horizon);
    json line = {{"replica", i},       {"events", tr.events.size()}, {"divisions", div},
                 {"washouts", wash},   {"extinct", tr.extinct_at.has_value()},
                 {"x_end", end.x},     {"s_end", num(end.s)},        {"horizon", num(tr.horizon)}};
    line["extinct_at"] = tr.extinct_at ? num(*tr.extinct_at) : json(nullptr);
    summary += line.dump() + "\n";
  }
  out.write("trajectories.csv", csv);
  out.write("summary.jsonl", summary);
  return 0;
}

int run_verify_lyapunov(const RunConfig& cfg, const Model& model, OutputSet& out,
                        unsigned threads) {
  const auto& b = cfg.lyapunov;
  const auto v = validate(model.params());
  if (!v.ok()) {
    std::string msg = "standing assumptions fail:";
    for (const auto& f : v.failures) msg += " " + f + ";";
    throw ConfigError(msg);
  }
  LyapunovConfig lc;
  bool fit = false;
  if (b.explicit_config) {
    lc = *b.explicit_config;
    fit = b.fit_zeta;
  } else {
    const double p = b.p > 0.0 ? b.p : 0.5 * *v.p_max;
    lc = select_parameters(model, b.rho, p, b.grid);
  }
  const auto cert = verify_drift(model, lc, b.grid, fit, threads);
  const auto sw = sandwich_constants(model, cert.config);

  json j;
  j["validation"] = validation_json(v);
  j["config"] = {{"rho", num(cert.config.rho)},     {"p", num(cert.config.p)},
                 {"alpha", num(cert.config.alpha)}, {"theta", num(cert.config.theta)},
                 {"eta", num(cert.config.eta)},     {"zeta", num(cert.config.zeta)}};
  j["grid"] = {{"x_min", b.grid.x_min},
               {"x_max", b.grid.x_max},
               {"s_lo_fraction", num(b.grid.s_lo_fraction)},
               {"s_hi_fraction", num(b.grid.s_hi_fraction)},
               {"s_points", b.grid.s_points}};
  j["theta_threshold"] = num(theta_threshold(model, cert.config.p));
  j["sandwich"] = {{"c_low", num(sw.c_low)}, {"c_high", num(sw.c_high)}};
  j["grid_worst_margin"] = num(cert.grid_worst_margin);
  j["worst_margin"] = num(cert.worst_margin);
  j["worst"] = {{"x", cert.worst.x},
                {"s", num(cert.worst.s)},
                {"margin", num(cert.worst.margin)},
                {"location", cert.worst.location}};
  j["boundary"] = {{"x1_sbar_slope", num(cert.boundary.x1_sbar_slope)},
                   {"x1_sbar_negative", cert.boundary.x1_sbar_negative},
                   {"x_ge2_sbar_negative", cert.boundary.x_ge2_sbar_negative},
                   {"s0_negative", cert.boundary.s0_negative}};
  j["fitted_zeta"] = num(cert.fitted_zeta);
  j["zeta_t_at_1"] = cert.config.eta > model.D() ? num(cert.zeta_t(model, 1.0)) : json(nullptr);
  j["passed"] = cert.passed;
  bool ok = cert.passed;
  if (b.g_check) {
    const auto g = g_construct(model, b.g_x_max, b.g_s_points);
    j["g"] = {{"eps", num(g.constants.eps)},       {"beta", num(g.constants.beta)},
              {"delta0", num(g.constants.delta0)}, {"delta1", num(g.constants.delta1)},
              {"C1", num(g.C1)},                   {"C2", num(g.C2)},
              {"C", num(g.C)},                     {"A", num(g.A)},
              {"worst_margin", num(g.worst_margin)}, {"worst_x", g.worst_x},
              {"worst_s", num(g.worst_s)},         {"halvings", g.halvings},
              {"passed", g.passed}};
    ok = ok && g.passed;
  }
  out.write("certificate.json", j.dump(2) + "\n");
  if (!ok) {
    std::cerr << "verify-lyapunov: certificate failed; worst point x=" << cert.worst.x
              << " s=" << g17(cert.worst.s) << " (" << cert.worst.location << ")\n";
    return 3;
  }
  return 0;
}

void write_histogram(OutputSet& out, const Histogram& h) {
  std::string csv = "x,s_bin_lo,s_bin_hi,mass,stderr\n";
  for (std::size_t c = 0; c < h.mass.size(); ++c) {
    csv += fmt::format("{},{},{},{},{}\n", h.binning.cell_x(c), g17(h.binning.cell_s_lo(c)),
                       g17(h.binning.cell_s_hi(c)), g17(h.mass[c]), g17(h.stderr_[c]));
  }
  out.write("histogram.csv", csv);
}

int run_qsd(const RunConfig& cfg, const Model& model, OutputSet& out, unsigned threads) {
  const auto& b = cfg.qsd;
  json rep;
  if (b.method == "naive") {
    require_count(b.n, 1000, "qsd.N for the naive estimator");
    auto r = estimate_qsd_naive(model, b.x0, b.s0, b.t, static_cast<std::size_t>(b.n),
                                task_seed(cfg, 1), threads);
    if (b.s_bins != 64) {
      r.qsd.histogram = make_histogram(
          Binning::from_samples(r.survivors, model.s_bar1(), b.s_bins), r.survivors);
    }
    write_histogram(out, r.qsd.histogram);
    rep["survival"] = proportion_json(r.survival);
    rep["histogram"] = {{"method", "naive"}, {"samples", r.qsd.samples}};
    rep["histogram"]["boundary_flag"] = r.qsd.boundary_flag;
    rep["histogram"]["time"] = num(r.qsd.time);
    rep["histogram"]["overflow_mass"] = num(r.qsd.histogram.overflow_mass());
    rep["histogram"]["bin_width"] = num(r.qsd.histogram.binning.bin_width());
    rep["histogram"]["x_max"] = r.qsd.histogram.binning.x_max();
  } else {
    require_count(b.n, 100, "qsd.N for Fleming-Viot");
    if (!(b.t > 0.0)) throw PreconditionError("qsd.t must be > 0 for Fleming-Viot");
    FvOptions opt;
    opt.s_bins = b.s_bins;
    const auto r = evolve_fleming_viot(
        model, ParticleEnsemble::concentrated({b.x0, b.s0}, static_cast<std::size_t>(b.n)), b.t,
        task_seed(cfg, 1), opt);
    write_histogram(out, r.qsd.histogram);
    rep["fleming_viot"] = lambda_json(r.lambda);
    rep["fleming_viot"]["resample_count"] = r.ensemble.resample_count;
    rep["histogram"] = {{"method", "fleming_viot"}, {"samples", r.qsd.samples}};
    rep["histogram"]["boundary_flag"] = r.qsd.boundary_flag;
    rep["histogram"]["time"] = num(r.qsd.time);
    rep["histogram"]["overflow_mass"] = num(r.qsd.histogram.overflow_mass());
    rep["histogram"]["bin_width"] = num(r.qsd.histogram.binning.bin_width());
    rep["histogram"]["x_max"] = r.qsd.histogram.binning.x_max();
  }
  std::optional<LambdaEstimate> lam;
  if (!b.lambda_grid.empty()) {
    require_count(b.lambda_n, 10000, "qsd.lambda.N");
    const auto ls = estimate_lambda_survival(model, b.x0, b.s0, b.lambda_grid,
                                             static_cast<std::size_t>(b.lambda_n),
                                             task_seed(cfg, 2), threads);
    lam = ls.lambda;
    rep["survival_regression"] = lambda_json(ls.lambda);
    rep["survival_regression"]["window_points"] = ls.window_points;
    json curve = json::array();
    for (std::size_t k = 0; k < ls.curve.times.size(); ++k) {
      curve.push_back({num(ls.curve.times[k]), num(ls.curve.survival[k])});
    }
    rep["survival_regression"]["curve"] = curve;
  }
  rep["D"] = num(model.D());
  out.write("lambda.json", rep.dump(2) + "\n");

  if (!b.h_points.empty()) {
    require_count(b.h_n, 1000, "qsd.h.N");
    std::string csv = "x,s,h,ci_low,ci_high,survival\n";
    // Points sharing an s value, by x: the trend in x is reported, never asserted.
    std::map<double, std::map<std::int64_t, double>> by_s;
    for (std::size_t i = 0; i < b.h_points.size(); ++i) {
      const auto& pt = b.h_points[i];
      const auto h = estimate_h(model, pt.x, pt.s, b.h_t_large, static_cast<std::size_t>(b.h_n),
                                *lam, task_seed(cfg, 100 + i), threads);
      csv += fmt::format("{},{},{},{},{},{}\n", pt.x, g17(pt.s), g17(h.value), g17(h.ci_low),
                         g17(h.ci_high), g17(h.survival.p()));
      by_s[pt.s][pt.x] = h.value;
    }
    out.write("h.csv", csv);
    json trend = json::array();
    for (const auto& [s, row] : by_s) {
      if (row.size() < 2) continue;
      bool nondecreasing = true;
      double prev = -1.0;
      json xs = json::array();
      for (const auto& [x, v] : row) {
        nondecreasing = nondecreasing && v >= prev;
        prev = v;
        xs.push_back(x);
      }
      trend.push_back({{"s", num(s)}, {"x", xs}, {"nondecreasing_in_x", nondecreasing}});
    }
    out.write("h_trend.json", json{{"groups", trend}}.dump(2) + "\n");
  }

  if (!b.yaglom_initial.empty()) {
    require_count(b.yaglom_n, 100, "qsd.yaglom.N");
    const auto y = yaglom_distance(model, b.yaglom_initial, b.yaglom_times,
                                   static_cast<std::size_t>(b.yaglom_n), task_seed(cfg, 3),
                                   threads);
    std::string csv = "a,b,t,tv,ci_low,ci_high,null_mean,null_sd,debiased\n";
    json fit = json::array();
    for (const auto& pr : y.pairs) {
      for (std::size_t k = 0; k < y.times.size(); ++k) {
        const auto& e = pr.tv[k];
        csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", pr.a, pr.b, g17(y.times[k]),
                           g17(e.value), g17(e.ci_low), g17(e.ci_high), g17(e.null_mean),
                           g17(e.null_sd), g17(e.debiased));
      }
      json f = {{"a", pr.a}, {"b", pr.b}, {"monotone", pr.monotone}};
      f["omega_hat"] = pr.omega_hat ? num(*pr.omega_hat) : json(nullptr);
      f["omega_se"] = num(pr.omega_se);
      fit.push_back(f);
    }
    out.write("yaglom.csv", csv);
    json init = json::array();
    for (const auto& s : y.initial) init.push_back({s.x, num(s.s)});
    out.write("yaglom_fit.json",
              json({{"initial", init},
                    {"x_max", y.binning.x_max()},
                    {"s_bins", y.binning.s_bins()},
                    {"pairs", fit}})
                      .dump(2) + "\n");
  }

  if (b.mass_ratio_K) {
    require_count(b.mass_ratio_n, 100, "qsd.mass_ratio.N");
    const auto m = mass_ratio_diagnostic(model, *b.mass_ratio_K, b.mass_ratio_times,
                                         static_cast<std::size_t>(b.mass_ratio_n),
                                         task_seed(cfg, 4), threads);
    std::string csv = "t,point,x,s,mean,stderr\n";
    for (std::size_t k = 0; k < m.times.size(); ++k) {
      for (std::size_t p = 0; p < m.points.size(); ++p) {
        csv += fmt::format("{},{},{},{},{},{}\n", g17(m.times[k]), p, m.points[p].x,
                           g17(m.points[p].s), g17(m.mass[p][k].mean), g17(m.mass[p][k].stderr_));
      }
    }
    out.write("mass_ratio.csv", csv);
    json ratios = json::array();
    for (double r : m.max_ratio) ratios.push_back(num(r));
    out.write("mass_ratio.json", json({{"times", m.times},
                                       {"max_ratio", ratios},
                                       {"max_ratio_overall", num(m.max_ratio_overall)},
                                       {"trend_slope", num(m.trend_slope)},
                                       {"trend_se", num(m.trend_se)},
                                       {"bounded", m.bounded}})
                                         .dump(2) + "\n");
  }
  return 0;
}

json hitting_json(const HittingBoundReport& r) {
  const auto& c = r.constants;
  const auto& sc = r.scenario;
  return {{"id", sc.id},
          {"K", {{"x_max", sc.K.x_max}, {"s_lo", num(sc.K.s_lo)}, {"s_hi", num(sc.K.s_hi)}}},
          {"start", {sc.start.x, num(sc.start.s)}},
          {"target", {sc.target.x, num(sc.target.s)}},
          {"tau0", num(sc.tau0)},
          {"tau", num(sc.tau)},
          {"L", c.L},
          {"M", num(c.M)},
          {"margin", num(c.margin)},
          {"t_min", num(c.t_min)},
          {"eps_bar", num(c.eps_bar)},
          {"eps", num(c.eps)},
          {"delta", num(c.delta)},
          {"delta1", num(c.delta1)},
          {"delta2", num(c.delta2)},
          {"ratio", num(c.ratio)},
          {"Pd", {{"step1", num(c.Pd1)}, {"step2", num(c.Pd2)}, {"step3", num(c.Pd3)}}},
          {"Pb", {{"step1", num(c.Pb1)}, {"step2", num(c.Pb2)}, {"step3", num(c.Pb3)}}},
          {"beta2", num(c.beta2)},
          {"t2", num(c.t2)},
          {"t3", num(c.t3)},
          {"log10_C1", num(c.log10_C1)},
          {"log10_C2", num(c.log10_C2)},
          {"log10_C3", num(c.log10_C3)},
          {"C1", num(std::pow(10.0, c.log10_C1))},
          {"C2", num(std::pow(10.0, c.log10_C2))},
          {"C3", num(std::pow(10.0, c.log10_C3))},
          {"log10_bound", num(c.log10_bound)},
          {"bound", num(r.bound)},
          {"verifiable", r.verifiable},
          {"half_width", num(r.half_width)},
          {"mc", proportion_json(r.mc)},
          {"mc_half_width", proportion_json(r.mc_half)},
          {"passed", r.passed}};
}

int run_bounds(const RunConfig& cfg, const Model& model, OutputSet& out, unsigned threads) {
  const auto& b = cfg.bounds;
  bool ok = true;
  if (b.small_set) {
    const auto& s = *b.small_set;
    const auto c = small_set_constant(model, s.tau0, s.s0, s.s1);
    const auto chk = small_set_mc(model, c, static_cast<std::size_t>(s.n), task_seed(cfg, 10),
                                  threads, s.starts, s.subintervals);
    json j = {{"tau0", num(c.tau0)},
              {"s0", num(c.s0)},
              {"s1", num(c.s1)},
              {"c0", num(c.c0)},
              {"growth_integral", num(c.growth_integral)},
              {"nu", {{"x", 1}, {"lo", num(c.nu_lo)}, {"hi", num(c.nu_hi)}}},
              {"eps1", num(c.eps1)},
              {"starts", chk.starts},
              {"subintervals", chk.subintervals},
              {"min_ratio", num(chk.min_ratio)},
              {"min_ratio_sigma", num(chk.min_ratio_sigma)},
              {"n_paths", chk.n_paths},
              {"passed", chk.passed}};
    out.write("small_set.json", j.dump(2) + "\n");
    ok = ok && chk.passed;
  }
  for (std::size_t i = 0; i < b.hitting.size(); ++i) {
    const auto& h = b.hitting[i];
    const auto r = hitting_lower_bound(model, h.scenario, static_cast<std::size_t>(h.n),
                                       task_seed(cfg, 20 + i), threads, h.half_width);
    out.write("hitting_" + h.scenario.id + ".json", hitting_json(r).dump(2) + "\n");
    ok = ok && r.passed;
  }
  if (b.inv_substrate) {
    const auto& s = *b.inv_substrate;
    const auto r = inv_substrate_moment_bound(model, s.x, s.t, static_cast<std::size_t>(s.n),
                                              task_seed(cfg, 11), threads);
    json j = {{"x", r.x},
              {"t", num(r.t)},
              {"mu_bar", num(r.mu_bar)},
              {"mu_bar_slope", num(r.mu_bar_slope)},
              {"rhs", num(r.rhs)},
              {"mc", mean_json(r.mc)},
              {"passed", r.passed}};
    out.write("inv_substrate.json", j.dump(2) + "\n");
    ok = ok && r.passed;
  }
  if (b.exp_moment) {
    const auto& s = *b.exp_moment;
    const auto g = g_construct(model);
    const auto r = exp_moment_check(model, g, s.x, s.s, s.t_cap, static_cast<std::size_t>(s.n),
                                    task_seed(cfg, 12), threads);
    json j = {{"x", r.start.x},
              {"s", num(r.start.s)},
              {"t_cap", num(r.t_cap)},
              {"eps", num(g.constants.eps)},
              {"beta", num(g.constants.beta)},
              {"C", num(g.C)},
              {"A", num(g.A)},
              {"bound", num(r.bound)},
              {"mc", mean_json(r.mc)},
              {"hit", proportion_json(r.hit)},
              {"censored_fraction", num(r.censored_fraction)},
              {"inconclusive", r.inconclusive},
              {"passed", r.passed}};
    out.write("exp_moment.json", j.dump(2) + "\n");
    ok = ok && r.passed;
  }
  if (out.files().empty()) throw ConfigError("bounds: no small_set, hitting, inv_substrate or exp_moment block");
  if (!ok) {
    std::cerr << "bounds: at least one bound is inconsistent with its Monte Carlo estimate\n";
    return 3;
  }
  return 0;
}

int run_report(const RunConfig& cfg, OutputSet& out) {
  namespace fs = std::filesystem;
  std::vector<fs::path> paths;
  for (const auto& m : cfg.report.manifests) paths.emplace_back(m);
  if (paths.empty()) {
    const fs::path self = fs::weakly_canonical(out.dir());
    const fs::path parent = self.parent_path();
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(parent, ec)) {
      if (!e.is_directory() || fs::weakly_canonical(e.path()) == self) continue;
      const auto m = e.path() / "manifest.json";
      if (fs::exists(m)) paths.push_back(m);
    }
    std::sort(paths.begin(), paths.end());
  }
  if (paths.empty()) throw PreconditionError("report: no manifests found to aggregate");

  json runs = json::array();
  std::map<std::string, int> references;
  bool all_verified = true;
  std::size_t total = 0;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw PreconditionError("report: cannot read manifest " + p.string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("report: manifest " + p.string() + " is not valid JSON");
    }
    const auto m = RunManifest::from_json(j);
    bool verified = true;
    json files = json::array();
    for (const auto& f : m.outputs) {
      const fs::path file = p.parent_path() / f.name;
      const bool match = fs::exists(file) && sha256_file(file) == f.sha256;
      verified = verified && match;
      ++references[fs::weakly_canonical(file).string()];
      files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"matches", match}});
    }
    total += m.outputs.size();
    all_verified = all_verified && verified;
    runs.push_back({{"manifest", p.generic_string()},
                    {"subcommand", m.subcommand},
                    {"tool_version", m.tool_version},
                    {"exit_code", m.exit_code},
                    {"seed", m.config.contains("seed") ? m.config.at("seed") : json(nullptr)},
                    {"outputs", files},
                    {"verified", verified}});
  }
  bool unique = true;
  for (const auto& [file, count] : references) unique = unique && count == 1;
  json summary = {{"runs", runs},
                  {"manifest_count", paths.size()},
                  {"output_count", total},
                  {"all_verified", all_verified},
                  {"outputs_referenced_once", unique}};
  out.write("summary.json", summary.dump(2) + "\n");
  return all_verified && unique ? 0 : 3;
}

}  // namespace

int run(const std::string& subcommand, const RunConfig& config, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
    std::cerr << "unknown subcommand '" << subcommand << "'\n";
    return 1;
  }
  const unsigned workers = resolve_threads(threads);

  std::optional<OutputSet> out;
  RunManifest manifest;
  manifest.subcommand = subcommand;
  manifest.config = config.echo;
  if (config.seed) manifest.config["seed"] = *config.seed;
  manifest.config["output_dir"] = config.output_dir;

  int code = 0;
  try {
    out.emplace(config.output_dir);
    if (is_stochastic(subcommand) && !config.seed) {
      throw ConfigError("seed is required for the stochastic subcommand '" + subcommand +
                        "' (set \"seed\" or pass --seed)");
    }
    if (subcommand == "report") {
      code = run_report(config, *out);
    } else {
      const Model model(config.params, config.solver,
                        std::max<std::int64_t>(64, config.flow.equilibria));
      if (subcommand == "flow") code = run_flow(config, model, *out);
      else if (subcommand == "simulate") code = run_simulate(config, model, *out, workers);
      else if (subcommand == "verify-lyapunov") code = run_verify_lyapunov(config, model, *out, workers);
      else if (subcommand == "qsd") code = run_qsd(config, model, *out, workers);
      else code = run_bounds(config, model, *out, workers);
    }
  } catch (const Error& e) {
    std::cerr << subcommand << ": " << e.what() << "\n";
    code = e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << subcommand << ": " << e.what() << "\n";
    code = 1;
  } catch (const std::exception& e) {
    std::cerr << subcommand << ": internal error: " << e.what() << "\n";
    code = 3;
  }
  if (out) {
    manifest.exit_code = code;
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
      out->write_manifest(manifest);
    } catch (const std::exception& e) {
      std::cerr << subcommand << ": cannot write manifest: " << e.what() << "\n";
      if (code == 0) code = 1;
    }
  }
  return code;
}

}  // namespace chemostat::cli
