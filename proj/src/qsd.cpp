#include "chemostat/qsd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>

#include "chemostat/errors.hpp"
#include "chemostat/parallel.hpp"
#include "chemostat/simulate.hpp"

namespace chemostat {

namespace {

constexpr std::uint64_t kResampleTag = 0x5EED;
constexpr std::uint64_t kBootstrapTag = 0xB007;

bool any_on_boundary(const std::vector<HybridState>& states) {
  return std::any_of(states.begin(), states.end(),
                     [](const HybridState& h) { return h.s == 0.0; });
}

void require_states(const std::vector<HybridState>& states, const char* who) {
  for (const auto& h : states) {
    if (h.x < 1) throw PreconditionError(std::string(who) + ": initial states need x >= 1");
    if (!(h.s >= 0.0) || !std::isfinite(h.s)) {
      throw PreconditionError(std::string(who) + ": initial substrate must be finite and >= 0");
    }
  }
}

}  // namespace

ParticleEnsemble ParticleEnsemble::concentrated(HybridState at, std::size_t n) {
  ParticleEnsemble e;
  e.particles.assign(n, at);
  return e;
}

const char* to_string(LambdaMethod m) noexcept {
  switch (m) {
    case LambdaMethod::SurvivalRegression: return "survival_regression";
    case LambdaMethod::FlemingViotKillRate: return "fleming_viot_kill_rate";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

ConditionedSample evolve_conditioned(const Model& model, const std::vector<HybridState>& initial,
                                     double t, std::uint64_t seed, unsigned threads,
                                     const std::optional<Binning>& binning) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw PreconditionError("evolve_conditioned: t must be finite and >= 0");
  }
  require_states(initial, "evolve_conditioned");
  const std::size_t n = initial.size();
  std::vector<HybridState> end(n);
  std::vector<char> alive(n, 0);
  parallel_for(n, resolve_threads(threads), [&](std::size_t i) {
    if (t == 0.0) {
      end[i] = initial[i];
      alive[i] = 1;
      return;
    }
    PathSimulator sim(model, RngStream(seed, i));
    sim.reset(initial[i]);
    alive[i] = sim.run(t) != PathSimulator::Stop::Extinct;
    end[i] = sim.state();
  });
  ConditionedSample out;
  out.survival.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) out.survivors.push_back(end[i]);
  }
  out.survival.hits = out.survivors.size();
  const Binning bins =
      binning ? *binning : Binning::from_samples(out.survivors, model.s_bar1());
  out.qsd.histogram = make_histogram(bins, out.survivors);
  out.qsd.time = t;
  out.qsd.samples = out.survivors.size();
  out.qsd.boundary_flag = any_on_boundary(initial);
  return out;
}

ConditionedSample estimate_qsd_naive(const Model& model, std::int64_t x0, double s0, double t,
                                     std::size_t n, std::uint64_t seed, unsigned threads,
                                     const std::optional<Binning>& binning) {
  if (n < 1000) throw PreconditionError("estimate_qsd_naive requires N >= 1000");
  if (x0 < 1) throw PreconditionError("estimate_qsd_naive requires x0 >= 1");
  std::vector<HybridState> initial(n, HybridState{x0, s0});
  auto out = evolve_conditioned(model, initial, t, seed, threads, binning);
  if (out.survivors.size() < 100) {
    throw PowerError("estimate_qsd_naive: " + std::to_string(out.survivors.size()) +
                     " survivors of " + std::to_string(n) + " at t=" + std::to_string(t) +
                     "; at least 100 are needed");
  }
  return out;
}

std::vector<HybridState> sample_from_histogram(const Histogram& h, std::size_t n,
                                               std::uint64_t seed) {
  const Binning& b = h.binning;
  std::vector<double> cdf(h.mass.size(), 0.0);
  double acc = 0.0;
  for (std::size_t c = 0; c < h.mass.size(); ++c) {
    const bool s_overflow = !std::isfinite(b.cell_s_hi(c));
    if (!s_overflow) acc += h.mass[c];
    cdf[c] = acc;
  }
  if (!(acc > 0.0)) throw PreconditionError("sample_from_histogram: histogram has no mass");
  RngStream rng(seed, 0);
  std::vector<HybridState> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t c = static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    while (h.mass[c] <= 0.0 || !std::isfinite(b.cell_s_hi(c))) --c;
    const double lo = b.cell_s_lo(c);
    const double hi = b.cell_s_hi(c);
    out.push_back({b.cell_x(c), lo + (hi - lo) * rng.uniform()});
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Particle {
  std::int64_t x = 1;
  double s = 0.0;
  double t = 0.0;     // time at which (x, s) is current
  double b = 0.0;     // thinning bound, refreshed after each jump
  double next = 0.0;  // pending candidate time
  RngStream rng{0, 0};
};

struct Snapshot {
  double time;
  bool average;
  int record;  // index into record_times, or -1
};

}  // namespace

FvResult evolve_fleming_viot(const Model& model, ParticleEnsemble initial, double t,
                             std::uint64_t seed, const FvOptions& options) {
  const std::size_t n = initial.particles.size();
  if (n < 100) {
    throw PreconditionError("evolve_fleming_viot requires N >= 100 particles (got " +
                            std::to_string(n) + ")");
  }
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw PreconditionError("evolve_fleming_viot requires a finite t > 0");
  }
  if (options.average_snapshots < 1 || options.lambda_batches < 2) {
    throw PreconditionError("evolve_fleming_viot: need >= 1 snapshot and >= 2 batches");
  }
  require_states(initial.particles, "evolve_fleming_viot");
  for (double r : options.record_times) {
    if (!(r >= 0.0 && r <= t)) {
      throw PreconditionError("evolve_fleming_viot: record times must lie in [0, t]");
    }
  }

  const double D = model.D();
  const double t0 = initial.time;
  const double t_end = t0 + t;
  const double half = t0 + 0.5 * t;
  auto bound_at = [&](double s) { return model.mu(std::max(model.s_bar1(), s)); };

  std::vector<Particle> ps(n);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t i = 0; i < n; ++i) {
    Particle& p = ps[i];
    p.x = initial.particles[i].x;
    p.s = initial.particles[i].s;
    p.t = t0;
    p.b = bound_at(p.s);
    p.rng = RngStream(seed, i);
    p.next = t0 + p.rng.exponential((D + p.b) * static_cast<double>(p.x));
    queue.push({p.next, i});
  }
  RngStream chooser(substream(seed, kResampleTag), 0);

  std::vector<Snapshot> snaps;
  for (int k = 0; k < options.average_snapshots; ++k) {
    snaps.push_back({half + (k + 0.5) * (t_end - half) / options.average_snapshots, true, -1});
  }
  for (std::size_t r = 0; r < options.record_times.size(); ++r) {
    snaps.push_back({t0 + options.record_times[r], false, static_cast<int>(r)});
  }
  snaps.push_back({t_end, false, -1});
  std::stable_sort(snaps.begin(), snaps.end(),
                   [](const Snapshot& a, const Snapshot& b) { return a.time < b.time; });

  SubstrateIntegrator integ(model.params(), model.solver());
  auto flow_to = [&](const Particle& p, double when) {
    if (when <= p.t) return p.s;
    integ.reset(p.x, p.s);
    integ.advance(when - p.t);
    return integ.s();
  };

  FvResult out;
  out.recorded.resize(options.record_times.size());
  std::optional<Binning> binning = options.binning;
  std::vector<double> counts;
  double counted = 0.0;
  std::vector<double> batch_kills(static_cast<std::size_t>(options.lambda_batches), 0.0);
  const double batch_len = (t_end - half) / options.lambda_batches;
  std::uint64_t resamples = initial.resample_count;
  std::size_t next_snap = 0;
  std::vector<HybridState> frame(n);

  auto take_snapshot = [&](const Snapshot& sn) {
    for (std::size_t j = 0; j < n; ++j) frame[j] = {ps[j].x, flow_to(ps[j], sn.time)};
    if (sn.record >= 0) out.recorded[static_cast<std::size_t>(sn.record)] = frame;
    if (sn.average) {
      if (!binning) binning = Binning::from_samples(frame, model.s_bar1(), options.s_bins);
      if (counts.empty()) counts.assign(binning->size(), 0.0);
      for (const auto& h : frame) counts[binning->index(h.x, h.s)] += 1.0;
      counted += static_cast<double>(n);
    }
  };

  for (;;) {
    const auto [tc, i] = queue.top();
    while (next_snap < snaps.size() && snaps[next_snap].time < tc) {
      take_snapshot(snaps[next_snap]);
      ++next_snap;
    }
    if (next_snap == snaps.size()) break;
    queue.pop();
    ++out.candidates;
    Particle& p = ps[i];
    p.s = flow_to(p, tc);
    p.t = tc;
    const double mu_s = model.mu(p.s);
    if (mu_s > p.b * (1.0 + 1e-9) + 1e-300) {
      throw InvariantViolation("thinning bound violated in particle " + std::to_string(i) +
                               ": mu(s)=" + std::to_string(mu_s) + " > " + std::to_string(p.b));
    }
    const double u = p.rng.uniform() * (D + p.b);
    bool jumped = true;
    if (u < D) {
      if (--p.x == 0) {
        ++resamples;
        if (tc >= half) {
          const auto k = std::min<std::size_t>(
              static_cast<std::size_t>((tc - half) / batch_len), batch_kills.size() - 1);
          batch_kills[k] += 1.0;
        }
        std::size_t j = static_cast<std::size_t>(chooser.below(n - 1));
        if (j >= i) ++j;
        p.x = ps[j].x;
        p.s = flow_to(ps[j], tc);
      }
    } else if (u < D + mu_s) {
      ++p.x;
    } else {
      jumped = false;
    }
    if (jumped) p.b = bound_at(p.s);
    p.next = tc + p.rng.exponential((D + p.b) * static_cast<double>(p.x));
    queue.push({p.next, i});
  }

  out.ensemble.time = t_end;
  out.ensemble.resample_count = resamples;
  out.ensemble.particles = frame;

  Histogram& h = out.qsd.histogram;
  h.binning = *binning;
  h.n = counted;
  h.mass.assign(counts.size(), 0.0);
  h.stderr_.assign(counts.size(), 0.0);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double q = counts[c] / counted;
    h.mass[c] = q;
    h.stderr_[c] = std::sqrt(q * (1.0 - q) / counted);
  }
  out.qsd.time = t_end;
  out.qsd.samples = static_cast<std::size_t>(counted);
  out.qsd.boundary_flag = any_on_boundary(initial.particles);

  std::vector<double> rates(batch_kills.size());
  for (std::size_t k = 0; k < rates.size(); ++k) {
    rates[k] = batch_kills[k] / (static_cast<double>(n) * batch_len);
  }
  const MeanEstimate bm = batch_means(rates);
  const double tq = t_for(0.95, static_cast<double>(rates.size() - 1));
  LambdaEstimate& lam = out.lambda;
  lam.method = LambdaMethod::FlemingViotKillRate;
  lam.lambda_hat = bm.mean;
  lam.stderr_ = bm.stderr_;
  lam.ci_low = bm.mean - tq * bm.stderr_;
  lam.ci_high = bm.mean + tq * bm.stderr_;
  lam.window_lo = half;
  lam.window_hi = t_end;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct WindowFit {
  double lambda = 0.0;
  double se = 0.0;
};

// Fit on survival values at the fixed window indices.
WindowFit fit_window(const std::vector<double>& times, const std::vector<double>& surv,
                     const std::vector<std::size_t>& window, double n) {
  std::vector<double> xs, ys, vs;
  for (std::size_t k : window) {
    const double p = std::max(surv[k], 0.5 / n);
    xs.push_back(times[k]);
    ys.push_back(std::log(p));
    vs.push_back((1.0 - p) / (n * p));
  }
  const LinearFit f = weighted_fit(xs, ys, vs);
  return {-f.slope, f.se_slope};
}

std::vector<double> survival_from_counts(const std::vector<std::size_t>& died_by, double n) {
  std::vector<double> s(died_by.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = (n - static_cast<double>(died_by[k])) / n;
  return s;
}

}  // namespace

LambdaSurvivalResult estimate_lambda_survival(const Model& model, std::int64_t x0, double s0,
                                              const std::vector<double>& grid, std::size_t n,
                                              std::uint64_t seed, unsigned threads, int bootstrap,
                                              double level) {
  if (grid.size() < 4) throw PreconditionError("estimate_lambda_survival needs >= 4 grid points");
  if (n < 10000) throw PreconditionError("estimate_lambda_survival requires N >= 10000");
  if (x0 < 1) throw PreconditionError("estimate_lambda_survival requires x0 >= 1");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || (k > 0 && !(grid[k] > grid[k - 1]))) {
      throw PreconditionError("estimate_lambda_survival: grid must be positive and increasing");
    }
  }
  if (bootstrap < 20) throw PreconditionError("estimate_lambda_survival needs >= 20 resamples");

  std::vector<CappedTime> ext(n);
  parallel_for(n, resolve_threads(threads), [&](std::size_t i) {
    RngStream rng(seed, i);
    ext[i] = extinction_time(model, x0, s0, grid.back(), rng);
  });

  // Path category: first grid index with T <= grid[k], or grid.size() if alive throughout.
  const std::size_t K = grid.size();
  std::vector<std::size_t> category(n);
  std::vector<std::size_t> per_cat(K + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = K;
    if (!ext[i].censored) {
      c = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), ext[i].time) -
                                   grid.begin());
    }
    category[i] = c;
    ++per_cat[c];
  }
  auto died_by_from = [&](const std::vector<std::size_t>& cat_counts) {
    std::vector<std::size_t> d(K);
    std::size_t acc = 0;
    for (std::size_t k = 0; k < K; ++k) {
      acc += cat_counts[k];
      d[k] = acc;
    }
    return d;
  };
  const double nd = static_cast<double>(n);
  LambdaSurvivalResult out;
  out.curve.times = grid;
  out.curve.n = n;
  out.curve.survival = survival_from_counts(died_by_from(per_cat), nd);

  std::vector<std::size_t> window;
  for (std::size_t k = 0; k < K; ++k) {
    const double p = out.curve.survival[k];
    if (p >= 0.01 && p <= 0.5) window.push_back(k);
  }
  out.window_points = window.size();
  if (window.size() < 2) {
    throw PowerError("estimate_lambda_survival: " + std::to_string(window.size()) +
                     " grid points have survival in [0.01, 0.5]; at least 2 are needed");
  }
  const WindowFit point = fit_window(grid, out.curve.survival, window, nd);

  RngStream rng(substream(seed, kBootstrapTag), 0);
  std::vector<double> boots;
  boots.reserve(static_cast<std::size_t>(bootstrap));
  std::vector<std::size_t> counts(K + 1);
  for (int r = 0; r < bootstrap; ++r) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[category[rng.below(n)]];
    boots.push_back(fit_window(grid, survival_from_counts(died_by_from(counts), nd), window, nd)
                        .lambda);
  }
  const MeanEstimate bm = mean_estimate(boots);
  const double sd = bm.stderr_ * std::sqrt(static_cast<double>(boots.size()));
  const double z = z_for(level);
  LambdaEstimate& lam = out.lambda;
  lam.method = LambdaMethod::SurvivalRegression;
  lam.lambda_hat = point.lambda;
  lam.stderr_ = sd;
  lam.ci_low = point.lambda - z * sd;
  lam.ci_high = point.lambda + z * sd;
  lam.window_lo = grid[window.front()];
  lam.window_hi = grid[window.back()];
  return out;
}

HEstimate estimate_h(const Model& model, std::int64_t x, double s, double t_large, std::size_t n,
                     const LambdaEstimate& lambda, std::uint64_t seed, unsigned threads) {
  if (!(t_large > 0.0)) throw PreconditionError("estimate_h requires t_large > 0");
  if (n < 1000) throw PreconditionError("estimate_h requires N >= 1000");
  if (x < 0) throw PreconditionError("estimate_h requires x >= 0");
  HEstimate out;
  out.survival.n = n;
  if (x == 0) return out;
  std::vector<char> alive(n, 0);
  parallel_for(n, resolve_threads(threads), [&](std::size_t i) {
    RngStream rng(seed, i);
    alive[i] = extinction_time(model, x, s, t_large, rng).censored;
  });
  out.survival.hits = static_cast<std::size_t>(std::count(alive.begin(), alive.end(), 1));
  const double p = out.survival.p();
  if (p < 0.005) {
    throw PowerError("estimate_h: survival " + std::to_string(p) + " at t=" +
                     std::to_string(t_large) + " is below 0.005");
  }
  const double e = std::exp(lambda.lambda_hat * t_large);
  out.value = e * p;
  const double var = e * e *
                     (p * (1.0 - p) / static_cast<double>(n) +
                      p * p * t_large * t_large * lambda.stderr_ * lambda.stderr_);
  const double hw = 1.96 * std::sqrt(var);
  out.ci_low = out.value - hw;
  out.ci_high = out.value + hw;
  return out;
}

// ---------------------------------------------------------------------------

YaglomReport yaglom_distance(const Model& model, const std::vector<HybridState>& initial,
                             const std::vector<double>& times, std::size_t n, std::uint64_t seed,
                             unsigned threads) {
  if (initial.size() < 2) throw PreconditionError("yaglom_distance needs >= 2 initial states");
  if (times.empty()) throw PreconditionError("yaglom_distance needs >= 1 time");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0) || (k > 0 && !(times[k] > times[k - 1]))) {
      throw PreconditionError("yaglom_distance: times must be positive and increasing");
    }
  }
  require_states(initial, "yaglom_distance");
  YaglomReport rep;
  rep.initial = initial;
  rep.times = times;

  std::vector<FvResult> runs(initial.size());
  parallel_for(initial.size(), resolve_threads(threads), [&](std::size_t a) {
    FvOptions opt;
    opt.record_times = times;
    opt.average_snapshots = 1;
    runs[a] = evolve_fleming_viot(model, ParticleEnsemble::concentrated(initial[a], n),
                                  times.back(), substream(seed, a + 1), opt);
  });

  std::vector<HybridState> pooled;
  for (const auto& r : runs) {
    for (const auto& frame : r.recorded) pooled.insert(pooled.end(), frame.begin(), frame.end());
  }
  rep.binning = Binning::from_samples(pooled, model.s_bar1());
  pooled.clear();
  pooled.shrink_to_fit();

  std::vector<std::vector<std::vector<std::uint32_t>>> cells(runs.size());
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (const auto& frame : runs[a].recorded) cells[a].push_back(to_cells(rep.binning, frame));
  }

  for (std::size_t a = 0; a < initial.size(); ++a) {
    for (std::size_t b = a + 1; b < initial.size(); ++b) {
      YaglomPair pr;
      pr.a = a;
      pr.b = b;
      for (std::size_t k = 0; k < times.size(); ++k) {
        pr.tv.push_back(tv_bootstrap(cells[a][k], cells[b][k], rep.binning.size(),
                                     substream(seed, 1000 + 100 * a + 10 * b + k)));
      }
      pr.monotone = true;
      for (std::size_t k = 0; k + 1 < pr.tv.size(); ++k) {
        const auto& u = pr.tv[k];
        const auto& v = pr.tv[k + 1];
        const double slack = (u.ci_high - u.value) + (v.value - v.ci_low);
        if (v.value > u.value + slack) pr.monotone = false;
      }
      std::vector<double> xs, ys, vs;
      for (std::size_t k = 0; k < pr.tv.size(); ++k) {
        const auto& e = pr.tv[k];
        if (e.value > e.null_mean + 2.0 * e.null_sd && e.boot_sd > 0.0) {
          xs.push_back(times[k]);
          ys.push_back(std::log(e.value));
          vs.push_back((e.boot_sd / e.value) * (e.boot_sd / e.value));
        }
      }
      if (xs.size() >= 2) {
        const LinearFit f = weighted_fit(xs, ys, vs);
        pr.omega_hat = -f.slope;
        pr.omega_se = f.se_slope;
      }
      rep.pairs.push_back(std::move(pr));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

MassRatioReport mass_ratio_diagnostic(const Model& model, const CompactSpec& K,
                                      const std::vector<double>& times, std::size_t n,
                                      std::uint64_t seed, unsigned threads) {
  if (K.x_max < 1 || !(K.s_lo > 0.0) || !(K.s_hi >= K.s_lo)) {
    throw PreconditionError("mass_ratio_diagnostic: K needs x_max >= 1 and 0 < s_lo <= s_hi");
  }
  if (times.size() < 2) throw PreconditionError("mass_ratio_diagnostic needs >= 2 times");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || (k > 0 && !(times[k] > times[k - 1]))) {
      throw PreconditionError("mass_ratio_diagnostic: times must be >= 0 and increasing");
    }
  }
  if (n < 100) throw PreconditionError("mass_ratio_diagnostic requires N >= 100");

  MassRatioReport rep;
  rep.times = times;
  rep.points = {{1, K.s_lo},
                {1, K.s_hi},
                {K.x_max, K.s_lo},
                {K.x_max, K.s_hi},
                {(1 + K.x_max + 1) / 2, 0.5 * (K.s_lo + K.s_hi)}};
  const std::size_t P = rep.points.size();
  const std::size_t T = times.size();
  // values[p][k * n + i] = psi at times[k] on path i from point p.
  std::vector<std::vector<double>> values(P, std::vector<double>(T * n, 0.0));
  parallel_for(P * n, resolve_threads(threads), [&](std::size_t job) {
    const std::size_t p = job / n;
    const std::size_t i = job % n;
    // Common random numbers across points: equal points give equal estimates.
    PathSimulator sim(model, RngStream(seed, i));
    sim.reset(rep.points[p]);
    for (std::size_t k = 0; k < T; ++k) {
      if (sim.run(times[k]) == PathSimulator::Stop::Extinct) break;
      const auto st = sim.state();
      values[p][k * n + i] = psi(st.x, st.s);
    }
  });

  rep.mass.assign(P, std::vector<MeanEstimate>(T));
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t k = 0; k < T; ++k) {
      std::vector<double> col(values[p].begin() + static_cast<std::ptrdiff_t>(k * n),
                              values[p].begin() + static_cast<std::ptrdiff_t>((k + 1) * n));
      rep.mass[p][k] = mean_estimate(col);
    }
  }

  std::vector<double> xs, ys, vs;
  rep.max_ratio.assign(T, 0.0);
  for (std::size_t k = 0; k < T; ++k) {
    double best = 0.0;
    double best_var = 0.0;
    for (std::size_t a = 0; a < P; ++a) {
      for (std::size_t b = 0; b < P; ++b) {
        if (a == b) continue;
        const auto& ma = rep.mass[a][k];
        const auto& mb = rep.mass[b][k];
        if (!(mb.mean > 0.0)) {
          if (ma.mean > 0.0) best = std::numeric_limits<double>::infinity();
          continue;
        }
        const double r = ma.mean / mb.mean;
        if (r > best) {
          best = r;
          const double ra = ma.mean > 0.0 ? ma.stderr_ / ma.mean : 0.0;
          const double rb = mb.stderr_ / mb.mean;
          best_var = r * r * (ra * ra + rb * rb);
        }
      }
    }
    rep.max_ratio[k] = best;
    if (std::isfinite(best) && best > 0.0 && best_var > 0.0) {
      xs.push_back(times[k]);
      ys.push_back(best);
      vs.push_back(best_var);
    }
  }
  rep.max_ratio_overall = *std::max_element(rep.max_ratio.begin(), rep.max_ratio.end());
  if (xs.size() >= 2) {
    const LinearFit f = weighted_fit(xs, ys, vs);
    rep.trend_slope = f.slope;
    rep.trend_se = f.se_slope;
    rep.bounded = std::isfinite(rep.max_ratio_overall) && f.slope - 1.96 * f.se_slope <= 0.0;
  }
  return rep;
}

}  // namespace chemostat
