#include "chemostat/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "chemostat/errors.hpp"
#include "chemostat/parallel.hpp"
#include "chemostat/rng.hpp"
#include "chemostat/simulate.hpp"

namespace chemostat {

namespace {

// Barycentric interpolant at Chebyshev points of the second kind on [0, t].
class Chebyshev {
 public:
  template <class F>
  Chebyshev(double t, int n, F&& f) : x_(static_cast<std::size_t>(n)), f_(x_.size()) {
    for (int k = 0; k < n; ++k) {
      const double c = std::cos(std::numbers::pi * k / (n - 1));
      x_[static_cast<std::size_t>(k)] = 0.5 * t * (1.0 - c);
      f_[static_cast<std::size_t>(k)] = f(x_[static_cast<std::size_t>(k)]);
    }
  }

  double operator()(double u) const {
    double num = 0.0, den = 0.0;
    const std::size_t n = x_.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double d = u - x_[k];
      if (d == 0.0) return f_[k];
      double w = (k % 2 == 0) ? 1.0 : -1.0;
      if (k == 0 || k + 1 == n) w *= 0.5;
      w /= d;
      num += w * f_[k];
      den += w;
    }
    return num / den;
  }

 private:
  std::vector<double> x_;
  std::vector<double> f_;
};

double gk(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-12, &err);
}

// F_j(tau) = int_0^tau rate m_j e^{-(birth+death) m_j v} F_{j-1}(tau - v) dv,
// F_0 = 1, with populations m_1..m_ell from the innermost level outward.
double nested_first_events(const BirthDeathSpec& spec, double rate,
                           const std::vector<std::int64_t>& pops, double t) {
  const double a = spec.birth + spec.death;
  std::function<double(double)> inner = [](double) { return 1.0; };
  std::vector<Chebyshev> levels;
  levels.reserve(pops.size());  // no reallocation: inner levels hold pointers
  for (std::size_t j = 0; j < pops.size(); ++j) {
    const double m = static_cast<double>(pops[j]);
    const auto level = [rate, a, m, inner](double tau) {
      return gk([&](double v) { return rate * m * std::exp(-a * m * v) * inner(tau - v); }, 0.0,
                tau);
    };
    if (j + 1 == pops.size()) return level(t);
    const int nodes = std::clamp(static_cast<int>(std::ceil(2.0 * a * m * t)) + 41, 41, 257);
    levels.emplace_back(t, nodes, level);
    const Chebyshev* cheb = &levels.back();
    inner = [cheb](double u) { return (*cheb)(u); };
  }
  return 1.0;
}

void check_spec(const BirthDeathSpec& spec, std::int64_t ell, double t) {
  if (!(spec.birth > 0.0 && spec.death > 0.0) || spec.n < 1) {
    throw PreconditionError("birth-death rates must be positive and n >= 1");
  }
  if (ell < 0) throw PreconditionError("event count must be nonnegative");
  if (ell > kMaxNestingDepth) {
    throw PreconditionError("nested integral depth " + std::to_string(ell) + " exceeds the cap of " +
                            std::to_string(kMaxNestingDepth));
  }
  if (!(t >= 0.0)) throw PreconditionError("time must be nonnegative");
}

}  // namespace

double p_death(const BirthDeathSpec& spec, std::int64_t ell, double t) {
  check_spec(spec, ell, t);
  if (ell > spec.n) throw PreconditionError("p_death requires ell <= n");
  if (ell == 0) return 1.0;
  if (t == 0.0) return 0.0;
  std::vector<std::int64_t> pops;
  for (std::int64_t j = 1; j <= ell; ++j) pops.push_back(spec.n - ell + j);
  return nested_first_events(spec, spec.death, pops, t);
}

double p_birth(const BirthDeathSpec& spec, std::int64_t ell, double t) {
  check_spec(spec, ell, t);
  if (ell == 0) return 1.0;
  if (t == 0.0) return 0.0;
  std::vector<std::int64_t> pops;
  for (std::int64_t j = 1; j <= ell; ++j) pops.push_back(spec.n + ell - j);
  return nested_first_events(spec, spec.birth, pops, t);
}

Proportion birth_death_mc(const BirthDeathSpec& spec, bool deaths, std::int64_t ell, double t,
                          std::size_t n_paths, std::uint64_t seed, unsigned threads) {
  check_spec(spec, 0, t);
  std::vector<std::uint8_t> hit(n_paths, 0);
  const double a = spec.birth + spec.death;
  const double p_kind = (deaths ? spec.death : spec.birth) / a;
  parallel_for(n_paths, threads, [&](std::size_t i) {
    RngStream rng(seed, i);
    std::int64_t m = spec.n;
    double now = 0.0;
    for (std::int64_t e = 0; e < ell; ++e) {
      if (m == 0) return;
      now += rng.exponential(a * static_cast<double>(m));
      if (now > t || !(rng.uniform() < p_kind)) return;
      m += deaths ? -1 : 1;
    }
    hit[i] = 1;
  });
  Proportion p;
  p.n = n_paths;
  for (auto h : hit) p.hits += h;
  return p;
}

// ---------------------------------------------------------------------------

double SmallSetConstant::nu_of(double a, double b) const noexcept {
  const double lo = std::max(a, nu_lo), hi = std::min(b, nu_hi);
  return hi > lo ? (hi - lo) / (nu_hi - nu_lo) : 0.0;
}

SmallSetConstant small_set_constant(const Model& model, double tau0, double s0, double s1) {
  if (!(tau0 > 0.0)) throw PreconditionError("small set: tau0 must be positive");
  if (!(s0 > 0.0 && s0 < s1 && s1 < model.s_bar1())) {
    throw PreconditionError("small set: requires 0 < s0 < s1 < s_bar1");
  }
  SmallSetConstant c;
  c.tau0 = tau0;
  c.s0 = s0;
  c.s1 = s1;
  const double D = model.D();
  c.c0 = 1.0 / (D * model.s_in() + 2.0 * model.k() * model.mu(model.s_bar(2)));
  c.growth_integral = flow_with_growth(model, 1, s1, tau0).mu_integral;
  c.nu_lo = flow(model, 2, s1, tau0);
  c.nu_hi = flow(model, 1, s0, tau0);
  if (!(c.nu_lo < c.nu_hi)) {
    std::ostringstream os;
    os << "small set: flow(2, s1, tau0) = " << c.nu_lo << " is not below flow(1, s0, tau0) = "
       << c.nu_hi << "; choose a smaller tau0 or s1";
    throw PreconditionError(os.str());
  }
  c.eps1 = c.c0 * 2.0 * D * std::exp(-2.0 * D * tau0) * std::exp(-2.0 * c.growth_integral) *
           (c.nu_hi - c.nu_lo);
  return c;
}

SmallSetCheck small_set_mc(const Model& model, const SmallSetConstant& c, std::size_t n_paths,
                           std::uint64_t seed, unsigned threads, int starts, int subintervals) {
  if (starts < 1 || subintervals < 1 || n_paths == 0) {
    throw PreconditionError("small set check needs starts, subintervals and paths");
  }
  SmallSetCheck out;
  out.constant = c;
  out.subintervals = subintervals;
  out.n_paths = n_paths;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.passed = true;
  const double width = (c.nu_hi - c.nu_lo) / subintervals;
  for (int si = 0; si < starts; ++si) {
    const double r = starts == 1 ? 0.5 * (c.s0 + c.s1)
                                 : c.s0 + (c.s1 - c.s0) * si / (starts - 1);
    out.starts.push_back(r);
    // Cell of S_tau0 among the subintervals when X_tau0 = 1, else -1.
    std::vector<int> cell(n_paths, -1);
    parallel_for(n_paths, threads, [&](std::size_t i) {
      RngStream rng(seed, substream(static_cast<std::uint64_t>(si) << 40, 0) + i);
      PathSimulator sim(model, rng);
      sim.reset({2, r});
      sim.run(c.tau0);
      const HybridState st = sim.state();
      if (st.x != 1 || st.s < c.nu_lo || st.s > c.nu_hi) return;
      cell[i] = std::min(subintervals - 1, static_cast<int>((st.s - c.nu_lo) / width));
    });
    std::vector<std::size_t> counts(static_cast<std::size_t>(subintervals), 0);
    for (int v : cell) {
      if (v >= 0) ++counts[static_cast<std::size_t>(v)];
    }
    for (int a = 0; a < subintervals; ++a) {
      Proportion p{counts[static_cast<std::size_t>(a)], n_paths};
      const double nu = 1.0 / subintervals;
      const double ratio = p.p() / nu;
      const double sigma = p.stderr_() / nu;
      if (ratio < out.min_ratio) {
        out.min_ratio = ratio;
        out.min_ratio_sigma = sigma;
      }
      if (ratio + 3.0 * sigma < c.eps1) out.passed = false;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

HittingConstants hitting_constants(const Model& model, const HittingScenario& sc) {
  std::vector<std::string> failures;
  const double s1 = model.s_bar1();
  const CompactSpec& K = sc.K;
  if (K.x_max < 1 || !(K.s_lo > 0.0 && K.s_lo <= K.s_hi && K.s_hi < s1)) {
    failures.push_back("K must be {1..N} x [s_lo, s_hi] inside N* x (0, s_bar1)");
  }
  auto in_K = [&](const HybridState& p) {
    return p.x >= 1 && p.x <= K.x_max && p.s >= K.s_lo && p.s <= K.s_hi;
  };
  if (!in_K(sc.start)) failures.push_back("start point is not in K");
  if (!in_K(sc.target)) failures.push_back("target point is not in K");
  if (!(sc.tau > sc.tau0 && sc.tau0 > 0.0)) failures.push_back("requires 0 < tau0 < tau");
  if (!failures.empty()) {
    std::string msg = "hitting scenario '" + sc.id + "' violates hypotheses:";
    for (const auto& f : failures) msg += " [" + f + "]";
    throw PreconditionError(msg);
  }

  HittingConstants h;
  const double D = model.D();
  const double mu1 = model.mu_bar1();
  const double a = D + mu1;
  std::int64_t L_s = 1;
  while (model.s_bar(L_s) >= K.s_lo) ++L_s;
  h.L = std::max(K.x_max, L_s);
  h.M = std::max(D * model.s_in(), model.k() * mu1 * static_cast<double>(h.L));
  const double sL = model.s_bar(h.L);
  h.margin = std::min(K.s_lo - sL, s1 - K.s_hi);
  h.t_min = std::max(time_to_reach(model, 1, sL, K.s_hi).or_infinity(),
                     time_to_reach(model, h.L, s1, K.s_lo).or_infinity());
  if (!std::isfinite(h.t_min)) throw PreconditionError("t_min is not finite for this K");
  if (!(sc.tau0 > h.t_min)) {
    std::ostringstream os;
    os << "hitting scenario '" << sc.id << "' violates hypotheses: [tau0 = " << sc.tau0
       << " must exceed t_min = " << h.t_min << "]";
    throw PreconditionError(os.str());
  }
  const double gap = sc.tau0 - h.t_min;
  const double half = D * gap / 2.0;
  h.eps_bar = std::min(3.0 * h.margin / h.M, 4.0 * h.margin * half / (h.M * (1.0 + half)));
  h.eps = std::min({sc.eps, h.eps_bar, sc.tau - sc.tau0});
  if (!(h.eps > 0.0)) throw PreconditionError("hitting scenario: eps must be positive");

  const double dist_eq = std::abs(sc.target.s - model.s_bar(sc.target.x));
  h.delta = sc.delta > 0.0 ? std::min(sc.delta, dist_eq) : dist_eq;
  if (!(h.delta > 0.0)) {
    throw PreconditionError("hitting scenario: the target is an equilibrium point and cannot be hit");
  }
  h.ratio = model.mu(sL) / mu1;
  const double L = static_cast<double>(h.L);
  const auto bd_death = BirthDeathSpec{mu1, D, h.L};
  const auto bd_birth = BirthDeathSpec{mu1, D, 1};
  const double s = sc.start.s;
  const double ds1 = D * std::abs(s1 - s), dsL = D * std::abs(sL - s);
  h.delta1 = gap / 2.0 * ds1 / (ds1 + h.M);
  h.delta2 = gap / 2.0 * dsL / (dsL + h.M);
  h.Pd1 = p_death(bd_death, h.L - 1, h.delta1 / 2.0);
  h.Pb1 = p_birth(bd_birth, h.L - 1, h.delta2 / 2.0);
  const double ln10 = std::log(10.0);
  h.log10_C1 = -a * (sc.tau0 - std::min(h.delta1, h.delta2)) * L / ln10 + std::log10(h.Pd1) +
               (L - 1.0) * std::log10(h.ratio) + std::log10(h.Pb1);

  // Staying step over [0, T] with T = tau.
  const double T = sc.tau;
  h.beta2 = D * (D * h.eps / 4.0 + 1.0) * h.delta * h.eps / 12.0;
  h.t2 = h.beta2 / (4.0 * h.M);
  const double base = model.mu(sL) * D / (a * a) * std::exp(-6.0 * a * L / D) *
                      std::pow(-std::expm1(-a * h.beta2 / (4.0 * h.M)), 2.0);
  h.Pd2 = p_death(bd_death, h.L - 1, h.t2);
  h.Pb2 = p_birth(bd_birth, h.L - 1, h.t2);
  h.log10_C2 = std::min((h.M * T / h.beta2 + 1.0) * std::log10(base), -a * L * T / ln10) +
               std::log10(std::min(h.Pd2, std::pow(h.ratio, L - 1.0) * h.Pb2));

  // Final step within eps, with delta1 = eps/4 and delta2 = eps/3.
  h.t3 = std::min(D * h.delta * h.eps / 4.0,
                  D * (D * h.eps / 3.0 + 1.0) * h.delta * (h.eps / 2.0 - h.eps / 3.0)) /
         h.M;
  h.Pd3 = p_death(bd_death, h.L - 1, h.t3);
  h.Pb3 = p_birth(bd_birth, h.L - 1, h.t3);
  h.log10_C3 = -a * L * h.eps / 2.0 / ln10 +
               std::log10(std::min(h.Pd3, std::pow(h.ratio, L - 1.0) * h.Pb3));
  h.log10_bound = h.log10_C1 + h.log10_C2 + h.log10_C3;
  return h;
}

HittingBoundReport hitting_lower_bound(const Model& model, const HittingScenario& sc,
                                       std::size_t n_paths, std::uint64_t seed, unsigned threads,
                                       double half_width, std::size_t n_paths_half) {
  HittingBoundReport rep;
  rep.scenario = sc;
  rep.constants = hitting_constants(model, sc);
  rep.scenario.eps = rep.constants.eps;
  rep.bound = std::pow(10.0, rep.constants.log10_bound);
  rep.verifiable = rep.constants.log10_bound >= -12.0;
  rep.half_width = half_width > 0.0 ? half_width : 1e-3 * model.s_bar1();
  const double lo = sc.tau - rep.constants.eps;
  auto run = [&](double hw, std::size_t n, std::uint64_t tag) {
    std::vector<std::uint8_t> hit(n, 0);
    parallel_for(n, threads, [&](std::size_t i) {
      RngStream rng(seed, substream(i, tag));
      const CappedTime ct = hitting_time_box(model, sc.start.x, sc.start.s, sc.target.x,
                                             sc.target.s, hw, sc.tau, rng, sc.tau0);
      if (!ct.censored && ct.time >= lo && ct.time <= sc.tau) hit[i] = 1;
    });
    Proportion p;
    p.n = n;
    for (auto h : hit) p.hits += h;
    return p;
  };
  if (n_paths > 0) rep.mc = run(rep.half_width, n_paths, 0);
  // Common random numbers, so the sensitivity reflects the box alone.
  if (n_paths_half > 0) rep.mc_half = run(0.5 * rep.half_width, n_paths_half, 0);
  rep.passed = rep.mc.p() + 3.0 * rep.mc.stderr_() >= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------

double inv_substrate_rhs(const Model& model, std::int64_t x, double t, double* mu_bar,
                         double* mu_bar_slope) {
  if (!(t > 0.0) || x < 1) throw PreconditionError("inverse-substrate bound needs x >= 1, t > 0");
  const double D = model.D();
  const double top = D * model.s_in() * t;
  const double mb = model.mu(top);
  double slope = 0.0;
  constexpr int kGrid = 2001;
  for (int i = 0; i < kGrid; ++i) slope = std::max(slope, model.dmu(top * i / (kGrid - 1)));
  if (mu_bar) *mu_bar = mb;
  if (mu_bar_slope) *mu_bar_slope = slope;
  return (D + model.k() * slope * static_cast<double>(x) * std::exp(mb * t)) /
         (D * model.s_in() * -std::expm1(-D * t));
}

InvSubstrateReport inv_substrate_moment_bound(const Model& model, std::int64_t x, double t,
                                              std::size_t n_paths, std::uint64_t seed,
                                              unsigned threads) {
  InvSubstrateReport rep;
  rep.x = x;
  rep.t = t;
  rep.rhs = inv_substrate_rhs(model, x, t, &rep.mu_bar, &rep.mu_bar_slope);
  std::vector<double> inv(n_paths, 0.0);
  parallel_for(n_paths, threads, [&](std::size_t i) {
    RngStream rng(seed, i);
    PathSimulator sim(model, rng);
    sim.reset({x, 0.0});
    if (sim.run(t) == PathSimulator::Stop::Extinct) {
      // pure inflow after extinction
      const double te = sim.time();
      inv[i] = 1.0 / flow(model, 0, sim.state().s, t - te);
    } else {
      inv[i] = 1.0 / sim.state().s;
    }
  });
  rep.mc = mean_estimate(inv);
  rep.passed = rep.mc.lo(1.96) <= rep.rhs;
  return rep;
}

ExpMomentReport exp_moment_check(const Model& model, const GCertificate& g, std::int64_t x,
                                 double s, double t_cap, std::size_t n_paths, std::uint64_t seed,
                                 unsigned threads) {
  if (x < 1 || !(s >= model.s_bar1())) {
    throw PreconditionError("exp_moment_check requires x >= 1 and s >= s_bar1");
  }
  if (!(t_cap > 0.0) || n_paths == 0) throw PreconditionError("exp_moment_check needs t_cap, paths");
  ExpMomentReport rep;
  rep.g = g;
  rep.start = {x, s};
  rep.t_cap = t_cap;
  rep.bound = g.bound(s);
  const double level = model.s_bar1() - g.constants.eps;
  const double rate = model.D() + g.C;
  std::vector<double> val(n_paths, 0.0);
  std::vector<std::uint8_t> kind(n_paths, 0);  // 0 censored, 1 hit, 2 extinct
  parallel_for(n_paths, threads, [&](std::size_t i) {
    RngStream rng(seed, i);
    PathSimulator sim(model, rng);
    sim.reset({x, s});
    LevelBelowWatcher w(level);
    const auto stop = sim.run(t_cap, &w);
    val[i] = std::exp(rate * sim.time());
    kind[i] = stop == PathSimulator::Stop::Watcher ? 1 : (stop == PathSimulator::Stop::Extinct ? 2 : 0);
  });
  rep.mc = mean_estimate(val);
  rep.hit.n = n_paths;
  std::size_t censored = 0;
  for (auto k : kind) {
    if (k == 1) ++rep.hit.hits;
    if (k == 0) ++censored;
  }
  rep.censored_fraction = static_cast<double>(censored) / static_cast<double>(n_paths);
  rep.inconclusive = rep.censored_fraction > 0.01;
  rep.passed = rep.mc.lo(1.96) <= rep.bound && rep.hit.hits > 0;
  return rep;
}

}  // namespace chemostat
