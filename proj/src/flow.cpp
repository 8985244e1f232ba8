#include "chemostat/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "chemostat/errors.hpp"

namespace chemostat {

double equilibrium(const ChemostatParams& params, std::int64_t ell, const FlowSolverConfig& cfg) {
  if (ell < 1) throw PreconditionError("equilibrium requires ell >= 1");
  const double l = static_cast<double>(ell);
  auto g = [&](double s) { return params.D * (params.s_in - s) - params.k * params.growth.rate(s) * l; };
  double a = 0.0, b = params.s_in;
  double ga = g(a), gb = g(b);
  if (!(ga > 0.0) || !(gb < 0.0)) {
    throw NumericError("equilibrium bracket [0, s_in] does not change sign");
  }
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(g, a, b, ga, gb,
                                             boost::math::tools::eps_tolerance<double>(52), iters);
  a = r.first;
  b = r.second;
  // Bisection polish on the residual.
  double s = 0.5 * (a + b);
  for (int i = 0; i < 200 && std::abs(g(s)) > cfg.root_tol && b - a > 0.0; ++i) {
    if (g(s) > 0.0) a = s; else b = s;
    const double mid = 0.5 * (a + b);
    if (mid == s) break;
    s = mid;
  }
  if (std::abs(g(s)) > cfg.root_tol) {
    throw NumericError("equilibrium residual " + std::to_string(g(s)) + " exceeds root_tol for ell=" +
                       std::to_string(ell));
  }
  return s;
}

EquilibriumTable::EquilibriumTable(const ChemostatParams& params, std::int64_t L,
                                   const FlowSolverConfig& cfg) {
  values_.reserve(static_cast<std::size_t>(L));
  for (std::int64_t ell = 1; ell <= L; ++ell) values_.push_back(equilibrium(params, ell, cfg));
}

double EquilibriumTable::at(std::int64_t ell) const {
  if (ell < 1 || ell > size()) throw PreconditionError("equilibrium table index out of range");
  return values_[static_cast<std::size_t>(ell - 1)];
}

Model::Model(ChemostatParams params, FlowSolverConfig cfg, std::int64_t table_size)
    : params_(std::move(params)), cfg_(cfg) {
  require_positive(params_);
  require_valid(cfg_);
  table_ = EquilibriumTable(params_, std::max<std::int64_t>(2, table_size), cfg_);
  mu_bar1_ = mu(table_.at(1));
}

double Model::s_bar(std::int64_t ell) const {
  if (ell == 0) return params_.s_in;
  if (ell <= table_.size()) return table_.at(ell);
  return equilibrium(params_, ell, cfg_);
}

double flow(const Model& model, std::int64_t ell, double s0, double t) {
  return flow_with_growth(model, ell, s0, t).s;
}

FlowWithGrowth flow_with_growth(const Model& model, std::int64_t ell, double s0, double t) {
  if (ell < 0) throw PreconditionError("flow requires ell >= 0");
  if (!(s0 >= 0.0)) throw DomainError("flow requires s0 >= 0");
  if (!(t >= 0.0)) throw PreconditionError("flow requires t >= 0");
  if (t == 0.0) return {s0, 0.0};
  SubstrateIntegrator integ(model.params(), model.solver());
  integ.reset(ell, s0);
  integ.advance(t);
  return {integ.s(), integ.mu_integral()};
}

double ReachTime::time() const {
  if (!finite_) throw PreconditionError("target substrate is unreachable");
  return t_;
}

double ReachTime::or_infinity() const noexcept {
  return finite_ ? t_ : std::numeric_limits<double>::infinity();
}

ReachTime time_to_reach(const Model& model, std::int64_t ell, double s0, double s) {
  if (ell < 1) throw PreconditionError("time_to_reach requires ell >= 1");
  if (!(s0 >= 0.0) || !(s >= 0.0)) throw DomainError("time_to_reach requires nonnegative substrate");
  if (s == s0) return ReachTime::finite(0.0);
  const double sbar = model.s_bar(ell);
  if (s0 == sbar) return ReachTime::unreachable();
  const bool up = s0 < sbar;
  if (up ? !(s > s0 && s < sbar) : !(s < s0 && s > sbar)) return ReachTime::unreachable();
  const double root_tol = model.solver().root_tol;
  if (std::abs(s - sbar) < 1e3 * root_tol) return ReachTime::near_equilibrium();

  // The drift is decreasing in s, so |drift| is largest at s0 and smallest at s.
  const double f0 = std::abs(model.drift(ell, s0));
  const double f1 = std::abs(model.drift(ell, s));
  const double dist = std::abs(s - s0);
  const double t_lower = dist / f0;
  const double t_upper = dist / f1;

  // Tighter tolerances: time error is the substrate error over the drift at s.
  FlowSolverConfig tight = model.solver();
  tight.abs_tol = std::min(tight.abs_tol, 1e-13);
  tight.rel_tol = std::min(tight.rel_tol, 1e-13);
  SubstrateIntegrator integ(model.params(), tight);
  integ.reset(ell, s0);
  auto passed = [&](double v) { return up ? v >= s : v <= s; };

  double ta = 0.0, sa = s0;
  double tb = t_lower;
  integ.advance(tb);
  int grow = 0;
  while (!passed(integ.s())) {
    ta = tb;
    sa = integ.s();
    const double next = std::min(2.0 * tb, t_upper * (1.0 + 1e-9) + 1e-300);
    if (next <= tb || ++grow > 200) {
      throw NumericError("time_to_reach bracket growth failed (ell=" + std::to_string(ell) + ")");
    }
    integ.advance(next - tb);
    tb = next;
  }
  double sb = integ.s();

  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (ta + tb);
    if (mid <= ta || mid >= tb) break;
    integ.set_substrate(sa);
    integ.advance(mid - ta);
    const double sm = integ.s();
    if (passed(sm)) {
      tb = mid;
      sb = sm;
    } else {
      ta = mid;
      sa = sm;
    }
    if (tb - ta <= 4.0 * std::numeric_limits<double>::epsilon() * tb &&
        std::min(std::abs(sa - s), std::abs(sb - s)) <= root_tol) {
      break;
    }
  }
  return ReachTime::finite(std::abs(sa - s) <= std::abs(sb - s) ? ta : tb);
}

double initial_for(const Model& model, std::int64_t ell, double s, double t) {
  if (ell < 1) throw PreconditionError("initial_for requires ell >= 1");
  if (!(s >= 0.0)) throw DomainError("initial_for requires s >= 0");
  if (!(t >= 0.0)) throw PreconditionError("initial_for requires t >= 0");
  if (t == 0.0) return s;

  // Tighter tolerances: the inverse amplifies forward errors by exp(rate * t).
  FlowSolverConfig tight = model.solver();
  tight.abs_tol = std::min(tight.abs_tol, 1e-13);
  tight.rel_tol = std::min(tight.rel_tol, 1e-13);
  SubstrateIntegrator integ(model.params(), tight);
  auto forward = [&](double s0) {
    integ.reset(ell, s0);
    integ.advance(t);
    return integ.s();
  };

  const double floor_value = forward(0.0);
  if (s <= floor_value) return 0.0;

  integ.reset(ell, s);
  integ.advance(-t);
  double g = std::max(integ.s(), 0.0);

  const double root_tol = model.solver().root_tol;
  double fg = forward(g) - s;
  for (int i = 0; i < 30 && fg != 0.0; ++i) {
    const double h = 1e-7 * std::max(g, 1e-3);
    const double slope = (forward(g + h) - s - fg) / h;
    if (!(slope > 0.0)) break;
    const double next = std::max(g - fg / slope, 0.0);
    const double fn = forward(next) - s;
    if (std::abs(fn) >= std::abs(fg)) break;
    g = next;
    fg = fn;
    if (std::abs(fg) <= 1e-3 * root_tol) break;
  }
  if (std::abs(fg) > root_tol) {
    // Bisection fallback on an increasing map.
    double a = 0.0, b = std::max(g, s);
    while (forward(b) < s) b = 2.0 * b + 1e-12;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (a + b);
      const double fm = forward(mid) - s;
      if (std::abs(fm) <= root_tol) { g = mid; fg = fm; break; }
      if (fm < 0.0) a = mid; else b = mid;
      g = mid;
      fg = fm;
    }
    if (std::abs(fg) > root_tol) throw NumericError("initial_for failed to reach root_tol");
  }
  return g;
}

bool phit_additivity_check(const Model& model, std::int64_t ell, double s0, double s1, double s2) {
  const double sbar = model.s_bar(ell);
  const bool below = s0 < sbar && s1 < sbar && s2 < sbar && s0 <= s1 && s1 <= s2;
  const bool above = s0 > sbar && s1 > sbar && s2 > sbar && s0 >= s1 && s1 >= s2;
  if (!below && !above) {
    throw PreconditionError("additivity requires s0, s1, s2 monotone toward the equilibrium on one side");
  }
  const ReachTime t02 = time_to_reach(model, ell, s0, s2);
  const ReachTime t01 = time_to_reach(model, ell, s0, s1);
  const ReachTime t12 = time_to_reach(model, ell, s1, s2);
  if (!t02.is_finite() || !t01.is_finite() || !t12.is_finite()) {
    return !t02.is_finite() && (!t01.is_finite() || !t12.is_finite());
  }
  return std::abs(t02.time() - t01.time() - t12.time()) <= 10.0 * model.solver().root_tol;
}

}  // namespace chemostat
