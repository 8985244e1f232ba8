#include "chemostat/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chemostat/errors.hpp"

namespace chemostat {

const char* to_string(JumpKind kind) noexcept {
  return kind == JumpKind::Division ? "division" : "washout";
}

HybridState Trajectory::state_at(const Model& model, double t) const {
  if (!(t >= 0.0) || t > horizon) throw PreconditionError("state_at time outside [0, horizon]");
  auto it = std::upper_bound(events.begin(), events.end(), t,
                             [](double v, const JumpEvent& e) { return v < e.time; });
  HybridState base = initial;
  double t_base = 0.0;
  if (it != events.begin()) {
    const JumpEvent& e = *std::prev(it);
    base = {e.x_after, e.s_at_jump};
    t_base = e.time;
  }
  return {base.x, flow(model, base.x, base.s, t - t_base)};
}

// ---------------------------------------------------------------------------

BoxWatcher::BoxWatcher(std::int64_t target_x, double target_s, double half_width)
    : x_(target_x), lo_(target_s - half_width), hi_(target_s + half_width) {
  if (!(half_width >= 0.0)) throw PreconditionError("box half-width must be nonnegative");
}

bool BoxWatcher::at_point(std::int64_t x, double s) {
  if (x == x_ && s >= lo_ && s <= hi_) {
    stop_ = s;
    return true;
  }
  return false;
}

std::optional<double> BoxWatcher::along(const Model& model, std::int64_t x, double s_a, double s_b,
                                        double dt) {
  if (x != x_) return std::nullopt;
  if (s_a >= lo_ && s_a <= hi_) {
    stop_ = s_a;
    return 0.0;
  }
  double boundary;
  if (s_a < lo_ && s_b >= lo_) {
    boundary = lo_;
  } else if (s_a > hi_ && s_b <= hi_) {
    boundary = hi_;
  } else {
    return std::nullopt;
  }
  const ReachTime r = time_to_reach(model, x, s_a, std::max(boundary, 0.0));
  if (!r.is_finite()) return std::nullopt;
  stop_ = boundary;
  return std::min(r.time(), dt);
}

bool LevelBelowWatcher::at_point(std::int64_t, double s) { return s <= level_; }

std::optional<double> LevelBelowWatcher::along(const Model& model, std::int64_t x, double s_a,
                                               double s_b, double dt) {
  if (s_a <= level_) return 0.0;
  if (s_b > level_) return std::nullopt;
  const ReachTime r = time_to_reach(model, x, s_a, level_);
  if (!r.is_finite()) return std::nullopt;
  return std::min(r.time(), dt);
}

// ---------------------------------------------------------------------------

PathSimulator::PathSimulator(const Model& model, RngStream rng)
    : model_(model), rng_(rng), integ_(model.params(), model.solver()) {}

void PathSimulator::reset(HybridState state, double t0) {
  if (state.x < 0 || !(state.s >= 0.0)) throw DomainError("invalid hybrid state");
  x_ = state.x;
  s_ = state.s;
  t_ = t0;
  growth_mass_ = 0.0;
  pop_mass_ = 0.0;
  integ_.reset(std::max<std::int64_t>(x_, 0), s_);
}

double PathSimulator::rate_bound() const noexcept {
  if (fixed_bound_) return *fixed_bound_;
  return model_.mu(std::max(model_.s_bar1(), s_));
}

PathSimulator::Stop PathSimulator::run(double until, SegmentWatcher* watcher,
                                       std::vector<JumpEvent>* log, bool stop_after_jump) {
  if (x_ == 0) return Stop::Extinct;
  if (watcher && watcher->at_point(x_, s_)) {
    s_ = watcher->stop_value();
    return Stop::Watcher;
  }
  if (!(until > t_)) return Stop::Horizon;
  const double D = model_.D();
  integ_.set_population(x_);
  integ_.set_substrate(s_);
  double b = rate_bound();
  for (;;) {
    const double xd = static_cast<double>(x_);
    const double cand = t_ + rng_.exponential((D + b) * xd);
    const bool beyond = !(cand < until);
    const double target = beyond ? until : cand;
    const double dt = target - t_;
    const double s_a = s_;
    integ_.clear_mu_integral();
    integ_.advance(dt);
    const double s_b = integ_.s();
    if (watcher) {
      if (auto off = watcher->along(model_, x_, s_a, s_b, dt)) {
        integ_.set_substrate(s_a);
        integ_.clear_mu_integral();
        integ_.advance(*off);
        growth_mass_ += xd * integ_.mu_integral();
        pop_mass_ += xd * *off;
        t_ += *off;
        s_ = watcher->stop_value();
        integ_.set_substrate(s_);
        return Stop::Watcher;
      }
    }
    growth_mass_ += xd * integ_.mu_integral();
    pop_mass_ += xd * dt;
    t_ = target;
    s_ = s_b;
    if (beyond) return Stop::Horizon;

    ++candidates_;
    const double mu_s = model_.mu(s_);
    if (mu_s > b * (1.0 + 1e-9) + 1e-300) {
      throw InvariantViolation("thinning bound violated: mu(s)=" + std::to_string(mu_s) +
                               " > bound " + std::to_string(b) + " at s=" + std::to_string(s_) +
                               ", x=" + std::to_string(x_) + ", t=" + std::to_string(t_));
    }
    const double u = rng_.uniform() * (D + b);
    JumpKind kind;
    if (u < D) {
      kind = JumpKind::Washout;
      --x_;
    } else if (u < D + mu_s) {
      kind = JumpKind::Division;
      ++x_;
    } else {
      continue;
    }
    if (log) log->push_back({t_, kind, x_, s_});
    if (x_ == 0) return Stop::Extinct;
    integ_.set_population(x_);
    b = rate_bound();
    if (watcher && watcher->at_point(x_, s_)) {
      s_ = watcher->stop_value();
      return Stop::Watcher;
    }
    if (stop_after_jump) return Stop::Jump;
  }
}

// ---------------------------------------------------------------------------

StepResult step(const Model& model, HybridState state, double rate_bound, RngStream& rng,
                double cap) {
  if (state.x < 1) throw PreconditionError("step requires x >= 1 (x = 0 is absorbing)");
  const double needed = model.mu(std::max(model.s_bar1(), state.s));
  if (rate_bound < needed * (1.0 - 1e-12)) {
    throw PreconditionError("rate bound below mu(s_bar1 v s)");
  }
  PathSimulator sim(model, rng);
  sim.set_fixed_rate_bound(rate_bound);
  sim.reset(state);
  std::vector<JumpEvent> log;
  sim.run(cap, nullptr, &log, true);
  rng = sim.rng();
  StepResult r;
  if (!log.empty()) {
    r.event = log.front();
    r.elapsed = log.front().time;
    r.s_end = log.front().s_at_jump;
  } else {
    r.elapsed = cap;
    r.s_end = sim.state().s;
  }
  return r;
}

Trajectory simulate_path(const Model& model, std::int64_t x0, double s0, double horizon,
                         RngStream& rng) {
  if (x0 < 0 || !(s0 >= 0.0)) throw PreconditionError("simulate_path requires x0 >= 0, s0 >= 0");
  if (!(horizon >= 0.0)) throw PreconditionError("simulate_path requires horizon >= 0");
  Trajectory tr;
  tr.initial = {x0, s0};
  tr.horizon = horizon;
  if (x0 == 0) {
    tr.extinct_at = 0.0;
    return tr;
  }
  PathSimulator sim(model, rng);
  sim.reset(tr.initial);
  if (sim.run(horizon, nullptr, &tr.events) == PathSimulator::Stop::Extinct) {
    tr.extinct_at = sim.time();
  }
  rng = sim.rng();
  return tr;
}

CappedTime extinction_time(const Model& model, std::int64_t x0, double s0, double t_cap,
                           RngStream& rng) {
  if (!(t_cap > 0.0)) throw PreconditionError("extinction_time requires t_cap > 0");
  if (x0 == 0) return {0.0, false};
  PathSimulator sim(model, rng);
  sim.reset({x0, s0});
  const auto stop = sim.run(t_cap);
  rng = sim.rng();
  if (stop == PathSimulator::Stop::Extinct) return {sim.time(), false};
  return {t_cap, true};
}

CappedTime hitting_time_box(const Model& model, std::int64_t x0, double s0, std::int64_t target_x,
                            double target_s, double half_width, double t_cap, RngStream& rng,
                            double t_start) {
  BoxWatcher box(target_x, target_s, half_width);
  PathSimulator sim(model, rng);
  sim.reset({x0, s0});
  CappedTime out{t_cap, true};
  if (t_start > 0.0 && sim.run(std::min(t_start, t_cap)) == PathSimulator::Stop::Extinct) {
    rng = sim.rng();
    return out;
  }
  if (t_start <= t_cap && sim.run(t_cap, &box) == PathSimulator::Stop::Watcher) {
    out = {sim.time(), false};
  }
  rng = sim.rng();
  return out;
}

double first_event_survival(const Model& model, std::int64_t x, double s, double delta) {
  if (x < 1) throw PreconditionError("first_event_survival requires x >= 1");
  if (!(delta >= 0.0)) throw PreconditionError("first_event_survival requires delta >= 0");
  if (delta == 0.0) return 1.0;
  const FlowWithGrowth fw = flow_with_growth(model, x, s, delta);
  return std::exp(-static_cast<double>(x) * (fw.mu_integral + model.D() * delta));
}

YuleCoupling simulate_yule_coupled(const Model& model, std::int64_t x0, double s0, double t,
                                   double mu_bar, RngStream& rng) {
  if (x0 < 0 || !(s0 >= 0.0) || !(t >= 0.0) || !(mu_bar > 0.0)) {
    throw PreconditionError("invalid Yule coupling arguments");
  }
  YuleCoupling out;
  std::int64_t x = x0, z = x0;
  double s = s0, now = 0.0;
  SubstrateIntegrator integ(model.params(), model.solver());
  integ.reset(x, s);
  const double D = model.D();
  while (z > 0) {
    const double total = mu_bar * static_cast<double>(z) + D * static_cast<double>(x);
    const double cand = now + rng.exponential(total);
    if (!(cand < t)) {
      integ.advance(t - now);
      s = integ.s();
      break;
    }
    integ.advance(cand - now);
    now = cand;
    s = integ.s();
    const double u = rng.uniform() * total;
    if (u < D * static_cast<double>(x)) {
      --x;
      integ.set_population(x);
    } else {
      const double mu_s = model.mu(s);
      if (x > 0 && mu_s > mu_bar * (1.0 + 1e-12)) out.dominated = false;
      const double p = static_cast<double>(x) / static_cast<double>(z) * std::min(1.0, mu_s / mu_bar);
      ++z;
      if (rng.uniform() < p) {
        ++x;
        integ.set_population(x);
      }
    }
    if (x > z) out.dominated = false;
  }
  out.state = {x, s};
  out.yule = z;
  return out;
}

}  // namespace chemostat
