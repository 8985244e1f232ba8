#ifndef CHEMOSTAT_SIMULATE_HPP
#define CHEMOSTAT_SIMULATE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "chemostat/flow.hpp"
#include "chemostat/model.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/rng.hpp"

namespace chemostat {

enum class JumpKind { Division, Washout };

const char* to_string(JumpKind kind) noexcept;

struct JumpEvent {
  double time = 0.0;
  JumpKind kind = JumpKind::Division;
  std::int64_t x_after = 0;
  double s_at_jump = 0.0;
};

// Events are strictly increasing in time and change x by +-1; no event
// follows extinction.
struct Trajectory {
  HybridState initial;
  std::vector<JumpEvent> events;
  double horizon = 0.0;
  std::optional<double> extinct_at;

  // State at time t in [0, horizon], re-integrating the flow from the last event.
  HybridState state_at(const Model& model, double t) const;
};

// A time that may be censored at a hard cap.
struct CappedTime {
  double time = 0.0;
  bool censored = false;
};

// Stopping rule evaluated along the piecewise-monotone substrate path.
class SegmentWatcher {
 public:
  virtual ~SegmentWatcher() = default;
  // Whether the state itself satisfies the rule.
  virtual bool at_point(std::int64_t x, double s) = 0;
  // Offset in [0, dt] of the first time the rule holds along the flow with x
  // bacteria from s_a (at offset 0) to s_b (at offset dt), if any.
  virtual std::optional<double> along(const Model& model, std::int64_t x, double s_a, double s_b,
                                      double dt) = 0;
  // Substrate value at the stopping point found by `along`.
  virtual double stop_value() const = 0;
};

// First entry into {target_x} x [target_s - half_width, target_s + half_width].
class BoxWatcher final : public SegmentWatcher {
 public:
  BoxWatcher(std::int64_t target_x, double target_s, double half_width);
  bool at_point(std::int64_t x, double s) override;
  std::optional<double> along(const Model& model, std::int64_t x, double s_a, double s_b,
                              double dt) override;
  double stop_value() const override { return stop_; }

 private:
  std::int64_t x_;
  double lo_, hi_;
  double stop_ = 0.0;
};

// First time the substrate is at or below `level` (any x >= 1).
class LevelBelowWatcher final : public SegmentWatcher {
 public:
  explicit LevelBelowWatcher(double level) : level_(level) {}
  bool at_point(std::int64_t x, double s) override;
  std::optional<double> along(const Model& model, std::int64_t x, double s_a, double s_b,
                              double dt) override;
  double stop_value() const override { return level_; }

 private:
  double level_;
};

// Exact simulation engine: thinning against the rate bound mu(s_bar1 v S),
// refreshed after every jump, with the substrate flow integrated between
// candidate times.
class PathSimulator {
 public:
  enum class Stop { Horizon, Extinct, Watcher, Jump };

  PathSimulator(const Model& model, RngStream rng);

  void reset(HybridState state, double t0 = 0.0);
  HybridState state() const noexcept { return {x_, s_}; }
  double time() const noexcept { return t_; }
  RngStream& rng() noexcept { return rng_; }

  // Uses a fixed dominating rate instead of the refreshed bound; must
  // dominate mu along the whole path.
  void set_fixed_rate_bound(std::optional<double> bound) noexcept { fixed_bound_ = bound; }

  // Advances until `until`, extinction, a watcher hit, or (optionally) the
  // first accepted jump. Accepted jumps are appended to `log` when given.
  Stop run(double until, SegmentWatcher* watcher = nullptr, std::vector<JumpEvent>* log = nullptr,
           bool stop_after_jump = false);

  // int_0^t mu(S_u) X_u du and int_0^t X_u du since the last reset.
  double growth_mass() const noexcept { return growth_mass_; }
  double population_mass() const noexcept { return pop_mass_; }
  std::uint64_t candidates() const noexcept { return candidates_; }

 private:
  double rate_bound() const noexcept;

  const Model& model_;
  RngStream rng_;
  SubstrateIntegrator integ_;
  std::int64_t x_ = 0;
  double s_ = 0.0;
  double t_ = 0.0;
  double growth_mass_ = 0.0;
  double pop_mass_ = 0.0;
  std::uint64_t candidates_ = 0;
  std::optional<double> fixed_bound_;
};

struct StepResult {
  double elapsed = 0.0;            // time of the event, or the cap
  std::optional<JumpEvent> event;  // none when the cap is reached first
  double s_end = 0.0;              // substrate at `elapsed` (before the jump)
};

// One thinning step from `state` with a caller-supplied bound b >= mu(s_bar1 v s).
StepResult step(const Model& model, HybridState state, double rate_bound, RngStream& rng,
                double cap);

Trajectory simulate_path(const Model& model, std::int64_t x0, double s0, double horizon,
                         RngStream& rng);

CappedTime extinction_time(const Model& model, std::int64_t x0, double s0, double t_cap,
                           RngStream& rng);

// First time t >= t_start with X_t = target_x and |S_t - target_s| <= half_width.
CappedTime hitting_time_box(const Model& model, std::int64_t x0, double s0, std::int64_t target_x,
                            double target_s, double half_width, double t_cap, RngStream& rng,
                            double t_start = 0.0);

// P(T_1 > delta) = exp(-x int_0^delta (mu(flow(x, s, u)) + D) du).
double first_event_survival(const Model& model, std::int64_t x, double s, double delta);

// Coupled path of the process and a Yule process Z with per-capita rate
// mu_bar that dominates it on [0, t]: X_u <= Z_u whenever mu(S_u) <= mu_bar.
struct YuleCoupling {
  HybridState state;
  std::int64_t yule = 0;
  bool dominated = true;  // X_u <= Z_u held at every event
};
YuleCoupling simulate_yule_coupled(const Model& model, std::int64_t x0, double s0, double t,
                                   double mu_bar, RngStream& rng);

}  // namespace chemostat

#endif
