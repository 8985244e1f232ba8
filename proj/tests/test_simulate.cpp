#include <doctest.h>

#include <cmath>

#include "chemostat/errors.hpp"
#include "chemostat/simulate.hpp"
#include "chemostat/stats.hpp"
#include "test_support.hpp"

using namespace chemostat;

TEST_CASE("trajectories jump by one at strictly increasing times and stop at extinction") {
  const Model m(testing::linear_params());
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    RngStream rng(3, rep);
    const auto tr = simulate_path(m, 2, 0.25, 30.0, rng);
    std::int64_t x = tr.initial.x;
    double t = 0.0;
    for (const auto& e : tr.events) {
      CHECK(e.time > t);
      CHECK(std::abs(e.x_after - x) == 1);
      CHECK(e.s_at_jump >= 0.0);
      CHECK(e.s_at_jump < m.s_bar1());  // invariant set
      x = e.x_after;
      t = e.time;
    }
    if (tr.extinct_at) {
      CHECK(x == 0);
      CHECK(*tr.extinct_at == tr.events.back().time);
    } else {
      CHECK(x >= 1);
    }
  }
}

TEST_CASE("same seed gives the same path and extinct starts stay put") {
  const Model m(testing::monod_params());
  RngStream a(5, 1), b(5, 1);
  const auto ta = simulate_path(m, 3, 1.0, 10.0, a);
  const auto tb = simulate_path(m, 3, 1.0, 10.0, b);
  REQUIRE(ta.events.size() == tb.events.size());
  for (std::size_t i = 0; i < ta.events.size(); ++i) {
    CHECK(ta.events[i].time == tb.events[i].time);
    CHECK(ta.events[i].s_at_jump == tb.events[i].s_at_jump);
  }
  RngStream c(5, 2);
  const auto dead = simulate_path(m, 0, 0.3, 5.0, c);
  CHECK(dead.events.empty());
  CHECK(dead.extinct_at.has_value());
  const auto end = dead.state_at(m, 5.0);
  CHECK(end.x == 0);
  CHECK(end.s == doctest::Approx(flow(m, 0, 0.3, 5.0)));
}

TEST_CASE("first-event survival quadrature matches the linear closed form") {
  const Model m(testing::linear_params());
  const testing::LinearOracle o;
  for (std::int64_t x : {1, 3}) {
    for (double s : {0.1, 0.4, 1.0}) {
      for (double d : {0.05, 0.3, 1.0}) {
        const double expect = std::exp(-x * (o.mu_integral(x, s, d) + d));
        CHECK(first_event_survival(m, x, s, d) == doctest::Approx(expect).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("first-event survival frequency agrees with quadrature") {
  const Model m(testing::linear_params());
  const double delta = 0.3;
  std::size_t survived = 0;
  const std::size_t n = 20000;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(17, i);
    const auto st = step(m, {2, 0.2}, m.mu(m.s_bar1()), rng, delta);
    if (!st.event) ++survived;
  }
  const double p = first_event_survival(m, 2, 0.2, delta);
  const double sigma = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(static_cast<double>(survived) / n - p) < 4.0 * sigma);
}

TEST_CASE("a thinning bound below the rate is refused or detected") {
  const Model m(testing::linear_params());
  RngStream rng(1, 1);
  CHECK_THROWS_AS(step(m, {1, 0.4}, 0.1, rng, 1.0), PreconditionError);
  PathSimulator sim(m, RngStream(1, 2));
  sim.set_fixed_rate_bound(0.2);
  sim.reset({3, 0.4});
  CHECK_THROWS_AS(sim.run(50.0), InvariantViolation);
}

TEST_CASE("extinction and hitting times are censored at the cap") {
  const Model m(testing::linear_params());
  RngStream rng(4, 0);
  const auto et = extinction_time(m, 20, 0.1, 0.01, rng);
  CHECK(et.censored);
  CHECK(et.time == 0.01);
  RngStream r2(4, 1);
  const auto ht = hitting_time_box(m, 1, 0.1, 50, 0.01, 1e-6, 1.0, r2);
  CHECK(ht.censored);
  RngStream r3(4, 2);
  const auto now = hitting_time_box(m, 2, 0.2, 2, 0.2, 0.0, 1.0, r3);
  CHECK_FALSE(now.censored);
  CHECK(now.time == 0.0);
}

TEST_CASE("the Yule coupling dominates the population") {
  const Model m(testing::linear_params());
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream rng(8, i);
    const auto c = simulate_yule_coupled(m, 2, 0.3, 2.0, m.mu(m.s_bar1()), rng);
    CHECK(c.dominated);
    CHECK(c.state.x <= c.yule);
  }
}

TEST_CASE("growth and population masses accumulate along the path") {
  const Model m(testing::linear_params());
  PathSimulator sim(m, RngStream(2, 0));
  sim.reset({1, 0.1});
  sim.set_fixed_rate_bound(1e-300 + m.mu(m.s_bar1()));
  const auto stop = sim.run(1e-3);
  if (stop == PathSimulator::Stop::Horizon && sim.state().x == 1) {
    const testing::LinearOracle o;
    CHECK(sim.population_mass() == doctest::Approx(1e-3).epsilon(1e-9));
    CHECK(sim.growth_mass() == doctest::Approx(o.mu_integral(1, 0.1, 1e-3)).epsilon(1e-7));
  }
}
