#include <doctest.h>

#include <cmath>
#include <random>

#include "chemostat/errors.hpp"
#include "chemostat/flow.hpp"
#include "flow_lemmas.hpp"
#include "test_support.hpp"

using namespace chemostat;

TEST_CASE("linear equilibria follow D s_in / (D + k c ell)") {
  const Model m(testing::linear_params());
  const testing::LinearOracle o;
  for (std::int64_t ell = 1; ell <= 50; ++ell) {
    CHECK(m.s_bar(ell) == doctest::Approx(2.0 / (1.0 + 3.0 * ell)).epsilon(1e-10));
    CHECK(std::abs(m.s_bar(ell) - o.s_bar(ell)) <= 1e-10);
  }
  CHECK(m.s_bar(0) == 2.0);
  CHECK(m.s_bar(100) < m.s_bar(99));
}

TEST_CASE("linear flow and growth integral match the exponential relaxation") {
  const Model m(testing::linear_params());
  const testing::LinearOracle o;
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t ell = 1 + static_cast<std::int64_t>(gen() % 8);
    const double s0 = 3.0 * u(gen), t = 4.0 * u(gen);
    const auto fg = flow_with_growth(m, ell, s0, t);
    CHECK(std::abs(fg.s - o.flow(ell, s0, t)) <= 1e-8);
    CHECK(std::abs(fg.mu_integral - o.mu_integral(ell, s0, t)) <= 1e-8);
  }
  CHECK(flow(m, 0, 0.3, 1.0) == doctest::Approx(2.0 + (0.3 - 2.0) * std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("time-inverse flow matches the logarithmic closed form") {
  const Model m(testing::linear_params());
  const testing::LinearOracle o;
  const auto up = time_to_reach(m, 1, 0.1, 0.4);
  REQUIRE(up.is_finite());
  CHECK(std::abs(up.time() - o.time_to_reach(1, 0.1, 0.4)) <= 1e-8);
  const auto down = time_to_reach(m, 2, 1.5, 0.3);
  REQUIRE(down.is_finite());
  CHECK(std::abs(down.time() - o.time_to_reach(2, 1.5, 0.3)) <= 1e-8);
  CHECK(time_to_reach(m, 1, 0.1, 0.1).time() == 0.0);
}

TEST_CASE("unreachable and near-equilibrium targets give a tagged infinity") {
  const Model m(testing::linear_params());
  const auto beyond = time_to_reach(m, 1, 0.1, 0.6);
  CHECK_FALSE(beyond.is_finite());
  CHECK_FALSE(beyond.is_near_equilibrium());
  CHECK(std::isinf(beyond.or_infinity()));
  CHECK_THROWS_AS(beyond.time(), PreconditionError);
  const auto wrong_way = time_to_reach(m, 1, 0.3, 0.2);
  CHECK_FALSE(wrong_way.is_finite());
  const auto near = time_to_reach(m, 1, 0.1, 0.5 - 1e-12);
  CHECK_FALSE(near.is_finite());
  CHECK(near.is_near_equilibrium());
}

TEST_CASE("initial-condition inverse matches the closed form and clamps at zero") {
  const Model m(testing::linear_params());
  const testing::LinearOracle o;
  for (double s : {0.05, 0.2, 0.45, 0.8, 1.7}) {
    for (double t : {0.0, 0.05, 0.3, 1.0}) {
      CHECK(std::abs(initial_for(m, 1, s, t) - o.initial_for(1, s, t)) <= 1e-8);
    }
  }
  CHECK(initial_for(m, 3, 0.01, 2.0) == 0.0);
}

TEST_CASE("round trips compose to 1e-8") {
  for (const auto& p : {testing::linear_params(), testing::monod_params()}) {
    const Model m(p);
    for (std::int64_t ell : {1, 2, 5}) {
      for (double s0 : {0.0, 0.1, 0.3, 1.2}) {
        const double t = 0.1;
        const double s = flow(m, ell, s0, t);
        if (s0 > 0.0) CHECK(std::abs(initial_for(m, ell, s, t) - s0) <= 1e-8);
        CHECK(std::abs(time_to_reach(m, ell, s0, s).time() - t) <= 1e-8);
        // Long horizons: the inverse is ill-conditioned, the forward residual is not.
        const double far = flow(m, ell, s0, 2.0);
        CHECK(std::abs(flow(m, ell, initial_for(m, ell, far, 2.0), 2.0) - far) <= 1e-9);
      }
    }
  }
}

TEST_CASE("flow preconditions") {
  const Model m(testing::linear_params());
  CHECK_THROWS_AS(flow(m, -1, 0.1, 1.0), PreconditionError);
  CHECK_THROWS_AS(flow(m, 1, -0.1, 1.0), DomainError);
  CHECK_THROWS_AS(flow(m, 1, 0.1, -1.0), PreconditionError);
  CHECK_THROWS_AS(equilibrium(m.params(), 0), PreconditionError);
}

TEST_CASE("flow lemma properties hold on sampled cases for both laws") {
  for (const auto& p : {testing::linear_params(), testing::monod_params()}) {
    const Model m(p);
    for (const auto& t : testing::run_flow_lemmas(m, 100, 5)) {
      INFO(t.name << ": " << t.first_failure);
      CHECK(t.failures == 0);
      CHECK(t.cases > 0);
    }
  }
}
