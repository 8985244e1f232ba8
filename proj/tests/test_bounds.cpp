#include <doctest.h>

#include <cmath>
#include <vector>

#include "chemostat/bounds.hpp"
#include "chemostat/errors.hpp"
#include "test_support.hpp"

using namespace chemostat;

namespace {

// P(sum of independent exponentials with distinct rates <= t).
double hypoexponential_cdf(const std::vector<double>& rates, double t) {
  double tail = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < rates.size(); ++j) {
      if (j != i) w *= rates[j] / (rates[j] - rates[i]);
    }
    tail += w * std::exp(-rates[i] * t);
  }
  return 1.0 - tail;
}

// First ell events all of one kind from population n stepping by `step`.
double first_events_oracle(const BirthDeathSpec& bd, bool deaths, std::int64_t ell, double t) {
  const double a = bd.birth + bd.death;
  const double p = (deaths ? bd.death : bd.birth) / a;
  std::vector<double> rates;
  std::int64_t m = bd.n;
  for (std::int64_t e = 0; e < ell; ++e) {
    rates.push_back(a * static_cast<double>(m));
    m += deaths ? -1 : 1;
  }
  return std::pow(p, static_cast<double>(ell)) * hypoexponential_cdf(rates, t);
}

}  // namespace

TEST_CASE("one-step birth and death probabilities have the closed form") {
  const BirthDeathSpec bd{1.5, 1.0, 3};
  for (double t : {0.01, 0.3, 2.0}) {
    const double all = 1.0 - std::exp(-3.0 * 2.5 * t);
    CHECK(p_death(bd, 1, t) == doctest::Approx(1.0 / 2.5 * all).epsilon(1e-12));
    CHECK(p_birth(bd, 1, t) == doctest::Approx(1.5 / 2.5 * all).epsilon(1e-12));
  }
}

TEST_CASE("nested integrals match the hypoexponential oracle") {
  for (const BirthDeathSpec bd : {BirthDeathSpec{1.5, 1.0, 4}, BirthDeathSpec{0.7, 2.0, 6}}) {
    for (std::int64_t ell : {2, 3, 4}) {
      for (double t : {0.05, 0.4, 1.5}) {
        CHECK(p_death(bd, ell, t) ==
              doctest::Approx(first_events_oracle(bd, true, ell, t)).epsilon(1e-9));
        CHECK(p_birth(bd, ell, t) ==
              doctest::Approx(first_events_oracle(bd, false, ell, t)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("birth-death probabilities: edge cases and monotonicity") {
  const BirthDeathSpec bd{1.5, 1.0, 3};
  CHECK(p_death(bd, 0, 0.7) == 1.0);
  CHECK(p_birth(bd, 0, 0.0) == 1.0);
  CHECK(p_death(bd, 2, 0.0) == 0.0);
  double prev = 0.0;
  for (double t = 0.0; t <= 3.0; t += 0.25) {
    const double v = p_death(bd, 3, t);
    CHECK(v >= prev - 1e-14);
    CHECK(v <= std::pow(1.0 / 2.5, 3) + 1e-12);
    prev = v;
  }
  // The first event is a birth or a death.
  CHECK(p_death(bd, 1, 0.8) + p_birth(bd, 1, 0.8) ==
        doctest::Approx(1.0 - std::exp(-3.0 * 2.5 * 0.8)));
  CHECK_THROWS_AS(p_death(bd, 4, 1.0), PreconditionError);
  CHECK_THROWS_AS(p_death(bd, -1, 1.0), PreconditionError);
  CHECK_THROWS_AS(p_birth(bd, kMaxNestingDepth + 1, 1.0), PreconditionError);
  CHECK_THROWS_AS(p_birth(BirthDeathSpec{0.0, 1.0, 1}, 1, 1.0), PreconditionError);
  CHECK_THROWS_AS(p_birth(bd, 1, -0.1), PreconditionError);
}

TEST_CASE("Monte Carlo frequency agrees with the nested integral") {
  const BirthDeathSpec bd{1.5, 1.0, 3};
  const auto mc = birth_death_mc(bd, true, 2, 0.6, 40000, 17, 2);
  const double exact = p_death(bd, 2, 0.6);
  CHECK(std::abs(mc.p() - exact) < 4.0 * std::sqrt(exact * (1 - exact) / 40000.0));
  const auto mb = birth_death_mc(bd, false, 3, 0.6, 40000, 18, 2);
  const double eb = p_birth(bd, 3, 0.6);
  CHECK(std::abs(mb.p() - eb) < 4.0 * std::sqrt(eb * (1 - eb) / 40000.0));
}

TEST_CASE("small-set constant from the linear closed forms") {
  const Model m(testing::linear_params());
  const testing::LinearOracle o;
  const double tau0 = 0.2, s0 = 0.1, s1 = 0.3;
  const auto c = small_set_constant(m, tau0, s0, s1);
  const double c0 = 1.0 / (o.D * o.s_in + 2.0 * o.k * o.c * o.s_bar(2));
  const double lo = o.flow(2, s1, tau0), hi = o.flow(1, s0, tau0);
  const double eps1 = c0 * 2.0 * o.D * std::exp(-2.0 * o.D * tau0) *
                      std::exp(-2.0 * o.mu_integral(1, s1, tau0)) * (hi - lo);
  CHECK(c.c0 == doctest::Approx(c0));
  CHECK(c.nu_lo == doctest::Approx(lo).epsilon(1e-8));
  CHECK(c.nu_hi == doctest::Approx(hi).epsilon(1e-8));
  CHECK(c.eps1 == doctest::Approx(eps1).epsilon(1e-7));
  CHECK(c.nu_of(lo, hi) == doctest::Approx(1.0));
  CHECK(c.nu_of(lo, 0.5 * (lo + hi)) == doctest::Approx(0.5));
  CHECK(c.nu_of(hi + 1.0, hi + 2.0) == 0.0);

  CHECK_THROWS_AS(small_set_constant(m, 0.0, s0, s1), PreconditionError);
  CHECK_THROWS_AS(small_set_constant(m, tau0, s1, s0), PreconditionError);
  CHECK_THROWS_AS(small_set_constant(m, tau0, s0, m.s_bar1()), PreconditionError);
  CHECK_THROWS_AS(small_set_constant(m, 1e-3, 0.01, 0.49), PreconditionError);
}

TEST_CASE("small-set minorization holds in simulation") {
  const Model m(testing::linear_params());
  const auto c = small_set_constant(m, 0.2, 0.1, 0.3);
  const auto chk = small_set_mc(m, c, 4000, 5, 2);
  CHECK(chk.passed);
  CHECK(chk.starts.size() == 3);
  CHECK(chk.min_ratio >= c.eps1);
}

namespace {

HittingScenario linear_scenario() {
  HittingScenario sc;
  sc.id = "unit";
  sc.K = CompactSpec{2, 0.35, 0.45};
  sc.start = {1, 0.4};
  sc.target = {2, 0.38};
  sc.tau0 = 2.0;
  sc.tau = 3.0;
  return sc;
}

}  // namespace

TEST_CASE("hitting constants: structural quantities") {
  const Model m(testing::linear_params());
  const testing::LinearOracle o;
  const auto sc = linear_scenario();
  const auto h = hitting_constants(m, sc);
  CHECK(h.L == 2);
  CHECK(h.M == doctest::Approx(std::max(o.D * o.s_in, o.k * 1.5 * 2.0)));
  CHECK(h.margin == doctest::Approx(std::min(0.35 - o.s_bar(2), o.s_bar(1) - 0.45)));
  const double t_min = std::max(o.time_to_reach(1, o.s_bar(2), 0.45),
                                o.time_to_reach(2, o.s_bar(1), 0.35));
  CHECK(h.t_min == doctest::Approx(t_min).epsilon(1e-8));
  CHECK(h.eps <= h.eps_bar);
  CHECK(h.eps <= sc.tau - sc.tau0);
  CHECK(h.delta == doctest::Approx(std::abs(0.38 - o.s_bar(2))));
  CHECK(h.ratio == doctest::Approx(o.c * o.s_bar(2) / 1.5));
  CHECK(h.log10_bound == doctest::Approx(h.log10_C1 + h.log10_C2 + h.log10_C3));
  CHECK(h.log10_C1 < 0.0);
  CHECK(h.log10_C2 < 0.0);
  CHECK(h.log10_C3 < 0.0);
}

TEST_CASE("hitting constants reject violated hypotheses with every reason") {
  const Model m(testing::linear_params());
  auto sc = linear_scenario();
  sc.start = {3, 0.1};
  sc.tau = 1.0;
  try {
    (void)hitting_constants(m, sc);
    FAIL("expected PreconditionError");
  } catch (const PreconditionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("start point") != std::string::npos);
    CHECK(msg.find("tau0 < tau") != std::string::npos);
  }
  auto fast = linear_scenario();
  fast.tau0 = 0.01;
  fast.tau = 1.0;
  CHECK_THROWS_AS((void)hitting_constants(m, fast), PreconditionError);
}

TEST_CASE("inverse-substrate right-hand side is finite and positive") {
  const Model m(testing::linear_params());
  double mb = 0.0, slope = 0.0;
  const double rhs = inv_substrate_rhs(m, 1, 0.5, &mb, &slope);
  CHECK(rhs > 0.0);
  CHECK(std::isfinite(rhs));
  CHECK(mb == doctest::Approx(3.0 * 1.0 * 2.0 * 0.5));
  CHECK(slope == doctest::Approx(3.0));
  const auto rep = inv_substrate_moment_bound(m, 1, 0.5, 4000, 3, 2);
  CHECK(rep.passed);
  CHECK(rep.mc.mean <= rep.rhs);
}
