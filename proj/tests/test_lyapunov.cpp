#include <doctest.h>

#include <cmath>
#include <random>

#include "chemostat/errors.hpp"
#include "chemostat/lyapunov.hpp"
#include "test_support.hpp"

using namespace chemostat;

TEST_CASE("generator of psi is (mu - D) x") {
  const Model m(testing::linear_params());
  const auto f = psi_function();
  for (std::int64_t x : {1, 2, 7}) {
    for (double s : {0.05, 0.3, 1.2}) {
      CHECK(generator_apply(m, f, x, s) == doctest::Approx((m.mu(s) - m.D()) * x));
    }
  }
  CHECK(generator_apply(m, f, 0, 0.4) == 0.0);
  TestFunction no_ds{[](std::int64_t, double) { return 1.0; }, nullptr};
  CHECK_THROWS_AS(generator_apply(m, no_ds, 1, 0.1), PreconditionError);
}

TEST_CASE("three-part drift split agrees with the generic generator") {
  for (const auto& p : {testing::linear_params(), testing::monod_params()}) {
    const Model m(p);
    const LyapunovConfig cfg{2.0, 0.05, 1.0, 3.0, 1.7, 0.0};
    const auto V = V_function(m, cfg);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
      const std::int64_t x = 1 + static_cast<std::int64_t>(gen() % 12);
      const double s = m.s_bar1() * (1e-3 + 0.998 * u(gen));
      const double generic = generator_apply(m, V, x, s);
      const double split = lv_parts(m, cfg, x, s).total();
      CHECK(split == doctest::Approx(generic).epsilon(1e-9));
    }
  }
}

TEST_CASE("W and V live on the invariant domain and are sandwiched") {
  const Model m(testing::linear_params());
  CHECK_THROWS_AS(W(m, 2.0, 0.1, 1, m.s_bar1()), DomainError);
  CHECK_THROWS_AS(W(m, 2.0, 0.1, 0, 0.2), DomainError);
  CHECK_THROWS_AS(W(m, 2.0, 0.1, 1, 0.0), DomainError);
  const LyapunovConfig cfg{2.0, 0.1, 1.0, 2.0, 1.5, 0.0};
  const auto sw = sandwich_constants(m, cfg);
  for (std::int64_t x = 1; x <= 10; ++x) {
    for (double s = 0.01; s < m.s_bar1(); s += 0.05) {
      const double w = W(m, cfg.rho, cfg.p, x, s);
      const double v = V(m, cfg, x, s);
      CHECK(sw.c_low * w <= v * (1 + 1e-12));
      CHECK(v <= sw.c_high * w * (1 + 1e-12));
    }
  }
}

TEST_CASE("selected parameters pass the drift certificate for both laws") {
  DriftGrid grid;
  grid.x_max = 30;
  grid.s_points = 400;
  for (const auto& p : {testing::linear_params(), testing::monod_params()}) {
    const Model m(p);
    const auto v = validate(p);
    const auto cfg = select_parameters(m, 2.0, 0.5 * *v.p_max, grid);
    CHECK(cfg.theta > theta_threshold(m, cfg.p));
    CHECK(cfg.eta > m.D());
    const auto cert = verify_drift(m, cfg, grid);
    CHECK(cert.passed);
    CHECK(cert.worst_margin <= 0.0);
    CHECK(cert.boundary.x1_sbar_negative);
  }
}

TEST_CASE("an eta that is too large fails at x = 1 next to s_bar1") {
  const Model m(testing::linear_params());
  DriftGrid grid;
  grid.x_max = 30;
  grid.s_points = 400;
  auto cfg = select_parameters(m, 2.0, 0.0625, grid);
  cfg.eta = 50.0;
  const auto cert = verify_drift(m, cfg, grid, true);
  CHECK_FALSE(cert.passed);
  CHECK(cert.worst.x == 1);
  CHECK(cert.worst.location == "s->s_bar1");
  CHECK(cert.worst.s == doctest::Approx(m.s_bar1()));
}

TEST_CASE("exponent outside the admissible range is rejected") {
  const Model m(testing::linear_params());
  CHECK_THROWS_AS(select_parameters(m, 2.0, 0.2), ConfigError);
  const Model flat(testing::linear_params(1.0));
  CHECK_THROWS_AS(select_parameters(flat, 2.0, 0.05), ConfigError);
}

TEST_CASE("exponential-moment function: case split matches the generator") {
  const Model m(testing::linear_params());
  const auto cert = g_construct(m);
  CHECK(cert.passed);
  CHECK(cert.C > 0.0);
  CHECK(cert.constants.delta1 == 1.0);
  const auto g = g_function(cert.constants);
  for (std::int64_t x : {1, 2, 3, 6}) {
    for (double s : {m.s_bar1() - cert.constants.eps, 0.7, 1.5, 4.0}) {
      const double generic = generator_apply(m, g, x, s) / g.value(x, s) + m.D();
      CHECK(g_rate(m, cert.constants, x, s) == doctest::Approx(generic).epsilon(1e-10));
      CHECK(g_rate(m, cert.constants, x, s) + cert.C <= 1e-12);
    }
  }
  CHECK(cert.bound(1.0) == doctest::Approx(cert.A * std::exp(cert.constants.beta)));
}

TEST_CASE("zeta_t grows at rate mu(s_bar1) - D") {
  const Model m(testing::linear_params());
  DriftCertificate c;
  c.config.zeta = 2.0;
  c.config.eta = 3.0;
  CHECK(c.zeta_t(m, 0.0) == doctest::Approx(1.0));
  CHECK(c.zeta_t(m, 2.0) == doctest::Approx(std::exp(1.0)));
}
