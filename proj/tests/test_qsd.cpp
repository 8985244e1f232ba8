#include <doctest.h>

#include <cmath>
#include <numeric>

#include "chemostat/errors.hpp"
#include "chemostat/qsd.hpp"
#include "test_support.hpp"

using namespace chemostat;

namespace {

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("conditioned law at t = 0 is the initial point mass") {
  const Model m(testing::linear_params());
  const auto r = estimate_qsd_naive(m, 2, 0.25, 0.0, 1000, 1);
  CHECK(r.survival.p() == 1.0);
  const auto& h = r.qsd.histogram;
  CHECK(h.mass[h.binning.index(2, 0.25)] == doctest::Approx(1.0));
  CHECK(total(h.mass) == doctest::Approx(1.0));
  CHECK_FALSE(r.qsd.boundary_flag);
  CHECK(estimate_qsd_naive(m, 2, 0.0, 0.0, 1000, 1).qsd.boundary_flag);
}

TEST_CASE("naive estimator preconditions and power") {
  const Model m(testing::linear_params());
  CHECK_THROWS_AS(estimate_qsd_naive(m, 2, 0.25, 1.0, 999, 1), PreconditionError);
  CHECK_THROWS_AS(estimate_qsd_naive(m, 0, 0.25, 1.0, 1000, 1), PreconditionError);
  CHECK_THROWS_AS(estimate_qsd_naive(m, 1, 0.01, 60.0, 1000, 1), PowerError);
}

TEST_CASE("naive estimator keeps only survivors with x >= 1") {
  const Model m(testing::linear_params());
  const auto r = estimate_qsd_naive(m, 2, 0.25, 2.0, 2000, 9, 2);
  CHECK(r.survivors.size() == r.survival.hits);
  CHECK(r.survival.n == 2000);
  for (const auto& st : r.survivors) CHECK(st.x >= 1);
  CHECK(total(r.qsd.histogram.mass) == doctest::Approx(1.0));
  const auto again = estimate_qsd_naive(m, 2, 0.25, 2.0, 2000, 9, 1);
  CHECK(again.qsd.histogram.mass == r.qsd.histogram.mass);
}

TEST_CASE("Fleming-Viot system: preconditions") {
  const Model m(testing::linear_params());
  CHECK_THROWS_AS(evolve_fleming_viot(m, ParticleEnsemble::concentrated({2, 0.25}, 99), 1.0, 1),
                  PreconditionError);
  CHECK_THROWS_AS(evolve_fleming_viot(m, ParticleEnsemble::concentrated({2, 0.25}, 100), 0.0, 1),
                  PreconditionError);
  FvOptions bad;
  bad.record_times = {2.0};
  CHECK_THROWS_AS(
      evolve_fleming_viot(m, ParticleEnsemble::concentrated({2, 0.25}, 100), 1.0, 1, bad),
      PreconditionError);
}

TEST_CASE("Fleming-Viot system: invariants and reproducibility") {
  const Model m(testing::linear_params());
  FvOptions opt;
  opt.record_times = {1.0, 3.0};
  const auto r = evolve_fleming_viot(m, ParticleEnsemble::concentrated({2, 0.25}, 300), 6.0, 4, opt);
  CHECK(r.ensemble.time == 6.0);
  CHECK(r.ensemble.particles.size() == 300);
  for (const auto& p : r.ensemble.particles) {
    CHECK(p.x >= 1);
    CHECK(p.s >= 0.0);
  }
  REQUIRE(r.recorded.size() == 2);
  for (const auto& snap : r.recorded) CHECK(snap.size() == 300);
  CHECK(total(r.qsd.histogram.mass) == doctest::Approx(1.0));
  CHECK(r.lambda.method == LambdaMethod::FlemingViotKillRate);
  CHECK(r.lambda.ci_low <= r.lambda.lambda_hat);
  CHECK(r.lambda.lambda_hat <= r.lambda.ci_high);
  CHECK(r.lambda.lambda_hat > 0.0);
  CHECK(r.ensemble.resample_count > 0);

  const auto again =
      evolve_fleming_viot(m, ParticleEnsemble::concentrated({2, 0.25}, 300), 6.0, 4, opt);
  CHECK(again.lambda.lambda_hat == r.lambda.lambda_hat);
  CHECK(again.candidates == r.candidates);
  CHECK(again.qsd.histogram.mass == r.qsd.histogram.mass);
}

TEST_CASE("sampling from a histogram stays in charged cells") {
  const Binning b(3, 0.5, 5);
  std::vector<HybridState> pts{{1, 0.05}, {1, 0.05}, {2, 0.33}, {4, 0.2}};
  const auto h = make_histogram(b, pts);
  const auto draws = sample_from_histogram(h, 4000, 11);
  REQUIRE(draws.size() == 4000);
  std::size_t first = 0;
  for (const auto& d : draws) {
    const auto cell = b.index(d.x, d.s);
    CHECK(h.mass[cell] > 0.0);
    if (cell == b.index(1, 0.05)) ++first;
  }
  CHECK(std::abs(first / 4000.0 - 0.5) < 4.0 * std::sqrt(0.25 / 4000.0));
  Histogram empty{b, std::vector<double>(b.size(), 0.0), std::vector<double>(b.size(), 0.0), 0.0};
  CHECK_THROWS_AS(sample_from_histogram(empty, 3, 1), PreconditionError);
}

TEST_CASE("survival-regression rate: preconditions") {
  const Model m(testing::linear_params());
  const std::vector<double> grid{1, 2, 3, 4, 5};
  CHECK_THROWS_AS(estimate_lambda_survival(m, 2, 0.25, {1, 2, 3}, 10000, 1), PreconditionError);
  CHECK_THROWS_AS(estimate_lambda_survival(m, 2, 0.25, grid, 9999, 1), PreconditionError);
  CHECK_THROWS_AS(estimate_lambda_survival(m, 2, 0.25, {1, 3, 2, 4}, 10000, 1), PreconditionError);
  CHECK_THROWS_AS(estimate_lambda_survival(m, 2, 0.25, grid, 10000, 1, 1, 19), PreconditionError);
}

TEST_CASE("h estimator preconditions and power") {
  const Model m(testing::linear_params());
  LambdaEstimate lam;
  lam.lambda_hat = 0.3;
  CHECK_THROWS_AS(estimate_h(m, 1, 0.25, 0.0, 1000, lam, 1), PreconditionError);
  CHECK_THROWS_AS(estimate_h(m, 1, 0.25, 5.0, 999, lam, 1), PreconditionError);
  CHECK_THROWS_AS(estimate_h(m, 1, 0.01, 60.0, 1000, lam, 1), PowerError);
  const auto h0 = estimate_h(m, 0, 0.25, 5.0, 1000, lam, 1);
  CHECK(h0.value == 0.0);
}

TEST_CASE("mass ratio: identical points give ratio one, t = 0 gives population ratio") {
  const Model m(testing::linear_params());
  const auto same = mass_ratio_diagnostic(m, CompactSpec{1, 0.3, 0.3}, {0.0, 0.5, 1.0}, 200, 3);
  for (double r : same.max_ratio) CHECK(r == doctest::Approx(1.0));

  const auto spread = mass_ratio_diagnostic(m, CompactSpec{3, 0.2, 0.4}, {0.0, 0.5}, 200, 3);
  CHECK(spread.points.size() == 5);
  CHECK(spread.max_ratio[0] == doctest::Approx(3.0));
  for (std::size_t p = 0; p < spread.points.size(); ++p) {
    CHECK(spread.mass[p][0].mean == doctest::Approx(static_cast<double>(spread.points[p].x)));
  }
  CHECK_THROWS_AS(mass_ratio_diagnostic(m, CompactSpec{3, 0.2, 0.4}, {0.5}, 200, 3),
                  PreconditionError);
  CHECK_THROWS_AS(mass_ratio_diagnostic(m, CompactSpec{3, 0.2, 0.4}, {0.5, 0.2}, 200, 3),
                  PreconditionError);
  CHECK_THROWS_AS(mass_ratio_diagnostic(m, CompactSpec{3, 0.2, 0.4}, {0.0, 1.0}, 99, 3),
                  PreconditionError);
}

TEST_CASE("conditioned laws from one initial state are indistinguishable") {
  const Model m(testing::linear_params());
  const auto rep = yaglom_distance(m, {{2, 0.25}, {2, 0.25}}, {1.0, 2.0}, 500, 21);
  REQUIRE(rep.pairs.size() == 1);
  REQUIRE(rep.pairs[0].tv.size() == 2);
  for (const auto& tv : rep.pairs[0].tv) {
    CHECK(tv.consistent_with_zero());
    CHECK(tv.ci_low <= tv.value);
    CHECK(tv.value <= tv.ci_high);
  }
  CHECK_THROWS_AS(yaglom_distance(m, {{2, 0.25}}, {1.0}, 500, 21), PreconditionError);
  CHECK_THROWS_AS(yaglom_distance(m, {{2, 0.25}, {1, 0.1}}, {2.0, 1.0}, 500, 21),
                  PreconditionError);
}
