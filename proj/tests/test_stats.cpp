#include <doctest.h>

#include <cmath>

#include "chemostat/errors.hpp"
#include "chemostat/rng.hpp"
#include "chemostat/stats.hpp"

using namespace chemostat;

TEST_CASE("mean estimate and proportion standard errors") {
  const auto m = mean_estimate({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(m.n == 4);
  const Proportion p{25, 100};
  CHECK(p.p() == 0.25);
  CHECK(p.stderr_() == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
}

TEST_CASE("normal and Student quantiles") {
  CHECK(z_for(0.95) == doctest::Approx(1.959963985).epsilon(1e-9));
  CHECK(z_for(0.99) == doctest::Approx(2.575829304).epsilon(1e-9));
  CHECK(t_for(0.95, 9) == doctest::Approx(2.262157163).epsilon(1e-9));
}

TEST_CASE("weighted fit recovers an exact line") {
  const auto f = weighted_fit({0, 1, 2, 3}, {1, 3, 5, 7}, {1, 1, 1, 1});
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.se_slope == doctest::Approx(std::sqrt(1.0 / 5.0)));
  CHECK_THROWS(weighted_fit({1, 1}, {1, 2}, {1, 1}));
}

TEST_CASE("KS distance of a uniform sample is small") {
  RngStream r(1, 0);
  std::vector<double> v(10000);
  for (double& x : v) x = r.uniform();
  CHECK(ks_distance(v, [](double x) { return std::clamp(x, 0.0, 1.0); }) < 1.63 / std::sqrt(1e4));
}

TEST_CASE("binning maps states to cells and back") {
  const Binning b(4, 0.5, 10);
  CHECK(b.size() == 5 * 11);
  const auto c = b.index(3, 0.26);
  CHECK(b.cell_x(c) == 3);
  CHECK(b.cell_s_lo(c) == doctest::Approx(0.25));
  CHECK(b.cell_s_hi(c) == doctest::Approx(0.30));
  CHECK_FALSE(b.is_overflow(c));
  const auto o = b.index(9, 0.1);
  CHECK(b.cell_x(o) == 5);
  CHECK(b.is_overflow(o));
  const auto so = b.index(1, 0.7);
  CHECK(std::isinf(b.cell_s_hi(so)));
  std::vector<HybridState> samples;
  for (int i = 1; i <= 1000; ++i) samples.push_back({1 + i % 7, 0.0005 * i});
  const auto fitted = Binning::from_samples(samples, 0.5, 64);
  CHECK(fitted.x_max() == 7);
}

TEST_CASE("histograms sum to one and TV distance is a metric on them") {
  const Binning b(3, 1.0, 4);
  std::vector<HybridState> a{{1, 0.1}, {1, 0.1}, {2, 0.6}, {3, 0.9}};
  const auto h = make_histogram(b, a);
  double sum = 0.0;
  for (double m : h.mass) sum += m;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(h.mass[b.index(1, 0.1)] == doctest::Approx(0.5));
  CHECK(tv_distance(h.mass, h.mass) == 0.0);
  std::vector<double> p{1, 0, 0}, q{0, 0, 1};
  CHECK(tv_distance(p, q) == doctest::Approx(1.0));
  const auto back = histogram_from_cells(b, to_cells(b, a));
  CHECK(back.mass == h.mass);
}

TEST_CASE("TV bootstrap interval contains the plug-in value and detects equal laws") {
  RngStream r(3, 0);
  std::vector<std::uint32_t> a(5000), b(5000), c(5000);
  for (auto& v : a) v = static_cast<std::uint32_t>(r.below(20));
  for (auto& v : b) v = static_cast<std::uint32_t>(r.below(20));
  for (auto& v : c) v = static_cast<std::uint32_t>(r.below(10));
  const auto same = tv_bootstrap(a, b, 20, 1);
  CHECK(same.ci_low <= same.value);
  CHECK(same.value <= same.ci_high);
  CHECK(same.consistent_with_zero());
  const auto diff = tv_bootstrap(a, c, 20, 2);
  CHECK(diff.value == doctest::Approx(0.5).epsilon(0.05));
  CHECK_FALSE(diff.consistent_with_zero());
  std::vector<double> ref(20, 0.05);
  const auto vs_ref = tv_bootstrap_reference(a, ref, 3);
  CHECK(vs_ref.consistent_with_zero());
  CHECK_THROWS_AS(tv_bootstrap({}, b, 20, 1), PowerError);
}
