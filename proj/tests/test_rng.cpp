#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "chemostat/parallel.hpp"
#include "chemostat/rng.hpp"

using namespace chemostat;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("a stream is a pure function of seed, id and position") {
  RngStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
  }
  CHECK(a.draws() == 100);
}

TEST_CASE("uniform draws stay in the open unit interval with the right moments") {
  RngStream r(1, 0);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sq += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(5e-3));
  CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12).epsilon(1e-2));
}

TEST_CASE("exponential and bounded integer draws") {
  RngStream r(2, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += r.exponential(4.0);
  CHECK(sum / n == doctest::Approx(0.25).epsilon(1e-2));
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("substream tags separate purposes") {
  std::set<std::uint64_t> ids;
  for (std::uint64_t base = 0; base < 50; ++base) {
    for (std::uint64_t tag = 1; tag < 5; ++tag) ids.insert(substream(base, tag));
  }
  CHECK(ids.size() == 200);
}

TEST_CASE("parallel_for results do not depend on the worker count") {
  auto fill = [](unsigned threads) {
    std::vector<double> out(1000);
    parallel_for(out.size(), threads, [&](std::size_t i) {
      RngStream r(99, i);
      out[i] = r.uniform();
    });
    return out;
  };
  CHECK(fill(1) == fill(4));
  CHECK_THROWS(parallel_for(10, 2, [](std::size_t i) {
    if (i == 5) throw std::runtime_error("boom");
  }));
  CHECK(resolve_threads(3) == 3);
}
