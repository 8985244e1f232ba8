#ifndef CHEMOSTAT_FLOW_LEMMAS_HPP
#define CHEMOSTAT_FLOW_LEMMAS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "chemostat/flow.hpp"

namespace chemostat::testing {

struct LemmaTally {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::string first_failure;

  void record(bool ok, const std::string& detail) {
    ++cases;
    if (!ok) {
      if (failures == 0) first_failure = detail;
      ++failures;
    }
  }
};

inline bool leq(double a, double b, double rel = 1e-9, double abs = 1e-10) {
  return a <= b + rel * std::max(std::abs(a), std::abs(b)) + abs;
}

inline std::string at(std::int64_t ell, double a, double b, double c = NAN) {
  std::string s = "ell=" + std::to_string(ell) + " a=" + std::to_string(a) + " b=" + std::to_string(b);
  if (!std::isnan(c)) s += " c=" + std::to_string(c);
  return s;
}

// Randomized monotonicity, ordering, trap, additivity and two-sided bound
// properties of the substrate flow and its inverses.
inline std::vector<LemmaTally> run_flow_lemmas(const Model& m, int cases, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(gen); };
  auto pick_ell = [&](std::int64_t hi) {
    return static_cast<std::int64_t>(1 + gen() % static_cast<std::uint64_t>(hi));
  };
  const double D = m.D(), s_in = m.s_in(), k = m.k(), sb1 = m.s_bar1();
  // Upper bound on the relaxation rate D + k mu' ell (mu' is largest at 0 for both laws).
  auto relax = [&](std::int64_t ell) { return D + k * m.dmu(0.0) * static_cast<double>(ell); };

  LemmaTally mono{"flow monotone in ell and in s0"};
  LemmaTally decr{"s_bar strictly decreasing"};
  LemmaTally trap{"trap property"};
  LemmaTally add{"phi_tilde additivity"};
  LemmaTally tbounds{"phi_tilde two-sided bounds"};
  LemmaTally sbounds{"phi_inverse displacement bounds"};

  for (std::int64_t ell = 1; ell < 50; ++ell) {
    decr.record(m.s_bar(ell + 1) < m.s_bar(ell), at(ell, m.s_bar(ell), m.s_bar(ell + 1)));
  }

  for (int i = 0; i < cases; ++i) {
    {
      const std::int64_t a = pick_ell(20);
      const std::int64_t b = a + pick_ell(20);
      double s = uniform(0.0, 2.0 * s_in), st = uniform(0.0, 2.0 * s_in);
      if (s > st) std::swap(s, st);
      // Keep rate * t moderate so strict orderings stay above solver resolution.
      const double t = uniform(0.01, 1.0) * std::min(5.0, 8.0 / relax(b));
      const bool ok = flow(m, a, s, t) > flow(m, b, s, t) &&
                      (st == s || flow(m, a, s, t) < flow(m, a, st, t));
      mono.record(ok, at(a, s, st, t));
    }
    {
      const std::int64_t ell = pick_ell(30);
      const double sb = m.s_bar(ell);
      const double s = uniform(0.0, 2.0 * s_in);
      const double horizon = std::min(3.0, 8.0 / relax(ell));
      const double t1 = uniform(0.0, horizon), t2 = t1 + uniform(1e-3, horizon);
      const double f1 = flow(m, ell, s, t1), f2 = flow(m, ell, s, t2);
      bool ok = std::abs(f2 - sb) <= std::abs(s - sb) + 1e-12;
      if (s < sb) ok = ok && s <= f1 + 1e-12 && f1 < f2 && f2 < sb;
      if (s > sb) ok = ok && s >= f1 - 1e-12 && f1 > f2 && f2 > sb;
      trap.record(ok, at(ell, s, t1, t2));
    }
    {
      const std::int64_t ell = pick_ell(10);
      const double sb = m.s_bar(ell);
      const bool below = unit(gen) < 0.5;
      std::vector<double> v(3);
      for (double& x : v) x = below ? uniform(0.0, sb * 0.999) : uniform(sb * 1.001, 2.0 * s_in);
      std::sort(v.begin(), v.end());
      if (!below) std::reverse(v.begin(), v.end());
      const double t02 = time_to_reach(m, ell, v[0], v[2]).time();
      const double t01 = time_to_reach(m, ell, v[0], v[1]).time();
      const double t12 = time_to_reach(m, ell, v[1], v[2]).time();
      add.record(std::abs(t02 - t01 - t12) <= 1e-9, at(ell, v[0], v[1], v[2]));
    }
    {
      const std::int64_t ell = pick_ell(10);
      const double sb = m.s_bar(ell);
      double s0, s;
      do {
        s0 = uniform(0.0, sb1);
        s = uniform(0.0, sb1);
      } while (!(((s0 <= s && s < sb) || (s0 >= s && s > sb)) && std::abs(s - sb) > 1e-6));
      const double tt = time_to_reach(m, ell, s0, s).time();
      const double lo = std::abs(s - s0) / std::max(D * s_in, k * m.mu(sb1) * ell);
      const double hi = std::abs(s - s0) / (D * std::abs(sb - s));
      tbounds.record(leq(lo, tt) && leq(tt, hi), at(ell, s0, s, tt));
    }
    {
      const std::int64_t ell = pick_ell(10);
      const double sb = m.s_bar(ell);
      const double s = uniform(0.0, sb1);
      const double eps = uniform(0.0, 1.0);
      const double s0 = initial_for(m, ell, s, eps);
      bool ok = true;
      if (s0 <= sb1) {
        ok = ok && leq(std::abs(s - s0), eps * std::max(D * s_in, k * m.mu(sb1) * ell));
      }
      if (s0 > 0.0) ok = ok && leq(D * std::abs(s - sb) * eps, std::abs(s - s0));
      sbounds.record(ok, at(ell, s, eps, s0));
    }
  }
  return {mono, decr, trap, add, tbounds, sbounds};
}

}  // namespace chemostat::testing

#endif
