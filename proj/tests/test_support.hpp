#ifndef CHEMOSTAT_TEST_SUPPORT_HPP
#define CHEMOSTAT_TEST_SUPPORT_HPP

#include <cmath>

#include "chemostat/flow.hpp"

namespace chemostat::testing {

// mu(s) = 3 s, D = 1, s_in = 2, k = 1.
inline ChemostatParams linear_params(double c = 3.0) {
  return ChemostatParams{1.0, 2.0, 1.0, GrowthLaw::linear(c)};
}

// mu(s) = 5 s / (1 + s), D = 1, s_in = 2, k = 1.
inline ChemostatParams monod_params() {
  return ChemostatParams{1.0, 2.0, 1.0, GrowthLaw::monod(5.0, 1.0)};
}

// Linear law closed forms: s' = D s_in - (D + k c ell) s.
struct LinearOracle {
  double D = 1.0, s_in = 2.0, k = 1.0, c = 3.0;

  double rate(std::int64_t ell) const { return D + k * c * static_cast<double>(ell); }
  double s_bar(std::int64_t ell) const { return D * s_in / rate(ell); }
  double flow(std::int64_t ell, double s0, double t) const {
    return s_bar(ell) + (s0 - s_bar(ell)) * std::exp(-rate(ell) * t);
  }
  double mu_integral(std::int64_t ell, double s0, double t) const {
    const double r = rate(ell);
    return c * (s_bar(ell) * t + (s0 - s_bar(ell)) * (1.0 - std::exp(-r * t)) / r);
  }
  double time_to_reach(std::int64_t ell, double s0, double s) const {
    return std::log((s0 - s_bar(ell)) / (s - s_bar(ell))) / rate(ell);
  }
  double initial_for(std::int64_t ell, double s, double t) const {
    return std::max(0.0, s_bar(ell) + (s - s_bar(ell)) * std::exp(rate(ell) * t));
  }
};

}  // namespace chemostat::testing

#endif
