#include "chemostat/model.hpp"

#include <cmath>
#include <utility>

#include "chemostat/errors.hpp"
#include "chemostat/flow.hpp"

namespace chemostat {

GrowthLaw GrowthLaw::linear(double c) {
  GrowthLaw g;
  g.kind_ = Kind::Linear;
  g.name_ = "Linear";
  g.a_ = c;
  return g;
}

GrowthLaw GrowthLaw::monod(double m, double K) {
  GrowthLaw g;
  g.kind_ = Kind::Monod;
  g.name_ = "Monod";
  g.a_ = m;
  g.b_ = K;
  return g;
}

GrowthLaw GrowthLaw::custom(std::string name, std::function<double(double)> eval,
                            std::function<double(double)> slope,
                            bool slope_is_lipschitz) {
  if (!eval || !slope) {
    throw ConfigError("custom growth law '" + name +
                      "' requires both an evaluation and a slope function");
  }
  GrowthLaw g;
  g.kind_ = Kind::Custom;
  g.name_ = std::move(name);
  g.custom_eval_ = std::move(eval);
  g.custom_slope_ = std::move(slope);
  g.lipschitz_ = slope_is_lipschitz;
  return g;
}

double GrowthLaw::eval(double s) const {
  if (!(s >= 0.0)) throw DomainError("growth rate evaluated at negative substrate");
  return rate(s);
}

double GrowthLaw::deriv(double s) const {
  if (!(s >= 0.0)) throw DomainError("growth slope evaluated at negative substrate");
  return slope(s);
}

double mu_eval(const ChemostatParams& params, double s) { return params.growth.eval(s); }

void require_positive(const ChemostatParams& params) {
  auto check = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("parameter '") + key + "' must be positive and finite");
    }
  };
  check(params.D, "D");
  check(params.s_in, "s_in");
  check(params.k, "k");
  switch (params.growth.kind()) {
    case GrowthLaw::Kind::Linear: check(params.growth.c(), "growth.c"); break;
    case GrowthLaw::Kind::Monod:
      check(params.growth.m(), "growth.m");
      check(params.growth.K(), "growth.K");
      break;
    case GrowthLaw::Kind::Custom: break;
  }
}

ValidationReport validate(const ChemostatParams& params) {
  ValidationReport r;
  try {
    require_positive(params);
    r.positive_parameters = true;
  } catch (const ConfigError& e) {
    r.failures.emplace_back(e.what());
    return r;
  }
  const GrowthLaw& g = params.growth;

  r.growth_zero_at_origin = g.eval(0.0) == 0.0;
  if (!r.growth_zero_at_origin) r.failures.emplace_back("growth rate at zero substrate is not 0");

  // Log-spaced grid on [1e-9, 10 s_in] plus the origin.
  constexpr int n = 400;
  const double lo = 1e-9, hi = 10.0 * params.s_in;
  double prev = g.eval(0.0);
  r.growth_increasing = true;
  r.derivative_nonnegative = g.deriv(0.0) >= 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    const double v = g.eval(s);
    if (!(v > prev)) r.growth_increasing = false;
    if (!(g.deriv(s) >= 0.0)) r.derivative_nonnegative = false;
    prev = v;
  }
  if (!r.growth_increasing) r.failures.emplace_back("growth rate is not strictly increasing on the sample grid");
  if (!r.derivative_nonnegative) r.failures.emplace_back("growth slope is negative somewhere on the sample grid");
  r.assumption_holds = r.growth_zero_at_origin && r.growth_increasing && r.derivative_nonnegative;
  if (!r.assumption_holds) return r;

  r.s_bar1 = equilibrium(params, 1);
  r.mu_s_bar1 = g.eval(r.s_bar1);
  r.dmu_s_bar1 = g.deriv(r.s_bar1);
  r.persistence = r.mu_s_bar1 > params.D;
  if (r.persistence) {
    r.p_max = (r.mu_s_bar1 - params.D) / (params.D + params.k * r.dmu_s_bar1);
  } else {
    r.failures.emplace_back("growth rate at the one-bacterium equilibrium does not exceed D");
  }
  return r;
}

}  // namespace chemostat
