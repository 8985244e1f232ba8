#ifndef CHEMOSTAT_MODEL_HPP
#define CHEMOSTAT_MODEL_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace chemostat {

// Specific growth rate of the bacteria as a function of substrate concentration.
// Invariants: eval(0) = 0, eval strictly increasing, deriv >= 0.
class GrowthLaw {
 public:
  enum class Kind { Linear, Monod, Custom };

  static GrowthLaw linear(double c);
  static GrowthLaw monod(double m, double K);
  // `slope` is either the exact derivative or, when `slope_is_lipschitz`,
  // a local Lipschitz constant function (used in place of the derivative).
  static GrowthLaw custom(std::string name, std::function<double(double)> eval,
                          std::function<double(double)> slope,
                          bool slope_is_lipschitz = false);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double c() const noexcept { return a_; }
  double m() const noexcept { return a_; }
  double K() const noexcept { return b_; }
  bool slope_is_lipschitz() const noexcept { return lipschitz_; }

  // Checked evaluation; throws DomainError for s < 0.
  double eval(double s) const;
  double deriv(double s) const;

  // Unchecked evaluation for integrator stages (analytic extension for s < 0).
  double rate(double s) const noexcept {
    switch (kind_) {
      case Kind::Linear: return a_ * s;
      case Kind::Monod: return a_ * s / (b_ + s);
      case Kind::Custom: break;
    }
    return custom_eval_(s < 0.0 ? 0.0 : s);
  }
  double slope(double s) const noexcept {
    switch (kind_) {
      case Kind::Linear: return a_;
      case Kind::Monod: return a_ * b_ / ((b_ + s) * (b_ + s));
      case Kind::Custom: break;
    }
    return custom_slope_(s < 0.0 ? 0.0 : s);
  }

 private:
  Kind kind_ = Kind::Linear;
  std::string name_;
  double a_ = 0.0;
  double b_ = 0.0;
  bool lipschitz_ = false;
  std::function<double(double)> custom_eval_;
  std::function<double(double)> custom_slope_;
};

struct ChemostatParams {
  double D = 1.0;     // dilution rate
  double s_in = 1.0;  // input substrate concentration
  double k = 1.0;     // inverse yield
  GrowthLaw growth = GrowthLaw::linear(1.0);
};

// x = 0 marks the absorbed (extinct) component.
struct HybridState {
  std::int64_t x = 0;
  double s = 0.0;
};

double mu_eval(const ChemostatParams& params, double s);

struct ValidationReport {
  bool positive_parameters = false;
  bool growth_zero_at_origin = false;
  bool growth_increasing = false;
  bool derivative_nonnegative = false;
  bool assumption_holds = false;  // conjunction of the growth-law checks
  double s_bar1 = 0.0;
  double mu_s_bar1 = 0.0;
  double dmu_s_bar1 = 0.0;
  bool persistence = false;  // mu(s_bar1) > D
  std::optional<double> p_max;  // admissible exponent interval is (0, p_max)
  std::vector<std::string> failures;

  bool ok() const noexcept { return assumption_holds && persistence; }
};

// Sampling-based check of the standing assumptions; never throws.
ValidationReport validate(const ChemostatParams& params);

// Throws ConfigError if any rate parameter is non-positive or non-finite.
void require_positive(const ChemostatParams& params);

}  // namespace chemostat

#endif
