#ifndef CHEMOSTAT_ODE_HPP
#define CHEMOSTAT_ODE_HPP

#include <cstddef>
#include <cstdint>

#include "chemostat/model.hpp"

namespace chemostat {

struct FlowSolverConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double max_step = 0.5;
  double root_tol = 1e-11;
  std::size_t max_steps = 10'000'000;
};

// Throws ConfigError unless every field is strictly positive.
void require_valid(const FlowSolverConfig& cfg);

// Embedded Dormand-Prince 5(4) integrator for the substrate equation with a
// frozen population `ell` (ell = 0 allowed: pure inflow after extinction).
// Alongside s it integrates the cumulative growth rate m(t) = int mu(s(u)) du.
class SubstrateIntegrator {
 public:
  SubstrateIntegrator(const ChemostatParams& params, const FlowSolverConfig& cfg);

  void reset(std::int64_t ell, double s);
  void set_population(std::int64_t ell) noexcept { ell_ = ell; fsal_valid_ = false; }
  void set_substrate(double s) noexcept { s_ = s; fsal_valid_ = false; }

  // Advances by dt (negative dt integrates backward in time).
  void advance(double dt);

  double s() const noexcept { return s_; }
  std::int64_t population() const noexcept { return ell_; }
  double mu_integral() const noexcept { return m_; }
  void clear_mu_integral() noexcept { m_ = 0.0; }
  std::size_t steps() const noexcept { return steps_; }

  double drift(double s) const noexcept {
    return p_.D * (p_.s_in - s) - p_.k * p_.growth.rate(s) * static_cast<double>(ell_);
  }

 private:
  double initial_step(double s) const noexcept;

  const ChemostatParams& p_;
  FlowSolverConfig cfg_;
  std::int64_t ell_ = 1;
  double s_ = 0.0;
  double m_ = 0.0;
  double h_hint_ = 0.0;
  double fsal_f_ = 0.0;
  double fsal_mu_ = 0.0;
  bool fsal_valid_ = false;
  int fsal_dir_ = 0;
  std::size_t steps_ = 0;
};

}  // namespace chemostat

#endif
