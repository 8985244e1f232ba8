#ifndef CHEMOSTAT_FLOW_HPP
#define CHEMOSTAT_FLOW_HPP

#include <cstdint>
#include <vector>

#include "chemostat/model.hpp"
#include "chemostat/ode.hpp"

namespace chemostat {

// Root of D (s_in - s) = k mu(s) ell on (0, s_in); residual <= cfg.root_tol.
double equilibrium(const ChemostatParams& params, std::int64_t ell,
                   const FlowSolverConfig& cfg = {});

// s_bar_ell for ell = 1..L, strictly decreasing.
class EquilibriumTable {
 public:
  EquilibriumTable() = default;
  EquilibriumTable(const ChemostatParams& params, std::int64_t L, const FlowSolverConfig& cfg = {});
  std::int64_t size() const noexcept { return static_cast<std::int64_t>(values_.size()); }
  double at(std::int64_t ell) const;  // 1-based
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

// Parameters bundled with solver settings and cached equilibria.
// Immutable after construction.
class Model {
 public:
  explicit Model(ChemostatParams params, FlowSolverConfig cfg = {}, std::int64_t table_size = 64);

  const ChemostatParams& params() const noexcept { return params_; }
  const FlowSolverConfig& solver() const noexcept { return cfg_; }
  double D() const noexcept { return params_.D; }
  double s_in() const noexcept { return params_.s_in; }
  double k() const noexcept { return params_.k; }
  double mu(double s) const noexcept { return params_.growth.rate(s); }
  double dmu(double s) const noexcept { return params_.growth.slope(s); }

  double s_bar(std::int64_t ell) const;  // ell >= 1; ell = 0 gives s_in
  double s_bar1() const noexcept { return table_.at(1); }
  double mu_bar1() const noexcept { return mu_bar1_; }
  const EquilibriumTable& table() const noexcept { return table_; }

  // Substrate drift with ell bacteria.
  double drift(std::int64_t ell, double s) const noexcept {
    return params_.D * (params_.s_in - s) - params_.k * mu(s) * static_cast<double>(ell);
  }

 private:
  ChemostatParams params_;
  FlowSolverConfig cfg_;
  EquilibriumTable table_;
  double mu_bar1_ = 0.0;
};

// Substrate after time t >= 0 from s0 >= 0 with ell bacteria held fixed.
double flow(const Model& model, std::int64_t ell, double s0, double t);

struct FlowWithGrowth {
  double s;
  double mu_integral;  // int_0^t mu(flow(ell, s0, u)) du
};
FlowWithGrowth flow_with_growth(const Model& model, std::int64_t ell, double s0, double t);

// Time for the substrate to travel from s0 to s; a tagged +infinity when unreachable.
class ReachTime {
 public:
  static ReachTime finite(double t) { return ReachTime(t, true, false); }
  static ReachTime unreachable() { return ReachTime(0.0, false, false); }
  static ReachTime near_equilibrium() { return ReachTime(0.0, false, true); }

  bool is_finite() const noexcept { return finite_; }
  bool is_near_equilibrium() const noexcept { return near_; }
  double time() const;  // throws PreconditionError when infinite
  double or_infinity() const noexcept;

 private:
  ReachTime(double t, bool f, bool n) : t_(t), finite_(f), near_(n) {}
  double t_;
  bool finite_;
  bool near_;
};

ReachTime time_to_reach(const Model& model, std::int64_t ell, double s0, double s);

// Starting substrate s0 with flow(ell, s0, t) = s; 0 when s < flow(ell, 0, t).
double initial_for(const Model& model, std::int64_t ell, double s, double t);

// Checks time_to_reach(s0,s2) = time_to_reach(s0,s1) + time_to_reach(s1,s2)
// within 10 root_tol. Requires s0, s1, s2 monotone and on one side of s_bar_ell.
bool phit_additivity_check(const Model& model, std::int64_t ell, double s0, double s1, double s2);

}  // namespace chemostat

#endif
