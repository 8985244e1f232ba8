#ifndef CHEMOSTAT_BOUNDS_HPP
#define CHEMOSTAT_BOUNDS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chemostat/flow.hpp"
#include "chemostat/lyapunov.hpp"
#include "chemostat/stats.hpp"

namespace chemostat {

// Linear birth-death process with per-capita rates `birth` and `death`,
// started from n individuals.
struct BirthDeathSpec {
  double birth = 1.0;
  double death = 1.0;
  std::int64_t n = 1;
};

// Depth cap of the nested integrals.
inline constexpr std::int64_t kMaxNestingDepth = 8;

// P(the first ell events are deaths and all occur by t), 0 <= ell <= n.
double p_death(const BirthDeathSpec& spec, std::int64_t ell, double t);
// P(the first ell events are births and all occur by t), ell >= 0.
double p_birth(const BirthDeathSpec& spec, std::int64_t ell, double t);

// Monte Carlo frequency of the same events.
Proportion birth_death_mc(const BirthDeathSpec& spec, bool deaths, std::int64_t ell, double t,
                          std::size_t n_paths, std::uint64_t seed, unsigned threads = 1);

// ---------------------------------------------------------------------------

struct SmallSetConstant {
  double tau0 = 0.0;
  double s0 = 0.0;
  double s1 = 0.0;
  double c0 = 0.0;
  double growth_integral = 0.0;  // int_0^tau0 mu(flow(1, s1, u)) du
  double nu_lo = 0.0;            // flow(2, s1, tau0)
  double nu_hi = 0.0;            // flow(1, s0, tau0)
  double eps1 = 0.0;
  // nu = Dirac at x = 1 times the uniform law on [nu_lo, nu_hi].
  double nu_of(double a, double b) const noexcept;
};

SmallSetConstant small_set_constant(const Model& model, double tau0, double s0, double s1);

struct SmallSetCheck {
  SmallSetConstant constant;
  std::vector<double> starts;  // substrate values r of starts (2, r)
  int subintervals = 0;
  double min_ratio = 0.0;      // min over starts and subintervals of P/nu(A)
  double min_ratio_sigma = 0.0;
  bool passed = false;         // min_ratio + 3 sigma >= eps1 at every cell
  std::size_t n_paths = 0;     // per start
};

SmallSetCheck small_set_mc(const Model& model, const SmallSetConstant& c, std::size_t n_paths,
                           std::uint64_t seed, unsigned threads = 1, int starts = 3,
                           int subintervals = 4);

// ---------------------------------------------------------------------------

// K = {1..x_max} x [s_lo, s_hi].
struct CompactSpec {
  std::int64_t x_max = 1;
  double s_lo = 0.1;
  double s_hi = 0.4;
};

struct HittingScenario {
  std::string id = "scenario";
  CompactSpec K;
  HybridState start;
  HybridState target;
  double tau0 = 0.5;
  double tau = 1.0;
  double eps = 1.0;    // clamped to min(eps, eps_bar, tau - tau0)
  double delta = 0.0;  // <= 0 selects |r - s_bar_y|
};

struct HittingConstants {
  std::int64_t L = 0;       // L_K
  double M = 0.0;           // max{D s_in, k mu(s_bar1) L}
  double margin = 0.0;      // min{s_K - s_bar_L, s_bar1 - S_K}
  double t_min = 0.0;
  double eps_bar = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  double delta1 = 0.0;      // first-step sub-intervals
  double delta2 = 0.0;
  double ratio = 0.0;       // mu(s_bar_L)/mu(s_bar1)
  double Pd1 = 0.0, Pb1 = 0.0;  // P_d(L, L-1, delta1/2), P_b(1, L-1, delta2/2)
  double beta2 = 0.0;       // interval length for the staying step
  double t2 = 0.0, Pd2 = 0.0, Pb2 = 0.0;
  double t3 = 0.0, Pd3 = 0.0, Pb3 = 0.0;
  double log10_C1 = 0.0;
  double log10_C2 = 0.0;
  double log10_C3 = 0.0;
  double log10_bound = 0.0;
};

// Itemized PreconditionError when the scenario violates a hypothesis.
HittingConstants hitting_constants(const Model& model, const HittingScenario& sc);

struct HittingBoundReport {
  HittingScenario scenario;
  HittingConstants constants;
  double bound = 0.0;      // 10^log10_bound (0 on underflow)
  bool verifiable = false; // bound >= 1e-12
  double half_width = 0.0;
  Proportion mc;           // P(tau - eps <= hit <= tau) with the box relaxation
  Proportion mc_half;      // same with half the box width
  bool passed = false;     // mc + 3 sigma >= bound
};

HittingBoundReport hitting_lower_bound(const Model& model, const HittingScenario& sc,
                                       std::size_t n_paths, std::uint64_t seed,
                                       unsigned threads = 1, double half_width = 0.0,
                                       std::size_t n_paths_half = 0);

// ---------------------------------------------------------------------------

struct InvSubstrateReport {
  std::int64_t x = 1;
  double t = 0.0;
  double mu_bar = 0.0;        // sup mu on [0, D s_in t]
  double mu_bar_slope = 0.0;  // sup mu' there
  double rhs = 0.0;
  MeanEstimate mc;            // E[1/S_t] from (x, 0)
  bool passed = false;        // mc lower 95% limit <= rhs
};

double inv_substrate_rhs(const Model& model, std::int64_t x, double t, double* mu_bar = nullptr,
                         double* mu_bar_slope = nullptr);
InvSubstrateReport inv_substrate_moment_bound(const Model& model, std::int64_t x, double t,
                                              std::size_t n_paths, std::uint64_t seed,
                                              unsigned threads = 1);

struct ExpMomentReport {
  GCertificate g;
  HybridState start;
  double t_cap = 0.0;
  double bound = 0.0;          // A e^{beta s}
  MeanEstimate mc;             // E[e^{(D+C)(T_eps ^ T_Ext ^ t_cap)}]
  Proportion hit;              // T_eps reached before extinction and cap
  double censored_fraction = 0.0;
  bool inconclusive = false;   // censored on more than 1% of paths
  bool passed = false;         // mc lower 95% limit <= bound and hit frequency > 0
};

ExpMomentReport exp_moment_check(const Model& model, const GCertificate& g, std::int64_t x,
                                 double s, double t_cap, std::size_t n_paths, std::uint64_t seed,
                                 unsigned threads = 1);

}  // namespace chemostat

#endif
