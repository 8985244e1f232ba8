#ifndef CHEMOSTAT_LYAPUNOV_HPP
#define CHEMOSTAT_LYAPUNOV_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chemostat/flow.hpp"

namespace chemostat {

// A function on N x R+ with its analytic s-derivative.
struct TestFunction {
  std::function<double(std::int64_t, double)> value;
  std::function<double(std::int64_t, double)> ds;
};

// [D(s_in - s) - k mu(s) x] df/ds + mu(s) x [f(x+1) - f(x)] + D x [f(x-1) - f(x)].
// Throws PreconditionError when f carries no derivative.
double generator_apply(const Model& model, const TestFunction& f, std::int64_t x, double s);

struct LyapunovConfig {
  double rho = 2.0;
  double p = 0.1;
  double alpha = 1.0;
  double theta = 1.0;
  double eta = 1.0;
  double zeta = 0.0;
};

// psi(x, s) = x, so psi(0, s) = 0.
inline double psi(std::int64_t x, double) noexcept { return static_cast<double>(x); }

// rho^x + 1/s + (s_bar1 - s)^-p on N* x (0, s_bar1); DomainError otherwise.
double W(const Model& model, double rho, double p, std::int64_t x, double s);
double W_ds(const Model& model, double rho, double p, std::int64_t x, double s);

// rho^x e^{alpha s}/log rho + 1/s + (1 + theta 1{x <= 1}) (s_bar1 - s)^-p.
// Defined for x >= 0 so the generator can be applied at x = 1.
double V(const Model& model, const LyapunovConfig& cfg, std::int64_t x, double s);
double V_ds(const Model& model, const LyapunovConfig& cfg, std::int64_t x, double s);

TestFunction psi_function();
TestFunction W_function(const Model& model, double rho, double p);
TestFunction V_function(const Model& model, const LyapunovConfig& cfg);

// The three parts of LV: exponential, inverse-substrate, and boundary parts.
struct LVParts {
  double exponential = 0.0;
  double inverse = 0.0;
  double boundary = 0.0;
  double total() const noexcept { return exponential + inverse + boundary; }
};
LVParts lv_parts(const Model& model, const LyapunovConfig& cfg, std::int64_t x, double s);

struct SandwichConstants {
  double c_low = 0.0;   // min{1/log rho, 1}
  double c_high = 0.0;  // max{1 + theta, e^{alpha s_bar1}/log rho}
};
SandwichConstants sandwich_constants(const Model& model, const LyapunovConfig& cfg);

// Strict lower bound for theta at exponent p.
double theta_threshold(const Model& model, double p);

struct DriftGrid {
  std::int64_t x_min = 1;
  std::int64_t x_max = 50;
  double s_lo_fraction = 1e-4;  // s_lo = fraction * s_bar1
  double s_hi_fraction = 1e-4;  // s_hi = (1 - fraction) * s_bar1
  int s_points = 2000;
};

// Half uniform, a quarter geometrically refined toward each end.
std::vector<double> drift_grid_points(const Model& model, const DriftGrid& grid);

struct OffendingPoint {
  std::int64_t x = 0;
  double s = 0.0;
  double margin = 0.0;
  std::string location;  // "grid", "s->0", "s->s_bar1"
};

// Sign of LV + eta V - zeta psi in the limits s -> 0 and s -> s_bar1.
struct BoundaryReport {
  double x1_sbar_slope = 0.0;  // limit of margin / boundary part of V at x = 1, s -> s_bar1
  bool x1_sbar_negative = false;
  bool x_ge2_sbar_negative = true;  // x >= 2: margin -> -infinity
  bool s0_negative = true;          // every x: margin -> -infinity
};

struct DriftCertificate {
  LyapunovConfig config;
  DriftGrid grid;
  double grid_worst_margin = 0.0;
  double worst_margin = 0.0;  // includes the boundary limits (+inf when a limit is positive)
  OffendingPoint worst;
  BoundaryReport boundary;
  double fitted_zeta = 0.0;  // max(0, max over grid of (LV + eta V)/psi)
  bool passed = false;       // worst_margin <= 0

  // zeta e^{(mu(s_bar1) - D) t} / (eta - D).
  double zeta_t(const Model& model, double t) const;
};

// With fit_zeta, config.zeta is replaced by the fitted value before evaluating margins.
DriftCertificate verify_drift(const Model& model, LyapunovConfig cfg, const DriftGrid& grid = {},
                              bool fit_zeta = false, unsigned threads = 1);

// alpha = (rho - 1)/k, theta = 1.1 x threshold, eta at the midpoint of the
// admissible interval, zeta fitted on `grid`.
LyapunovConfig select_parameters(const Model& model, double rho, double p,
                                 const DriftGrid& grid = {});

// ---------------------------------------------------------------------------
// Exponential-moment function g(x, s) = (1{x>=2} + (1+d1) 1{x=1} + d0 1{x=0}) e^{beta s}.

struct GConstants {
  double eps = 0.0;
  double beta = 0.0;
  double delta0 = 0.0;
  double delta1 = 0.0;
};

double g_value(const GConstants& g, std::int64_t x, double s) noexcept;
TestFunction g_function(const GConstants& g);

// Lg/g + D for x >= 1 by the case split.
double g_rate(const Model& model, const GConstants& g, std::int64_t x, double s);

struct GCertificate {
  GConstants constants;
  double C1 = 0.0;  // bound for rows x >= 2
  double C2 = 0.0;  // bound for row x = 1
  double C = 0.0;   // -(C1 v C2)
  double A = 0.0;   // (1 + d1) / min(1, d0)
  double worst_margin = 0.0;  // max over grid of Lg/g + D + C
  std::int64_t worst_x = 0;
  double worst_s = 0.0;
  bool passed = false;  // C > 0 and worst_margin <= 1e-12
  int halvings = 0;     // construction scan steps (0 for user-supplied constants)

  double bound(double s) const noexcept;  // A e^{beta s}
};

GCertificate g_drift_check(const Model& model, const GConstants& g, std::int64_t x_max = 50,
                           int s_points = 400);

// Construction recipe: d1 = 1, beta from the x = 2 row, eps halved until the
// x = 1 row is negative. ConfigError with the scan report when none is found.
GCertificate g_construct(const Model& model, std::int64_t x_max = 50, int s_points = 400);

}  // namespace chemostat

#endif
