#include "chemostat/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chemostat/errors.hpp"

namespace chemostat {

void require_valid(const FlowSolverConfig& cfg) {
  auto check = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("solver setting '") + key + "' must be positive");
    }
  };
  check(cfg.abs_tol, "abs_tol");
  check(cfg.rel_tol, "rel_tol");
  check(cfg.max_step, "max_step");
  check(cfg.root_tol, "root_tol");
  if (cfg.max_steps == 0) throw ConfigError("solver setting 'max_steps' must be positive");
}

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

SubstrateIntegrator::SubstrateIntegrator(const ChemostatParams& params,
                                         const FlowSolverConfig& cfg)
    : p_(params), cfg_(cfg) {}

void SubstrateIntegrator::reset(std::int64_t ell, double s) {
  ell_ = ell;
  s_ = s;
  m_ = 0.0;
  fsal_valid_ = false;
}

double SubstrateIntegrator::initial_step(double s) const noexcept {
  const double lam = p_.D + p_.k * p_.growth.slope(std::max(s, 0.0)) * static_cast<double>(ell_);
  const double tol = std::max(cfg_.abs_tol, cfg_.rel_tol);
  return std::min(cfg_.max_step, 0.5 * std::pow(tol, 0.2) / std::max(lam, 1e-12));
}

void SubstrateIntegrator::advance(double dt) {
  if (dt == 0.0) return;
  const int dir = dt > 0.0 ? 1 : -1;
  double remaining = std::abs(dt);
  double h = h_hint_ > 0.0 ? h_hint_ : initial_step(s_);
  if (fsal_dir_ != dir) fsal_valid_ = false;

  const double sg = static_cast<double>(dir);
  auto f = [&](double s, double& mu) {
    mu = p_.growth.rate(s);
    return sg * (p_.D * (p_.s_in - s) - p_.k * mu * static_cast<double>(ell_));
  };

  double k1, m1;
  if (fsal_valid_) {
    k1 = fsal_f_;
    m1 = fsal_mu_;
  } else {
    k1 = f(s_, m1);
  }
  m1 *= sg;

  std::size_t guard = 0;
  while (remaining > 0.0) {
    if (++guard > cfg_.max_steps) {
      throw NumericError("substrate integrator exceeded max_steps (s=" + std::to_string(s_) +
                         ", ell=" + std::to_string(ell_) + ", h=" + std::to_string(h) + ")");
    }
    const bool last = h >= remaining;
    const double hs = last ? remaining : h;

    double mu;
    const double k2 = f(s_ + hs * a21 * k1, mu);
    const double k3 = f(s_ + hs * (a31 * k1 + a32 * k2), mu);
    const double m3 = sg * mu;
    const double k4 = f(s_ + hs * (a41 * k1 + a42 * k2 + a43 * k3), mu);
    const double m4 = sg * mu;
    const double k5 = f(s_ + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), mu);
    const double m5 = sg * mu;
    const double k6 = f(s_ + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), mu);
    const double m6 = sg * mu;
    const double s_new = s_ + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double dm = hs * (b1 * m1 + b3 * m3 + b4 * m4 + b5 * m5 + b6 * m6);
    double mu7;
    const double k7 = f(s_new, mu7);
    const double m7 = sg * mu7;

    const double err_s = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err_m = hs * (e1 * m1 + e3 * m3 + e4 * m4 + e5 * m5 + e6 * m6 + e7 * m7);
    const double sc_s = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(s_), std::abs(s_new));
    const double sc_m = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(m_), std::abs(m_ + dm));
    const double err = std::max(std::abs(err_s) / sc_s, std::abs(err_m) / sc_m);

    if (err <= 1.0 && std::isfinite(s_new)) {
      s_ = s_new;
      m_ += dm;
      remaining = last ? 0.0 : remaining - hs;
      k1 = k7;
      m1 = m7;
      ++steps_;
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      // Clipped final steps do not shrink the hint carried to the next call.
      const double proposed = std::min(cfg_.max_step, hs * fac);
      if (!last || hs == h) h = proposed;
    } else {
      const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
      h = hs * fac;
      if (h < 1e-300) throw NumericError("substrate integrator step size underflow");
    }
  }
  h_hint_ = h;
  fsal_f_ = k1;
  fsal_mu_ = m1 * sg;
  fsal_valid_ = true;
  fsal_dir_ = dir;
}

}  // namespace chemostat
