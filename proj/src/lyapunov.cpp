#include "chemostat/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chemostat/errors.hpp"
#include "chemostat/parallel.hpp"

namespace chemostat {

double generator_apply(const Model& model, const TestFunction& f, std::int64_t x, double s) {
  if (!f.value || !f.ds) {
    throw PreconditionError("generator_apply needs a test function with an analytic s-derivative");
  }
  if (x < 0 || !(s >= 0.0)) throw DomainError("generator_apply needs x >= 0, s >= 0");
  const double fx = f.value(x, s);
  double out = model.drift(x, s) * f.ds(x, s);
  if (x > 0) {
    const double xd = static_cast<double>(x);
    out += model.mu(s) * xd * (f.value(x + 1, s) - fx);
    out += model.D() * xd * (f.value(x - 1, s) - fx);
  }
  return out;
}

namespace {

void require_open_interval(const Model& model, double s, const char* who) {
  if (!(s > 0.0 && s < model.s_bar1())) {
    std::ostringstream os;
    os << who << " requires s in (0, s_bar1 = " << model.s_bar1() << "), got " << s;
    throw DomainError(os.str());
  }
}

}  // namespace

double W(const Model& model, double rho, double p, std::int64_t x, double s) {
  if (x < 1) throw DomainError("W requires x >= 1");
  require_open_interval(model, s, "W");
  return std::pow(rho, static_cast<double>(x)) + 1.0 / s + std::pow(model.s_bar1() - s, -p);
}

double W_ds(const Model& model, double rho, double p, std::int64_t x, double s) {
  (void)rho;
  if (x < 1) throw DomainError("W requires x >= 1");
  require_open_interval(model, s, "W");
  return -1.0 / (s * s) + p * std::pow(model.s_bar1() - s, -p - 1.0);
}

double V(const Model& model, const LyapunovConfig& cfg, std::int64_t x, double s) {
  if (x < 0) throw DomainError("V requires x >= 0");
  require_open_interval(model, s, "V");
  const double lead = std::pow(cfg.rho, static_cast<double>(x)) * std::exp(cfg.alpha * s) /
                      std::log(cfg.rho);
  const double weight = x <= 1 ? 1.0 + cfg.theta : 1.0;
  return lead + 1.0 / s + weight * std::pow(model.s_bar1() - s, -cfg.p);
}

double V_ds(const Model& model, const LyapunovConfig& cfg, std::int64_t x, double s) {
  if (x < 0) throw DomainError("V requires x >= 0");
  require_open_interval(model, s, "V");
  const double lead = std::pow(cfg.rho, static_cast<double>(x)) * std::exp(cfg.alpha * s) /
                      std::log(cfg.rho);
  const double weight = x <= 1 ? 1.0 + cfg.theta : 1.0;
  return cfg.alpha * lead - 1.0 / (s * s) +
         weight * cfg.p * std::pow(model.s_bar1() - s, -cfg.p - 1.0);
}

TestFunction psi_function() {
  return {[](std::int64_t x, double s) { return psi(x, s); },
          [](std::int64_t, double) { return 0.0; }};
}

TestFunction W_function(const Model& model, double rho, double p) {
  return {[&model, rho, p](std::int64_t x, double s) { return W(model, rho, p, x, s); },
          [&model, rho, p](std::int64_t x, double s) { return W_ds(model, rho, p, x, s); }};
}

TestFunction V_function(const Model& model, const LyapunovConfig& cfg) {
  return {[&model, cfg](std::int64_t x, double s) { return V(model, cfg, x, s); },
          [&model, cfg](std::int64_t x, double s) { return V_ds(model, cfg, x, s); }};
}

LVParts lv_parts(const Model& model, const LyapunovConfig& cfg, std::int64_t x, double s) {
  if (x < 1) throw DomainError("lv_parts requires x >= 1");
  require_open_interval(model, s, "lv_parts");
  const double D = model.D();
  const double mu = model.mu(s);
  const double xd = static_cast<double>(x);
  const double drift = model.drift(x, s);
  const double gap = model.s_bar1() - s;
  const double v0 = std::pow(cfg.rho, xd) * std::exp(cfg.alpha * s) / std::log(cfg.rho);
  const double v1 = 1.0 / s;
  const double v2 = (x <= 1 ? 1.0 + cfg.theta : 1.0) * std::pow(gap, -cfg.p);
  LVParts r;
  r.exponential = (drift * cfg.alpha + (cfg.rho - 1.0) * (mu - D / cfg.rho) * xd) * v0;
  r.inverse = -drift / s * v1;
  double coef = cfg.p * drift / gap;
  if (x == 1) coef -= mu * cfg.theta / (1.0 + cfg.theta);
  if (x == 2) coef += 2.0 * D * cfg.theta;
  r.boundary = coef * v2;
  return r;
}

SandwichConstants sandwich_constants(const Model& model, const LyapunovConfig& cfg) {
  const double lr = std::log(cfg.rho);
  return {std::min(1.0 / lr, 1.0),
          std::max(1.0 + cfg.theta, std::exp(cfg.alpha * model.s_bar1()) / lr)};
}

double theta_threshold(const Model& model, double p) {
  const double s1 = model.s_bar1();
  const double num = p * (model.D() + model.k() * model.dmu(s1)) + model.D();
  const double den = model.mu(s1) - num;
  if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
  return num / den;
}

std::vector<double> drift_grid_points(const Model& model, const DriftGrid& grid) {
  if (grid.s_points < 8) throw PreconditionError("drift grid needs >= 8 s-points");
  if (!(grid.s_lo_fraction > 0.0 && grid.s_hi_fraction > 0.0 &&
        grid.s_lo_fraction + grid.s_hi_fraction < 1.0)) {
    throw PreconditionError("drift grid fractions must lie in (0, 1)");
  }
  const double sb = model.s_bar1();
  const double lo = grid.s_lo_fraction * sb;
  const double hi = (1.0 - grid.s_hi_fraction) * sb;
  const int n_uniform = grid.s_points / 2;
  const int n_edge = (grid.s_points - n_uniform) / 2;
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(grid.s_points) + 2);
  for (int i = 0; i < n_uniform; ++i) {
    pts.push_back(lo + (hi - lo) * static_cast<double>(i) / (n_uniform - 1));
  }
  // Geometric offsets from each end, from the end distance up to a quarter of the range.
  const double q = 0.25 * (hi - lo);
  const double d_lo = lo, d_hi = sb - hi;
  for (int i = 0; i < n_edge; ++i) {
    const double f = static_cast<double>(i) / std::max(1, n_edge - 1);
    pts.push_back(d_lo * std::pow(q / d_lo, f));
    pts.push_back(sb - d_hi * std::pow(q / d_hi, f));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double DriftCertificate::zeta_t(const Model& model, double t) const {
  return config.zeta * std::exp((model.mu_bar1() - model.D()) * t) / (config.eta - model.D());
}

DriftCertificate verify_drift(const Model& model, LyapunovConfig cfg, const DriftGrid& grid,
                              bool fit_zeta, unsigned threads) {
  if (grid.x_min < 1 || grid.x_max < grid.x_min) throw PreconditionError("invalid drift x-range");
  const std::vector<double> pts = drift_grid_points(model, grid);
  const TestFunction vf = V_function(model, cfg);
  const auto rows = static_cast<std::size_t>(grid.x_max - grid.x_min + 1);

  // Per row: max of (LV + eta V)/psi and the (LV + eta V, psi) values.
  std::vector<double> row_ratio(rows, -std::numeric_limits<double>::infinity());
  std::vector<std::vector<double>> row_lhs(rows);
  parallel_for(rows, threads, [&](std::size_t r) {
    const std::int64_t x = grid.x_min + static_cast<std::int64_t>(r);
    auto& lhs = row_lhs[r];
    lhs.resize(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double s = pts[j];
      lhs[j] = generator_apply(model, vf, x, s) + cfg.eta * V(model, cfg, x, s);
      row_ratio[r] = std::max(row_ratio[r], lhs[j] / psi(x, s));
    }
  });

  DriftCertificate cert;
  cert.grid = grid;
  double fitted = 0.0;
  for (double v : row_ratio) fitted = std::max(fitted, v);
  cert.fitted_zeta = fitted;
  if (fit_zeta) cfg.zeta = fitted;
  cert.config = cfg;

  cert.grid_worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::int64_t x = grid.x_min + static_cast<std::int64_t>(r);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double m = row_lhs[r][j] - cfg.zeta * psi(x, pts[j]);
      if (m > cert.grid_worst_margin) {
        cert.grid_worst_margin = m;
        cert.worst = {x, pts[j], m, "grid"};
      }
    }
  }

  const double s1 = model.s_bar1();
  BoundaryReport& b = cert.boundary;
  b.x1_sbar_slope = cfg.p * (model.D() + model.k() * model.dmu(s1)) -
                    model.mu(s1) * cfg.theta / (1.0 + cfg.theta) + cfg.eta;
  b.x1_sbar_negative = b.x1_sbar_slope < 0.0;
  cert.worst_margin = cert.grid_worst_margin;
  if (!b.x1_sbar_negative && grid.x_min <= 1) {
    cert.worst_margin = std::numeric_limits<double>::infinity();
    cert.worst = {1, s1, cert.worst_margin, "s->s_bar1"};
  }
  cert.passed = cert.worst_margin <= 0.0;
  return cert;
}

LyapunovConfig select_parameters(const Model& model, double rho, double p, const DriftGrid& grid) {
  if (!(rho > 1.0)) throw ConfigError("rho must exceed 1");
  const ValidationReport rep = validate(model.params());
  if (!rep.ok()) throw ConfigError("parameters fail validation: mu(s_bar1) must exceed D");
  if (!rep.p_max || !(p > 0.0 && p < *rep.p_max)) {
    std::ostringstream os;
    os << "p = " << p << " outside the admissible interval (0, "
       << (rep.p_max ? *rep.p_max : 0.0) << ")";
    throw ConfigError(os.str());
  }
  LyapunovConfig cfg;
  cfg.rho = rho;
  cfg.p = p;
  cfg.alpha = (rho - 1.0) / model.k();
  cfg.theta = 1.1 * theta_threshold(model, p);
  const double s1 = model.s_bar1();
  const double D = model.D();
  cfg.eta = D + 0.5 * (cfg.theta * model.mu(s1) / (1.0 + cfg.theta) -
                       p * (D + model.k() * model.dmu(s1)) - D);
  cfg.zeta = verify_drift(model, cfg, grid, true).fitted_zeta;
  return cfg;
}

// ---------------------------------------------------------------------------

double g_value(const GConstants& g, std::int64_t x, double s) noexcept {
  const double w = x >= 2 ? 1.0 : (x == 1 ? 1.0 + g.delta1 : g.delta0);
  return w * std::exp(g.beta * s);
}

TestFunction g_function(const GConstants& g) {
  return {[g](std::int64_t x, double s) { return g_value(g, x, s); },
          [g](std::int64_t x, double s) { return g.beta * g_value(g, x, s); }};
}

double g_rate(const Model& model, const GConstants& g, std::int64_t x, double s) {
  if (x < 1) throw DomainError("g_rate requires x >= 1");
  const double D = model.D();
  const double drift = model.drift(x, s);
  if (x == 1) {
    return drift * g.beta - model.mu(s) * g.delta1 / (1.0 + g.delta1) +
           D * g.delta0 / (1.0 + g.delta1);
  }
  if (x == 2) return drift * g.beta + D * (1.0 + 2.0 * g.delta1);
  return drift * g.beta + D;
}

double GCertificate::bound(double s) const noexcept { return A * std::exp(constants.beta * s); }

GCertificate g_drift_check(const Model& model, const GConstants& g, std::int64_t x_max,
                           int s_points) {
  if (!(g.eps > 0.0 && g.eps < model.s_bar1() && g.beta > 0.0 && g.delta0 > 0.0 &&
        g.delta1 > 0.0)) {
    throw PreconditionError("g constants must be positive with eps < s_bar1");
  }
  if (x_max < 2 || s_points < 2) throw PreconditionError("g grid too small");
  GCertificate c;
  c.constants = g;
  const double b = model.s_bar1() - g.eps;
  c.C1 = model.drift(2, b) * g.beta + model.D() * (1.0 + 2.0 * g.delta1);
  c.C2 = g_rate(model, g, 1, b);
  c.C = -std::max(c.C1, c.C2);
  c.A = (1.0 + g.delta1) / std::min(1.0, g.delta0);

  const TestFunction gf = g_function(g);
  const double hi = 3.0 * model.s_in();
  c.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::int64_t x = 1; x <= x_max; ++x) {
    for (int j = 0; j < s_points; ++j) {
      const double s = b + (hi - b) * static_cast<double>(j) / (s_points - 1);
      const double m = generator_apply(model, gf, x, s) / g_value(g, x, s) + model.D() + c.C;
      if (m > c.worst_margin) {
        c.worst_margin = m;
        c.worst_x = x;
        c.worst_s = s;
      }
    }
  }
  c.passed = c.C > 0.0 && c.worst_margin <= 1e-12;
  return c;
}

GCertificate g_construct(const Model& model, std::int64_t x_max, int s_points) {
  const double s1 = model.s_bar1();
  const double s2 = model.s_bar(2);
  const double D = model.D();
  GConstants g;
  g.delta1 = 1.0;
  const double eps_bar = 0.5 * (s1 - s2);
  const double a = s1 - eps_bar;
  const double denom = -model.drift(2, a);
  if (!(denom > 0.0)) throw ConfigError("g construction: x = 2 drift is not negative above s_bar2");
  g.beta = 2.0 * D * (1.0 + 2.0 * g.delta1) / denom;
  g.eps = 0.5 * eps_bar;
  std::ostringstream scan;
  for (int h = 0; h < 60; ++h) {
    const double b = s1 - g.eps;
    g.delta0 = model.mu(b) * g.delta1 / (4.0 * D);
    const double c2 = g_rate(model, g, 1, b);
    scan << "eps=" << g.eps << " C2=" << c2 << "; ";
    if (c2 < 0.0) {
      GCertificate c = g_drift_check(model, g, x_max, s_points);
      c.halvings = h;
      return c;
    }
    g.eps *= 0.5;
  }
  throw ConfigError("g construction found no admissible eps: " + scan.str());
}

}  // namespace chemostat
