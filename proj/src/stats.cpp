#include "chemostat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "chemostat/errors.hpp"
#include "chemostat/rng.hpp"

namespace chemostat {

MeanEstimate mean_estimate(const std::vector<double>& values) {
  MeanEstimate r;
  r.n = values.size();
  if (values.empty()) return r;
  // Welford
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  r.mean = mean;
  if (k > 1) r.stderr_ = std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k));
  return r;
}

double Proportion::stderr_() const noexcept {
  if (n == 0) return 0.0;
  const double q = p();
  return std::sqrt(q * (1.0 - q) / static_cast<double>(n));
}

double z_for(double level) {
  if (!(level > 0.0 && level < 1.0)) throw PreconditionError("confidence level must be in (0, 1)");
  return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
}

double t_for(double level, double dof) {
  if (!(level > 0.0 && level < 1.0)) throw PreconditionError("confidence level must be in (0, 1)");
  if (!(dof > 0.0)) throw PreconditionError("degrees of freedom must be positive");
  return boost::math::quantile(boost::math::students_t(dof), 0.5 + 0.5 * level);
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw PreconditionError("ks_distance needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

LinearFit weighted_fit(const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<double>& var) {
  if (x.size() != y.size() || x.size() != var.size() || x.size() < 2) {
    throw PreconditionError("weighted_fit needs >= 2 matching points");
  }
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(var[i] > 0.0)) throw PreconditionError("weighted_fit variances must be positive");
    const double w = 1.0 / var[i];
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) throw PreconditionError("weighted_fit needs two distinct abscissae");
  LinearFit f;
  f.n = x.size();
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sxx * sy - sx * sxy) / det;
  f.se_slope = std::sqrt(sw / det);
  f.se_intercept = std::sqrt(sxx / det);
  f.cov = -sx / det;
  return f;
}

MeanEstimate batch_means(const std::vector<double>& batches) { return mean_estimate(batches); }

// ---------------------------------------------------------------------------

Binning::Binning(std::int64_t x_max, double s_hi, int s_bins)
    : x_max_(x_max), s_hi_(s_hi), s_bins_(s_bins) {
  if (x_max < 1 || !(s_hi > 0.0) || s_bins < 1) throw PreconditionError("invalid binning");
}

Binning Binning::from_samples(const std::vector<HybridState>& samples, double s_hi, int s_bins,
                              double quantile) {
  std::vector<std::int64_t> xs;
  xs.reserve(samples.size());
  for (const auto& st : samples) {
    if (st.x >= 1) xs.push_back(st.x);
  }
  std::int64_t x_max = 1;
  if (!xs.empty()) {
    const auto pos = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(xs.size() - 1),
                         std::ceil(quantile * static_cast<double>(xs.size())) - 1.0));
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(pos), xs.end());
    x_max = std::max<std::int64_t>(1, xs[pos]);
  }
  return Binning(x_max, s_hi, s_bins);
}

std::size_t Binning::index(std::int64_t x, double s) const noexcept {
  const auto row = static_cast<std::size_t>(std::min(x, x_max_ + 1) - 1);
  std::size_t col;
  if (s >= s_hi_) {
    col = static_cast<std::size_t>(s_bins_);
  } else {
    const double f = s / s_hi_ * s_bins_;
    col = f <= 0.0 ? 0 : std::min(static_cast<std::size_t>(f), static_cast<std::size_t>(s_bins_ - 1));
  }
  return row * static_cast<std::size_t>(s_bins_ + 1) + col;
}

std::int64_t Binning::cell_x(std::size_t cell) const noexcept {
  return static_cast<std::int64_t>(cell / static_cast<std::size_t>(s_bins_ + 1)) + 1;
}

double Binning::cell_s_lo(std::size_t cell) const noexcept {
  const auto col = cell % static_cast<std::size_t>(s_bins_ + 1);
  return static_cast<double>(col) * bin_width();
}

double Binning::cell_s_hi(std::size_t cell) const noexcept {
  const auto col = cell % static_cast<std::size_t>(s_bins_ + 1);
  if (col == static_cast<std::size_t>(s_bins_)) return INFINITY;
  return static_cast<double>(col + 1) * bin_width();
}

bool Binning::is_overflow(std::size_t cell) const noexcept {
  return cell_x(cell) > x_max_ || cell % static_cast<std::size_t>(s_bins_ + 1) ==
                                      static_cast<std::size_t>(s_bins_);
}

double Histogram::overflow_mass() const {
  double m = 0.0;
  for (std::size_t c = 0; c < mass.size(); ++c) {
    if (binning.is_overflow(c)) m += mass[c];
  }
  return m;
}

std::vector<std::uint32_t> to_cells(const Binning& binning, const std::vector<HybridState>& samples) {
  std::vector<std::uint32_t> cells;
  cells.reserve(samples.size());
  for (const auto& st : samples) {
    if (st.x >= 1) cells.push_back(static_cast<std::uint32_t>(binning.index(st.x, st.s)));
  }
  return cells;
}

Histogram histogram_from_cells(const Binning& binning, const std::vector<std::uint32_t>& cells) {
  Histogram h;
  h.binning = binning;
  h.mass.assign(binning.size(), 0.0);
  h.stderr_.assign(binning.size(), 0.0);
  h.n = static_cast<double>(cells.size());
  if (cells.empty()) return h;
  for (auto c : cells) h.mass[c] += 1.0;
  for (std::size_t c = 0; c < h.mass.size(); ++c) {
    h.mass[c] /= h.n;
    h.stderr_[c] = std::sqrt(h.mass[c] * (1.0 - h.mass[c]) / h.n);
  }
  return h;
}

Histogram make_histogram(const Binning& binning, const std::vector<HybridState>& samples) {
  return histogram_from_cells(binning, to_cells(binning, samples));
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw PreconditionError("tv_distance needs equal supports");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

namespace {

std::vector<double> normalized_counts(const std::vector<std::uint32_t>& cells, std::size_t n_cells) {
  std::vector<double> m(n_cells, 0.0);
  for (auto c : cells) m[c] += 1.0;
  const double n = static_cast<double>(cells.size());
  for (auto& v : m) v /= n;
  return m;
}

std::vector<double> resample_law(const std::vector<std::uint32_t>& pool, std::size_t draws,
                                 std::size_t n_cells, RngStream& rng) {
  std::vector<double> m(n_cells, 0.0);
  for (std::size_t i = 0; i < draws; ++i) m[pool[rng.below(pool.size())]] += 1.0;
  for (auto& v : m) v /= static_cast<double>(draws);
  return m;
}

// Bootstrap quantiles recentred on the plug-in value: the upward bias of the
// plug-in distance shifts the whole bootstrap law, not its spread.
void centred_ci(std::vector<double> vals, double value, double level, TvEstimate& e) {
  std::sort(vals.begin(), vals.end());
  const double a = 0.5 * (1.0 - level);
  const auto at = [&](double q) {
    const double pos = q * static_cast<double>(vals.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double fr = pos - static_cast<double>(i);
    return i + 1 < vals.size() ? vals[i] * (1 - fr) + vals[i + 1] * fr : vals.back();
  };
  const MeanEstimate m = mean_estimate(vals);
  e.ci_low = std::max(0.0, value - (m.mean - at(a)));
  e.ci_high = value + (at(1.0 - a) - m.mean);
  e.boot_sd = m.stderr_ * std::sqrt(static_cast<double>(vals.size()));
  e.debiased = std::max(0.0, 2.0 * value - m.mean);
}

}  // namespace

TvEstimate tv_bootstrap(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                        std::size_t n_cells, std::uint64_t seed, int resamples, double level) {
  if (a.empty() || b.empty()) throw PowerError("tv_bootstrap needs samples on both sides");
  if (resamples < 2) throw PreconditionError("tv_bootstrap needs >= 2 resamples");
  TvEstimate e;
  e.value = tv_distance(normalized_counts(a, n_cells), normalized_counts(b, n_cells));
  RngStream rng(seed, 0x7480);
  std::vector<double> boot, null;
  boot.reserve(static_cast<std::size_t>(resamples));
  null.reserve(static_cast<std::size_t>(resamples));
  std::vector<std::uint32_t> pool(a);
  pool.insert(pool.end(), b.begin(), b.end());
  for (int r = 0; r < resamples; ++r) {
    boot.push_back(tv_distance(resample_law(a, a.size(), n_cells, rng),
                               resample_law(b, b.size(), n_cells, rng)));
    null.push_back(tv_distance(resample_law(pool, a.size(), n_cells, rng),
                               resample_law(pool, b.size(), n_cells, rng)));
  }
  centred_ci(boot, e.value, level, e);
  const MeanEstimate nm = mean_estimate(null);
  e.null_mean = nm.mean;
  e.null_sd = nm.stderr_ * std::sqrt(static_cast<double>(null.size()));
  return e;
}

TvEstimate tv_bootstrap_reference(const std::vector<std::uint32_t>& a,
                                  const std::vector<double>& reference, std::uint64_t seed,
                                  int resamples, double level) {
  if (a.empty()) throw PowerError("tv_bootstrap_reference needs samples");
  if (resamples < 2) throw PreconditionError("tv_bootstrap_reference needs >= 2 resamples");
  const std::size_t n_cells = reference.size();
  TvEstimate e;
  e.value = tv_distance(normalized_counts(a, n_cells), reference);
  RngStream rng(seed, 0x7481);
  // Sampling from the reference law through its cumulative masses.
  std::vector<double> cum(n_cells);
  std::partial_sum(reference.begin(), reference.end(), cum.begin());
  std::vector<double> boot, null;
  for (int r = 0; r < resamples; ++r) {
    boot.push_back(tv_distance(resample_law(a, a.size(), n_cells, rng), reference));
    std::vector<double> m(n_cells, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double u = rng.uniform() * cum.back();
      const auto it = std::upper_bound(cum.begin(), cum.end(), u);
      m[std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), n_cells - 1)] += 1.0;
    }
    for (auto& v : m) v /= static_cast<double>(a.size());
    null.push_back(tv_distance(m, reference));
  }
  centred_ci(boot, e.value, level, e);
  const MeanEstimate nm = mean_estimate(null);
  e.null_mean = nm.mean;
  e.null_sd = nm.stderr_ * std::sqrt(static_cast<double>(null.size()));
  return e;
}

}  // namespace chemostat
