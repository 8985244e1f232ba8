#ifndef CHEMOSTAT_STATS_HPP
#define CHEMOSTAT_STATS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "chemostat/model.hpp"

namespace chemostat {

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
  double lo(double z) const noexcept { return mean - z * stderr_; }
  double hi(double z) const noexcept { return mean + z * stderr_; }
};
MeanEstimate mean_estimate(const std::vector<double>& values);

struct Proportion {
  std::size_t hits = 0;
  std::size_t n = 0;
  double p() const noexcept { return n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0; }
  // Binomial standard error sqrt(p(1-p)/n).
  double stderr_() const noexcept;
};

// Two-sided standard normal quantile for confidence level `level` (0.95 -> 1.96).
double z_for(double level);
// Two-sided Student-t quantile with `dof` degrees of freedom.
double t_for(double level, double dof);

// Kolmogorov-Smirnov distance between the empirical law of `samples` and `cdf`.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double se_intercept = 0.0;
  double se_slope = 0.0;
  double cov = 0.0;  // covariance of (intercept, slope)
  std::size_t n = 0;
};
// Weighted least squares y = a + b x with weights 1/var. Standard errors are
// the model-based ones (known variances); requires >= 2 distinct x.
LinearFit weighted_fit(const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<double>& var);

// Batch-means estimate over equally sized consecutive batches.
MeanEstimate batch_means(const std::vector<double>& batches);

// Grid over {1..x_max, overflow} x {s_bins over (0, s_hi), s-overflow}.
// Cell index = (x_row) * (s_bins + 1) + s_col.
class Binning {
 public:
  Binning() = default;
  Binning(std::int64_t x_max, double s_hi, int s_bins);

  // x_max at the given quantile of the pooled population counts.
  static Binning from_samples(const std::vector<HybridState>& samples, double s_hi,
                              int s_bins = 64, double quantile = 0.999);

  std::int64_t x_max() const noexcept { return x_max_; }
  double s_hi() const noexcept { return s_hi_; }
  int s_bins() const noexcept { return s_bins_; }
  double bin_width() const noexcept { return s_hi_ / s_bins_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(x_max_ + 1) * static_cast<std::size_t>(s_bins_ + 1);
  }
  // Requires x >= 1.
  std::size_t index(std::int64_t x, double s) const noexcept;
  // Row x value (x_max + 1 for the overflow row) and s-interval of a cell;
  // the s-overflow column reports [s_hi, +inf).
  std::int64_t cell_x(std::size_t cell) const noexcept;
  double cell_s_lo(std::size_t cell) const noexcept;
  double cell_s_hi(std::size_t cell) const noexcept;
  bool is_overflow(std::size_t cell) const noexcept;

 private:
  std::int64_t x_max_ = 1;
  double s_hi_ = 1.0;
  int s_bins_ = 64;
};

struct Histogram {
  Binning binning;
  std::vector<double> mass;    // sums to 1 when n > 0
  std::vector<double> stderr_;  // sqrt(p (1 - p) / n)
  double n = 0.0;               // number of samples (or snapshots x particles)

  double overflow_mass() const;
};

Histogram make_histogram(const Binning& binning, const std::vector<HybridState>& samples);
// Cell indices of states with x >= 1.
std::vector<std::uint32_t> to_cells(const Binning& binning, const std::vector<HybridState>& samples);
Histogram histogram_from_cells(const Binning& binning, const std::vector<std::uint32_t>& cells);

double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

struct TvEstimate {
  double value = 0.0;    // plug-in distance between the two empirical laws
  double ci_low = 0.0;   // bootstrap quantiles recentred on value
  double ci_high = 0.0;
  double boot_sd = 0.0;
  double debiased = 0.0;  // max(0, 2 value - bootstrap mean)
  double null_mean = 0.0;  // distance between two resamples of the pooled cells
  double null_sd = 0.0;
  // Consistent with identical laws: value <= null_mean + 3 null_sd.
  bool consistent_with_zero() const noexcept { return value <= null_mean + 3.0 * null_sd; }
};

// Bootstrap over samples of each side; null from resampling the pooled cells.
TvEstimate tv_bootstrap(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                        std::size_t n_cells, std::uint64_t seed, int resamples = 200,
                        double level = 0.95);

// Histogram against a fixed reference law (e.g. a seed histogram).
TvEstimate tv_bootstrap_reference(const std::vector<std::uint32_t>& a,
                                  const std::vector<double>& reference, std::uint64_t seed,
                                  int resamples = 200, double level = 0.95);

}  // namespace chemostat

#endif
