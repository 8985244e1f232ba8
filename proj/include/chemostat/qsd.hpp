#ifndef CHEMOSTAT_QSD_HPP
#define CHEMOSTAT_QSD_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "chemostat/bounds.hpp"
#include "chemostat/flow.hpp"
#include "chemostat/stats.hpp"

namespace chemostat {

// Invariant: every particle has x >= 1.
struct ParticleEnsemble {
  std::vector<HybridState> particles;
  double time = 0.0;
  std::uint64_t resample_count = 0;

  static ParticleEnsemble concentrated(HybridState at, std::size_t n);
};

struct QsdEstimate {
  Histogram histogram;
  double time = 0.0;
  std::size_t samples = 0;
  bool boundary_flag = false;  // started on s = 0, where the estimator's bias is unquantified
};

enum class LambdaMethod { SurvivalRegression, FlemingViotKillRate };
const char* to_string(LambdaMethod m) noexcept;

// Invariant: ci_low <= lambda_hat <= ci_high.
struct LambdaEstimate {
  double lambda_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double stderr_ = 0.0;
  LambdaMethod method = LambdaMethod::SurvivalRegression;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool overlaps(const LambdaEstimate& o) const noexcept {
    return ci_low <= o.ci_high && o.ci_low <= ci_high;
  }
};

struct ConditionedSample {
  std::vector<HybridState> survivors;
  Proportion survival;
  QsdEstimate qsd;
};

// Evolves each initial state for time t and keeps surviving end states.
// Uses `binning` when given, else one fitted to the survivors.
ConditionedSample evolve_conditioned(const Model& model, const std::vector<HybridState>& initial,
                                     double t, std::uint64_t seed, unsigned threads = 1,
                                     const std::optional<Binning>& binning = std::nullopt);

// N >= 1000 paths from (x0, s0); PowerError below 100 survivors.
ConditionedSample estimate_qsd_naive(const Model& model, std::int64_t x0, double s0, double t,
                                     std::size_t n, std::uint64_t seed, unsigned threads = 1,
                                     const std::optional<Binning>& binning = std::nullopt);

// Draws states from a histogram: x from the cell row (x_max + 1 for the
// overflow row), s uniform within the cell (s-overflow cells are not sampled).
std::vector<HybridState> sample_from_histogram(const Histogram& h, std::size_t n,
                                               std::uint64_t seed);

struct FvOptions {
  std::vector<double> record_times;  // ensembles returned at these times
  int average_snapshots = 64;        // snapshots in the second half for the QSD histogram
  int s_bins = 64;
  std::optional<Binning> binning;    // default: fitted to the first averaging snapshot
  int lambda_batches = 10;
};

struct FvResult {
  ParticleEnsemble ensemble;
  QsdEstimate qsd;
  LambdaEstimate lambda;
  std::vector<std::vector<HybridState>> recorded;  // one per record time
  std::uint64_t candidates = 0;
};

// Fleming-Viot particle system. Particles follow the exact thinning dynamics
// through one event queue ordered by candidate time; an extinct particle
// takes the current state of a uniformly chosen other particle.
FvResult evolve_fleming_viot(const Model& model, ParticleEnsemble initial, double t,
                             std::uint64_t seed, const FvOptions& options = {});

struct SurvivalCurve {
  std::vector<double> times;
  std::vector<double> survival;
  std::size_t n = 0;
};

struct LambdaSurvivalResult {
  LambdaEstimate lambda;
  SurvivalCurve curve;
  std::size_t window_points = 0;
};

// Slope of -log P(T_Ext > t) over grid points with survival in [0.01, 0.5],
// weighted by binomial variance; the CI resamples whole paths.
LambdaSurvivalResult estimate_lambda_survival(const Model& model, std::int64_t x0, double s0,
                                              const std::vector<double>& grid, std::size_t n,
                                              std::uint64_t seed, unsigned threads = 1,
                                              int bootstrap = 200, double level = 0.95);

struct HEstimate {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  Proportion survival;
};

HEstimate estimate_h(const Model& model, std::int64_t x, double s, double t_large, std::size_t n,
                     const LambdaEstimate& lambda, std::uint64_t seed, unsigned threads = 1);

struct YaglomPair {
  std::size_t a = 0, b = 0;  // indices of the initial conditions
  std::vector<TvEstimate> tv;  // one per time
  std::optional<double> omega_hat;
  double omega_se = 0.0;
  // TV(t_{i+1}) <= TV(t_i) up to the CI half-widths at every step.
  bool monotone = false;
};

struct YaglomReport {
  std::vector<HybridState> initial;
  std::vector<double> times;
  Binning binning;
  std::vector<YaglomPair> pairs;
};

// One Fleming-Viot run of n particles per initial condition; pairwise TV on a shared binning.
YaglomReport yaglom_distance(const Model& model, const std::vector<HybridState>& initial,
                             const std::vector<double>& times, std::size_t n, std::uint64_t seed,
                             unsigned threads = 1);

struct MassRatioReport {
  std::vector<HybridState> points;
  std::vector<double> times;
  std::vector<std::vector<MeanEstimate>> mass;  // [point][time] of E[psi(X_t, S_t)]
  std::vector<double> max_ratio;                // per time, over ordered point pairs
  double max_ratio_overall = 0.0;
  double trend_slope = 0.0;
  double trend_se = 0.0;
  bool bounded = false;  // no positive trend at 95% confidence
};

MassRatioReport mass_ratio_diagnostic(const Model& model, const CompactSpec& K,
                                      const std::vector<double>& times, std::size_t n,
                                      std::uint64_t seed, unsigned threads = 1);

}  // namespace chemostat

#endif
