#ifndef CHEMOSTAT_CLI_HPP
#define CHEMOSTAT_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chemostat/bounds.hpp"
#include "chemostat/lyapunov.hpp"
#include "chemostat/model.hpp"
#include "chemostat/ode.hpp"

namespace chemostat::cli {

inline constexpr const char* kToolName = "chemostat-qsd";
inline constexpr const char* kToolVersion = "0.1.0";

struct FlowBlock {
  std::vector<std::int64_t> ell{1, 2, 3};
  std::vector<double> s0{0.05, 0.25, 0.45, 1.0};
  std::vector<double> times{0.1, 0.5, 1.0, 2.0};
  std::int64_t equilibria = 20;
};

struct SimulateBlock {
  std::int64_t x0 = 2;
  double s0 = 0.25;
  double horizon = 10.0;
};

struct LyapunovBlock {
  double rho = 2.0;
  double p = 0.0;  // 0 selects half of the admissible maximum
  std::optional<LyapunovConfig> explicit_config;
  bool fit_zeta = false;  // only with explicit_config
  DriftGrid grid;
  bool g_check = true;
  std::int64_t g_x_max = 50;
  int g_s_points = 400;
};

struct QsdBlock {
  std::string method = "fleming_viot";  // or "naive"
  std::int64_t x0 = 2;
  double s0 = 0.25;
  double t = 20.0;
  std::int64_t n = 2000;
  int s_bins = 64;
  std::vector<double> lambda_grid;  // empty: no survival regression
  std::int64_t lambda_n = 10000;
  std::vector<HybridState> yaglom_initial;  // empty: no Yaglom run
  std::vector<double> yaglom_times{2.0, 5.0, 10.0, 20.0};
  std::int64_t yaglom_n = 2000;
  std::vector<HybridState> h_points;  // requires lambda_grid
  double h_t_large = 10.0;
  std::int64_t h_n = 10000;
  std::optional<CompactSpec> mass_ratio_K;
  std::vector<double> mass_ratio_times{1.0, 2.0, 5.0, 10.0, 20.0};
  std::int64_t mass_ratio_n = 2000;
};

struct SmallSetBlock {
  double tau0 = 0.5;
  double s0 = 0.1;
  double s1 = 0.4;
  std::int64_t n = 100000;
  int starts = 3;
  int subintervals = 4;
};

struct HittingBlock {
  HittingScenario scenario;
  std::int64_t n = 100000;
  double half_width = 0.0;  // 0 selects 1e-3 s_bar1
};

struct InvSubstrateBlock {
  std::int64_t x = 1;
  double t = 0.25;
  std::int64_t n = 100000;
};

struct ExpMomentBlock {
  std::int64_t x = 1;
  double s = 1.0;
  double t_cap = 50.0;
  std::int64_t n = 10000;
};

struct BoundsBlock {
  std::optional<SmallSetBlock> small_set;
  std::vector<HittingBlock> hitting;
  std::optional<InvSubstrateBlock> inv_substrate;
  std::optional<ExpMomentBlock> exp_moment;
};

struct ReportBlock {
  std::vector<std::string> manifests;  // empty: every */manifest.json under the output parent
};

// Invariants: seed present for stochastic subcommands (checked by run);
// unknown keys rejected at parse time.
struct RunConfig {
  ChemostatParams params;
  FlowSolverConfig solver;
  std::optional<std::uint64_t> seed;
  std::int64_t replicas = 1;
  std::string output_dir = "out";
  FlowBlock flow;
  SimulateBlock simulate;
  LyapunovBlock lyapunov;
  QsdBlock qsd;
  BoundsBlock bounds;
  ReportBlock report;
  nlohmann::json echo;  // the parsed document, for the manifest
};

// ConfigError listing every problem found (one per line).
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

bool is_stochastic(const std::string& subcommand);
const std::vector<std::string>& subcommands();

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string subcommand;
  nlohmann::json config;
  std::string tool_version = kToolVersion;
  double wall_clock_seconds = 0.0;
  std::vector<OutputFile> outputs;
  int exit_code = 0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);
// Write to a temporary sibling, then rename over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Collects the files of one run and writes its manifest last.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);
  const std::filesystem::path& dir() const noexcept { return dir_; }
  void write(const std::string& name, const std::string& content);
  const std::vector<OutputFile>& files() const noexcept { return files_; }
  void write_manifest(RunManifest manifest);

 private:
  std::filesystem::path dir_;
  std::vector<OutputFile> files_;
};

// Runs one subcommand and returns the process exit code: 0 success,
// 1 configuration or precondition error, 2 statistical-power error,
// 3 invariant violation or failed certificate. Diagnostics go to stderr.
int run(const std::string& subcommand, const RunConfig& config, unsigned threads = 0);

}  // namespace chemostat::cli

#endif
