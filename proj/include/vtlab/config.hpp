#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vtlab/benchmarks.hpp"
#include "vtlab/market_data.hpp"
#include "vtlab/policy_net.hpp"
#include "vtlab/rl_env.hpp"
#include "vtlab/train.hpp"
#include "vtlab/vol_forecast.hpp"
#include "vtlab/vol_target.hpp"

namespace vtlab {

/// Either CSV inputs or a synthetic market.
struct DataConfig {
  std::optional<SyntheticMarketConfig> synthetic;
  std::filesystem::path returns_csv;
  std::string returns_column;         // empty: first column
  std::filesystem::path context_csv;  // optional
  std::filesystem::path implied_csv;  // optional unless an implied model is configured
};

struct WalkForwardConfig {
  std::optional<Date> anchor_start;  // unset: first date
  int first_test_year = 2014;
  std::optional<int> last_test_year;  // unset: the last year in the data
  std::size_t sensitivity_window = 20;
};

inline const std::vector<std::string> kDefaultRunModels{"drl1", "drl2", "average", "markowitz", "winner"};

struct RunConfig {
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "vtlab_out";
  DataConfig data;
  ForecastConfig forecast;
  TargetConfig target;
  EnvConfig env;
  NetworkArch network;  // assets, context rows and window are filled from the data
  TrainConfig train;
  BenchmarkConfig benchmarks;
  WalkForwardConfig walkforward;
  std::vector<std::string> models = kDefaultRunModels;

  /// Checks every field and that referenced input files exist.
  void validate() const;
};

/// Default configuration: a synthetic market and every documented default.
RunConfig default_run_config();

/// Reads a JSON config; missing keys keep their defaults, unknown keys are errors.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);

/// The effective configuration as JSON.
std::string dump_run_config(const RunConfig& cfg);

/// Sets the global seed and every seed derived from it.
void apply_seed(RunConfig& cfg, std::uint64_t seed);

}  // namespace vtlab
