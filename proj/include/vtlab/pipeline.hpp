#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vtlab/audit.hpp"
#include "vtlab/config.hpp"
#include "vtlab/evalkit.hpp"

namespace vtlab {

struct MarketInputs {
  ReturnSeries bond;
  SeriesPanel context;  // may have no columns
  SeriesPanel implied;  // may have no columns
};

/// Loads CSV inputs or simulates the configured synthetic market.
MarketInputs load_inputs(const RunConfig& cfg);

/// Inputs restricted to dates <= last.
MarketInputs truncate_inputs(const MarketInputs& in, Date last);

/// Volatility forecasts of every configured model, then one targeting strategy per model.
StrategyPanel build_strategies(const RunConfig& cfg, const MarketInputs& in, std::size_t fit_rows = 0,
                               DataAudit* audit = nullptr, SeriesPanel* forecasts_out = nullptr);

/// Context rows seen by the env: the exogenous signals then the derived rows.
std::vector<std::string> context_feature_names(const SeriesPanel& context);

NetworkArch network_for(const RunConfig& cfg, const PortfolioEnv& env);

struct WalkForwardOptions {
  /// Worker threads across splits; 0 reads VT_LAB_THREADS, else hardware concurrency.
  std::size_t threads = 0;
  /// Test hook: lets the training phase read this many rows past train_end.
  std::size_t leak_days = 0;
};

struct SplitResult {
  WalkForwardSplit split;
  std::map<std::string, EpisodeResult> test;  // keyed by report model name
  std::map<std::string, TrainReport> training;
  SensitivityReport sensitivity;
  SeriesPanel test_forecasts;
  std::vector<DataAudit::Violation> violations;
  std::size_t audit_reads = 0;
};

struct WalkForwardResult {
  std::vector<SplitResult> splits;
  ReportInputs report;

  bool leak_free() const;
};

/// Report name for a config model key (drl1 -> DRL1).
std::string report_model_name(const std::string& key);

WalkForwardResult run_walkforward(const RunConfig& cfg, const MarketInputs& in,
                                  const WalkForwardOptions& opts = {});

/// Raw run artifacts, so `report` can rebuild the bundle without retraining.
void save_artifacts(const std::filesystem::path& dir, const ReportInputs& in);
ReportInputs load_artifacts(const std::filesystem::path& dir);

std::size_t worker_threads(std::size_t requested);

}  // namespace vtlab
