#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtlab/market_data.hpp"
#include "vtlab/policy_net.hpp"

namespace vtlab {

// --- walk-forward ----------------------------------------------------------------

struct WalkForwardSplit {
  Date train_start, train_end, test_start, test_end;
  // Row indices into the date vector the splits were built from (inclusive).
  std::size_t train_first = 0, train_last = 0, test_first = 0, test_last = 0;
  int test_year = 0;
};

/// One anchored split per test year. Training always starts at the first date
/// on or after `anchor_start` and ends the trading day before the test year.
std::vector<WalkForwardSplit> walk_forward_splits(const std::vector<Date>& dates, Date anchor_start,
                                                  int first_test_year, int last_test_year);

// --- metrics ----------------------------------------------------------------------

class MetricsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct MetricsReport {
  double annual_return = 0.0;  // percent
  double sharpe = 0.0;
  double sortino = 0.0;        // NaN when no return is negative
  double mdd = 0.0;            // percent, <= 0
  double mdd_over_vol = 0.0;   // mdd / annualized vol in percent
};

/// Throws MetricsError on an empty or zero-variance series.
MetricsReport metrics(std::span<const double> returns, double periods_per_year = 252.0);
MetricsReport metrics(const ReturnSeries& returns, double periods_per_year = 252.0);

/// ((prod(1+r))^(ppy/n) - 1) * 100; defined for any non-empty series.
double annualized_return_pct(std::span<const double> returns, double periods_per_year = 252.0);

/// Drawdown alone; defined for any non-empty series.
double max_drawdown_pct(std::span<const double> returns);

// --- running-average t-test ---------------------------------------------------------

std::vector<double> running_average(std::span<const double> returns);

struct TTestResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  std::size_t n_obs = 0;
  bool degenerate = false;  // zero-variance difference with a nonzero mean
};

/// One-sample two-sided t-test on d_t = runavg(a)_t - runavg(b)_t.
TTestResult ttest_running_avg_diff(std::span<const double> a, std::span<const double> b);
TTestResult ttest_running_avg_diff(const ReturnSeries& a, const ReturnSeries& b);

// --- feature sensitivity --------------------------------------------------------------

struct SensitivityReport {
  std::vector<std::string> features;
  std::vector<double> raw;
  std::vector<double> score;         // affine map of raw onto [0, 100]
  std::vector<std::size_t> ranking;  // feature indices by descending raw
};

/// Feature names in input order: ret:<strategy>..., vol:<strategy>..., then one
/// per context row.
std::vector<std::string> feature_names(const std::vector<std::string>& strategies,
                                       const std::vector<std::string>& context_rows);

/// A feature is one input row (a strategy's return or vol channel, or a context
/// row). For observation s >= d-1 the row is replaced across the whole window by
/// the mean of its latest value over observations s-d+1..s, and raw_j averages
/// the L1 change in the action.
SensitivityReport feature_sensitivity(const PolicyParams& params, const std::vector<Observation>& observations,
                                      std::size_t d, std::vector<std::string> names = {});

/// Scales to [0, 100] by min/max; all-equal inputs map to 100.
std::vector<double> scale_scores(std::span<const double> raw);

// --- report bundle ----------------------------------------------------------------------

inline const std::vector<std::string> kReportModels{"DRL1", "DRL2", "Average", "Markowitz", "Winner"};

struct AllocationTrack {
  std::vector<Date> dates;
  std::vector<ActionVector> weights;
};

struct ReportInputs {
  /// Stitched out-of-sample net returns per model, all on the same dates.
  std::map<std::string, ReturnSeries> returns;
  std::vector<std::string> model_order = kReportModels;
  std::vector<std::string> strategies;
  std::map<std::string, AllocationTrack> allocations;
  /// Volatility forecasts per strategy (columns = strategies) on the evaluation dates.
  SeriesPanel forecasts;
  std::string rank_model = "DRL1";
  std::vector<SensitivityReport> sensitivity;  // one per split; averaged in the report
};

/// Rank (1 = lowest forecast) of the dominant strategy's forecast, counted per day.
std::vector<std::size_t> rank_histogram(const AllocationTrack& allocations, const SeriesPanel& forecasts);

/// Writes metrics_{1y,3y,5y}.csv, ttest.csv, sensitivity.csv, allocations.csv,
/// rank_histogram.csv and gnuplot .dat files into `dir`.
void write_report(const std::filesystem::path& dir, const ReportInputs& in);

}  // namespace vtlab
