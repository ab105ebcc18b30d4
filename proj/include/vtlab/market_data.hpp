#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vtlab {

using Date = std::chrono::year_month_day;

Date parse_date(const std::string& text);
std::string format_date(Date d);

/// Raised for malformed or inconsistent input data (CSV rows, alignment).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dated daily simple returns. Dates strictly increasing, every value > -1.
class ReturnSeries {
 public:
  ReturnSeries() = default;
  ReturnSeries(std::vector<Date> dates, std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Rows [first, last).
  ReturnSeries slice(std::size_t first, std::size_t last) const;

 private:
  std::vector<Date> dates_;
  std::vector<double> values_;
};

/// Date x series matrix, row-major. All columns share the date index.
class SeriesPanel {
 public:
  SeriesPanel() = default;
  SeriesPanel(std::vector<Date> dates, std::vector<std::string> names,
              std::vector<double> values);

  static SeriesPanel from_series(const ReturnSeries& s, std::string name);
  static SeriesPanel from_columns(std::vector<Date> dates,
                                  std::vector<std::string> names,
                                  const std::vector<std::vector<double>>& columns);

  std::size_t rows() const { return dates_.size(); }
  std::size_t cols() const { return names_.size(); }
  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& data() const { return values_; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }
  std::vector<double> column(std::size_t c) const;
  std::vector<double> column(const std::string& name) const;
  std::size_t column_index(const std::string& name) const;
  bool has_column(const std::string& name) const;

  SeriesPanel slice(std::size_t first, std::size_t last) const;
  SeriesPanel select(const std::vector<std::string>& names) const;
  /// Column as a ReturnSeries (validates the return invariants).
  ReturnSeries series(std::size_t c) const;

  bool operator==(const SeriesPanel&) const = default;

 private:
  std::vector<Date> dates_;
  std::vector<std::string> names_;
  std::vector<double> values_;
};

/// Prices panel; same layout as SeriesPanel, values must be > 0.
using PricePanel = SeriesPanel;

// --- CSV ------------------------------------------------------------------
// Schema: header row mandatory, first column ISO-8601 date, remaining columns
// named numeric series. Missing cells are a hard error.

SeriesPanel load_panel_csv(const std::filesystem::path& path);
ReturnSeries load_returns_csv(const std::filesystem::path& path, const std::string& column);
void write_panel_csv(const std::filesystem::path& path, const SeriesPanel& panel);

// --- transforms -------------------------------------------------------------

SeriesPanel align(const std::vector<SeriesPanel>& panels);

SeriesPanel price_relatives(const PricePanel& prices);

/// Sample std (denominator d-1) over [t-d+1, t]; output starts at input row d-1.
ReturnSeries rolling_std(const ReturnSeries& series, std::size_t d);
std::vector<double> rolling_std(std::span<const double> values, std::size_t d);

// --- synthetic market ------------------------------------------------------

struct RegimeSpec {
  double persistence = 0.99;  // P(stay in regime)
  double mu = 0.0;            // drift per day
  double omega = 1e-6;
  double alpha = 0.05;
  double beta = 0.9;
};

struct SyntheticMarketConfig {
  std::size_t n_days = 5000;
  std::vector<RegimeSpec> regimes{RegimeSpec{}};
  double context_noise = 0.1;
  std::size_t nuisance_signals = 2;
  std::size_t implied_indices = 3;
  double implied_noise = 0.05;
  std::uint64_t seed = 42;
  Date start = Date{std::chrono::year{2000}, std::chrono::January, std::chrono::day{3}};

  void validate() const;
};

struct SyntheticMarket {
  ReturnSeries returns;
  /// Noisy regime indicator ("regime_signal") followed by nuisance signals.
  SeriesPanel context;
  /// Positive implied-volatility-style indices, annualized percent.
  SeriesPanel implied;
  std::vector<int> regimes;
  /// Conditional daily vol of day t, known at the end of day t-1.
  std::vector<double> conditional_vol;
};

SyntheticMarket simulate_market(const SyntheticMarketConfig& cfg);

/// Weekday calendar starting at `start` (inclusive if it is a weekday).
std::vector<Date> business_days(Date start, std::size_t count);

}  // namespace vtlab
