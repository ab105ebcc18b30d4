#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "vtlab/audit.hpp"
#include "vtlab/market_data.hpp"

namespace vtlab {

/// Lower bound on any daily volatility forecast.
inline constexpr double kVolFloor = 1e-5;

/// Dated daily volatility values (return units per sqrt(day)).
///
/// Used both for forecasts (the value dated t only uses information up to
/// t-1) and for realized measures (the value dated t uses data up to t).
struct VolSeries {
  std::vector<Date> dates;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};
using ForecastSeries = VolSeries;

// --- GARCH / GJR-GARCH -------------------------------------------------------

struct GarchParams {
  double mu = 0.0;
  double omega = 1e-6;
  double alpha = 0.05;
  double beta = 0.9;
  double gamma = 0.0;  // leverage term; 0 for plain GARCH

  double persistence() const { return alpha + 0.5 * gamma + beta; }
  double unconditional_variance() const { return omega / (1.0 - persistence()); }
  bool valid() const;
  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

/// Conditional variances sigma^2_t, t = 0..n-1. sigma^2_0 is the unconditional
/// variance and sigma^2_t depends on returns up to t-1 only.
std::vector<double> garch_filter(const GarchParams& p, std::span<const double> returns);
/// Variance for the day after the last return.
double garch_next_variance(const GarchParams& p, std::span<const double> returns);

double gaussian_loglik(const GarchParams& p, std::span<const double> returns);
double gaussian_loglik_from_variance(std::span<const double> eps, std::span<const double> variance);

GarchParams fit_garch(const ReturnSeries& returns, bool leverage);
GarchParams fit_garch(std::span<const double> returns, bool leverage);

ForecastSeries garch_forecast(const GarchParams& p, const ReturnSeries& returns);

// --- rolling-window models ---------------------------------------------------

/// sigma_pred(t) = std of returns over [t-window, t-1].
ForecastSeries moving_average_forecast(const ReturnSeries& returns, std::size_t window = 20);

/// Long-window baseline that re-levels to the short-window estimate when the
/// two disagree by more than `jump_threshold` x baseline.
ForecastSeries level_shift_forecast(const ReturnSeries& returns, std::size_t short_window,
                                    std::size_t long_window, double jump_threshold);

/// RiskMetrics-style EWMA variance, seeded with the sample variance of the first
/// `seed_window` returns.
ForecastSeries ewma_forecast(const ReturnSeries& returns, double lambda = 0.94,
                             std::size_t seed_window = 20);

// --- realized measures, HAR and HEAVY ----------------------------------------

/// Squared returns, demeaned by the expanding mean, averaged over `smooth` days.
/// Value dated t uses returns up to t.
VolSeries realized_variance(const ReturnSeries& returns, std::size_t smooth = 5);
VolSeries realized_vol(const ReturnSeries& returns, std::size_t smooth = 5);

struct HarParams {
  double intercept = 0.0;
  double beta_daily = 0.0;
  double beta_weekly = 0.0;
  double beta_monthly = 0.0;
};

struct HarFit {
  HarParams params;
  std::array<double, 4> std_errors{};
  double residual_ss = 0.0;
  std::size_t n_obs = 0;
};

inline constexpr std::size_t kHarWeek = 5;
inline constexpr std::size_t kHarMonth = 22;

HarFit fit_har_detailed(const VolSeries& realized);
HarParams fit_har(const VolSeries& realized);
/// Forecast dated at realized.dates[t] uses realized values up to t-1.
ForecastSeries har_forecast(const HarParams& p, const VolSeries& realized);

struct HeavyParams {
  double omega = 1e-7;
  double alpha_rm = 0.3;
  double beta = 0.6;

  void validate() const;
};

/// sigma^2_t = omega + alpha_rm * rm_{t-1} + beta * sigma^2_{t-1}. When no
/// initial variance is given, sigma^2_0 = (omega + alpha_rm * rm_0) / (1 - beta).
std::vector<double> heavy_filter(const HeavyParams& p, std::span<const double> returns,
                                 std::span<const double> realized_measure,
                                 double initial_variance = -1.0);
double heavy_loglik(const HeavyParams& p, std::span<const double> returns,
                    std::span<const double> realized_measure);
HeavyParams fit_heavy(std::span<const double> returns, std::span<const double> realized_measure);
/// Aligns returns with the realized measure by date and fits.
HeavyParams fit_heavy(const ReturnSeries& returns, const VolSeries& realized_variance);
ForecastSeries heavy_forecast(const HeavyParams& p, const ReturnSeries& returns,
                              const VolSeries& realized_variance);

// --- implied-volatility models -----------------------------------------------

/// sigma_pred(t) = IV_{t-1} * mean(realized over [t-L, t-1]) / mean(IV over [t-L, t-1]).
/// The index may be quoted in any unit (e.g. annualized percent); the ratio cancels it.
ForecastSeries implied_adjusted_forecast(const SeriesPanel& implied, const std::string& column,
                                         const VolSeries& realized, std::size_t lookback);

struct PcaForecast {
  ForecastSeries forecast;
  /// Share of trailing-window variance explained by the first component, per forecast date.
  std::vector<double> explained_ratio;
  /// Forecast dates where the first component explains less than twice the
  /// share of a single column (no dominant common factor).
  std::size_t weak_factor_days = 0;
};

PcaForecast pca_implied_forecast(const SeriesPanel& implied, const VolSeries& realized,
                                 std::size_t lookback);

/// Leading eigenpair of a symmetric matrix (row-major, k x k) by power iteration.
struct Eigenpair {
  double value = 0.0;
  std::vector<double> vector;
};
Eigenpair leading_eigenpair(std::span<const double> matrix, std::size_t k, int max_iter = 1000,
                            double tol = 1e-12);

// --- the full model set ------------------------------------------------------

inline const std::vector<std::string> kDefaultModels{
    "moving_average", "level_shift", "garch",         "gjr_garch", "heavy",
    "har",            "adjusted_tyvix", "adjusted_pca", "rm2006"};

struct ForecastConfig {
  std::vector<std::string> models = kDefaultModels;
  std::size_t ma_window = 20;
  std::size_t ls_short_window = 10;
  std::size_t ls_long_window = 60;
  double ls_threshold = 0.5;
  double ewma_lambda = 0.94;
  std::size_t ewma_seed_window = 20;
  std::size_t realized_smooth = 5;
  std::size_t implied_lookback = 60;
  std::size_t pca_lookback = 60;
  std::string tyvix_column;  // empty: first implied column

  bool needs_implied() const;
  void validate() const;
};

struct ForecastInputs {
  ReturnSeries returns;
  SeriesPanel implied;  // may be empty when no implied model is configured
};

struct ForecastBundle {
  /// One column per configured model, dates = intersection of all model outputs.
  SeriesPanel forecasts;
  GarchParams garch;
  GarchParams gjr;
  HeavyParams heavy;
  HarParams har;
};

/// Fits every parametric model on rows [0, fit_rows) of the inputs and filters the
/// whole span with the fitted parameters. fit_rows = 0 means the full span.
/// The last date the fits read is reported to `audit` as "forecast_fit".
ForecastBundle forecast_all(const ForecastConfig& cfg, const ForecastInputs& data,
                            std::size_t fit_rows = 0, DataAudit* audit = nullptr);

}  // namespace vtlab
