#pragma once

#include <string>
#include <vector>

#include "vtlab/market_data.hpp"
#include "vtlab/vol_forecast.hpp"

namespace vtlab {

struct TargetConfig {
  double sigma_target_annual = 0.10;
  double annualization_days = 252.0;
  double leverage_cap = 10.0;

  double sigma_target_daily() const;
  void validate() const;
};

/// Strategy returns and compounded prices, one column per forecaster.
struct StrategyPanel {
  SeriesPanel returns;
  SeriesPanel prices;  // 1 on the first date, then compounded by (1 + returns)

  std::size_t size() const { return returns.rows(); }
  std::size_t strategies() const { return returns.cols(); }
  const std::vector<std::string>& names() const { return returns.names(); }
  const std::vector<Date>& dates() const { return returns.dates(); }
  StrategyPanel slice(std::size_t first, std::size_t last) const;
};

/// k = min(sigma_target / sigma_pred, cap).
double leverage(double sigma_target_daily, double sigma_pred_daily, double leverage_cap);

/// r_t = k_{t-1} * r^bond_t. `lagged_leverage[i]` was set at the close before
/// `bond.dates()[i]` and applies to that day's return.
ReturnSeries strategy_returns(const std::vector<double>& lagged_leverage, const ReturnSeries& bond);

/// Builds one strategy per forecast column over the dates shared by the forecast
/// panel and the bond returns.
StrategyPanel build_strategy_panel(const SeriesPanel& forecasts, const ReturnSeries& bond,
                                   const TargetConfig& cfg);

/// P_0 = 1, P_t = P_{t-1} (1 + r_t) per column; the first row is the base date.
SeriesPanel compound_prices(const SeriesPanel& returns);

}  // namespace vtlab
