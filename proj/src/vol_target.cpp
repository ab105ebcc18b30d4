#include "vtlab/vol_target.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vtlab {

double TargetConfig::sigma_target_daily() const {
  return sigma_target_annual / std::sqrt(annualization_days);
}

void TargetConfig::validate() const {
  if (!(sigma_target_annual > 0.0)) throw std::invalid_argument("target: sigma_target_annual must be > 0");
  if (!(annualization_days > 0.0)) throw std::invalid_argument("target: annualization_days must be > 0");
  if (!(leverage_cap > 0.0)) throw std::invalid_argument("target: leverage_cap must be > 0");
}

StrategyPanel StrategyPanel::slice(std::size_t first, std::size_t last) const {
  return {returns.slice(first, last), prices.slice(first, last)};
}

double leverage(double sigma_target_daily, double sigma_pred_daily, double leverage_cap) {
  if (!(sigma_pred_daily > 0.0)) throw std::invalid_argument("leverage: predicted volatility must be > 0");
  return std::min(sigma_target_daily / sigma_pred_daily, leverage_cap);
}

ReturnSeries strategy_returns(const std::vector<double>& lagged_leverage, const ReturnSeries& bond) {
  if (lagged_leverage.size() != bond.size()) {
    throw std::invalid_argument("strategy_returns: leverage and bond returns are misaligned");
  }
  std::vector<double> out(bond.size());
  for (std::size_t t = 0; t < bond.size(); ++t) out[t] = lagged_leverage[t] * bond[t];
  return ReturnSeries(bond.dates(), std::move(out));
}

SeriesPanel compound_prices(const SeriesPanel& returns) {
  std::vector<double> prices(returns.data().size());
  const std::size_t n = returns.cols();
  for (std::size_t c = 0; c < n; ++c) {
    double p = 1.0;
    for (std::size_t r = 0; r < returns.rows(); ++r) {
      if (r > 0) p *= 1.0 + returns(r, c);
      prices[r * n + c] = p;
    }
  }
  return SeriesPanel(returns.dates(), returns.names(), std::move(prices));
}

StrategyPanel build_strategy_panel(const SeriesPanel& forecasts, const ReturnSeries& bond,
                                   const TargetConfig& cfg) {
  cfg.validate();
  const auto aligned = align({forecasts, SeriesPanel::from_series(bond, "__bond__")});
  const std::size_t n = forecasts.cols();
  const double target = cfg.sigma_target_daily();
  std::vector<double> values(aligned.rows() * n);
  for (std::size_t r = 0; r < aligned.rows(); ++r) {
    const double bond_ret = aligned(r, n);
    for (std::size_t c = 0; c < n; ++c) {
      // Forecast dated r was formed at the previous close, so k_{t-1} pairs with r^bond_t.
      const double k = leverage(target, aligned(r, c), cfg.leverage_cap);
      values[r * n + c] = k * bond_ret;
    }
  }
  for (double v : values) {
    if (!(v > -1.0)) throw std::runtime_error("build_strategy_panel: strategy lost more than 100% in a day");
  }
  SeriesPanel rets(aligned.dates(), forecasts.names(), std::move(values));
  auto prices = compound_prices(rets);
  return {std::move(rets), std::move(prices)};
}

}  // namespace vtlab
