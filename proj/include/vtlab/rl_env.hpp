#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtlab/audit.hpp"
#include "vtlab/market_data.hpp"
#include "vtlab/vol_target.hpp"

namespace vtlab {

/// Portfolio weights: non-negative, summing to one.
using ActionVector = std::vector<double>;

void validate_action(std::span<const double> a, double tol = 1e-9);

/// Augmented state: asset tensor [returns, vols] x n strategies x window, plus
/// the context matrix (p signals x window). Column w-1 is the most recent day.
struct Observation {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t w = 0;
  std::vector<double> asset;    // index (channel * n + i) * w + k
  std::vector<double> context;  // index j * w + k

  Observation() = default;
  Observation(std::size_t n_, std::size_t p_, std::size_t w_)
      : n(n_), p(p_), w(w_), asset(2 * n_ * w_, 0.0), context(p_ * w_, 0.0) {}

  double& returns(std::size_t i, std::size_t k) { return asset[i * w + k]; }
  double& vol(std::size_t i, std::size_t k) { return asset[(n + i) * w + k]; }
  double& ctx(std::size_t j, std::size_t k) { return context[j * w + k]; }
  double returns(std::size_t i, std::size_t k) const { return asset[i * w + k]; }
  double vol(std::size_t i, std::size_t k) const { return asset[(n + i) * w + k]; }
  double ctx(std::size_t j, std::size_t k) const { return context[j * w + k]; }
};

struct EnvConfig {
  double cost_rate = 1e-4;  // 1 basis point per unit turnover
  std::size_t window = 60;
  std::size_t vol_window = 20;
  double gamma = 1.0;
  /// Zeroes the volatility channel and the context matrix (the no-context variant).
  bool mask_context_and_vol = false;

  void validate() const;
};

/// Number of derived context rows appended after the exogenous signals:
/// max strategy return, min strategy return, max strategy volatility.
inline constexpr std::size_t kDerivedContextRows = 3;

/// Observation for row t from panel rows [t-w+1, t]. Context must share the
/// panel's dates. The vol channel is the rolling std over `vol_window` days.
Observation build_observation(const StrategyPanel& panel, const SeriesPanel& context,
                              std::size_t t, std::size_t w, std::size_t vol_window = 20);

/// Smallest row index that build_observation accepts.
std::size_t min_observation_row(std::size_t w, std::size_t vol_window);

/// w = (u . a)^-1 (u * a).
ActionVector drift_weights(std::span<const double> relatives, std::span<const double> action);

/// Raised when the net portfolio value of a step is non-positive.
class EpisodeAborted : public std::runtime_error {
 public:
  EpisodeAborted(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct EnvState {
  std::size_t t = 0;         // steps taken
  ActionVector drifted;      // w_{t-1}; all zero before the first trade (cash)
  double cumulative = 0.0;   // discounted log reward so far
};

struct StepResult {
  EnvState state;
  double reward = 0.0;       // undiscounted log(net)
  double net_return = 0.0;   // net - 1
  double cost = 0.0;
};

EnvState initial_state(std::size_t n);

/// gross = a.u; net = gross - cost_rate |a - w_{t-1}|_1; reward = log(net).
StepResult step(const EnvState& state, std::span<const double> action,
                std::span<const double> relatives, double cost_rate, double gamma = 1.0);

/// An episode over a contiguous span of a strategy panel. Step k earns the
/// return of row first_row + k, and its observation ends at the row before.
class PortfolioEnv {
 public:
  PortfolioEnv(StrategyPanel panel, SeriesPanel context, EnvConfig cfg,
               std::size_t first_row = 0, DataAudit* audit = nullptr,
               std::string audit_name = "env");

  std::size_t assets() const { return panel_.strategies(); }
  std::size_t context_rows() const { return context_rows_; }
  std::size_t window() const { return cfg_.window; }
  std::size_t steps() const { return panel_.size() - first_row_; }
  std::size_t first_row() const { return first_row_; }
  const EnvConfig& config() const { return cfg_; }
  const StrategyPanel& panel() const { return panel_; }
  const SeriesPanel& context() const { return context_; }

  /// Observation seen before step k. k == steps() gives the terminal observation.
  Observation observation(std::size_t k) const;
  /// Price relatives u = 1 + r for step k.
  std::span<const double> relatives(std::size_t k) const;
  Date date(std::size_t k) const { return panel_.dates()[first_row_ + k]; }
  /// Panel row earned by step k.
  std::size_t row(std::size_t k) const { return first_row_ + k; }

 private:
  StrategyPanel panel_;
  SeriesPanel context_;
  EnvConfig cfg_;
  std::size_t first_row_;
  std::size_t context_rows_;
  std::vector<double> relatives_;  // rows x n
  std::vector<double> vols_;       // rows x n, rolling std (zero before enough history)
  std::vector<double> derived_;    // rows x kDerivedContextRows
};

using Policy = std::function<ActionVector(const Observation&, std::size_t step)>;

struct EpisodeResult {
  double reward = 0.0;  // sum of gamma^(k) log(net_k)
  std::vector<ActionVector> actions;
  std::vector<double> net_returns;
  std::vector<double> costs;
  std::vector<Date> dates;
};

EpisodeResult run_episode(const PortfolioEnv& env, const Policy& policy);

}  // namespace vtlab
