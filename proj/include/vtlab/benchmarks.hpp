#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "vtlab/rl_env.hpp"
#include "vtlab/vol_target.hpp"

namespace vtlab {

struct MarkowitzInput {
  Eigen::VectorXd mu;     // per-day expected returns
  Eigen::MatrixXd sigma;  // per-day covariance
  double r_min = 0.0;     // per-day minimum expected return

  /// Symmetrizes sigma and adds `ridge` to its diagonal.
  MarkowitzInput(Eigen::VectorXd mu_, Eigen::MatrixXd sigma_, double r_min_, double ridge = 1e-10);
};

/// min w' S w  s.t.  mu' w >= r_min, sum w = 1, w >= 0, solved exactly by
/// enumerating supports and the two states of the return constraint (n <= 12).
ActionVector markowitz_weights(const MarkowitzInput& in);

ActionVector average_weights(std::size_t n);

/// One-hot on the column with the largest compounded return over rows
/// [t - lookback, t). Ties go to the lowest column index.
ActionVector winner_weights(const StrategyPanel& panel, std::size_t t, std::size_t lookback_days);

struct BenchmarkConfig {
  std::size_t markowitz_window = 252;
  std::size_t markowitz_rebalance = 21;
  /// Per-day return floor. Unset: the cross-sectional mean of mu at each solve.
  std::optional<double> markowitz_r_min;
  std::size_t winner_lookback = 252;
  std::size_t winner_period = 252;

  void validate() const;
};

/// Policies that read the env's strategy panel directly (rows before the
/// current step only). They ignore the observation.
Policy average_policy(std::size_t n);
Policy markowitz_policy(const PortfolioEnv& env, const BenchmarkConfig& cfg);
Policy winner_policy(const PortfolioEnv& env, const BenchmarkConfig& cfg);

}  // namespace vtlab
