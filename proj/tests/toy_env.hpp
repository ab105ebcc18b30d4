#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "vtlab/policy_net.hpp"

namespace testutil {

using namespace vtlab;

inline StrategyPanel random_panel(std::size_t rows, std::size_t n, std::uint64_t seed, double sd = 0.01) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sd);
  auto dates = business_days(parse_date("2019-01-01"), rows);
  std::vector<double> v(rows * n);
  for (auto& x : v) x = z(rng);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("s" + std::to_string(i));
  SeriesPanel r(dates, names, v);
  return {r, compound_prices(r)};
}

inline PortfolioEnv toy_env(std::size_t n, std::size_t steps, std::uint64_t seed, double cost = 1e-3, double sd = 0.01) {
  EnvConfig cfg;
  cfg.window = 6;
  cfg.vol_window = 3;
  cfg.cost_rate = cost;
  const std::size_t first = min_observation_row(cfg.window, cfg.vol_window) + 1;
  return PortfolioEnv(random_panel(first + steps, n, seed, sd), SeriesPanel{}, cfg);
}

inline NetworkArch toy_arch(const PortfolioEnv& env, Activation act) {
  NetworkArch a = NetworkArch::for_env(env);
  a.asset_convs = {{3, 4}};
  a.context_convs = {{3, 4}};
  a.dense = {8};
  a.activation = act;
  return a;
}

inline double max_rel_error(const std::vector<double>& g, const std::vector<double>& fd) {
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double denom = std::max({std::abs(g[i]), std::abs(fd[i]), 1e-7});
    worst = std::max(worst, std::abs(g[i] - fd[i]) / denom);
  }
  return worst;
}


}  // namespace testutil
