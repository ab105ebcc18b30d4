#include "vtlab/benchmarks.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace vtlab {

MarkowitzInput::MarkowitzInput(Eigen::VectorXd mu_, Eigen::MatrixXd sigma_, double r_min_, double ridge)
    : mu(std::move(mu_)), sigma(std::move(sigma_)), r_min(r_min_) {
  const auto n = mu.size();
  if (n < 1) throw std::invalid_argument("markowitz: empty expected-return vector");
  if (sigma.rows() != n || sigma.cols() != n) throw std::invalid_argument("markowitz: covariance shape mismatch");
  if (!mu.allFinite() || !sigma.allFinite() || !std::isfinite(r_min)) {
    throw std::invalid_argument("markowitz: non-finite input");
  }
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  sigma.diagonal().array() += ridge;
}

ActionVector markowitz_weights(const MarkowitzInput& in) {
  const int n = static_cast<int>(in.mu.size());
  if (n > 12) throw std::invalid_argument("markowitz: active-set enumeration supports at most 12 assets");
  const double max_mu = in.mu.maxCoeff();
  if (in.r_min > max_mu + 1e-12) {
    std::ostringstream msg;
    msg << "markowitz: infeasible, r_min " << in.r_min << " exceeds the largest expected return " << max_mu;
    throw std::invalid_argument(msg.str());
  }

  double best_var = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    const int m = static_cast<int>(idx.size());
    for (int active = 0; active < 2; ++active) {
      const int dim = m + 1 + active;
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dim, dim);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) K(a, b) = 2.0 * in.sigma(idx[a], idx[b]);
        K(a, m) = K(m, a) = 1.0;
        if (active) K(a, m + 1) = K(m + 1, a) = in.mu(idx[a]);
      }
      rhs(m) = 1.0;
      if (active) rhs(m + 1) = in.r_min;
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(K);
      const Eigen::VectorXd sol = qr.solve(rhs);
      if (!sol.allFinite() || (K * sol - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) continue;

      Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
      bool feasible = true;
      for (int a = 0; a < m; ++a) {
        if (sol(a) < -1e-10) {
          feasible = false;
          break;
        }
        w(idx[a]) = std::max(sol(a), 0.0);
      }
      if (!feasible) continue;
      w /= w.sum();
      if (in.mu.dot(w) < in.r_min - 1e-9) continue;
      const double var = w.dot(in.sigma * w);
      if (var < best_var) {
        best_var = var;
        best = w;
      }
    }
  }
  if (best.size() == 0) throw std::runtime_error("markowitz: no feasible KKT point found");
  return ActionVector(best.data(), best.data() + n);
}

ActionVector average_weights(std::size_t n) {
  if (n < 1) throw std::invalid_argument("average_weights: n must be >= 1");
  return ActionVector(n, 1.0 / static_cast<double>(n));
}

ActionVector winner_weights(const StrategyPanel& panel, std::size_t t, std::size_t lookback_days) {
  if (lookback_days < 1) throw std::invalid_argument("winner_weights: lookback must be >= 1");
  if (t < lookback_days) throw std::invalid_argument("winner_weights: t is smaller than the lookback");
  if (t > panel.size()) throw std::out_of_range("winner_weights: t past end of panel");
  const std::size_t n = panel.strategies();
  std::size_t best = 0;
  double best_growth = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double log_growth = 0.0;
    for (std::size_t r = t - lookback_days; r < t; ++r) log_growth += std::log1p(panel.returns(r, i));
    if (log_growth > best_growth) {
      best_growth = log_growth;
      best = i;
    }
  }
  ActionVector w(n, 0.0);
  w[best] = 1.0;
  return w;
}

void BenchmarkConfig::validate() const {
  if (markowitz_window < 2) throw std::invalid_argument("benchmarks: markowitz_window must be >= 2");
  if (markowitz_rebalance < 1) throw std::invalid_argument("benchmarks: markowitz_rebalance must be >= 1");
  if (winner_lookback < 1 || winner_period < 1) {
    throw std::invalid_argument("benchmarks: winner lookback and period must be >= 1");
  }
}

Policy average_policy(std::size_t n) {
  const auto w = average_weights(n);
  return [w](const Observation&, std::size_t) { return w; };
}

namespace {

struct BlockCache {
  std::size_t block = std::numeric_limits<std::size_t>::max();
  ActionVector weights;
};

ActionVector estimate_markowitz(const StrategyPanel& panel, std::size_t row, const BenchmarkConfig& cfg) {
  const std::size_t n = panel.strategies();
  const std::size_t first = row > cfg.markowitz_window ? row - cfg.markowitz_window : 0;
  const std::size_t len = row - first;
  if (len < std::max<std::size_t>(20, n + 1)) return average_weights(n);
  Eigen::MatrixXd X(len, n);
  for (std::size_t r = 0; r < len; ++r) {
    for (std::size_t i = 0; i < n; ++i) X(r, i) = panel.returns(first + r, i);
  }
  const Eigen::VectorXd mu = X.colwise().mean().transpose();
  const Eigen::MatrixXd centered = X.rowwise() - mu.transpose();
  const Eigen::MatrixXd sigma = centered.transpose() * centered / static_cast<double>(len - 1);
  double r_min = cfg.markowitz_r_min ? *cfg.markowitz_r_min : mu.mean();
  r_min = std::min(r_min, mu.maxCoeff());
  return markowitz_weights(MarkowitzInput(mu, sigma, r_min));
}

}  // namespace

Policy markowitz_policy(const PortfolioEnv& env, const BenchmarkConfig& cfg) {
  cfg.validate();
  auto cache = std::make_shared<BlockCache>();
  const PortfolioEnv* e = &env;
  return [e, cfg, cache](const Observation&, std::size_t k) {
    const std::size_t block = k / cfg.markowitz_rebalance;
    if (cache->block != block) {
      cache->weights = estimate_markowitz(e->panel(), e->row(block * cfg.markowitz_rebalance), cfg);
      cache->block = block;
    }
    return cache->weights;
  };
}

Policy winner_policy(const PortfolioEnv& env, const BenchmarkConfig& cfg) {
  cfg.validate();
  auto cache = std::make_shared<BlockCache>();
  const PortfolioEnv* e = &env;
  return [e, cfg, cache](const Observation&, std::size_t k) {
    const std::size_t block = k / cfg.winner_period;
    if (cache->block != block) {
      const std::size_t t = e->row(block * cfg.winner_period);
      const std::size_t lookback = std::min(cfg.winner_lookback, t);
      cache->weights = lookback == 0 ? average_weights(e->assets()) : winner_weights(e->panel(), t, lookback);
      cache->block = block;
    }
    return cache->weights;
  };
}

}  // namespace vtlab
