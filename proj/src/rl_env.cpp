#include "vtlab/rl_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vtlab {

void validate_action(std::span<const double> a, double tol) {
  if (a.empty()) throw std::invalid_argument("action: empty weight vector");
  double sum = 0.0;
  for (double v : a) {
    if (!(v >= 0.0)) throw std::invalid_argument("action: weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("action: weights must sum to 1");
}

void EnvConfig::validate() const {
  if (!(cost_rate >= 0.0)) throw std::invalid_argument("env: cost_rate must be >= 0");
  if (window < 1) throw std::invalid_argument("env: window must be >= 1");
  if (vol_window < 2) throw std::invalid_argument("env: vol_window must be >= 2");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("env: gamma must lie in (0,1]");
}

std::size_t min_observation_row(std::size_t w, std::size_t vol_window) {
  return w + vol_window - 2;
}

namespace {

double window_std(const SeriesPanel& r, std::size_t col, std::size_t end, std::size_t d) {
  double mean = 0.0;
  for (std::size_t k = end + 1 - d; k <= end; ++k) mean += r(k, col);
  mean /= static_cast<double>(d);
  double ss = 0.0;
  for (std::size_t k = end + 1 - d; k <= end; ++k) ss += (r(k, col) - mean) * (r(k, col) - mean);
  return std::sqrt(ss / static_cast<double>(d - 1));
}

}  // namespace

Observation build_observation(const StrategyPanel& panel, const SeriesPanel& context,
                              std::size_t t, std::size_t w, std::size_t vol_window) {
  if (w < 1) throw std::invalid_argument("build_observation: window must be >= 1");
  if (t >= panel.size()) throw std::out_of_range("build_observation: row past end of panel");
  if (t < min_observation_row(w, vol_window)) {
    throw std::invalid_argument("build_observation: t too small for window and vol window");
  }
  if (context.cols() > 0 && context.dates() != panel.dates()) {
    throw DataError("build_observation: context is not aligned with the strategy panel");
  }
  const std::size_t n = panel.strategies();
  Observation obs(n, context.cols() + kDerivedContextRows, w);
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t row = t + 1 - w + k;
    double rmax = -std::numeric_limits<double>::infinity();
    double rmin = std::numeric_limits<double>::infinity();
    double vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = panel.returns(row, i);
      const double v = window_std(panel.returns, i, row, vol_window);
      obs.returns(i, k) = r;
      obs.vol(i, k) = v;
      rmax = std::max(rmax, r);
      rmin = std::min(rmin, r);
      vmax = std::max(vmax, v);
    }
    for (std::size_t j = 0; j < context.cols(); ++j) obs.ctx(j, k) = context(row, j);
    obs.ctx(context.cols(), k) = rmax;
    obs.ctx(context.cols() + 1, k) = rmin;
    obs.ctx(context.cols() + 2, k) = vmax;
  }
  return obs;
}

ActionVector drift_weights(std::span<const double> relatives, std::span<const double> action) {
  if (relatives.size() != action.size()) throw std::invalid_argument("drift_weights: size mismatch");
  double denom = 0.0;
  for (std::size_t i = 0; i < action.size(); ++i) {
    if (!(relatives[i] > 0.0)) throw std::invalid_argument("drift_weights: price relatives must be > 0");
    denom += relatives[i] * action[i];
  }
  ActionVector w(action.size());
  for (std::size_t i = 0; i < action.size(); ++i) w[i] = relatives[i] * action[i] / denom;
  return w;
}

EnvState initial_state(std::size_t n) { return EnvState{0, ActionVector(n, 0.0), 0.0}; }

StepResult step(const EnvState& state, std::span<const double> action,
                std::span<const double> relatives, double cost_rate, double gamma) {
  validate_action(action);
  if (action.size() != relatives.size() || action.size() != state.drifted.size()) {
    throw std::invalid_argument("step: action, relatives and state differ in size");
  }
  double gross = 0.0, turnover = 0.0;
  for (std::size_t i = 0; i < action.size(); ++i) {
    gross += action[i] * relatives[i];
    turnover += std::abs(action[i] - state.drifted[i]);
  }
  StepResult res;
  res.cost = cost_rate * turnover;
  const double net = gross - res.cost;
  if (!(net > 0.0)) {
    throw EpisodeAborted("step " + std::to_string(state.t) + ": non-positive net portfolio value " +
                             std::to_string(net),
                         state.t);
  }
  res.reward = std::log(net);
  res.net_return = net - 1.0;
  res.state.t = state.t + 1;
  res.state.drifted = drift_weights(relatives, action);
  res.state.cumulative = state.cumulative + std::pow(gamma, static_cast<double>(state.t)) * res.reward;
  return res;
}

// --- PortfolioEnv ---------------------------------------------------------

PortfolioEnv::PortfolioEnv(StrategyPanel panel, SeriesPanel context, EnvConfig cfg,
                           std::size_t first_row, DataAudit* audit, std::string audit_name)
    : panel_(std::move(panel)), context_(std::move(context)), cfg_(cfg) {
  cfg_.validate();
  if (context_.cols() > 0 && context_.dates() != panel_.dates()) {
    context_ = align({context_, panel_.returns}).select(context_.names());
    if (context_.dates() != panel_.dates()) {
      throw DataError("PortfolioEnv: context does not cover every strategy date");
    }
  }
  const std::size_t min_first = min_observation_row(cfg_.window, cfg_.vol_window) + 1;
  first_row_ = std::max(first_row, min_first);
  if (panel_.size() <= first_row_) {
    throw std::invalid_argument("PortfolioEnv: panel too short for one window plus one step");
  }
  if (audit) audit->record(audit_name, panel_.dates());
  context_rows_ = context_.cols() + kDerivedContextRows;

  const std::size_t rows = panel_.size(), n = assets();
  relatives_.resize(rows * n);
  vols_.assign(rows * n, 0.0);
  derived_.resize(rows * kDerivedContextRows);
  for (std::size_t r = 0; r < rows; ++r) {
    double rmax = -std::numeric_limits<double>::infinity();
    double rmin = std::numeric_limits<double>::infinity();
    double vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ret = panel_.returns(r, i);
      relatives_[r * n + i] = 1.0 + ret;
      if (r + 1 >= cfg_.vol_window) vols_[r * n + i] = window_std(panel_.returns, i, r, cfg_.vol_window);
      rmax = std::max(rmax, ret);
      rmin = std::min(rmin, ret);
      vmax = std::max(vmax, vols_[r * n + i]);
    }
    derived_[r * kDerivedContextRows] = rmax;
    derived_[r * kDerivedContextRows + 1] = rmin;
    derived_[r * kDerivedContextRows + 2] = vmax;
  }
}

Observation PortfolioEnv::observation(std::size_t k) const {
  if (k > steps()) throw std::out_of_range("PortfolioEnv::observation: step past end of episode");
  const std::size_t n = assets(), w = cfg_.window, t = first_row_ + k - 1;
  Observation obs(n, context_rows_, w);
  const bool mask = cfg_.mask_context_and_vol;
  for (std::size_t kk = 0; kk < w; ++kk) {
    const std::size_t row = t + 1 - w + kk;
    for (std::size_t i = 0; i < n; ++i) {
      obs.returns(i, kk) = panel_.returns(row, i);
      if (!mask) obs.vol(i, kk) = vols_[row * n + i];
    }
    if (mask) continue;
    for (std::size_t j = 0; j < context_.cols(); ++j) obs.ctx(j, kk) = context_(row, j);
    for (std::size_t j = 0; j < kDerivedContextRows; ++j) {
      obs.ctx(context_.cols() + j, kk) = derived_[row * kDerivedContextRows + j];
    }
  }
  return obs;
}

std::span<const double> PortfolioEnv::relatives(std::size_t k) const {
  if (k >= steps()) throw std::out_of_range("PortfolioEnv::relatives: step past end of episode");
  return {relatives_.data() + (first_row_ + k) * assets(), assets()};
}

EpisodeResult run_episode(const PortfolioEnv& env, const Policy& policy) {
  if (env.steps() == 0) throw std::invalid_argument("run_episode: empty market");
  EpisodeResult out;
  EnvState state = initial_state(env.assets());
  for (std::size_t k = 0; k < env.steps(); ++k) {
    ActionVector a = policy(env.observation(k), k);
    auto res = step(state, a, env.relatives(k), env.config().cost_rate, env.config().gamma);
    out.actions.push_back(std::move(a));
    out.net_returns.push_back(res.net_return);
    out.costs.push_back(res.cost);
    out.dates.push_back(env.date(k));
    state = std::move(res.state);
  }
  out.reward = state.cumulative;
  return out;
}

}  // namespace vtlab
