#include "vtlab/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace vtlab {

void TrainConfig::validate() const {
  if (!(explore_p >= 0.0 && explore_p <= 1.0)) throw std::invalid_argument("train: explore_p must lie in [0,1]");
  if (early_stop_patience < 1) throw std::invalid_argument("train: early_stop_patience must be >= 1");
  if (!(obs_noise_std >= 0.0)) throw std::invalid_argument("train: obs_noise_std must be >= 0");
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
  if (max_steps < 1) throw std::invalid_argument("train: max_steps must be >= 1");
}

ActionVector random_simplex_action(std::size_t n, std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("random_simplex_action: n must be >= 1");
  std::exponential_distribution<double> exp1(1.0);
  ActionVector a(n);
  double sum = 0.0;
  for (auto& v : a) {
    v = exp1(rng);
    sum += v;
  }
  for (auto& v : a) v /= sum;
  return a;
}

void ReplayBuffer::reset() {
  obs_.clear();
  actions_.clear();
}

void ReplayBuffer::store(const Observation& o, ActionVector a, const Observation& next) {
  if (obs_.empty()) obs_.push_back(o);
  actions_.push_back(std::move(a));
  obs_.push_back(next);
}

std::string stop_reason_name(StopReason r) { return r == StopReason::kPatience ? "patience" : "max_steps"; }

namespace {

void add_noise(Observation& o, double std_dev, std::mt19937_64& rng) {
  if (std_dev <= 0.0) return;
  std::normal_distribution<double> z(0.0, std_dev);
  for (auto& v : o.asset) v += z(rng);
  for (auto& v : o.context) v += z(rng);
}

double rollout(const PolicyParams& params, const PortfolioEnv& env, const TrainConfig& cfg,
               std::mt19937_64& rng, ReplayBuffer& buffer) {
  buffer.reset();
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  EnvState state = initial_state(env.assets());
  Observation obs = env.observation(0);
  for (std::size_t k = 0; k < env.steps(); ++k) {
    ActionVector a = coin(rng) < cfg.explore_p ? forward(params, obs) : random_simplex_action(env.assets(), rng);
    auto res = step(state, a, env.relatives(k), env.config().cost_rate, env.config().gamma);
    Observation next = env.observation(k + 1);
    add_noise(next, cfg.obs_noise_std, rng);
    buffer.store(obs, std::move(a), next);
    obs = std::move(next);
    state = std::move(res.state);
  }
  return state.cumulative;
}

}  // namespace

TrainReport train_policy(const PortfolioEnv& env, const NetworkArch& arch, const TrainConfig& cfg) {
  cfg.validate();
  PolicyParams params = init_params(arch, cfg.seed);
  if (cfg.fit_input_norm) params.norm = fit_input_norm(env);
  return train_policy(env, std::move(params), cfg);
}

TrainReport train_policy(const PortfolioEnv& env, PolicyParams params, const TrainConfig& cfg) {
  cfg.validate();
  const auto& arch = params.arch;
  if (arch.assets != env.assets() || arch.context_rows != env.context_rows() || arch.window != env.window()) {
    throw std::invalid_argument("train_policy: network architecture does not match the environment");
  }
  const auto t0 = std::chrono::steady_clock::now();
  AdamState adam = AdamState::for_params(params.size(), cfg.lr);
  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  ReplayBuffer buffer;

  TrainReport report;
  report.best_reward = -std::numeric_limits<double>::infinity();
  std::size_t since_improvement = 0;
  const std::size_t T = env.steps();

  for (std::size_t episode = 0;; ++episode) {
    if (report.env_steps + T > cfg.max_steps) {
      report.stop = StopReason::kMaxSteps;
      break;
    }
    report.rollout_rewards.push_back(rollout(params, env, cfg, rng, buffer));
    report.last_buffer_size = buffer.size();

    EpisodeGradient g;
    try {
      g = episode_gradient(params, env);
    } catch (const std::exception& e) {
      throw std::runtime_error("train_policy: episode " + std::to_string(episode) + ": " + e.what());
    }
    report.env_steps += T;
    report.episode_rewards.push_back(g.objective);
    if (g.objective > report.best_reward + cfg.min_improvement || episode == 0) {
      report.best_reward = g.objective;
      report.best_episode = episode;
      report.best_params = params;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    report.best_so_far.push_back(report.best_reward);
    if (since_improvement >= cfg.early_stop_patience) {
      report.stop = StopReason::kPatience;
      break;
    }
    adam_update(params.theta, g.gradient, adam);
  }
  if (report.episode_rewards.empty()) {
    throw std::invalid_argument("train_policy: max_steps is smaller than one episode (" + std::to_string(T) +
                                " steps)");
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

EpisodeResult evaluate_policy(const PolicyParams& params, const PortfolioEnv& env) {
  return run_episode(env, as_policy(params));
}

void write_train_log(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write training log '" + path.string() + "'");
  out << "episode,reward,rollout_reward,best\n" << std::setprecision(17);
  for (std::size_t e = 0; e < report.episode_rewards.size(); ++e) {
    out << e << ',' << report.episode_rewards[e] << ',' << report.rollout_rewards[e] << ','
        << report.best_so_far[e] << '\n';
  }
}

}  // namespace vtlab
