#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vtlab/policy_net.hpp"
#include "vtlab/rl_env.hpp"

namespace vtlab {

struct TrainConfig {
  std::size_t max_steps = 100000;      // environment steps summed over all episodes
  std::size_t early_stop_patience = 15;
  double explore_p = 0.9;              // probability of taking the policy action
  double obs_noise_std = 0.002;        // added to every entry of the next observation
  double lr = 0.01;
  std::uint64_t seed = 42;
  double min_improvement = 1e-6;
  bool fit_input_norm = true;

  void validate() const;
};

/// Uniform sample on the simplex (Dirichlet(1, ..., 1)).
ActionVector random_simplex_action(std::size_t n, std::mt19937_64& rng);

/// Transitions (o_k, a_k, o_{k+1}) of the current episode. Observations are
/// stored once, so observation k+1 of one transition is shared with the next.
class ReplayBuffer {
 public:
  void reset();
  void store(const Observation& o, ActionVector a, const Observation& next);

  std::size_t size() const { return actions_.size(); }
  const Observation& observation(std::size_t k) const { return obs_.at(k); }
  const Observation& next_observation(std::size_t k) const { return obs_.at(k + 1); }
  const ActionVector& action(std::size_t k) const { return actions_.at(k); }

 private:
  std::vector<Observation> obs_;
  std::vector<ActionVector> actions_;
};

enum class StopReason { kMaxSteps, kPatience };
std::string stop_reason_name(StopReason r);

struct TrainReport {
  std::vector<double> episode_rewards;   // clean objective J(theta) at each update
  std::vector<double> rollout_rewards;   // exploratory, noisy rollout reward
  std::vector<double> best_so_far;
  double best_reward = 0.0;
  std::size_t best_episode = 0;
  PolicyParams best_params;
  StopReason stop = StopReason::kMaxSteps;
  std::size_t env_steps = 0;
  std::size_t last_buffer_size = 0;
  double wall_seconds = 0.0;
};

/// Repeats episodes over the same data. Each episode fills the replay buffer
/// with an exploratory rollout, then takes one Adam ascent step on the clean
/// episode objective. Throws if the objective or gradient becomes non-finite.
TrainReport train_policy(const PortfolioEnv& env, const NetworkArch& arch, const TrainConfig& cfg);

/// Same, starting from existing parameters (their input normalization is kept).
TrainReport train_policy(const PortfolioEnv& env, PolicyParams init, const TrainConfig& cfg);

/// Deterministic pass with the network as policy.
EpisodeResult evaluate_policy(const PolicyParams& params, const PortfolioEnv& env);

/// CSV with columns episode, reward, rollout_reward, best.
void write_train_log(const std::filesystem::path& path, const TrainReport& report);

}  // namespace vtlab
