#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vtlab/rl_env.hpp"

namespace vtlab {

enum class Activation : std::uint32_t { kRelu = 0, kTanh = 1 };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation a);

struct ConvSpec {
  std::size_t kernel = 3;    // along time
  std::size_t channels = 8;  // output channels
};

/// Two convolutional branches (asset tensor, context matrix) merged into dense
/// layers and a softmax head over the n strategies.
struct NetworkArch {
  std::size_t assets = 9;
  std::size_t context_rows = 3;
  std::size_t window = 60;
  std::vector<ConvSpec> asset_convs{{3, 8}, {3, 8}};
  std::vector<ConvSpec> context_convs{{3, 8}, {3, 8}};
  std::vector<std::size_t> dense{32};
  Activation activation = Activation::kRelu;

  static NetworkArch for_env(const PortfolioEnv& env);
  void validate() const;
  bool operator==(const NetworkArch&) const = default;
};

inline bool operator==(const ConvSpec& a, const ConvSpec& b) {
  return a.kernel == b.kernel && a.channels == b.channels;
}

/// Offsets of one layer's weights and biases inside the flat parameter vector.
struct LayerSlot {
  std::string name;
  std::size_t weight_offset = 0;
  std::size_t weight_size = 0;
  std::size_t bias_offset = 0;
  std::size_t bias_size = 0;
  std::size_t fan_in = 0;
};

struct ParamLayout {
  std::vector<LayerSlot> asset_convs;
  std::vector<LayerSlot> context_convs;
  std::vector<LayerSlot> dense;  // hidden layers followed by the output head
  std::size_t total = 0;
  std::size_t asset_features = 0;    // flattened asset-branch width
  std::size_t context_features = 0;  // flattened context-branch width
};

ParamLayout make_layout(const NetworkArch& arch);

/// Fixed affine map applied to raw observations before the first layer.
struct InputNorm {
  std::vector<double> asset_mean, asset_scale;      // 2n entries: returns rows then vol rows
  std::vector<double> context_mean, context_scale;  // p entries

  static InputNorm identity(std::size_t n, std::size_t p);
};

struct PolicyParams {
  NetworkArch arch;
  ParamLayout layout;
  InputNorm norm;
  std::vector<double> theta;

  std::size_t size() const { return theta.size(); }
  std::span<double> weights(const LayerSlot& s) { return {theta.data() + s.weight_offset, s.weight_size}; }
  std::span<double> biases(const LayerSlot& s) { return {theta.data() + s.bias_offset, s.bias_size}; }
};

/// Fan-in scaled uniform weights, zero biases. The output head is drawn at a
/// tenth of the usual bound so the initial policy is close to uniform.
PolicyParams init_params(const NetworkArch& arch, std::uint64_t seed);

/// Per-row mean and std of every input signal over the episode.
InputNorm fit_input_norm(const PortfolioEnv& env);

ActionVector forward(const PolicyParams& params, const Observation& obs);

/// Pre-softmax scores.
std::vector<double> forward_logits(const PolicyParams& params, const Observation& obs);

/// Accumulates (d action / d theta)^T grad_action into grad_theta.
void backward(const PolicyParams& params, const Observation& obs, std::span<const double> grad_action,
              std::span<double> grad_theta);

struct EpisodeGradient {
  double objective = 0.0;
  std::vector<double> gradient;
  EpisodeResult episode;
};

/// Exact gradient of the cumulative (discounted) log reward of a deterministic
/// episode with respect to the policy parameters.
EpisodeGradient episode_gradient(const PolicyParams& params, const PortfolioEnv& env);

/// dJ/da_k for a fixed action sequence (the reward recursion's adjoint).
std::vector<std::vector<double>> action_adjoints(const PortfolioEnv& env,
                                                 const std::vector<ActionVector>& actions);

Policy as_policy(const PolicyParams& params);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(std::size_t size, double lr = 0.01);
};

/// One Adam step along +grads (gradient ascent).
void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state);

// --- checkpoints --------------------------------------------------------------
// Layout (all integers and floats little-endian):
//   "VTLABCKP"  magic, 8 bytes
//   u32         format version (1)
//   u32 x 4     assets, context_rows, window, activation
//   u32 + (u32 kernel, u32 channels) x k     asset convolutions
//   u32 + (u32 kernel, u32 channels) x k     context convolutions
//   u32 + u32 x k                            dense widths
//   f64 x 2n    asset mean, f64 x 2n asset scale
//   f64 x p     context mean, f64 x p context scale
//   u64         parameter count, then f64 x count

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params);
PolicyParams load_checkpoint(const std::filesystem::path& path);

}  // namespace vtlab
