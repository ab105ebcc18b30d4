#include "vtlab/policy_net.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <stdexcept>

namespace vtlab {

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string activation_name(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

NetworkArch NetworkArch::for_env(const PortfolioEnv& env) {
  NetworkArch arch;
  arch.assets = env.assets();
  arch.context_rows = env.context_rows();
  arch.window = env.window();
  return arch;
}

void NetworkArch::validate() const {
  if (assets < 1 || context_rows < 1 || window < 1) {
    throw std::invalid_argument("NetworkArch: assets, context rows and window must be >= 1");
  }
  auto check_branch = [&](const std::vector<ConvSpec>& convs, const char* name) {
    std::size_t width = window;
    for (const auto& c : convs) {
      if (c.kernel < 1 || c.channels < 1) {
        throw std::invalid_argument(std::string("NetworkArch: ") + name + " kernel and channels must be >= 1");
      }
      if (c.kernel > width) {
        throw std::invalid_argument(std::string("NetworkArch: ") + name + " kernel longer than remaining window");
      }
      width -= c.kernel - 1;
    }
  };
  check_branch(asset_convs, "asset branch");
  check_branch(context_convs, "context branch");
  for (auto d : dense) {
    if (d < 1) throw std::invalid_argument("NetworkArch: dense widths must be >= 1");
  }
}

ParamLayout make_layout(const NetworkArch& arch) {
  arch.validate();
  ParamLayout layout;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t weights, std::size_t biases, std::size_t fan_in) {
    LayerSlot s{std::move(name), offset, weights, offset + weights, biases, fan_in};
    offset += weights + biases;
    return s;
  };

  std::size_t channels = 2, width = arch.window;
  for (std::size_t l = 0; l < arch.asset_convs.size(); ++l) {
    const auto& c = arch.asset_convs[l];
    layout.asset_convs.push_back(add("asset_conv" + std::to_string(l), c.channels * channels * c.kernel,
                                     c.channels, channels * c.kernel));
    channels = c.channels;
    width -= c.kernel - 1;
  }
  layout.asset_features = channels * arch.assets * width;

  channels = arch.context_rows;
  width = arch.window;
  for (std::size_t l = 0; l < arch.context_convs.size(); ++l) {
    const auto& c = arch.context_convs[l];
    layout.context_convs.push_back(add("context_conv" + std::to_string(l), c.channels * channels * c.kernel,
                                       c.channels, channels * c.kernel));
    channels = c.channels;
    width -= c.kernel - 1;
  }
  layout.context_features = channels * width;

  std::size_t in = layout.asset_features + layout.context_features;
  for (std::size_t l = 0; l < arch.dense.size(); ++l) {
    layout.dense.push_back(add("dense" + std::to_string(l), arch.dense[l] * in, arch.dense[l], in));
    in = arch.dense[l];
  }
  layout.dense.push_back(add("head", arch.assets * in, arch.assets, in));
  layout.total = offset;
  return layout;
}

InputNorm InputNorm::identity(std::size_t n, std::size_t p) {
  return InputNorm{std::vector<double>(2 * n, 0.0), std::vector<double>(2 * n, 1.0),
                   std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)};
}

PolicyParams init_params(const NetworkArch& arch, std::uint64_t seed) {
  PolicyParams params;
  params.arch = arch;
  params.layout = make_layout(arch);
  params.norm = InputNorm::identity(arch.assets, arch.context_rows);
  params.theta.assign(params.layout.total, 0.0);
  std::mt19937_64 rng(seed);
  auto fill = [&](const LayerSlot& s, double scale) {
    const double bound = scale / std::sqrt(static_cast<double>(s.fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& w : params.weights(s)) w = dist(rng);
  };
  for (const auto& s : params.layout.asset_convs) fill(s, 1.0);
  for (const auto& s : params.layout.context_convs) fill(s, 1.0);
  for (std::size_t l = 0; l + 1 < params.layout.dense.size(); ++l) fill(params.layout.dense[l], 1.0);
  fill(params.layout.dense.back(), 0.1);
  return params;
}

InputNorm fit_input_norm(const PortfolioEnv& env) {
  const std::size_t n = env.assets(), p = env.context_rows(), w = env.window();
  std::vector<double> sum_a(2 * n, 0.0), sq_a(2 * n, 0.0), sum_c(p, 0.0), sq_c(p, 0.0);
  const std::size_t steps = env.steps();
  for (std::size_t k = 0; k < steps; ++k) {
    const auto obs = env.observation(k);
    for (std::size_t r = 0; r < 2 * n; ++r) {
      const double v = obs.asset[r * w + (w - 1)];
      sum_a[r] += v;
      sq_a[r] += v * v;
    }
    for (std::size_t j = 0; j < p; ++j) {
      const double v = obs.context[j * w + (w - 1)];
      sum_c[j] += v;
      sq_c[j] += v * v;
    }
  }
  auto finish = [&](const std::vector<double>& s, const std::vector<double>& q, std::vector<double>& mean,
                    std::vector<double>& scale) {
    const double cnt = static_cast<double>(steps);
    mean.resize(s.size());
    scale.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      mean[i] = s[i] / cnt;
      const double var = std::max(q[i] / cnt - mean[i] * mean[i], 0.0);
      const double sd = std::sqrt(var);
      scale[i] = sd > 1e-12 * std::max(1.0, std::abs(mean[i])) ? sd : 1.0;
    }
  };
  InputNorm norm;
  finish(sum_a, sq_a, norm.asset_mean, norm.asset_scale);
  finish(sum_c, sq_c, norm.context_mean, norm.context_scale);
  return norm;
}

// --- computation graph ---------------------------------------------------------

namespace {

/// A small reverse-mode tape over vector-valued nodes. Parameter gradients are
/// accumulated into caller-owned buffers by each op's backward closure.
class Tape {
 public:
  using Id = std::size_t;

  Id input(std::vector<double> v) {
    nodes_.push_back({std::move(v), {}, nullptr});
    return nodes_.size() - 1;
  }

  const std::vector<double>& value(Id id) const { return nodes_[id].value; }

  /// x: (c_in, rows, width), kernel spans all input channels and k time steps,
  /// shared across rows. Output: (c_out, rows, width - k + 1).
  Id conv(Id x, std::size_t c_in, std::size_t rows, std::size_t width, const double* w, const double* b,
          double* gw, double* gb, std::size_t c_out, std::size_t k) {
    const std::size_t wout = width - k + 1;
    std::vector<double> out(c_out * rows * wout);
    const auto& in = nodes_[x].value;
    for (std::size_t co = 0; co < c_out; ++co) {
      for (std::size_t r = 0; r < rows; ++r) {
        double* o = out.data() + (co * rows + r) * wout;
        std::fill(o, o + wout, b[co]);
        for (std::size_t ci = 0; ci < c_in; ++ci) {
          const double* src = in.data() + (ci * rows + r) * width;
          const double* ker = w + (co * c_in + ci) * k;
          for (std::size_t kk = 0; kk < k; ++kk) {
            const double wk = ker[kk];
            for (std::size_t t = 0; t < wout; ++t) o[t] += wk * src[t + kk];
          }
        }
      }
    }
    const Id id = push(std::move(out));
    nodes_[id].back = [this, id, x, c_in, rows, width, w, gw, gb, c_out, k, wout] {
      const auto& g = nodes_[id].grad;
      const auto& in_v = nodes_[x].value;
      auto& in_g = grad_of(x);
      for (std::size_t co = 0; co < c_out; ++co) {
        for (std::size_t r = 0; r < rows; ++r) {
          const double* go = g.data() + (co * rows + r) * wout;
          if (gb) {
            double acc = 0.0;
            for (std::size_t t = 0; t < wout; ++t) acc += go[t];
            gb[co] += acc;
          }
          for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* src = in_v.data() + (ci * rows + r) * width;
            double* src_g = in_g.data() + (ci * rows + r) * width;
            const double* ker = w + (co * c_in + ci) * k;
            for (std::size_t kk = 0; kk < k; ++kk) {
              double acc = 0.0;
              for (std::size_t t = 0; t < wout; ++t) {
                acc += go[t] * src[t + kk];
                src_g[t + kk] += go[t] * ker[kk];
              }
              if (gw) gw[(co * c_in + ci) * k + kk] += acc;
            }
          }
        }
      }
    };
    return id;
  }

  Id activate(Id x, Activation a) {
    std::vector<double> out = nodes_[x].value;
    for (auto& v : out) v = a == Activation::kRelu ? std::max(v, 0.0) : std::tanh(v);
    const Id id = push(std::move(out));
    nodes_[id].back = [this, id, x, a] {
      const auto& g = nodes_[id].grad;
      const auto& y = nodes_[id].value;
      auto& gx = grad_of(x);
      for (std::size_t i = 0; i < g.size(); ++i) {
        gx[i] += a == Activation::kRelu ? (y[i] > 0.0 ? g[i] : 0.0) : g[i] * (1.0 - y[i] * y[i]);
      }
    };
    return id;
  }

  Id concat(Id a, Id b) {
    std::vector<double> out = nodes_[a].value;
    out.insert(out.end(), nodes_[b].value.begin(), nodes_[b].value.end());
    const Id id = push(std::move(out));
    nodes_[id].back = [this, id, a, b] {
      const auto& g = nodes_[id].grad;
      auto& ga = grad_of(a);
      auto& gb = grad_of(b);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[ga.size() + i];
    };
    return id;
  }

  /// y = W x + b with W (out x in) row-major.
  Id dense(Id x, const double* w, const double* b, double* gw, double* gb, std::size_t out_dim) {
    const auto& in = nodes_[x].value;
    const std::size_t in_dim = in.size();
    std::vector<double> out(out_dim);
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* row = w + o * in_dim;
      double acc = b[o];
      for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * in[i];
      out[o] = acc;
    }
    const Id id = push(std::move(out));
    nodes_[id].back = [this, id, x, w, gw, gb, out_dim, in_dim] {
      const auto& g = nodes_[id].grad;
      const auto& in_v = nodes_[x].value;
      auto& gx = grad_of(x);
      for (std::size_t o = 0; o < out_dim; ++o) {
        const double go = g[o];
        if (go == 0.0) continue;
        if (gb) gb[o] += go;
        const double* row = w + o * in_dim;
        if (gw) {
          double* grow = gw + o * in_dim;
          for (std::size_t i = 0; i < in_dim; ++i) grow[i] += go * in_v[i];
        }
        for (std::size_t i = 0; i < in_dim; ++i) gx[i] += go * row[i];
      }
    };
    return id;
  }

  Id softmax(Id x) {
    std::vector<double> out = nodes_[x].value;
    const double mx = *std::max_element(out.begin(), out.end());
    double sum = 0.0;
    for (auto& v : out) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (auto& v : out) v /= sum;
    const Id id = push(std::move(out));
    nodes_[id].back = [this, id, x] {
      const auto& g = nodes_[id].grad;
      const auto& y = nodes_[id].value;
      double dot = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
      auto& gx = grad_of(x);
      for (std::size_t i = 0; i < y.size(); ++i) gx[i] += y[i] * (g[i] - dot);
    };
    return id;
  }

  void backward(Id out, std::span<const double> seed) {
    for (auto& n : nodes_) n.grad.clear();
    auto& g = grad_of(out);
    std::copy(seed.begin(), seed.end(), g.begin());
    for (std::size_t id = out + 1; id-- > 0;) {
      if (nodes_[id].back && !nodes_[id].grad.empty()) nodes_[id].back();
    }
  }

 private:
  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    std::function<void()> back;
  };

  Id push(std::vector<double> v) {
    nodes_.push_back({std::move(v), {}, nullptr});
    return nodes_.size() - 1;
  }

  std::vector<double>& grad_of(Id id) {
    auto& n = nodes_[id];
    if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
    return n.grad;
  }

  std::vector<Node> nodes_;
};

struct Graph {
  Tape tape;
  Tape::Id logits = 0;
  Tape::Id output = 0;
};

void check_shape(const PolicyParams& params, const Observation& obs) {
  const auto& a = params.arch;
  if (obs.n != a.assets || obs.p != a.context_rows || obs.w != a.window ||
      obs.asset.size() != 2 * a.assets * a.window || obs.context.size() != a.context_rows * a.window) {
    throw std::invalid_argument("policy: observation shape (" + std::to_string(obs.n) + ", " +
                                std::to_string(obs.p) + ", " + std::to_string(obs.w) +
                                ") does not match the network architecture");
  }
  if (params.theta.size() != params.layout.total) {
    throw std::invalid_argument("policy: parameter vector does not match the layout");
  }
}

void build_graph(Graph& g, const PolicyParams& params, const Observation& obs, double* grad) {
  check_shape(params, obs);
  const auto& arch = params.arch;
  const auto& lay = params.layout;
  const double* th = params.theta.data();
  auto gptr = [&](std::size_t off) { return grad ? grad + off : nullptr; };
  const std::size_t n = arch.assets, p = arch.context_rows, w = arch.window;

  std::vector<double> a_in(obs.asset.size());
  for (std::size_t r = 0; r < 2 * n; ++r) {
    for (std::size_t k = 0; k < w; ++k) {
      a_in[r * w + k] = (obs.asset[r * w + k] - params.norm.asset_mean[r]) / params.norm.asset_scale[r];
    }
  }
  std::vector<double> c_in(obs.context.size());
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = 0; k < w; ++k) {
      c_in[j * w + k] = (obs.context[j * w + k] - params.norm.context_mean[j]) / params.norm.context_scale[j];
    }
  }

  auto& t = g.tape;
  Tape::Id x = t.input(std::move(a_in));
  std::size_t channels = 2, width = w;
  for (std::size_t l = 0; l < arch.asset_convs.size(); ++l) {
    const auto& spec = arch.asset_convs[l];
    const auto& s = lay.asset_convs[l];
    x = t.conv(x, channels, n, width, th + s.weight_offset, th + s.bias_offset, gptr(s.weight_offset),
               gptr(s.bias_offset), spec.channels, spec.kernel);
    x = t.activate(x, arch.activation);
    channels = spec.channels;
    width -= spec.kernel - 1;
  }

  Tape::Id c = t.input(std::move(c_in));
  channels = p;
  width = w;
  for (std::size_t l = 0; l < arch.context_convs.size(); ++l) {
    const auto& spec = arch.context_convs[l];
    const auto& s = lay.context_convs[l];
    c = t.conv(c, channels, 1, width, th + s.weight_offset, th + s.bias_offset, gptr(s.weight_offset),
               gptr(s.bias_offset), spec.channels, spec.kernel);
    c = t.activate(c, arch.activation);
    channels = spec.channels;
    width -= spec.kernel - 1;
  }

  Tape::Id h = t.concat(x, c);
  for (std::size_t l = 0; l < arch.dense.size(); ++l) {
    const auto& s = lay.dense[l];
    h = t.dense(h, th + s.weight_offset, th + s.bias_offset, gptr(s.weight_offset), gptr(s.bias_offset),
                arch.dense[l]);
    h = t.activate(h, arch.activation);
  }
  const auto& head = lay.dense.back();
  g.logits = t.dense(h, th + head.weight_offset, th + head.bias_offset, gptr(head.weight_offset),
                     gptr(head.bias_offset), n);
  g.output = t.softmax(g.logits);
}

}  // namespace

std::vector<double> forward_logits(const PolicyParams& params, const Observation& obs) {
  Graph g;
  build_graph(g, params, obs, nullptr);
  return g.tape.value(g.logits);
}

ActionVector forward(const PolicyParams& params, const Observation& obs) {
  Graph g;
  build_graph(g, params, obs, nullptr);
  return g.tape.value(g.output);
}

void backward(const PolicyParams& params, const Observation& obs, std::span<const double> grad_action,
              std::span<double> grad_theta) {
  if (grad_theta.size() != params.theta.size()) throw std::invalid_argument("backward: gradient size mismatch");
  if (grad_action.size() != params.arch.assets) throw std::invalid_argument("backward: action gradient size mismatch");
  Graph g;
  build_graph(g, params, obs, grad_theta.data());
  g.tape.backward(g.output, grad_action);
}

Policy as_policy(const PolicyParams& params) {
  auto shared = std::make_shared<const PolicyParams>(params);
  return [shared](const Observation& obs, std::size_t) { return forward(*shared, obs); };
}

std::vector<std::vector<double>> action_adjoints(const PortfolioEnv& env,
                                                 const std::vector<ActionVector>& actions) {
  const std::size_t T = actions.size(), n = env.assets();
  const double alpha = env.config().cost_rate, gamma = env.config().gamma;
  std::vector<std::vector<double>> w_prev(T + 1, std::vector<double>(n, 0.0));
  std::vector<double> net(T), denom(T);
  for (std::size_t k = 0; k < T; ++k) {
    const auto u = env.relatives(k);
    double gross = 0.0, turnover = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gross += actions[k][i] * u[i];
      turnover += std::abs(actions[k][i] - w_prev[k][i]);
    }
    net[k] = gross - alpha * turnover;
    denom[k] = gross;
    for (std::size_t i = 0; i < n; ++i) w_prev[k + 1][i] = u[i] * actions[k][i] / gross;
  }

  std::vector<std::vector<double>> adj(T, std::vector<double>(n, 0.0));
  std::vector<double> g_w(n, 0.0);  // dJ / d w_prev[k + 1]
  for (std::size_t k = T; k-- > 0;) {
    const auto u = env.relatives(k);
    const double d = std::pow(gamma, static_cast<double>(k)) / net[k];
    double gw_dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) gw_dot += g_w[i] * w_prev[k + 1][i];
    std::vector<double> next_gw(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = actions[k][i] - w_prev[k][i];
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      adj[k][i] = d * (u[i] - alpha * sign) + u[i] / denom[k] * (g_w[i] - gw_dot);
      next_gw[i] = d * alpha * sign;
    }
    g_w.swap(next_gw);
  }
  return adj;
}

EpisodeGradient episode_gradient(const PolicyParams& params, const PortfolioEnv& env) {
  EpisodeGradient out;
  out.episode = run_episode(env, as_policy(params));
  out.objective = out.episode.reward;
  if (!std::isfinite(out.objective)) throw std::runtime_error("episode_gradient: non-finite objective");
  const auto adj = action_adjoints(env, out.episode.actions);
  out.gradient.assign(params.theta.size(), 0.0);
  for (std::size_t k = 0; k < adj.size(); ++k) {
    backward(params, env.observation(k), adj[k], out.gradient);
  }
  for (std::size_t i = 0; i < out.gradient.size(); ++i) {
    if (!std::isfinite(out.gradient[i])) {
      throw std::runtime_error("episode_gradient: non-finite gradient at parameter " + std::to_string(i));
    }
  }
  return out;
}

// --- Adam ---------------------------------------------------------------------

AdamState AdamState::for_params(std::size_t size, double lr) {
  AdamState s;
  s.m.assign(size, 0.0);
  s.v.assign(size, 0.0);
  s.lr = lr;
  return s;
}

void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_update: shape mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] += state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

// --- checkpoints ----------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'V', 'T', 'L', 'A', 'B', 'C', 'K', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_bytes(std::istream& in, int count) {
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) {
    const int c = in.get();
    if (c == EOF) throw std::runtime_error("checkpoint: unexpected end of file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}
std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes(in, 4)); }
std::uint64_t get_u64(std::istream& in) { return get_bytes(in, 8); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
  const auto& a = params.arch;
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(a.assets));
  put_u32(out, static_cast<std::uint32_t>(a.context_rows));
  put_u32(out, static_cast<std::uint32_t>(a.window));
  put_u32(out, static_cast<std::uint32_t>(a.activation));
  for (const auto* convs : {&a.asset_convs, &a.context_convs}) {
    put_u32(out, static_cast<std::uint32_t>(convs->size()));
    for (const auto& c : *convs) {
      put_u32(out, static_cast<std::uint32_t>(c.kernel));
      put_u32(out, static_cast<std::uint32_t>(c.channels));
    }
  }
  put_u32(out, static_cast<std::uint32_t>(a.dense.size()));
  for (auto d : a.dense) put_u32(out, static_cast<std::uint32_t>(d));
  for (const auto* v : {&params.norm.asset_mean, &params.norm.asset_scale, &params.norm.context_mean,
                        &params.norm.context_scale}) {
    for (double x : *v) put_f64(out, x);
  }
  put_u64(out, params.theta.size());
  for (double x : params.theta) put_f64(out, x);
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path.string() + "'");
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kMagic)) throw std::runtime_error("checkpoint: bad magic bytes");
  if (const auto v = get_u32(in); v != kFormatVersion) {
    throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(v));
  }
  NetworkArch a;
  a.assets = get_u32(in);
  a.context_rows = get_u32(in);
  a.window = get_u32(in);
  const auto act = get_u32(in);
  if (act > 1) throw std::runtime_error("checkpoint: unknown activation code");
  a.activation = static_cast<Activation>(act);
  for (auto* convs : {&a.asset_convs, &a.context_convs}) {
    convs->resize(get_u32(in));
    for (auto& c : *convs) {
      c.kernel = get_u32(in);
      c.channels = get_u32(in);
    }
  }
  a.dense.resize(get_u32(in));
  for (auto& d : a.dense) d = get_u32(in);

  PolicyParams params;
  params.arch = a;
  params.layout = make_layout(a);
  params.norm = InputNorm::identity(a.assets, a.context_rows);
  for (auto* v : {&params.norm.asset_mean, &params.norm.asset_scale, &params.norm.context_mean,
                  &params.norm.context_scale}) {
    for (auto& x : *v) x = get_f64(in);
  }
  const auto count = get_u64(in);
  if (count != params.layout.total) throw std::runtime_error("checkpoint: parameter count does not match architecture");
  params.theta.resize(count);
  for (auto& x : params.theta) x = get_f64(in);
  return params;
}

}  // namespace vtlab
