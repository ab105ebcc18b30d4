#include "vtlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace vtlab {

using nlohmann::json;

namespace {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  if (!j.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("config: unknown key '" + key + "' in section '" + section + "'");
  }
}

template <typename T>
void get(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value for '" + section + "." + key + "': " + e.what());
  }
}

std::vector<ConvSpec> parse_convs(const json& j, const std::string& where) {
  std::vector<ConvSpec> out;
  if (!j.is_array()) throw ConfigError("config: '" + where + "' must be a list of [kernel, channels]");
  for (const auto& c : j) {
    if (!c.is_array() || c.size() != 2) throw ConfigError("config: '" + where + "' entries must be [kernel, channels]");
    out.push_back(ConvSpec{c[0].get<std::size_t>(), c[1].get<std::size_t>()});
  }
  return out;
}

json dump_convs(const std::vector<ConvSpec>& convs) {
  json out = json::array();
  for (const auto& c : convs) out.push_back({c.kernel, c.channels});
  return out;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.data.synthetic = SyntheticMarketConfig{};
  apply_seed(cfg, cfg.seed);
  return cfg;
}

void apply_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.train.seed = seed;
  if (cfg.data.synthetic) cfg.data.synthetic->seed = seed;
}

void RunConfig::validate() const {
  if (data.synthetic) {
    data.synthetic->validate();
    if (!data.returns_csv.empty()) throw ConfigError("config: give either data.synthetic or data.returns_csv, not both");
  } else {
    if (data.returns_csv.empty()) throw ConfigError("config: data needs either 'synthetic' or 'returns_csv'");
    for (const auto& p : {data.returns_csv, data.context_csv, data.implied_csv}) {
      if (!p.empty() && !std::filesystem::exists(p)) throw ConfigError("config: input file '" + p.string() + "' does not exist");
    }
  }
  forecast.validate();
  if (forecast.needs_implied()) {
    const bool has_implied = data.synthetic ? data.synthetic->implied_indices > 0 : !data.implied_csv.empty();
    if (!has_implied) {
      throw ConfigError("config: implied-volatility models are enabled but no implied index input is configured");
    }
  }
  target.validate();
  env.validate();
  NetworkArch probe = network;
  probe.assets = std::max<std::size_t>(probe.assets, 1);
  probe.window = env.window;
  probe.validate();
  train.validate();
  benchmarks.validate();
  if (walkforward.last_test_year && walkforward.first_test_year > *walkforward.last_test_year) {
    throw ConfigError("config: walkforward.first_test_year is after last_test_year");
  }
  if (walkforward.sensitivity_window < 1) throw ConfigError("config: walkforward.sensitivity_window must be >= 1");
  if (models.empty()) throw ConfigError("config: empty model list");
  for (const auto& m : models) {
    if (std::find(kDefaultRunModels.begin(), kDefaultRunModels.end(), m) == kDefaultRunModels.end()) {
      throw ConfigError("config: unknown allocation model '" + m + "'");
    }
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(root, {"seed", "output_dir", "data", "forecast", "target", "env", "network", "train", "benchmarks",
                    "walkforward", "models"},
             "root");
  RunConfig cfg = default_run_config();
  if (root.contains("seed")) apply_seed(cfg, root["seed"].get<std::uint64_t>());
  if (root.contains("output_dir")) cfg.output_dir = root["output_dir"].get<std::string>();
  get(root, "models", cfg.models, "root");

  if (root.contains("data")) {
    const auto& d = root["data"];
    check_keys(d, {"synthetic", "returns_csv", "returns_column", "context_csv", "implied_csv"}, "data");
    if (d.contains("returns_csv")) {
      cfg.data.synthetic.reset();
      cfg.data.returns_csv = d["returns_csv"].get<std::string>();
    }
    get(d, "returns_column", cfg.data.returns_column, "data");
    if (d.contains("context_csv")) cfg.data.context_csv = d["context_csv"].get<std::string>();
    if (d.contains("implied_csv")) cfg.data.implied_csv = d["implied_csv"].get<std::string>();
    if (d.contains("synthetic")) {
      const auto& s = d["synthetic"];
      check_keys(s, {"n_days", "regimes", "context_noise", "nuisance_signals", "implied_indices", "implied_noise",
                     "seed", "start"},
                 "data.synthetic");
      auto sc = cfg.data.synthetic.value_or(SyntheticMarketConfig{});
      sc.seed = cfg.seed;
      get(s, "n_days", sc.n_days, "data.synthetic");
      get(s, "context_noise", sc.context_noise, "data.synthetic");
      get(s, "nuisance_signals", sc.nuisance_signals, "data.synthetic");
      get(s, "implied_indices", sc.implied_indices, "data.synthetic");
      get(s, "implied_noise", sc.implied_noise, "data.synthetic");
      get(s, "seed", sc.seed, "data.synthetic");
      if (s.contains("start")) sc.start = parse_date(s["start"].get<std::string>());
      if (s.contains("regimes")) {
        sc.regimes.clear();
        for (const auto& r : s["regimes"]) {
          check_keys(r, {"persistence", "mu", "omega", "alpha", "beta"}, "data.synthetic.regimes");
          RegimeSpec spec;
          get(r, "persistence", spec.persistence, "regime");
          get(r, "mu", spec.mu, "regime");
          get(r, "omega", spec.omega, "regime");
          get(r, "alpha", spec.alpha, "regime");
          get(r, "beta", spec.beta, "regime");
          sc.regimes.push_back(spec);
        }
      }
      cfg.data.synthetic = sc;
    }
  }

  if (root.contains("forecast")) {
    const auto& f = root["forecast"];
    const std::string sec = "forecast";
    check_keys(f, {"models", "ma_window", "ls_short_window", "ls_long_window", "ls_threshold", "ewma_lambda",
                   "ewma_seed_window", "realized_smooth", "implied_lookback", "pca_lookback", "tyvix_column"},
               sec);
    get(f, "models", cfg.forecast.models, sec);
    get(f, "ma_window", cfg.forecast.ma_window, sec);
    get(f, "ls_short_window", cfg.forecast.ls_short_window, sec);
    get(f, "ls_long_window", cfg.forecast.ls_long_window, sec);
    get(f, "ls_threshold", cfg.forecast.ls_threshold, sec);
    get(f, "ewma_lambda", cfg.forecast.ewma_lambda, sec);
    get(f, "ewma_seed_window", cfg.forecast.ewma_seed_window, sec);
    get(f, "realized_smooth", cfg.forecast.realized_smooth, sec);
    get(f, "implied_lookback", cfg.forecast.implied_lookback, sec);
    get(f, "pca_lookback", cfg.forecast.pca_lookback, sec);
    get(f, "tyvix_column", cfg.forecast.tyvix_column, sec);
  }

  if (root.contains("target")) {
    const auto& t = root["target"];
    check_keys(t, {"sigma_target_annual", "annualization_days", "leverage_cap"}, "target");
    get(t, "sigma_target_annual", cfg.target.sigma_target_annual, "target");
    get(t, "annualization_days", cfg.target.annualization_days, "target");
    get(t, "leverage_cap", cfg.target.leverage_cap, "target");
  }

  if (root.contains("env")) {
    const auto& e = root["env"];
    check_keys(e, {"cost_rate", "window", "vol_window", "gamma"}, "env");
    get(e, "cost_rate", cfg.env.cost_rate, "env");
    get(e, "window", cfg.env.window, "env");
    get(e, "vol_window", cfg.env.vol_window, "env");
    get(e, "gamma", cfg.env.gamma, "env");
  }

  if (root.contains("network")) {
    const auto& n = root["network"];
    check_keys(n, {"asset_convs", "context_convs", "dense", "activation"}, "network");
    if (n.contains("asset_convs")) cfg.network.asset_convs = parse_convs(n["asset_convs"], "network.asset_convs");
    if (n.contains("context_convs")) cfg.network.context_convs = parse_convs(n["context_convs"], "network.context_convs");
    get(n, "dense", cfg.network.dense, "network");
    if (n.contains("activation")) cfg.network.activation = parse_activation(n["activation"].get<std::string>());
  }

  if (root.contains("train")) {
    const auto& t = root["train"];
    check_keys(t, {"max_steps", "early_stop_patience", "explore_p", "obs_noise_std", "lr", "seed", "min_improvement",
                   "fit_input_norm"},
               "train");
    get(t, "max_steps", cfg.train.max_steps, "train");
    get(t, "early_stop_patience", cfg.train.early_stop_patience, "train");
    get(t, "explore_p", cfg.train.explore_p, "train");
    get(t, "obs_noise_std", cfg.train.obs_noise_std, "train");
    get(t, "lr", cfg.train.lr, "train");
    get(t, "seed", cfg.train.seed, "train");
    get(t, "min_improvement", cfg.train.min_improvement, "train");
    get(t, "fit_input_norm", cfg.train.fit_input_norm, "train");
  }

  if (root.contains("benchmarks")) {
    const auto& b = root["benchmarks"];
    check_keys(b, {"markowitz_window", "markowitz_rebalance", "markowitz_r_min", "winner_lookback", "winner_period"},
               "benchmarks");
    get(b, "markowitz_window", cfg.benchmarks.markowitz_window, "benchmarks");
    get(b, "markowitz_rebalance", cfg.benchmarks.markowitz_rebalance, "benchmarks");
    if (b.contains("markowitz_r_min") && !b["markowitz_r_min"].is_null()) {
      cfg.benchmarks.markowitz_r_min = b["markowitz_r_min"].get<double>();
    }
    get(b, "winner_lookback", cfg.benchmarks.winner_lookback, "benchmarks");
    get(b, "winner_period", cfg.benchmarks.winner_period, "benchmarks");
  }

  if (root.contains("walkforward")) {
    const auto& w = root["walkforward"];
    check_keys(w, {"anchor_start", "first_test_year", "last_test_year", "sensitivity_window"}, "walkforward");
    if (w.contains("anchor_start")) cfg.walkforward.anchor_start = parse_date(w["anchor_start"].get<std::string>());
    get(w, "first_test_year", cfg.walkforward.first_test_year, "walkforward");
    if (w.contains("last_test_year") && !w["last_test_year"].is_null()) {
      cfg.walkforward.last_test_year = w["last_test_year"].get<int>();
    }
    get(w, "sensitivity_window", cfg.walkforward.sensitivity_window, "walkforward");
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string dump_run_config(const RunConfig& cfg) {
  json root;
  root["seed"] = cfg.seed;
  root["output_dir"] = cfg.output_dir.string();
  root["models"] = cfg.models;
  json data = json::object();
  if (cfg.data.synthetic) {
    const auto& s = *cfg.data.synthetic;
    json regimes = json::array();
    for (const auto& r : s.regimes) {
      regimes.push_back({{"persistence", r.persistence}, {"mu", r.mu}, {"omega", r.omega}, {"alpha", r.alpha},
                         {"beta", r.beta}});
    }
    data["synthetic"] = {{"n_days", s.n_days},
                         {"regimes", regimes},
                         {"context_noise", s.context_noise},
                         {"nuisance_signals", s.nuisance_signals},
                         {"implied_indices", s.implied_indices},
                         {"implied_noise", s.implied_noise},
                         {"seed", s.seed},
                         {"start", format_date(s.start)}};
  } else {
    data["returns_csv"] = cfg.data.returns_csv.string();
    data["returns_column"] = cfg.data.returns_column;
    if (!cfg.data.context_csv.empty()) data["context_csv"] = cfg.data.context_csv.string();
    if (!cfg.data.implied_csv.empty()) data["implied_csv"] = cfg.data.implied_csv.string();
  }
  root["data"] = data;
  const auto& f = cfg.forecast;
  root["forecast"] = {{"models", f.models},
                      {"ma_window", f.ma_window},
                      {"ls_short_window", f.ls_short_window},
                      {"ls_long_window", f.ls_long_window},
                      {"ls_threshold", f.ls_threshold},
                      {"ewma_lambda", f.ewma_lambda},
                      {"ewma_seed_window", f.ewma_seed_window},
                      {"realized_smooth", f.realized_smooth},
                      {"implied_lookback", f.implied_lookback},
                      {"pca_lookback", f.pca_lookback},
                      {"tyvix_column", f.tyvix_column}};
  root["target"] = {{"sigma_target_annual", cfg.target.sigma_target_annual},
                    {"annualization_days", cfg.target.annualization_days},
                    {"leverage_cap", cfg.target.leverage_cap}};
  root["env"] = {{"cost_rate", cfg.env.cost_rate},
                 {"window", cfg.env.window},
                 {"vol_window", cfg.env.vol_window},
                 {"gamma", cfg.env.gamma}};
  root["network"] = {{"asset_convs", dump_convs(cfg.network.asset_convs)},
                     {"context_convs", dump_convs(cfg.network.context_convs)},
                     {"dense", cfg.network.dense},
                     {"activation", activation_name(cfg.network.activation)}};
  const auto& t = cfg.train;
  root["train"] = {{"max_steps", t.max_steps},         {"early_stop_patience", t.early_stop_patience},
                   {"explore_p", t.explore_p},         {"obs_noise_std", t.obs_noise_std},
                   {"lr", t.lr},                       {"seed", t.seed},
                   {"min_improvement", t.min_improvement}, {"fit_input_norm", t.fit_input_norm}};
  const auto& b = cfg.benchmarks;
  root["benchmarks"] = {{"markowitz_window", b.markowitz_window},
                        {"markowitz_rebalance", b.markowitz_rebalance},
                        {"markowitz_r_min", b.markowitz_r_min ? json(*b.markowitz_r_min) : json(nullptr)},
                        {"winner_lookback", b.winner_lookback},
                        {"winner_period", b.winner_period}};
  json wf = {{"first_test_year", cfg.walkforward.first_test_year},
             {"last_test_year", cfg.walkforward.last_test_year ? json(*cfg.walkforward.last_test_year) : json(nullptr)},
             {"sensitivity_window", cfg.walkforward.sensitivity_window}};
  if (cfg.walkforward.anchor_start) wf["anchor_start"] = format_date(*cfg.walkforward.anchor_start);
  root["walkforward"] = wf;
  return root.dump(2);
}

}  // namespace vtlab
