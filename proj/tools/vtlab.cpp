#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vtlab/config.hpp"
#include "vtlab/evalkit.hpp"
#include "vtlab/pipeline.hpp"

using namespace vtlab;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string models;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Loads, overrides and validates the config before any output is written.
RunConfig prepare(const Common& c, bool models_are_forecasts) {
  RunConfig cfg = c.config.empty() ? default_run_config() : load_run_config(c.config);
  if (c.seed) apply_seed(cfg, *c.seed);
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (!c.models.empty()) {
    if (models_are_forecasts) {
      cfg.forecast.models = split_list(c.models);
    } else {
      cfg.models = split_list(c.models);
    }
  }
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, Common& c, const std::string& models_help) {
  cmd->add_option("--config", c.config, "JSON run configuration (defaults: synthetic market)");
  cmd->add_option("--seed", c.seed, "global seed, overrides the config");
  cmd->add_option("--out", c.out, "output directory, overrides the config");
  if (!models_help.empty()) cmd->add_option("--models", c.models, models_help);
}

int cmd_simulate(const Common& c) {
  RunConfig cfg = prepare(c, false);
  if (!cfg.data.synthetic) throw std::invalid_argument("simulate: config has no synthetic market section");
  const auto m = simulate_market(*cfg.data.synthetic);
  std::filesystem::create_directories(cfg.output_dir);
  write_panel_csv(cfg.output_dir / "returns.csv", SeriesPanel::from_series(m.returns, "bond"));
  write_panel_csv(cfg.output_dir / "context.csv", m.context);
  if (m.implied.cols() > 0) write_panel_csv(cfg.output_dir / "implied.csv", m.implied);
  std::cout << "wrote " << m.returns.size() << " days to " << cfg.output_dir << '\n';
  return 0;
}

int cmd_forecast(const Common& c) {
  RunConfig cfg = prepare(c, true);
  const auto in = load_inputs(cfg);
  const auto bundle = forecast_all(cfg.forecast, ForecastInputs{in.bond, in.implied});
  std::filesystem::create_directories(cfg.output_dir);
  write_panel_csv(cfg.output_dir / "forecasts.csv", bundle.forecasts);
  std::cout << "wrote " << bundle.forecasts.cols() << " forecast columns over " << bundle.forecasts.rows()
            << " days\n";
  return 0;
}

int cmd_backtest(const Common& c) {
  RunConfig cfg = prepare(c, true);
  const auto in = load_inputs(cfg);
  const auto panel = build_strategies(cfg, in);
  std::filesystem::create_directories(cfg.output_dir);
  write_panel_csv(cfg.output_dir / "strategy_returns.csv", panel.returns);
  write_panel_csv(cfg.output_dir / "strategy_prices.csv", panel.prices);
  std::ofstream out(cfg.output_dir / "strategy_metrics.csv");
  out << "# return and mdd in percent; mdd/vol = mdd / annualized vol in percent\n";
  out << "strategy,return,sharpe,sortino,mdd,mdd/vol,realized_vol\n" << std::setprecision(6);
  for (std::size_t i = 0; i < panel.strategies(); ++i) {
    const auto r = panel.returns.column(i);
    const auto m = metrics(r);
    double mean = 0.0, ss = 0.0;
    for (double v : r) mean += v / static_cast<double>(r.size());
    for (double v : r) ss += (v - mean) * (v - mean);
    const double vol = std::sqrt(ss / static_cast<double>(r.size() - 1) * cfg.target.annualization_days);
    out << panel.names()[i] << ',' << m.annual_return << ',' << m.sharpe << ',' << m.sortino << ',' << m.mdd << ','
        << m.mdd_over_vol << ',' << vol << '\n';
  }
  std::cout << "backtested " << panel.strategies() << " strategies over " << panel.size() << " days\n";
  return 0;
}

int cmd_train(const Common& c, bool drl2) {
  RunConfig cfg = prepare(c, false);
  const auto in = load_inputs(cfg);
  const auto panel = build_strategies(cfg, in);
  EnvConfig ec = cfg.env;
  ec.mask_context_and_vol = drl2;
  PortfolioEnv env(panel, in.context, ec);
  const auto report = train_policy(env, network_for(cfg, env), cfg.train);
  std::filesystem::create_directories(cfg.output_dir);
  save_checkpoint(cfg.output_dir / "policy.ckpt", report.best_params);
  write_train_log(cfg.output_dir / "train_log.csv", report);
  std::ofstream(cfg.output_dir / "config.json") << dump_run_config(cfg) << '\n';
  std::cout << "episodes " << report.episode_rewards.size() << ", best reward " << report.best_reward
            << " (episode " << report.best_episode << "), stopped on " << stop_reason_name(report.stop) << " after "
            << report.wall_seconds << " s\n";
  return 0;
}

int cmd_walkforward(const Common& c) {
  RunConfig cfg = prepare(c, false);
  const auto in = load_inputs(cfg);
  const auto result = run_walkforward(cfg, in);
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream(cfg.output_dir / "config.json") << dump_run_config(cfg) << '\n';
  save_artifacts(cfg.output_dir / "artifacts", result.report);
  write_report(cfg.output_dir / "report", result.report);
  for (const auto& s : result.splits) {
    std::cout << "test " << s.split.test_year << ": train " << format_date(s.split.train_start) << ".."
              << format_date(s.split.train_end) << ", audited reads " << s.audit_reads;
    for (const auto& [name, ep] : s.test) std::cout << ", " << name << ' ' << std::setprecision(4) << ep.reward;
    std::cout << '\n';
  }
  if (!result.leak_free()) {
    for (const auto& s : result.splits) {
      for (const auto& v : s.violations) {
        std::cerr << "leak: " << v.phase << " reader " << v.reader << " read " << format_date(v.read)
                  << " past horizon " << format_date(v.horizon) << '\n';
      }
    }
    return 2;
  }
  std::cout << "report written to " << (cfg.output_dir / "report") << '\n';
  return 0;
}

int cmd_sensitivity(const Common& c, const std::string& checkpoint) {
  RunConfig cfg = prepare(c, false);
  const auto params = load_checkpoint(checkpoint);
  const auto in = load_inputs(cfg);
  const auto panel = build_strategies(cfg, in);
  PortfolioEnv env(panel, in.context, cfg.env);
  if (network_for(cfg, env).assets != params.arch.assets || env.context_rows() != params.arch.context_rows ||
      env.window() != params.arch.window) {
    throw std::invalid_argument("sensitivity: checkpoint architecture does not match the configured data");
  }
  std::vector<Observation> obs;
  for (std::size_t k = 0; k < env.steps(); ++k) obs.push_back(env.observation(k));
  const auto rep = feature_sensitivity(params, obs, cfg.walkforward.sensitivity_window,
                                       feature_names(panel.names(), context_feature_names(env.context())));
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream out(cfg.output_dir / "sensitivity.csv");
  out << "feature,raw,score,rank\n" << std::setprecision(10);
  for (std::size_t r = 0; r < rep.ranking.size(); ++r) {
    const auto j = rep.ranking[r];
    out << rep.features[j] << ',' << rep.raw[j] << ',' << rep.score[j] << ',' << r + 1 << '\n';
  }
  std::cout << "top feature: " << rep.features[rep.ranking.front()] << '\n';
  return 0;
}

int cmd_report(const Common& c) {
  RunConfig cfg = prepare(c, false);
  const auto in = load_artifacts(cfg.output_dir / "artifacts");
  write_report(cfg.output_dir / "report", in);
  std::cout << "report written to " << (cfg.output_dir / "report") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volatility-targeting strategy allocation with a policy-gradient agent"};
  app.require_subcommand(1);
  Common c;
  std::string checkpoint;
  std::string variant = "drl1";

  auto* simulate = app.add_subcommand("simulate", "write a synthetic market to CSV");
  add_common(simulate, c, "");
  auto* forecast = app.add_subcommand("forecast", "volatility forecasts of every model");
  add_common(forecast, c, "comma-separated forecast models");
  auto* backtest = app.add_subcommand("backtest", "volatility-targeting strategies and their metrics");
  add_common(backtest, c, "comma-separated forecast models");
  auto* train = app.add_subcommand("train", "train a policy on the full sample");
  add_common(train, c, "");
  train->add_option("--variant", variant, "drl1 (full inputs) or drl2 (no context, no vol channel)")
      ->check(CLI::IsMember({"drl1", "drl2"}));
  auto* walk = app.add_subcommand("walkforward", "anchored walk-forward run and report");
  add_common(walk, c, "comma-separated allocation models (drl1,drl2,average,markowitz,winner)");
  auto* sens = app.add_subcommand("sensitivity", "feature sensitivity of a trained policy");
  add_common(sens, c, "");
  sens->add_option("--checkpoint", checkpoint, "policy checkpoint")->required()->check(CLI::ExistingFile);
  auto* report = app.add_subcommand("report", "rebuild the report from walk-forward artifacts");
  add_common(report, c, "");

  CLI11_PARSE(app, argc, argv);
  try {
    if (simulate->parsed()) return cmd_simulate(c);
    if (forecast->parsed()) return cmd_forecast(c);
    if (backtest->parsed()) return cmd_backtest(c);
    if (train->parsed()) return cmd_train(c, variant == "drl2");
    if (walk->parsed()) return cmd_walkforward(c);
    if (sens->parsed()) return cmd_sensitivity(c, checkpoint);
    if (report->parsed()) return cmd_report(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
