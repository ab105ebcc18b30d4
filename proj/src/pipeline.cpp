#include "vtlab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace vtlab {

MarketInputs load_inputs(const RunConfig& cfg) {
  MarketInputs in;
  if (cfg.data.synthetic) {
    auto m = simulate_market(*cfg.data.synthetic);
    in.bond = std::move(m.returns);
    in.context = std::move(m.context);
    in.implied = std::move(m.implied);
    return in;
  }
  if (cfg.data.returns_column.empty()) {
    const auto panel = load_panel_csv(cfg.data.returns_csv);
    if (panel.cols() == 0) throw DataError("'" + cfg.data.returns_csv.string() + "' has no return column");
    in.bond = panel.series(0);
  } else {
    in.bond = load_returns_csv(cfg.data.returns_csv, cfg.data.returns_column);
  }
  if (!cfg.data.context_csv.empty()) in.context = load_panel_csv(cfg.data.context_csv);
  if (!cfg.data.implied_csv.empty()) in.implied = load_panel_csv(cfg.data.implied_csv);
  return in;
}

namespace {

std::size_t rows_through(const std::vector<Date>& dates, Date last) {
  return static_cast<std::size_t>(std::upper_bound(dates.begin(), dates.end(), last) - dates.begin());
}

std::size_t rows_before(const std::vector<Date>& dates, Date first) {
  return static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), first) - dates.begin());
}

SeriesPanel panel_through(const SeriesPanel& p, Date last) {
  return p.cols() == 0 ? p : p.slice(0, rows_through(p.dates(), last));
}

MarketInputs inputs_from(const MarketInputs& in, Date first) {
  MarketInputs out;
  out.bond = in.bond.slice(rows_before(in.bond.dates(), first), in.bond.size());
  if (in.context.cols() > 0) out.context = in.context.slice(rows_before(in.context.dates(), first), in.context.rows());
  if (in.implied.cols() > 0) out.implied = in.implied.slice(rows_before(in.implied.dates(), first), in.implied.rows());
  return out;
}

}  // namespace

MarketInputs truncate_inputs(const MarketInputs& in, Date last) {
  MarketInputs out;
  out.bond = in.bond.slice(0, rows_through(in.bond.dates(), last));
  out.context = panel_through(in.context, last);
  out.implied = panel_through(in.implied, last);
  return out;
}

StrategyPanel build_strategies(const RunConfig& cfg, const MarketInputs& in, std::size_t fit_rows, DataAudit* audit,
                               SeriesPanel* forecasts_out) {
  auto bundle = forecast_all(cfg.forecast, ForecastInputs{in.bond, in.implied}, fit_rows, audit);
  auto panel = build_strategy_panel(bundle.forecasts, in.bond, cfg.target);
  if (forecasts_out) *forecasts_out = std::move(bundle.forecasts);
  return panel;
}

std::vector<std::string> context_feature_names(const SeriesPanel& context) {
  std::vector<std::string> out = context.names();
  out.insert(out.end(), {"max_return", "min_return", "max_vol"});
  return out;
}

NetworkArch network_for(const RunConfig& cfg, const PortfolioEnv& env) {
  NetworkArch arch = cfg.network;
  arch.assets = env.assets();
  arch.context_rows = env.context_rows();
  arch.window = env.window();
  arch.validate();
  return arch;
}

std::string report_model_name(const std::string& key) {
  static const std::map<std::string, std::string> names{
      {"drl1", "DRL1"}, {"drl2", "DRL2"}, {"average", "Average"}, {"markowitz", "Markowitz"}, {"winner", "Winner"}};
  const auto it = names.find(key);
  if (it == names.end()) throw std::invalid_argument("unknown allocation model '" + key + "'");
  return it->second;
}

bool WalkForwardResult::leak_free() const {
  return std::all_of(splits.begin(), splits.end(), [](const SplitResult& s) { return s.violations.empty(); });
}

std::size_t worker_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("VT_LAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

bool wants(const RunConfig& cfg, const std::string& key) {
  return std::find(cfg.models.begin(), cfg.models.end(), key) != cfg.models.end();
}

SplitResult run_split(const RunConfig& cfg, const MarketInputs& in, const WalkForwardSplit& split, std::size_t index,
                      const WalkForwardOptions& opts) {
  SplitResult res;
  res.split = split;
  const bool drl1 = wants(cfg, "drl1"), drl2 = wants(cfg, "drl2");
  const auto& dates = in.bond.dates();

  DataAudit audit;
  audit.begin_phase("train " + std::to_string(split.test_year), split.train_end);
  const Date cut = dates[std::min(split.train_last + opts.leak_days, dates.size() - 1)];
  const auto train_in = truncate_inputs(in, cut);
  audit.record("train_inputs", train_in.bond.dates());
  const auto train_panel = build_strategies(cfg, train_in, 0, &audit);

  TrainConfig tc = cfg.train;
  tc.seed = cfg.train.seed + 1000 * index;
  PolicyParams best1, best2;
  if (drl1) {
    PortfolioEnv env(train_panel, train_in.context, cfg.env, 0, &audit, "drl1_train_env");
    auto report = train_policy(env, network_for(cfg, env), tc);
    best1 = report.best_params;
    res.training.emplace("DRL1", std::move(report));
  }
  if (drl2) {
    EnvConfig ec = cfg.env;
    ec.mask_context_and_vol = true;
    PortfolioEnv env(train_panel, train_in.context, ec, 0, &audit, "drl2_train_env");
    auto report = train_policy(env, network_for(cfg, env), tc);
    best2 = report.best_params;
    res.training.emplace("DRL2", std::move(report));
  }
  audit.end_phase();
  res.violations = audit.violations();
  res.audit_reads = audit.reads();

  // Test year: forecasts fitted through train_end, filtered through test_end.
  const auto test_in = truncate_inputs(in, split.test_end);
  SeriesPanel forecasts;
  const auto panel =
      build_strategies(cfg, test_in, rows_through(test_in.bond.dates(), split.train_end), nullptr, &forecasts);
  const std::size_t first_row = rows_before(panel.dates(), split.test_start);
  PortfolioEnv env(panel, test_in.context, cfg.env, first_row);
  if (env.first_row() != first_row) {
    throw std::invalid_argument("walkforward: not enough history before test year " +
                                std::to_string(split.test_year) + " for the observation window");
  }
  if (drl1) res.test.emplace("DRL1", evaluate_policy(best1, env));
  if (drl2) {
    EnvConfig ec = cfg.env;
    ec.mask_context_and_vol = true;
    PortfolioEnv masked(panel, test_in.context, ec, first_row);
    res.test.emplace("DRL2", evaluate_policy(best2, masked));
  }
  if (wants(cfg, "average")) res.test.emplace("Average", run_episode(env, average_policy(env.assets())));
  if (wants(cfg, "markowitz")) res.test.emplace("Markowitz", run_episode(env, markowitz_policy(env, cfg.benchmarks)));
  if (wants(cfg, "winner")) res.test.emplace("Winner", run_episode(env, winner_policy(env, cfg.benchmarks)));

  const std::size_t f0 = rows_before(forecasts.dates(), split.test_start);
  res.test_forecasts = forecasts.slice(f0, forecasts.rows());

  if (drl1 && env.steps() >= cfg.walkforward.sensitivity_window) {
    std::vector<Observation> obs;
    obs.reserve(env.steps());
    for (std::size_t k = 0; k < env.steps(); ++k) obs.push_back(env.observation(k));
    res.sensitivity = feature_sensitivity(best1, obs, cfg.walkforward.sensitivity_window,
                                          feature_names(panel.names(), context_feature_names(env.context())));
  }
  return res;
}

}  // namespace

WalkForwardResult run_walkforward(const RunConfig& cfg, const MarketInputs& raw, const WalkForwardOptions& opts) {
  cfg.validate();
  const MarketInputs in = cfg.walkforward.anchor_start ? inputs_from(raw, *cfg.walkforward.anchor_start) : raw;
  if (in.bond.empty()) throw DataError("walkforward: no data on or after the anchor date");
  const auto& dates = in.bond.dates();
  const int last_year = cfg.walkforward.last_test_year ? *cfg.walkforward.last_test_year
                                                       : static_cast<int>(dates.back().year());
  const auto splits = walk_forward_splits(dates, dates.front(), cfg.walkforward.first_test_year, last_year);

  WalkForwardResult out;
  out.splits.resize(splits.size());
  std::vector<std::exception_ptr> errors(splits.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < splits.size(); i = next++) {
      try {
        out.splits[i] = run_split(cfg, in, splits[i], i, opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(worker_threads(opts.threads), splits.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  auto& rep = out.report;
  rep.model_order.clear();
  for (const auto& name : kReportModels) {
    for (const auto& key : cfg.models) {
      if (report_model_name(key) == name) rep.model_order.push_back(name);
    }
  }
  rep.rank_model = "DRL1";
  std::vector<SeriesPanel> forecast_parts;
  for (const auto& name : rep.model_order) {
    std::vector<Date> d;
    std::vector<double> v;
    AllocationTrack track;
    for (const auto& s : out.splits) {
      const auto& ep = s.test.at(name);
      d.insert(d.end(), ep.dates.begin(), ep.dates.end());
      v.insert(v.end(), ep.net_returns.begin(), ep.net_returns.end());
      track.dates.insert(track.dates.end(), ep.dates.begin(), ep.dates.end());
      track.weights.insert(track.weights.end(), ep.actions.begin(), ep.actions.end());
    }
    rep.returns.emplace(name, ReturnSeries(std::move(d), std::move(v)));
    rep.allocations.emplace(name, std::move(track));
  }
  std::vector<Date> fd;
  std::vector<double> fv;
  for (const auto& s : out.splits) {
    fd.insert(fd.end(), s.test_forecasts.dates().begin(), s.test_forecasts.dates().end());
    fv.insert(fv.end(), s.test_forecasts.data().begin(), s.test_forecasts.data().end());
    if (!s.sensitivity.raw.empty()) rep.sensitivity.push_back(s.sensitivity);
  }
  if (!out.splits.empty()) {
    rep.strategies = out.splits.front().test_forecasts.names();
    rep.forecasts = SeriesPanel(std::move(fd), rep.strategies, std::move(fv));
  }
  return out;
}

// --- artifacts --------------------------------------------------------------------

void save_artifacts(const std::filesystem::path& dir, const ReportInputs& in) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["model_order"] = in.model_order;
  meta["strategies"] = in.strategies;
  meta["rank_model"] = in.rank_model;
  meta["sensitivity_splits"] = in.sensitivity.size();
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';

  if (!in.model_order.empty()) {
    const auto& dates = in.returns.at(in.model_order.front()).dates();
    std::vector<std::vector<double>> cols;
    for (const auto& m : in.model_order) cols.push_back(in.returns.at(m).values());
    write_panel_csv(dir / "returns.csv", SeriesPanel::from_columns(dates, in.model_order, cols));
  }
  if (in.forecasts.cols() > 0) write_panel_csv(dir / "forecasts.csv", in.forecasts);
  for (const auto& [model, track] : in.allocations) {
    std::vector<double> flat;
    for (const auto& w : track.weights) flat.insert(flat.end(), w.begin(), w.end());
    write_panel_csv(dir / ("allocations_" + model + ".csv"), SeriesPanel(track.dates, in.strategies, flat));
  }
  for (std::size_t i = 0; i < in.sensitivity.size(); ++i) {
    std::ofstream out(dir / ("sensitivity_" + std::to_string(i) + ".csv"));
    out << "feature,raw\n" << std::setprecision(17);
    const auto& s = in.sensitivity[i];
    for (std::size_t j = 0; j < s.features.size(); ++j) out << s.features[j] << ',' << s.raw[j] << '\n';
  }
}

ReportInputs load_artifacts(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw std::runtime_error("report: missing run artifacts in '" + dir.string() + "'");
  const auto meta = nlohmann::json::parse(meta_in);
  ReportInputs in;
  in.model_order = meta.at("model_order").get<std::vector<std::string>>();
  in.strategies = meta.at("strategies").get<std::vector<std::string>>();
  in.rank_model = meta.at("rank_model").get<std::string>();
  const auto returns = load_panel_csv(dir / "returns.csv");
  for (const auto& m : in.model_order) in.returns.emplace(m, returns.series(returns.column_index(m)));
  if (std::filesystem::exists(dir / "forecasts.csv")) in.forecasts = load_panel_csv(dir / "forecasts.csv");
  for (const auto& m : in.model_order) {
    const auto path = dir / ("allocations_" + m + ".csv");
    if (!std::filesystem::exists(path)) continue;
    const auto p = load_panel_csv(path);
    AllocationTrack track;
    track.dates = p.dates();
    for (std::size_t r = 0; r < p.rows(); ++r) track.weights.emplace_back(p.row(r).begin(), p.row(r).end());
    in.allocations.emplace(m, std::move(track));
  }
  const auto splits = meta.at("sensitivity_splits").get<std::size_t>();
  for (std::size_t i = 0; i < splits; ++i) {
    std::ifstream s(dir / ("sensitivity_" + std::to_string(i) + ".csv"));
    if (!s) throw std::runtime_error("report: missing sensitivity artifact " + std::to_string(i));
    SensitivityReport rep;
    std::string line;
    std::getline(s, line);
    while (std::getline(s, line)) {
      if (line.empty()) continue;
      const auto comma = line.rfind(',');
      rep.features.push_back(line.substr(0, comma));
      rep.raw.push_back(std::stod(line.substr(comma + 1)));
    }
    rep.score = scale_scores(rep.raw);
    in.sensitivity.push_back(std::move(rep));
  }
  return in;
}

}  // namespace vtlab
