#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "vtlab/pipeline.hpp"

using namespace vtlab;
namespace fs = std::filesystem;

namespace {

const char* kSmallRun = R"({
  "seed": 5,
  "data": {"synthetic": {"n_days": 1500, "implied_indices": 2}},
  "forecast": {"models": ["moving_average", "garch", "har", "adjusted_pca"]},
  "env": {"window": 20, "vol_window": 10},
  "network": {"asset_convs": [[3, 3]], "context_convs": [[3, 2]], "dense": [8]},
  "train": {"max_steps": 3000, "early_stop_patience": 3},
  "benchmarks": {"markowitz_window": 120, "winner_lookback": 60, "winner_period": 60},
  "walkforward": {"first_test_year": 2004, "last_test_year": 2005}
})";

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("vtlab_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VTLAB_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("walk-forward run") {
  const auto cfg = parse_run_config(kSmallRun);
  const auto in = load_inputs(cfg);
  WalkForwardOptions opts;
  opts.threads = 2;
  const auto a = run_walkforward(cfg, in, opts);

  REQUIRE(a.splits.size() == 2);
  CHECK(a.leak_free());
  CHECK(a.report.model_order == std::vector<std::string>(kReportModels.begin(), kReportModels.end()));
  CHECK(a.report.strategies == cfg.forecast.models);
  const auto& drl1 = a.report.returns.at("DRL1");
  CHECK(drl1.dates().front().year() == std::chrono::year{2004});
  for (const auto& [name, r] : a.report.returns) {
    CHECK(r.dates() == drl1.dates());
    CHECK(a.report.allocations.at(name).weights.size() == r.size());
  }
  CHECK(a.report.forecasts.dates() == drl1.dates());
  CHECK(a.report.sensitivity.size() == 2);
  for (const auto& s : a.splits) {
    CHECK(s.audit_reads > 0);
    CHECK(s.split.train_end < s.split.test_start);
  }

  SUBCASE("deterministic for a fixed seed and thread count independent") {
    opts.threads = 1;
    const auto b = run_walkforward(cfg, in, opts);
    for (const auto& [name, r] : a.report.returns) CHECK(b.report.returns.at(name).values() == r.values());
  }
  SUBCASE("a training phase that reads past its horizon is flagged") {
    opts.leak_days = 5;
    const auto leaky = run_walkforward(cfg, in, opts);
    CHECK_FALSE(leaky.leak_free());
    for (const auto& s : leaky.splits) {
      REQUIRE_FALSE(s.violations.empty());
      CHECK(s.violations.front().read > s.split.train_end);
      CHECK(s.violations.front().horizon == s.split.train_end);
    }
  }
  SUBCASE("artifacts round trip") {
    const auto dir = scratch("artifacts");
    save_artifacts(dir, a.report);
    const auto back = load_artifacts(dir);
    CHECK(back.model_order == a.report.model_order);
    for (const auto& [name, r] : a.report.returns) {
      const auto& v = back.returns.at(name).values();
      REQUIRE(v.size() == r.size());
      for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == doctest::Approx(r.values()[i]).epsilon(1e-12));
    }
    REQUIRE(back.sensitivity.size() == a.report.sensitivity.size());
    CHECK(back.sensitivity[0].features == a.report.sensitivity[0].features);
  }
}

TEST_CASE("subset of models") {
  auto cfg = parse_run_config(kSmallRun);
  cfg.models = {"average", "winner"};
  cfg.walkforward.last_test_year = 2004;
  const auto r = run_walkforward(cfg, load_inputs(cfg), {});
  CHECK(r.report.model_order == std::vector<std::string>{"Average", "Winner"});
  CHECK(r.splits.front().training.empty());
  CHECK(r.report.sensitivity.empty());
}

TEST_CASE("csv inputs match the synthetic market they were written from") {
  const auto dir = scratch("csv");
  auto cfg = parse_run_config(kSmallRun);
  const auto m = simulate_market(*cfg.data.synthetic);
  write_panel_csv(dir / "returns.csv", SeriesPanel::from_series(m.returns, "bond"));
  write_panel_csv(dir / "context.csv", m.context);
  write_panel_csv(dir / "implied.csv", m.implied);
  RunConfig csv = cfg;
  csv.data.synthetic.reset();
  csv.data.returns_csv = dir / "returns.csv";
  csv.data.context_csv = dir / "context.csv";
  csv.data.implied_csv = dir / "implied.csv";
  CHECK_NOTHROW(csv.validate());
  const auto in = load_inputs(csv);
  CHECK(in.bond.dates() == m.returns.dates());
  CHECK(in.context.names() == m.context.names());
  CHECK(in.implied.cols() == m.implied.cols());
  const auto p1 = build_strategies(cfg, load_inputs(cfg));
  const auto p2 = build_strategies(csv, in);
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.strategies(); ++i) {
    CHECK(p1.returns(p1.size() - 1, i) == doctest::Approx(p2.returns(p2.size() - 1, i)).epsilon(1e-8));
  }
}

TEST_CASE("command line") {
  const auto dir = scratch("cli");
  std::ofstream(dir / "run.json") << kSmallRun;
  const std::string conf = "--config " + (dir / "run.json").string();

  CHECK(run_cli("simulate " + conf + " --out " + (dir / "sim").string()) == 0);
  CHECK(fs::exists(dir / "sim" / "returns.csv"));
  CHECK(fs::exists(dir / "sim" / "context.csv"));

  CHECK(run_cli("forecast " + conf + " --models garch,har --out " + (dir / "fc").string()) == 0);
  CHECK(fs::exists(dir / "fc" / "forecasts.csv"));

  CHECK(run_cli("backtest " + conf + " --out " + (dir / "bt").string()) == 0);
  CHECK(fs::exists(dir / "bt" / "strategy_metrics.csv"));

  CHECK(run_cli("train " + conf + " --variant drl2 --out " + (dir / "tr").string()) == 0);
  CHECK(fs::exists(dir / "tr" / "policy.ckpt"));
  CHECK(fs::exists(dir / "tr" / "train_log.csv"));

  CHECK(run_cli("sensitivity " + conf + " --checkpoint " + (dir / "tr" / "policy.ckpt").string() + " --out " +
                (dir / "sens").string()) == 0);
  CHECK(fs::exists(dir / "sens" / "sensitivity.csv"));

  const auto wf = dir / "wf";
  CHECK(run_cli("walkforward " + conf + " --out " + wf.string()) == 0);
  for (const char* f : {"metrics_1y.csv", "metrics_3y.csv", "metrics_5y.csv", "ttest.csv", "sensitivity.csv",
                        "allocations.csv", "rank_histogram.csv", "equity.dat"}) {
    CHECK_MESSAGE(fs::exists(wf / "report" / f), f);
  }
  fs::remove_all(wf / "report");
  CHECK(run_cli("report " + conf + " --out " + wf.string()) == 0);
  CHECK(fs::exists(wf / "report" / "ttest.csv"));

  SUBCASE("bad input exits non-zero before writing anything") {
    std::ofstream(dir / "bad.json") << R"({"sed": 1})";
    const auto out = dir / "never";
    CHECK(run_cli("walkforward --config " + (dir / "bad.json").string() + " --out " + out.string()) == 1);
    CHECK_FALSE(fs::exists(out));
    CHECK(run_cli("train " + conf + " --variant drl3") != 0);
    CHECK(run_cli("") != 0);
  }
}
