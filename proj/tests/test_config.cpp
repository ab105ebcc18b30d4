#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "vtlab/config.hpp"

using namespace vtlab;

TEST_CASE("defaults") {
  auto cfg = default_run_config();
  REQUIRE(cfg.data.synthetic.has_value());
  CHECK(cfg.seed == 42);
  CHECK(cfg.models == kDefaultRunModels);
  CHECK(cfg.forecast.models == kDefaultModels);
  CHECK(cfg.train.seed == cfg.seed);
  CHECK(cfg.data.synthetic->seed == cfg.seed);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("missing keys keep defaults") {
  auto cfg = parse_run_config(R"({"seed": 7, "env": {"cost_rate": 0.002}, "network": {"activation": "tanh"}})");
  CHECK(cfg.seed == 7);
  CHECK(cfg.train.seed == 7);
  CHECK(cfg.data.synthetic->seed == 7);
  CHECK(cfg.env.cost_rate == 0.002);
  CHECK(cfg.env.window == EnvConfig{}.window);
  CHECK(cfg.network.activation == Activation::kTanh);
  CHECK(cfg.target.sigma_target_annual == TargetConfig{}.sigma_target_annual);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("nested values parse") {
  auto cfg = parse_run_config(R"({
    "data": {"synthetic": {"n_days": 1200, "regimes": [
      {"persistence": 0.99, "mu": 0.0001, "omega": 1e-6, "alpha": 0.05, "beta": 0.9},
      {"persistence": 0.98, "mu": 0.0, "omega": 4e-6, "alpha": 0.1, "beta": 0.85}]}},
    "network": {"asset_convs": [[3, 4]], "context_convs": [[5, 2]], "dense": [16, 8]},
    "benchmarks": {"markowitz_r_min": 0.0002, "winner_period": 21},
    "walkforward": {"anchor_start": "2001-01-02", "first_test_year": 2003, "last_test_year": 2004},
    "models": ["drl1", "average"]
  })");
  CHECK(cfg.data.synthetic->n_days == 1200);
  REQUIRE(cfg.data.synthetic->regimes.size() == 2);
  CHECK(cfg.data.synthetic->regimes[1].omega == 4e-6);
  REQUIRE(cfg.network.asset_convs.size() == 1);
  CHECK(cfg.network.context_convs[0].kernel == 5);
  CHECK(cfg.network.dense == std::vector<std::size_t>{16, 8});
  CHECK(cfg.benchmarks.markowitz_r_min.value() == 0.0002);
  CHECK(cfg.benchmarks.winner_period == 21);
  CHECK(*cfg.walkforward.anchor_start == parse_date("2001-01-02"));
  CHECK(cfg.walkforward.last_test_year.value() == 2004);
  CHECK(cfg.models == std::vector<std::string>{"drl1", "average"});
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("dump round trip") {
  auto cfg = parse_run_config(R"({"seed": 3, "train": {"lr": 0.01}, "forecast": {"models": ["garch", "har"]}})");
  auto again = parse_run_config(dump_run_config(cfg));
  CHECK(dump_run_config(again) == dump_run_config(cfg));
  CHECK(again.train.lr == 0.01);
  CHECK(again.forecast.models == std::vector<std::string>{"garch", "har"});
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_WITH_AS(parse_run_config(R"({"sed": 1})"), doctest::Contains("unknown key 'sed'"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_run_config(R"({"env": {"costrate": 0.1}})"), doctest::Contains("'env'"),
                       std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(R"({"env": {"window": "ten"}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(R"({"network": {"activation": "gelu"}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(R"({"models": ["drl3"]})").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(R"({"forecast": {"models": ["arima"]}})").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(R"({"env": {"cost_rate": -0.1}})").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(R"({"walkforward": {"first_test_year": 2010, "last_test_year": 2009}})").validate(),
                  std::invalid_argument);
}

TEST_CASE("implied models require an implied input") {
  auto cfg = parse_run_config(R"({"data": {"synthetic": {"implied_indices": 0}}})");
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("implied"), std::invalid_argument);
  cfg.forecast.models = {"garch", "har"};
  CHECK_NOTHROW(cfg.validate());

  const auto dir = std::filesystem::temp_directory_path() / "vtlab_config_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "r.csv") << "date,bond\n2020-01-02,0.001\n";
  auto csv = parse_run_config(R"({"data": {"returns_csv": ")" + (dir / "r.csv").string() + R"("}})");
  CHECK_FALSE(csv.data.synthetic.has_value());
  CHECK_THROWS_WITH_AS(csv.validate(), doctest::Contains("implied"), std::invalid_argument);
  csv.forecast.models = {"moving_average"};
  CHECK_NOTHROW(csv.validate());
  csv.data.context_csv = dir / "missing.csv";
  CHECK_THROWS_WITH_AS(csv.validate(), doctest::Contains("does not exist"), std::invalid_argument);
}

TEST_CASE("load from file") {
  const auto path = std::filesystem::temp_directory_path() / "vtlab_config_test.json";
  std::ofstream(path) << R"({"seed": 11, "output_dir": "somewhere"})";
  auto cfg = load_run_config(path);
  CHECK(cfg.seed == 11);
  CHECK(cfg.output_dir == "somewhere");
  CHECK_THROWS_AS(load_run_config(path.string() + ".nope"), std::invalid_argument);
}
