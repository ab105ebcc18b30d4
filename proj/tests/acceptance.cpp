// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "simplex_grid.hpp"
#include "test_util.hpp"
#include "toy_env.hpp"
#include "vtlab/pipeline.hpp"

using namespace vtlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};


template <typename... Args>
std::string fmtn(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string cell;
  while (std::getline(s, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// 1. GARCH recovery.
Outcome garch_recovery() {
  std::vector<double> alpha_err, beta_err, secs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto path = testutil::simulate_garch(1e-6, 0.08, 0.90, 0.0, 20000, 1000 + seed);
    Stopwatch sw;
    const auto p = fit_garch(path.returns, false);
    secs.push_back(sw.seconds());
    alpha_err.push_back(std::abs(p.alpha - 0.08));
    beta_err.push_back(std::abs(p.beta - 0.90));
  }
  const double ma = median(alpha_err), mb = median(beta_err);
  const double slowest = *std::max_element(secs.begin(), secs.end());
  return {ma <= 0.03 && mb <= 0.03 && slowest < 30.0,
          fmtn("median |alpha err| %.4f, median |beta err| %.4f, slowest fit %.2f s", ma, mb, slowest)};
}

// 2. Oracle forecasts give the target volatility.
Outcome vol_targeting() {
  SyntheticMarketConfig sc;
  sc.n_days = 5000;
  sc.regimes = {RegimeSpec{0.99, 0.0, 1e-6, 0.08, 0.9}, RegimeSpec{0.99, 0.0, 4e-6, 0.05, 0.9}};
  sc.seed = 77;
  const auto m = simulate_market(sc);
  const auto oracle = SeriesPanel::from_columns(m.returns.dates(), {"oracle"}, {m.conditional_vol});
  TargetConfig tc;
  const auto panel = build_strategy_panel(oracle, m.returns, tc);
  const double vol = testutil::stdev(panel.returns.column(0)) * std::sqrt(tc.annualization_days);
  const double rel = std::abs(vol / tc.sigma_target_annual - 1.0);
  return {rel <= 0.10, fmtn("realized %.4f vs target %.2f (%.1f%% off)", vol, tc.sigma_target_annual, 100 * rel)};
}

// 3. Episode gradient against central finite differences.
Outcome gradient_exactness() {
  Stopwatch sw;
  auto env = testutil::toy_env(2, 30, 9, 1e-3, 0.05);
  auto params = init_params(testutil::toy_arch(env, Activation::kTanh), 11);
  params.norm = fit_input_norm(env);
  for (auto& w : params.weights(params.layout.dense.back())) w *= 10.0;
  const auto eg = episode_gradient(params, env);
  std::vector<double> fd(params.size());
  const double h = 1e-6;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params;
    p.theta[i] += h;
    const double up = run_episode(env, as_policy(p)).reward;
    p.theta[i] -= 2 * h;
    fd[i] = (up - run_episode(env, as_policy(p)).reward) / (2 * h);
  }
  const double err = testutil::max_rel_error(eg.gradient, fd);
  const double t = sw.seconds();
  return {err < 1e-4 && t < 60.0,
          fmtn("%zu parameters, max relative error %.2e, %.2f s", params.size(), err, t)};
}

// 4. Markowitz against a simplex grid search.
Outcome markowitz_oracle() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_w = 0.0, worst_obj = 0.0;
  Stopwatch sw;
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a(i, j) = 0.01 * z(rng);
    }
    const Eigen::Matrix3d sigma = a * a.transpose() + 1e-5 * Eigen::Matrix3d::Identity();
    Eigen::Vector3d mu;
    for (int i = 0; i < 3; ++i) mu(i) = 0.0005 + 0.0005 * z(rng);
    const double r_min = mu.minCoeff() + u(rng) * (mu.maxCoeff() - mu.minCoeff());
    const auto w = markowitz_weights(MarkowitzInput(mu, sigma, r_min));
    const auto g = testutil::simplex_grid_search(mu, sigma, r_min);
    const Eigen::Vector3d wv(w[0], w[1], w[2]);
    for (int i = 0; i < 3; ++i) worst_w = std::max(worst_w, std::abs(w[i] - g.refined(i)));
    worst_obj = std::max(worst_obj, wv.dot(sigma * wv) - g.coarse_objective);
  }
  const double t = sw.seconds();
  return {worst_w <= 1e-3 && worst_obj <= 1e-15 && t < 10.0,
          fmtn("max weight gap %.2e, objective never above the 0.001 lattice (worst %+.1e), %.2f s", worst_w,
               worst_obj, t)};
}

// Market for criteria 5 and 6: the bond drifts up in one regime and down in the
// other, and the regime signal says whether the full-risk or the tenth-risk
// targeting strategy does better on the next day.
struct RegimeRun {
  double drl1_in = 0.0, oracle_in = 0.0;
  double drl1_out = 0.0, drl2_out = 0.0, average_out = 0.0;
};

const std::size_t kRegimeTrainRows = 2000;
const std::size_t kRegimeDays = 3000;

RegimeRun regime_run(std::uint64_t seed) {
  SyntheticMarketConfig sc;
  sc.n_days = kRegimeDays;
  sc.regimes = {RegimeSpec{0.99, 0.0004, 2e-7, 0.05, 0.9}, RegimeSpec{0.99, -0.0004, 2e-7, 0.05, 0.9}};
  sc.context_noise = 0.1;
  sc.nuisance_signals = 2;
  sc.implied_indices = 0;
  sc.seed = seed;
  const auto m = simulate_market(sc);
  std::vector<double> defensive(m.conditional_vol);
  for (auto& v : defensive) v *= 10.0;
  const auto forecasts =
      SeriesPanel::from_columns(m.returns.dates(), {"full", "defensive"}, {m.conditional_vol, defensive});
  const auto panel = build_strategy_panel(forecasts, m.returns, TargetConfig{});

  EnvConfig ec;
  ec.window = 20;
  ec.vol_window = 10;
  PortfolioEnv train_env(panel.slice(0, kRegimeTrainRows), m.context.slice(0, kRegimeTrainRows), ec);
  PortfolioEnv test_env(panel, m.context, ec, kRegimeTrainRows);
  EnvConfig masked = ec;
  masked.mask_context_and_vol = true;
  PortfolioEnv train_env2(panel.slice(0, kRegimeTrainRows), m.context.slice(0, kRegimeTrainRows), masked);
  PortfolioEnv test_env2(panel, m.context, masked, kRegimeTrainRows);

  NetworkArch arch = NetworkArch::for_env(train_env);
  arch.asset_convs = {{3, 4}};
  arch.context_convs = {{3, 4}};
  arch.dense = {16};
  TrainConfig tc;
  tc.seed = seed;
  tc.max_steps = 300 * train_env.steps();
  tc.early_stop_patience = 40;
  tc.lr = 0.01;

  const auto r1 = train_policy(train_env, arch, tc);
  const auto r2 = train_policy(train_env2, arch, tc);

  auto oracle = [&](const PortfolioEnv& env) -> Policy {
    return [&env, &m](const Observation&, std::size_t k) {
      return m.regimes[env.row(k)] == 0 ? ActionVector{1.0, 0.0} : ActionVector{0.0, 1.0};
    };
  };
  RegimeRun out;
  out.drl1_in = evaluate_policy(r1.best_params, train_env).reward;
  out.oracle_in = run_episode(train_env, oracle(train_env)).reward;
  out.drl1_out = evaluate_policy(r1.best_params, test_env).reward;
  out.drl2_out = evaluate_policy(r2.best_params, test_env2).reward;
  out.average_out = run_episode(test_env, average_policy(2)).reward;
  return out;
}

std::vector<RegimeRun> regime_runs;
double regime_seconds = 0.0;

const std::vector<RegimeRun>& regime_results() {
  if (regime_runs.empty()) {
    Stopwatch sw;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      regime_runs.push_back(regime_run(seed));
      const auto& r = regime_runs.back();
      std::printf("  seed %2llu: in-sample DRL1 %.4f oracle %.4f | out-of-sample DRL1 %.4f DRL2 %.4f Average %.4f\n",
                  static_cast<unsigned long long>(seed), r.drl1_in, r.oracle_in, r.drl1_out, r.drl2_out,
                  r.average_out);
      std::fflush(stdout);
    }
    regime_seconds = sw.seconds();
  }
  return regime_runs;
}

// 5. Learning sanity.
Outcome learning_sanity() {
  const auto& runs = regime_results();
  int in_ok = 0, out_ok = 0, both = 0;
  for (const auto& r : runs) {
    const bool a = r.oracle_in > 0.0 && r.drl1_in >= 0.9 * r.oracle_in;
    const bool b = r.drl1_out > r.average_out;
    in_ok += a;
    out_ok += b;
    both += a && b;
  }
  return {both >= 8 && regime_seconds < 900.0,
          fmtn("in-sample >= 90%% of oracle on %d/10, beats Average out-of-sample on %d/10, both on %d/10, %.0f s "
               "for 10 seeds (DRL1 and DRL2)",
               in_ok, out_ok, both, regime_seconds)};
}

// 6. Context helps: DRL1 against DRL2 out of sample.
Outcome ablation_direction() {
  const auto& runs = regime_results();
  int wins = 0;
  for (const auto& r : runs) wins += r.drl1_out >= r.drl2_out;
  return {wins >= 7, fmtn("DRL1 >= DRL2 out-of-sample on %d/10 seeds", wins)};
}

RunConfig small_walkforward_config() {
  return parse_run_config(R"({
    "seed": 5,
    "data": {"synthetic": {"n_days": 1800, "implied_indices": 2}},
    "forecast": {"models": ["moving_average", "rm2006", "garch", "har", "adjusted_pca"]},
    "env": {"window": 20, "vol_window": 10},
    "network": {"asset_convs": [[3, 3]], "context_convs": [[3, 2]], "dense": [8]},
    "train": {"max_steps": 4000, "early_stop_patience": 3},
    "benchmarks": {"markowitz_window": 120, "winner_lookback": 60, "winner_period": 60},
    "walkforward": {"first_test_year": 2004, "last_test_year": 2006}
  })");
}

WalkForwardResult walkforward_run;
bool walkforward_done = false;

const WalkForwardResult& clean_walkforward() {
  if (!walkforward_done) {
    const auto cfg = small_walkforward_config();
    walkforward_run = run_walkforward(cfg, load_inputs(cfg));
    walkforward_done = true;
  }
  return walkforward_run;
}

// 7. Leakage guard.
Outcome leakage_guard() {
  const auto& clean = clean_walkforward();
  std::size_t reads = 0;
  for (const auto& s : clean.splits) reads += s.audit_reads;
  const auto cfg = small_walkforward_config();
  WalkForwardOptions leak;
  leak.leak_days = 1;
  const auto leaky = run_walkforward(cfg, load_inputs(cfg), leak);
  std::size_t flagged = 0;
  for (const auto& s : leaky.splits) flagged += !s.violations.empty();
  return {clean.leak_free() && reads > 0 && flagged == leaky.splits.size(),
          fmtn("%zu splits, %zu audited reads, none past train_end; injected one-day leak flagged in %zu/%zu splits",
               clean.splits.size(), reads, flagged, leaky.splits.size())};
}

// 8. T-test on a hand example.
Outcome ttest_correctness() {
  // Odd numbers 1..19 have running averages 1..10: mean 5.5, sample variance 82.5/9.
  std::vector<double> a, b(10, 0.0);
  for (int i = 0; i < 10; ++i) a.push_back(2 * i + 1);
  const double expected = 5.5 / std::sqrt(82.5 / 9.0 / 10.0);
  const auto t = ttest_running_avg_diff(a, b);
  const auto same = ttest_running_avg_diff(a, a);
  const double err = std::abs(t.t_stat - expected);
  return {err <= 1e-10 && same.t_stat == 0.0 && same.p_value == 1.0,
          fmtn("t %.15f (error %.1e), identical inputs t=%g p=%g", t.t_stat, err, same.t_stat, same.p_value)};
}

// 9. Sensitivity nullity and symmetry.
Outcome sensitivity_checks() {
  const std::size_t p = 4, k = 3, ch = 3;
  NetworkArch a;
  a.assets = 2;
  a.context_rows = p;
  a.window = 6;
  a.asset_convs = {{3, 3}};
  a.context_convs = {{3, ch}};
  a.dense = {6};
  a.activation = Activation::kTanh;
  auto params = init_params(a, 5);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Observation> obs;
  for (int s = 0; s < 60; ++s) {
    Observation o(2, p, 6);
    for (auto& v : o.asset) v = z(rng);
    for (auto& v : o.context) v = z(rng);
    for (std::size_t t = 0; t < 6; ++t) o.ctx(3, t) = o.ctx(0, t);
    obs.push_back(o);
  }
  auto w = params.weights(params.layout.context_convs.front());
  for (std::size_t co = 0; co < ch; ++co) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      w[(co * p + 1) * k + kk] = 0.0;                       // context row 1 is ignored
      w[(co * p + 3) * k + kk] = w[(co * p + 0) * k + kk];  // rows 0 and 3 are tied
    }
  }
  const auto rep = feature_sensitivity(params, obs, 20);
  const std::size_t base = 2 * 2;
  const double ignored = rep.raw[base + 1], gap = std::abs(rep.raw[base] - rep.raw[base + 3]);
  return {ignored == 0.0 && rep.score[base + 1] == 0.0 && rep.raw[base] > 0.0 && gap <= 1e-9,
          fmtn("ignored feature raw %g, tied pair %.6g vs %.6g (gap %.1e)", ignored, rep.raw[base],
               rep.raw[base + 3], gap)};
}

// 10. Report structure.
Outcome report_structure() {
  const auto& wf = clean_walkforward();
  const auto dir = fs::temp_directory_path() / "vtlab_acceptance_report";
  fs::remove_all(dir);
  write_report(dir, wf.report);
  std::vector<std::string> problems;
  const std::string header = "model,return,sharpe,sortino,mdd,mdd/vol";
  for (const char* h : {"metrics_1y.csv", "metrics_3y.csv", "metrics_5y.csv"}) {
    const auto lines = read_lines(dir / h);
    if (lines.size() != 7 || lines[1] != header) {
      problems.push_back(h);
      continue;
    }
    for (std::size_t i = 0; i < 5; ++i) {
      const auto cells = split_csv(lines[2 + i]);
      if (cells.size() != 6 || cells[0] != kReportModels[i]) problems.push_back(std::string(h) + " row");
    }
  }
  const auto tt = read_lines(dir / "ttest.csv");
  if (tt.size() != 6 || tt[1] != "Avg Return,DRL2,Average,Markowitz,Winner") {
    problems.push_back("ttest header");
  } else {
    for (std::size_t i = 0; i < 4; ++i) {
      const auto cells = split_csv(tt[2 + i]);
      bool ok = cells.size() == 5 && cells[0] == kReportModels[i];
      for (std::size_t j = 1; ok && j < 5; ++j) ok = cells[j].empty() == (j <= i);
      if (!ok) problems.push_back("ttest row " + std::to_string(i));
    }
  }
  std::size_t total = 0;
  const auto rh = read_lines(dir / "rank_histogram.csv");
  for (std::size_t r = 1; r < rh.size(); ++r) total += std::stoul(split_csv(rh[r])[1]);
  const std::size_t days = wf.report.returns.at("DRL1").size();
  if (total != days) problems.push_back("rank histogram");
  std::string detail = fmtn("3 horizons x 5 models x 5 metrics, 4x4 upper-triangular t-test, rank bins %zu/%zu days",
                            total, days);
  for (const auto& p : problems) detail += "; bad " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"GARCH recovery", garch_recovery},
      {"volatility targeting with oracle forecasts", vol_targeting},
      {"episode gradient vs finite differences", gradient_exactness},
      {"Markowitz vs simplex grid", markowitz_oracle},
      {"learning sanity on a 2-regime market", learning_sanity},
      {"DRL1 vs DRL2 ablation", ablation_direction},
      {"walk-forward leakage guard", leakage_guard},
      {"running-average t-test", ttest_correctness},
      {"sensitivity nullity and symmetry", sensitivity_checks},
      {"report structure", report_structure},
  };
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int c = std::atoi(argv[i]);
    if (c >= 1 && c <= static_cast<int>(criteria.size())) selected[c - 1] = true;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
