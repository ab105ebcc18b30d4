#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"
#include "simplex_grid.hpp"
#include "vtlab/benchmarks.hpp"

using namespace vtlab;

namespace {

struct Instance {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  double r_min;
};

Instance random_instance(std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd a(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a(i, j) = 0.01 * z(rng);
  }
  Instance ins;
  ins.sigma = a * a.transpose() + 1e-5 * Eigen::MatrixXd::Identity(3, 3);
  ins.mu = Eigen::VectorXd(3);
  for (int i = 0; i < 3; ++i) ins.mu(i) = 0.0005 + 0.0005 * z(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ins.r_min = ins.mu.minCoeff() + u(rng) * (ins.mu.maxCoeff() - ins.mu.minCoeff());
  return ins;
}

StrategyPanel make_panel(const std::vector<std::vector<double>>& cols) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < cols.size(); ++i) names.push_back("s" + std::to_string(i));
  SeriesPanel r = SeriesPanel::from_columns(business_days(parse_date("2015-01-01"), cols[0].size()), names, cols);
  return {r, compound_prices(r)};
}

}  // namespace

TEST_CASE("markowitz closed forms") {
  SUBCASE("two identical assets split evenly") {
    Eigen::VectorXd mu(2);
    mu << 0.001, 0.001;
    Eigen::MatrixXd s = 1e-4 * Eigen::MatrixXd::Identity(2, 2);
    auto w = markowitz_weights(MarkowitzInput(mu, s, 0.0));
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(0.5));
  }
  SUBCASE("identity covariance gives uniform weights") {
    Eigen::VectorXd mu = Eigen::VectorXd::Constant(4, 0.001);
    auto w = markowitz_weights(MarkowitzInput(mu, Eigen::MatrixXd::Identity(4, 4), 0.0));
    for (double x : w) CHECK(x == doctest::Approx(0.25));
  }
  SUBCASE("inverse-variance weights for a diagonal covariance") {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd s(2, 2);
    s << 1.0, 0.0, 0.0, 3.0;
    auto w = markowitz_weights(MarkowitzInput(mu, s, -1.0));
    CHECK(w[0] == doctest::Approx(0.75));
    CHECK(w[1] == doctest::Approx(0.25));
  }
  SUBCASE("binding return constraint") {
    Eigen::VectorXd mu(2);
    mu << 0.0, 0.01;
    Eigen::MatrixXd s(2, 2);
    s << 1.0, 0.0, 0.0, 1.0;
    // Unconstrained minimum is (0.5, 0.5) with return 0.005; ask for 0.008.
    auto w = markowitz_weights(MarkowitzInput(mu, s, 0.008));
    CHECK(w[1] == doctest::Approx(0.8));
  }
  SUBCASE("infeasible return floor") {
    Eigen::VectorXd mu(2);
    mu << 0.001, 0.002;
    CHECK_THROWS_WITH_AS(markowitz_weights(MarkowitzInput(mu, Eigen::MatrixXd::Identity(2, 2), 0.003)),
                         doctest::Contains("infeasible"), std::invalid_argument);
  }
}

TEST_CASE("markowitz matches a simplex grid search") {
  std::mt19937_64 rng(2024);
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 25; ++trial) {
    auto ins = random_instance(rng);
    auto w = markowitz_weights(MarkowitzInput(ins.mu, ins.sigma, ins.r_min));
    auto g = testutil::simplex_grid_search(ins.mu, ins.sigma, ins.r_min);
    Eigen::Map<const Eigen::Vector3d> wv(w.data());
    const double obj = wv.dot(ins.sigma * wv);
    CAPTURE(trial);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(w[i] - g.refined(i)) <= 1e-3);
    // Never worse than the 0.001 lattice, and within 1e-6 of it.
    CHECK(obj <= g.coarse_objective + 1e-15);
    CHECK(g.coarse_objective - obj <= 1e-6);
  }
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 10.0);
}

TEST_CASE("markowitz solutions are feasible and monotone in the return floor") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto ins = random_instance(rng);
    double prev_ret = -1.0, prev_var = -1.0;
    for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double r_min = ins.mu.minCoeff() + f * (ins.mu.maxCoeff() - ins.mu.minCoeff());
      auto w = markowitz_weights(MarkowitzInput(ins.mu, ins.sigma, r_min));
      Eigen::Map<const Eigen::VectorXd> wv(w.data(), 3);
      double sum = 0.0;
      for (double x : w) {
        CHECK(x >= -1e-10);
        sum += x;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      const double ret = ins.mu.dot(wv), var = wv.dot(ins.sigma * wv);
      CHECK(ret >= r_min - 1e-9);
      CHECK(var >= prev_var - 1e-15);
      CHECK(ret >= prev_ret - 1e-12);
      prev_ret = ret;
      prev_var = var;
    }
  }
}

TEST_CASE("winner_weights") {
  auto p = make_panel({{0.01, 0.01, 0.0}, {0.0, 0.03, 0.0}, {0.02, 0.0, 0.0}});
  SUBCASE("largest compounded return over the lookback") {
    CHECK(winner_weights(p, 2, 2) == ActionVector{0.0, 1.0, 0.0});
    CHECK(winner_weights(p, 1, 1) == ActionVector{0.0, 0.0, 1.0});
  }
  SUBCASE("ties go to the lowest index") {
    auto t = make_panel({{0.01, 0.02}, {0.01, 0.02}, {0.0, 0.0}});
    CHECK(winner_weights(t, 2, 2) == ActionVector{1.0, 0.0, 0.0});
  }
  SUBCASE("the row at t is not read") {
    auto q = make_panel({{0.01, 0.01, 0.5}, {0.0, 0.03, -0.5}, {0.02, 0.0, 0.0}});
    CHECK(winner_weights(q, 2, 2) == winner_weights(p, 2, 2));
  }
}

TEST_CASE("benchmark policies") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z(0.0, 0.01);
  const std::size_t rows = 700;
  std::vector<std::vector<double>> cols(3, std::vector<double>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    // The leader switches halfway through.
    cols[0][r] = z(rng) + (r < 350 ? 0.002 : -0.002);
    cols[1][r] = z(rng) + (r < 350 ? -0.002 : 0.002);
    cols[2][r] = z(rng);
  }
  auto panel = make_panel(cols);
  EnvConfig ec;
  ec.window = 10;
  ec.vol_window = 5;
  PortfolioEnv env(panel, SeriesPanel{}, ec, 300);
  BenchmarkConfig bc;
  bc.winner_period = 100;
  bc.winner_lookback = 100;

  SUBCASE("average is uniform") {
    for (const auto& a : run_episode(env, average_policy(3)).actions) {
      for (double x : a) CHECK(x == doctest::Approx(1.0 / 3.0));
    }
  }
  SUBCASE("winner holds one strategy per period and follows the switch") {
    auto ep = run_episode(env, winner_policy(env, bc));
    for (std::size_t k = 0; k < ep.actions.size(); ++k) {
      CHECK(ep.actions[k] == ep.actions[k - k % 100]);
    }
    CHECK(ep.actions[0] == ActionVector{1.0, 0.0, 0.0});
    CHECK(ep.actions[200] == ActionVector{0.0, 1.0, 0.0});
  }
  SUBCASE("markowitz rebalances on schedule and stays on the simplex") {
    auto ep = run_episode(env, markowitz_policy(env, bc));
    for (std::size_t k = 0; k < ep.actions.size(); ++k) {
      CHECK(ep.actions[k] == ep.actions[k - k % bc.markowitz_rebalance]);
      CHECK_NOTHROW(validate_action(ep.actions[k], 1e-8));
    }
  }
  SUBCASE("policies never read the row they trade into") {
    auto bumped = cols;
    const std::size_t k_cut = 105;
    for (std::size_t r = env.row(k_cut); r < rows; ++r) bumped[0][r] += 0.05;
    PortfolioEnv env2(make_panel(bumped), SeriesPanel{}, ec, 300);
    for (int which = 0; which < 2; ++which) {
      Policy p1 = which ? markowitz_policy(env, bc) : winner_policy(env, bc);
      Policy p2 = which ? markowitz_policy(env2, bc) : winner_policy(env2, bc);
      for (std::size_t k = 0; k <= k_cut; ++k) {
        CHECK(p1(env.observation(k), k) == p2(env2.observation(k), k));
      }
    }
  }
}
