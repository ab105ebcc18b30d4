#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "vtlab/market_data.hpp"

namespace testutil {

struct GarchPath {
  std::vector<double> returns;
  std::vector<double> sigma;  // conditional vol of each day, known the day before
};

/// Plain GJR-GARCH simulation written out independently of the library filter.
inline GarchPath simulate_garch(double omega, double alpha, double beta, double gamma, std::size_t n,
                                std::uint64_t seed, double mu = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  GarchPath p;
  double var = omega / (1.0 - alpha - beta - 0.5 * gamma);
  double prev = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) var = omega + (alpha + (prev < 0.0 ? gamma : 0.0)) * prev * prev + beta * var;
    prev = std::sqrt(var) * z(rng);
    p.returns.push_back(mu + prev);
    p.sigma.push_back(std::sqrt(var));
  }
  return p;
}

inline vtlab::ReturnSeries as_series(const std::vector<double>& v,
                                     vtlab::Date start = vtlab::parse_date("2000-01-03")) {
  return vtlab::ReturnSeries(vtlab::business_days(start, v.size()), v);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double stdev(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace testutil
