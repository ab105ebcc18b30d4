#include "vtlab/vol_forecast.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "vtlab/nelder_mead.hpp"

namespace vtlab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)
constexpr double kPenalty = 1e300;

double floor_vol(double v) { return std::isfinite(v) ? std::max(v, kVolFloor) : kVolFloor; }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Maps unconstrained coordinates onto GarchParams that satisfy every invariant.
//   x = (mu, log omega, logit persistence, logit arch share [, logit asymmetry])
GarchParams garch_from_theta(const std::vector<double>& x, bool leverage) {
  constexpr double kMaxPersistence = 1.0 - 1e-6;
  GarchParams p;
  p.mu = x[0];
  p.omega = std::exp(x[1]);
  const double u = std::min(logistic(x[2]), kMaxPersistence);
  const double share = logistic(x[3]);
  const double arch = u * share;  // alpha + gamma / 2
  p.beta = u - arch;
  if (leverage) {
    const double q = logistic(x[4]);
    p.alpha = 2.0 * arch * q;
    p.gamma = 2.0 * arch * (1.0 - 2.0 * q);
  } else {
    p.alpha = arch;
    p.gamma = 0.0;
  }
  return p;
}

struct AlignedPair {
  std::vector<Date> dates;
  std::vector<double> a;
  std::vector<double> b;
};

AlignedPair align_pair(const std::vector<Date>& da, const std::vector<double>& va,
                       const std::vector<Date>& db, const std::vector<double>& vb) {
  AlignedPair out;
  std::size_t i = 0, j = 0;
  while (i < da.size() && j < db.size()) {
    if (da[i] < db[j]) {
      ++i;
    } else if (db[j] < da[i]) {
      ++j;
    } else {
      out.dates.push_back(da[i]);
      out.a.push_back(va[i]);
      out.b.push_back(vb[j]);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

// --- GARCH -------------------------------------------------------------------

bool GarchParams::valid() const {
  return std::isfinite(mu) && omega > 0.0 && alpha >= 0.0 && beta >= 0.0 && gamma >= -alpha &&
         persistence() < 1.0;
}

void GarchParams::validate() const {
  if (!std::isfinite(mu)) throw std::invalid_argument("GarchParams: mu must be finite");
  if (!(omega > 0.0)) throw std::invalid_argument("GarchParams: omega must be > 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("GarchParams: alpha must be >= 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("GarchParams: beta must be >= 0");
  if (!(gamma >= -alpha)) throw std::invalid_argument("GarchParams: gamma must be >= -alpha");
  if (!(persistence() < 1.0)) {
    throw std::invalid_argument("GarchParams: alpha + gamma/2 + beta must be < 1");
  }
}

std::vector<double> garch_filter(const GarchParams& p, std::span<const double> returns) {
  p.validate();
  if (returns.empty()) throw std::invalid_argument("garch_filter: empty return series");
  std::vector<double> var(returns.size());
  var[0] = p.unconditional_variance();
  for (std::size_t t = 1; t < returns.size(); ++t) {
    const double eps = returns[t - 1] - p.mu;
    const double indicator = eps < 0.0 ? 1.0 : 0.0;
    var[t] = p.omega + (p.alpha + p.gamma * indicator) * eps * eps + p.beta * var[t - 1];
  }
  return var;
}

double garch_next_variance(const GarchParams& p, std::span<const double> returns) {
  const auto var = garch_filter(p, returns);
  const double eps = returns.back() - p.mu;
  const double indicator = eps < 0.0 ? 1.0 : 0.0;
  return p.omega + (p.alpha + p.gamma * indicator) * eps * eps + p.beta * var.back();
}

double gaussian_loglik_from_variance(std::span<const double> eps, std::span<const double> variance) {
  double ll = 0.0;
  for (std::size_t t = 0; t < eps.size(); ++t) {
    ll += kLog2Pi + std::log(variance[t]) + eps[t] * eps[t] / variance[t];
  }
  return -0.5 * ll;
}

double gaussian_loglik(const GarchParams& p, std::span<const double> returns) {
  const auto var = garch_filter(p, returns);
  double ll = 0.0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    const double eps = returns[t] - p.mu;
    ll += kLog2Pi + std::log(var[t]) + eps * eps / var[t];
  }
  return -0.5 * ll;
}

GarchParams fit_garch(std::span<const double> returns, bool leverage) {
  if (returns.size() < 250) throw std::invalid_argument("fit_garch: need at least 250 returns");
  const double mean = mean_of(returns);
  double var = 0.0;
  for (double r : returns) var += (r - mean) * (r - mean);
  var /= static_cast<double>(returns.size());
  if (!(var > 0.0)) throw std::runtime_error("fit_garch: zero-variance return series");

  auto objective = [&](const std::vector<double>& x) {
    for (double v : x) {
      if (!std::isfinite(v)) return kPenalty;
    }
    const GarchParams p = garch_from_theta(x, leverage);
    if (!p.valid()) return kPenalty;
    const double ll = gaussian_loglik(p, returns);
    return std::isfinite(ll) ? -ll : kPenalty;
  };

  // Fixed multi-start schedule: (persistence, arch share).
  constexpr std::array<std::pair<double, double>, 5> starts{
      {{0.95, 0.08}, {0.90, 0.15}, {0.98, 0.05}, {0.80, 0.25}, {0.50, 0.30}}};
  NelderMeadOptions opts;
  opts.max_evals = 3000;
  opts.x_tol = 1e-7;

  NelderMeadResult best;
  best.f = std::numeric_limits<double>::infinity();
  for (const auto& [u, share] : starts) {
    std::vector<double> x0{mean, std::log(var * (1.0 - u)), logit(u), logit(share)};
    if (leverage) x0.push_back(0.0);
    auto res = nelder_mead(objective, x0, opts);
    // Restart from the optimum to escape a collapsed simplex.
    NelderMeadOptions polish = opts;
    polish.initial_step = 0.1;
    auto res2 = nelder_mead(objective, res.x, polish);
    if (res2.f < res.f) res = res2;
    if (res.f < best.f) best = res;
  }
  if (!(best.f < kPenalty)) throw std::runtime_error("fit_garch: optimizer failed on all starts");

  const GarchParams fitted = garch_from_theta(best.x, leverage);
  fitted.validate();
  return fitted;
}

GarchParams fit_garch(const ReturnSeries& returns, bool leverage) {
  return fit_garch(std::span<const double>(returns.values()), leverage);
}

ForecastSeries garch_forecast(const GarchParams& p, const ReturnSeries& returns) {
  const auto var = garch_filter(p, returns.values());
  ForecastSeries out{returns.dates(), std::vector<double>(var.size())};
  for (std::size_t t = 0; t < var.size(); ++t) out.values[t] = floor_vol(std::sqrt(var[t]));
  return out;
}

// --- rolling-window models ---------------------------------------------------

ForecastSeries moving_average_forecast(const ReturnSeries& returns, std::size_t window) {
  if (window < 2) throw std::invalid_argument("moving_average_forecast: window must be >= 2");
  if (returns.size() <= window) throw DataError("moving_average_forecast: series too short");
  const auto stds = rolling_std(std::span<const double>(returns.values()), window);
  // stds[k] covers [k, k+window-1] and becomes the forecast for row k+window.
  ForecastSeries out;
  for (std::size_t t = window; t < returns.size(); ++t) {
    out.dates.push_back(returns.dates()[t]);
    out.values.push_back(floor_vol(stds[t - window]));
  }
  return out;
}

ForecastSeries level_shift_forecast(const ReturnSeries& returns, std::size_t short_window,
                                    std::size_t long_window, double jump_threshold) {
  if (short_window < 2 || long_window <= short_window) {
    throw std::invalid_argument("level_shift_forecast: need long_window > short_window >= 2");
  }
  if (!(jump_threshold >= 0.0)) throw std::invalid_argument("level_shift_forecast: threshold must be >= 0");
  if (returns.size() <= long_window) throw DataError("level_shift_forecast: series too short");
  std::span<const double> r(returns.values());
  const auto long_std = rolling_std(r, long_window);
  const auto short_std = rolling_std(r, short_window);
  ForecastSeries out;
  for (std::size_t t = long_window; t < returns.size(); ++t) {
    const double baseline = long_std[t - long_window];
    const double recent = short_std[t - short_window];
    // Step 1: detect a shift; step 2: re-level to the recent estimate.
    const bool shifted = std::abs(recent - baseline) > jump_threshold * baseline;
    out.dates.push_back(returns.dates()[t]);
    out.values.push_back(floor_vol(shifted ? recent : baseline));
  }
  return out;
}

ForecastSeries ewma_forecast(const ReturnSeries& returns, double lambda, std::size_t seed_window) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("ewma_forecast: lambda must lie in (0,1)");
  if (seed_window < 2) throw std::invalid_argument("ewma_forecast: seed window must be >= 2");
  if (returns.size() <= seed_window) throw DataError("ewma_forecast: series too short");
  const auto& r = returns.values();
  const double seed_sd = sample_std(std::span<const double>(r.data(), seed_window));
  double var = seed_sd * seed_sd;
  ForecastSeries out;
  for (std::size_t t = seed_window; t < r.size(); ++t) {
    if (t > seed_window) var = lambda * var + (1.0 - lambda) * r[t - 1] * r[t - 1];
    out.dates.push_back(returns.dates()[t]);
    out.values.push_back(floor_vol(std::sqrt(var)));
  }
  return out;
}

// --- realized measures -------------------------------------------------------

VolSeries realized_variance(const ReturnSeries& returns, std::size_t smooth) {
  if (smooth < 1) throw std::invalid_argument("realized_variance: smoothing window must be >= 1");
  if (returns.size() < smooth) throw DataError("realized_variance: series too short");
  const auto& r = returns.values();
  VolSeries out;
  double running_sum = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    running_sum += r[t];
    if (t + 1 < smooth) continue;
    const double m = running_sum / static_cast<double>(t + 1);
    double acc = 0.0;
    for (std::size_t k = t + 1 - smooth; k <= t; ++k) acc += (r[k] - m) * (r[k] - m);
    out.dates.push_back(returns.dates()[t]);
    out.values.push_back(std::max(acc / static_cast<double>(smooth), kVolFloor * kVolFloor));
  }
  return out;
}

VolSeries realized_vol(const ReturnSeries& returns, std::size_t smooth) {
  auto rv = realized_variance(returns, smooth);
  for (auto& v : rv.values) v = std::sqrt(v);
  return rv;
}

// --- HAR ---------------------------------------------------------------------

namespace {

struct HarRow {
  double daily, weekly, monthly;
};

HarRow har_regressors(const std::vector<double>& v, std::size_t t) {
  HarRow row{v[t - 1], 0.0, 0.0};
  for (std::size_t k = t - kHarWeek; k < t; ++k) row.weekly += v[k];
  for (std::size_t k = t - kHarMonth; k < t; ++k) row.monthly += v[k];
  row.weekly /= static_cast<double>(kHarWeek);
  row.monthly /= static_cast<double>(kHarMonth);
  return row;
}

}  // namespace

HarFit fit_har_detailed(const VolSeries& realized) {
  const auto& v = realized.values;
  if (v.size() < kHarMonth + 100) {
    throw std::invalid_argument("fit_har: need at least 100 observations after lag construction");
  }
  const std::size_t n = v.size() - kHarMonth;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 4);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t t = kHarMonth; t < v.size(); ++t) {
    const auto row = har_regressors(v, t);
    const auto i = static_cast<Eigen::Index>(t - kHarMonth);
    x.row(i) << 1.0, row.daily, row.weekly, row.monthly;
    y(i) = v[t];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  HarFit fit;
  fit.n_obs = n;
  if (qr.rank() < 4) {
    // A constant series makes every regressor collinear with the intercept;
    // the exact solution is the intercept alone.
    const double first = v.front();
    const bool constant = std::all_of(v.begin(), v.end(), [&](double a) { return a == first; });
    if (!constant) throw std::runtime_error("fit_har: singular design matrix");
    fit.params = {first, 0.0, 0.0, 0.0};
    return fit;
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - x * beta;
  fit.residual_ss = resid.squaredNorm();
  fit.params = {beta(0), beta(1), beta(2), beta(3)};
  const double s2 = fit.residual_ss / static_cast<double>(n - 4);
  const Eigen::MatrixXd cov = s2 * (x.transpose() * x).inverse();
  for (int k = 0; k < 4; ++k) fit.std_errors[static_cast<std::size_t>(k)] = std::sqrt(cov(k, k));
  return fit;
}

HarParams fit_har(const VolSeries& realized) { return fit_har_detailed(realized).params; }

ForecastSeries har_forecast(const HarParams& p, const VolSeries& realized) {
  const auto& v = realized.values;
  if (v.size() <= kHarMonth) throw DataError("har_forecast: series too short");
  ForecastSeries out;
  for (std::size_t t = kHarMonth; t < v.size(); ++t) {
    const auto row = har_regressors(v, t);
    const double f = p.intercept + p.beta_daily * row.daily + p.beta_weekly * row.weekly +
                     p.beta_monthly * row.monthly;
    out.dates.push_back(realized.dates[t]);
    out.values.push_back(floor_vol(f));
  }
  return out;
}

// --- HEAVY -------------------------------------------------------------------

void HeavyParams::validate() const {
  if (!(omega > 0.0)) throw std::invalid_argument("HeavyParams: omega must be > 0");
  if (!(alpha_rm >= 0.0)) throw std::invalid_argument("HeavyParams: alpha_rm must be >= 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("HeavyParams: beta must lie in [0,1)");
}

std::vector<double> heavy_filter(const HeavyParams& p, std::span<const double> returns,
                                 std::span<const double> realized_measure, double initial_variance) {
  p.validate();
  if (returns.size() != realized_measure.size()) {
    throw std::invalid_argument("heavy_filter: returns and realized measure are misaligned");
  }
  if (returns.empty()) throw std::invalid_argument("heavy_filter: empty input");
  std::vector<double> var(returns.size());
  var[0] = initial_variance > 0.0 ? initial_variance
                                  : (p.omega + p.alpha_rm * realized_measure[0]) / (1.0 - p.beta);
  for (std::size_t t = 1; t < returns.size(); ++t) {
    var[t] = p.omega + p.alpha_rm * realized_measure[t - 1] + p.beta * var[t - 1];
  }
  return var;
}

double heavy_loglik(const HeavyParams& p, std::span<const double> returns,
                    std::span<const double> realized_measure) {
  const auto var = heavy_filter(p, returns, realized_measure);
  return gaussian_loglik_from_variance(returns, var);
}

HeavyParams fit_heavy(std::span<const double> returns, std::span<const double> realized_measure) {
  if (returns.size() != realized_measure.size()) {
    throw std::invalid_argument("fit_heavy: returns and realized measure are misaligned");
  }
  if (returns.size() < 250) throw std::invalid_argument("fit_heavy: need at least 250 observations");
  for (double rm : realized_measure) {
    if (!(rm > 0.0)) throw std::invalid_argument("fit_heavy: realized measure must be > 0");
  }
  double r2 = 0.0;
  for (double r : returns) r2 += r * r;
  r2 /= static_cast<double>(returns.size());
  const double rm_mean = mean_of(realized_measure);

  auto to_params = [](const std::vector<double>& x) {
    return HeavyParams{std::exp(x[0]), std::exp(x[1]), std::min(logistic(x[2]), 1.0 - 1e-8)};
  };
  auto objective = [&](const std::vector<double>& x) {
    for (double v : x) {
      if (!std::isfinite(v)) return kPenalty;
    }
    const auto p = to_params(x);
    const double ll = heavy_loglik(p, returns, realized_measure);
    return std::isfinite(ll) ? -ll : kPenalty;
  };

  constexpr std::array<double, 5> beta_starts{0.6, 0.8, 0.4, 0.9, 0.2};
  NelderMeadOptions opts;
  opts.max_evals = 3000;
  opts.x_tol = 1e-7;
  NelderMeadResult best;
  best.f = std::numeric_limits<double>::infinity();
  for (double b : beta_starts) {
    // Split the long-run level evenly between the intercept and the RM loading.
    const double omega0 = 0.5 * (1.0 - b) * r2;
    const double alpha0 = 0.5 * (1.0 - b) * r2 / rm_mean;
    std::vector<double> x0{std::log(omega0), std::log(alpha0), logit(b)};
    auto res = nelder_mead(objective, x0, opts);
    NelderMeadOptions polish = opts;
    polish.initial_step = 0.1;
    auto res2 = nelder_mead(objective, res.x, polish);
    if (res2.f < res.f) res = res2;
    if (res.f < best.f) best = res;
  }
  if (!(best.f < kPenalty)) throw std::runtime_error("fit_heavy: optimizer failed on all starts");
  auto p = to_params(best.x);
  p.validate();
  return p;
}

HeavyParams fit_heavy(const ReturnSeries& returns, const VolSeries& realized_variance) {
  auto pair = align_pair(returns.dates(), returns.values(), realized_variance.dates,
                         realized_variance.values);
  return fit_heavy(pair.a, pair.b);
}

ForecastSeries heavy_forecast(const HeavyParams& p, const ReturnSeries& returns,
                              const VolSeries& realized_variance) {
  auto pair = align_pair(returns.dates(), returns.values(), realized_variance.dates,
                         realized_variance.values);
  if (pair.dates.empty()) throw DataError("heavy_forecast: returns and realized measure share no dates");
  const auto var = heavy_filter(p, pair.a, pair.b);
  ForecastSeries out{pair.dates, std::vector<double>(var.size())};
  for (std::size_t t = 0; t < var.size(); ++t) out.values[t] = floor_vol(std::sqrt(var[t]));
  return out;
}

// --- implied-volatility models ----------------------------------------------

ForecastSeries implied_adjusted_forecast(const SeriesPanel& implied, const std::string& column,
                                         const VolSeries& realized, std::size_t lookback) {
  if (lookback < 20) throw std::invalid_argument("implied_adjusted_forecast: lookback must be >= 20");
  const auto iv_col = implied.column(column);
  for (double v : iv_col) {
    if (!(v > 0.0)) throw DataError("implied_adjusted_forecast: implied index must be > 0");
  }
  auto pair = align_pair(implied.dates(), iv_col, realized.dates, realized.values);
  if (pair.dates.size() <= lookback) throw DataError("implied_adjusted_forecast: series too short");
  ForecastSeries out;
  double iv_sum = 0.0, rv_sum = 0.0;
  for (std::size_t k = 0; k < lookback; ++k) {
    iv_sum += pair.a[k];
    rv_sum += pair.b[k];
  }
  for (std::size_t t = lookback; t < pair.dates.size(); ++t) {
    // Window [t-lookback, t-1] is in the sums here.
    out.dates.push_back(pair.dates[t]);
    out.values.push_back(floor_vol(pair.a[t - 1] * rv_sum / iv_sum));
    iv_sum += pair.a[t] - pair.a[t - lookback];
    rv_sum += pair.b[t] - pair.b[t - lookback];
  }
  return out;
}

Eigenpair leading_eigenpair(std::span<const double> matrix, std::size_t k, int max_iter, double tol) {
  Eigenpair out;
  out.vector.assign(k, 1.0 / std::sqrt(static_cast<double>(k)));
  std::vector<double> next(k);
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < k; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += matrix[i * k + j] * out.vector[j];
      next[i] = acc;
    }
    double norm = 0.0;
    for (double v : next) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) break;
    double change = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      next[i] /= norm;
      change = std::max(change, std::abs(next[i] - out.vector[i]));
    }
    out.vector.swap(next);
    out.value = norm;
    if (change < tol) break;
  }
  // Rayleigh quotient for the converged vector.
  double rq = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) rq += out.vector[i] * matrix[i * k + j] * out.vector[j];
  }
  out.value = rq;
  return out;
}

PcaForecast pca_implied_forecast(const SeriesPanel& implied, const VolSeries& realized,
                                 std::size_t lookback) {
  const std::size_t k = implied.cols();
  if (k < 2) throw std::invalid_argument("pca_implied_forecast: need at least 2 implied columns");
  if (lookback < k || lookback < 2) throw std::invalid_argument("pca_implied_forecast: lookback too short");

  // Align implied rows with the realized series.
  std::vector<std::size_t> iv_rows;
  std::vector<double> rv;
  std::vector<Date> dates;
  {
    std::size_t i = 0, j = 0;
    while (i < implied.rows() && j < realized.size()) {
      if (implied.dates()[i] < realized.dates[j]) {
        ++i;
      } else if (realized.dates[j] < implied.dates()[i]) {
        ++j;
      } else {
        iv_rows.push_back(i);
        rv.push_back(realized.values[j]);
        dates.push_back(implied.dates()[i]);
        ++i;
        ++j;
      }
    }
  }
  if (dates.size() <= lookback) throw DataError("pca_implied_forecast: series too short");
  for (double v : implied.data()) {
    if (!(v > 0.0)) throw DataError("pca_implied_forecast: implied indices must be > 0");
  }

  PcaForecast out;
  std::vector<double> mean(k), sd(k), corr(k * k), proxy(lookback);
  for (std::size_t t = lookback; t < dates.size(); ++t) {
    const std::size_t w0 = t - lookback;
    auto iv = [&](std::size_t s, std::size_t c) { return implied(iv_rows[s], c); };
    for (std::size_t c = 0; c < k; ++c) {
      double m = 0.0;
      for (std::size_t s = w0; s < t; ++s) m += iv(s, c);
      m /= static_cast<double>(lookback);
      double ss = 0.0;
      for (std::size_t s = w0; s < t; ++s) ss += (iv(s, c) - m) * (iv(s, c) - m);
      mean[c] = m;
      sd[c] = std::sqrt(ss / static_cast<double>(lookback - 1));
      if (!(sd[c] > 1e-12 * std::max(1.0, m))) {
        throw std::runtime_error("pca_implied_forecast: rank-deficient window ending " +
                                 format_date(dates[t - 1]) + " (constant column '" +
                                 implied.names()[c] + "')");
      }
    }
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a; b < k; ++b) {
        double acc = 0.0;
        for (std::size_t s = w0; s < t; ++s) {
          acc += (iv(s, a) - mean[a]) / sd[a] * (iv(s, b) - mean[b]) / sd[b];
        }
        corr[a * k + b] = corr[b * k + a] = acc / static_cast<double>(lookback - 1);
      }
    }
    auto pc = leading_eigenpair(corr, k);

    // Orient the component so its score co-moves with the average implied level.
    double cov_level = 0.0;
    for (std::size_t s = w0; s < t; ++s) {
      double score = 0.0, level = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        score += pc.vector[c] * (iv(s, c) - mean[c]) / sd[c];
        level += iv(s, c);
      }
      cov_level += score * level;
    }
    if (cov_level < 0.0) {
      for (auto& v : pc.vector) v = -v;
    }

    double proxy_sum = 0.0, rv_sum = 0.0;
    for (std::size_t s = w0; s < t; ++s) {
      double p = 0.0;
      for (std::size_t c = 0; c < k; ++c) p += pc.vector[c] * iv(s, c) / sd[c];
      proxy[s - w0] = p;
      proxy_sum += p;
      rv_sum += rv[s];
    }
    const double ratio = pc.value / static_cast<double>(k);
    out.explained_ratio.push_back(ratio);
    if (ratio < 2.0 / static_cast<double>(k) - 1e-9) ++out.weak_factor_days;
    const double f = proxy_sum > 0.0 ? proxy[lookback - 1] * rv_sum / proxy_sum : 0.0;
    out.forecast.dates.push_back(dates[t]);
    out.forecast.values.push_back(floor_vol(f));
  }
  return out;
}

// --- forecast_all --------------------------------------------------------------

bool ForecastConfig::needs_implied() const {
  return std::any_of(models.begin(), models.end(),
                     [](const auto& m) { return m == "adjusted_tyvix" || m == "adjusted_pca"; });
}

void ForecastConfig::validate() const {
  if (models.empty()) throw std::invalid_argument("forecast config: empty model list");
  for (const auto& m : models) {
    if (std::find(kDefaultModels.begin(), kDefaultModels.end(), m) == kDefaultModels.end()) {
      throw std::invalid_argument("forecast config: unknown model '" + m + "'");
    }
  }
  if (ma_window < 2) throw std::invalid_argument("forecast config: ma_window must be >= 2");
  if (ls_short_window < 2 || ls_long_window <= ls_short_window) {
    throw std::invalid_argument("forecast config: need ls_long_window > ls_short_window >= 2");
  }
  if (!(ewma_lambda > 0.0 && ewma_lambda < 1.0)) {
    throw std::invalid_argument("forecast config: ewma_lambda must lie in (0,1)");
  }
  if (implied_lookback < 20) throw std::invalid_argument("forecast config: implied_lookback must be >= 20");
}

ForecastBundle forecast_all(const ForecastConfig& cfg, const ForecastInputs& data, std::size_t fit_rows,
                            DataAudit* audit) {
  cfg.validate();
  const auto& returns = data.returns;
  if (fit_rows == 0 || fit_rows > returns.size()) fit_rows = returns.size();
  if (cfg.needs_implied() && data.implied.cols() == 0) {
    throw std::invalid_argument("forecast_all: implied-volatility model configured without implied data");
  }
  const Date fit_end = returns.dates()[fit_rows - 1];
  const auto fit_returns = returns.slice(0, fit_rows);
  if (audit) audit->record("forecast_fit", fit_end);

  ForecastBundle bundle;
  std::vector<SeriesPanel> columns;
  const VolSeries rvar = realized_variance(returns, cfg.realized_smooth);
  VolSeries rvol = rvar;
  for (auto& v : rvol.values) v = std::sqrt(v);
  auto truncate = [&](const VolSeries& s) {
    VolSeries out;
    for (std::size_t i = 0; i < s.size() && !(fit_end < s.dates[i]); ++i) {
      out.dates.push_back(s.dates[i]);
      out.values.push_back(s.values[i]);
    }
    return out;
  };
  auto add = [&](const std::string& name, const ForecastSeries& f) {
    columns.push_back(SeriesPanel(f.dates, {name}, f.values));
  };

  for (const auto& model : cfg.models) {
    if (model == "moving_average") {
      add(model, moving_average_forecast(returns, cfg.ma_window));
    } else if (model == "level_shift") {
      add(model, level_shift_forecast(returns, cfg.ls_short_window, cfg.ls_long_window, cfg.ls_threshold));
    } else if (model == "garch") {
      bundle.garch = fit_garch(fit_returns, false);
      add(model, garch_forecast(bundle.garch, returns));
    } else if (model == "gjr_garch") {
      bundle.gjr = fit_garch(fit_returns, true);
      add(model, garch_forecast(bundle.gjr, returns));
    } else if (model == "heavy") {
      bundle.heavy = fit_heavy(fit_returns, truncate(rvar));
      add(model, heavy_forecast(bundle.heavy, returns, rvar));
    } else if (model == "har") {
      bundle.har = fit_har(truncate(rvol));
      add(model, har_forecast(bundle.har, rvol));
    } else if (model == "adjusted_tyvix") {
      const std::string col = cfg.tyvix_column.empty() ? data.implied.names().front() : cfg.tyvix_column;
      add(model, implied_adjusted_forecast(data.implied, col, rvol, cfg.implied_lookback));
    } else if (model == "adjusted_pca") {
      add(model, pca_implied_forecast(data.implied, rvol, cfg.pca_lookback).forecast);
    } else if (model == "rm2006") {
      add(model, ewma_forecast(returns, cfg.ewma_lambda, cfg.ewma_seed_window));
    }
  }
  bundle.forecasts = align(columns);
  return bundle;
}

}  // namespace vtlab
