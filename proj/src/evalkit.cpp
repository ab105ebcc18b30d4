#include "vtlab/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

namespace vtlab {

// --- walk-forward ----------------------------------------------------------------

std::vector<WalkForwardSplit> walk_forward_splits(const std::vector<Date>& dates, Date anchor_start,
                                                  int first_test_year, int last_test_year) {
  if (first_test_year > last_test_year) throw std::invalid_argument("walk_forward_splits: empty year range");
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) throw DataError("walk_forward_splits: dates must be strictly increasing");
  }
  const auto anchor = std::lower_bound(dates.begin(), dates.end(), anchor_start);
  if (anchor == dates.end()) throw DataError("walk_forward_splits: no data on or after the anchor date");
  const std::size_t train_first = static_cast<std::size_t>(anchor - dates.begin());

  std::vector<WalkForwardSplit> out;
  for (int y = first_test_year; y <= last_test_year; ++y) {
    const Date jan1{std::chrono::year{y}, std::chrono::January, std::chrono::day{1}};
    const Date next{std::chrono::year{y + 1}, std::chrono::January, std::chrono::day{1}};
    const auto lo = std::lower_bound(dates.begin(), dates.end(), jan1);
    const auto hi = std::lower_bound(dates.begin(), dates.end(), next);
    if (lo == hi) throw DataError("walk_forward_splits: no data in test year " + std::to_string(y));
    const std::size_t test_first = static_cast<std::size_t>(lo - dates.begin());
    if (test_first <= train_first) {
      throw DataError("walk_forward_splits: no training data before test year " + std::to_string(y));
    }
    WalkForwardSplit s;
    s.test_year = y;
    s.train_first = train_first;
    s.train_last = test_first - 1;
    s.test_first = test_first;
    s.test_last = static_cast<std::size_t>(hi - dates.begin()) - 1;
    s.train_start = dates[s.train_first];
    s.train_end = dates[s.train_last];
    s.test_start = dates[s.test_first];
    s.test_end = dates[s.test_last];
    out.push_back(s);
  }
  return out;
}

// --- metrics ----------------------------------------------------------------------

double max_drawdown_pct(std::span<const double> returns) {
  if (returns.empty()) throw MetricsError("metrics: empty return series");
  double price = 1.0, peak = 1.0, mdd = 0.0;
  for (double r : returns) {
    price *= 1.0 + r;
    peak = std::max(peak, price);
    mdd = std::min(mdd, price / peak - 1.0);
  }
  return mdd * 100.0;
}

double annualized_return_pct(std::span<const double> returns, double periods_per_year) {
  if (returns.empty()) throw MetricsError("metrics: empty return series");
  double log_growth = 0.0;
  for (double r : returns) log_growth += std::log1p(r);
  return std::expm1(log_growth * periods_per_year / static_cast<double>(returns.size())) * 100.0;
}

MetricsReport metrics(std::span<const double> returns, double periods_per_year) {
  const std::size_t n = returns.size();
  if (n == 0) throw MetricsError("metrics: empty return series");
  MetricsReport m;
  m.annual_return = annualized_return_pct(returns, periods_per_year);
  m.mdd = max_drawdown_pct(returns);

  const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0, down = 0.0;
  std::size_t n_down = 0;
  for (double r : returns) {
    ss += (r - mean) * (r - mean);
    if (r < 0.0) {
      down += r * r;
      ++n_down;
    }
  }
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  if (!(sd > 1e-15 * std::max(1.0, std::abs(mean)))) {
    throw MetricsError("metrics: zero return variance, sharpe and sortino are undefined");
  }
  const double ann = std::sqrt(periods_per_year);
  m.sharpe = mean / sd * ann;
  m.sortino = n_down > 0 ? mean / std::sqrt(down / static_cast<double>(n_down)) * ann
                         : std::numeric_limits<double>::quiet_NaN();
  m.mdd_over_vol = m.mdd / (sd * ann * 100.0);
  return m;
}

MetricsReport metrics(const ReturnSeries& returns, double periods_per_year) {
  return metrics(std::span<const double>(returns.values()), periods_per_year);
}

// --- running-average t-test ---------------------------------------------------------

std::vector<double> running_average(std::span<const double> returns) {
  std::vector<double> out(returns.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    sum += returns[i];
    out[i] = sum / static_cast<double>(i + 1);
  }
  return out;
}

TTestResult ttest_running_avg_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("ttest: series differ in length");
  const std::size_t n = a.size();
  if (n < 3) throw std::invalid_argument("ttest: need at least 3 observations");
  const auto ra = running_average(a);
  const auto rb = running_average(b);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = ra[i] - rb[i];

  TTestResult res;
  res.n_obs = n;
  if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) return res;

  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) {
    res.degenerate = true;
    res.t_stat = mean > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    res.p_value = 0.0;
    return res;
  }
  res.t_stat = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(n - 1));
  res.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(res.t_stat))), 0.0, 1.0);
  return res;
}

TTestResult ttest_running_avg_diff(const ReturnSeries& a, const ReturnSeries& b) {
  if (a.dates() != b.dates()) throw DataError("ttest: series are not aligned");
  return ttest_running_avg_diff(std::span<const double>(a.values()), std::span<const double>(b.values()));
}

// --- feature sensitivity --------------------------------------------------------------

std::vector<std::string> feature_names(const std::vector<std::string>& strategies,
                                       const std::vector<std::string>& context_rows) {
  std::vector<std::string> out;
  for (const auto& s : strategies) out.push_back("ret:" + s);
  for (const auto& s : strategies) out.push_back("vol:" + s);
  for (const auto& c : context_rows) out.push_back(c);
  return out;
}

std::vector<double> scale_scores(std::span<const double> raw) {
  if (raw.empty()) return {};
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  std::vector<double> out(raw.size(), 100.0);
  if (*hi == *lo) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = 100.0 * (raw[i] - *lo) / (*hi - *lo);
  return out;
}

namespace {

std::vector<std::size_t> rank_descending(const std::vector<double>& raw) {
  std::vector<std::size_t> idx(raw.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return raw[a] > raw[b]; });
  return idx;
}

}  // namespace

SensitivityReport feature_sensitivity(const PolicyParams& params, const std::vector<Observation>& observations,
                                      std::size_t d, std::vector<std::string> names) {
  if (d < 1) throw std::invalid_argument("feature_sensitivity: d must be >= 1");
  if (d > observations.size()) {
    throw std::invalid_argument("feature_sensitivity: d = " + std::to_string(d) + " exceeds the " +
                                std::to_string(observations.size()) + " available observations");
  }
  const std::size_t n = params.arch.assets, p = params.arch.context_rows, w = params.arch.window;
  const std::size_t features = 2 * n + p;
  if (names.empty()) {
    for (std::size_t j = 0; j < features; ++j) names.push_back("feature" + std::to_string(j));
  }
  if (names.size() != features) throw std::invalid_argument("feature_sensitivity: wrong number of feature names");

  // Row j of observation s, as (vector, offset).
  auto row_of = [&](Observation& o, std::size_t j) -> double* {
    return j < 2 * n ? o.asset.data() + j * w : o.context.data() + (j - 2 * n) * w;
  };
  auto latest = [&](const Observation& o, std::size_t j) {
    return j < 2 * n ? o.asset[j * w + w - 1] : o.context[(j - 2 * n) * w + w - 1];
  };

  SensitivityReport rep;
  rep.features = std::move(names);
  rep.raw.assign(features, 0.0);
  const std::size_t count = observations.size() - d + 1;
  for (std::size_t s = d - 1; s < observations.size(); ++s) {
    const auto base = forward(params, observations[s]);
    for (std::size_t j = 0; j < features; ++j) {
      double mean = 0.0;
      for (std::size_t q = s + 1 - d; q <= s; ++q) mean += latest(observations[q], j);
      mean /= static_cast<double>(d);
      Observation changed = observations[s];
      double* row = row_of(changed, j);
      std::fill(row, row + w, mean);
      const auto alt = forward(params, changed);
      double l1 = 0.0;
      for (std::size_t i = 0; i < n; ++i) l1 += std::abs(base[i] - alt[i]);
      rep.raw[j] += l1;
    }
  }
  for (auto& r : rep.raw) r /= static_cast<double>(count);
  rep.score = scale_scores(rep.raw);
  rep.ranking = rank_descending(rep.raw);
  return rep;
}

// --- report bundle ----------------------------------------------------------------------

std::vector<std::size_t> rank_histogram(const AllocationTrack& allocations, const SeriesPanel& forecasts) {
  const std::size_t n = forecasts.cols();
  std::vector<std::size_t> hist(n, 0);
  std::size_t r = 0;
  const auto& fd = forecasts.dates();
  for (std::size_t k = 0; k < allocations.dates.size(); ++k) {
    while (r < fd.size() && fd[r] < allocations.dates[k]) ++r;
    if (r == fd.size() || fd[r] != allocations.dates[k]) {
      throw DataError("rank_histogram: no forecast on " + format_date(allocations.dates[k]));
    }
    const auto& w = allocations.weights[k];
    if (w.size() != n) throw std::invalid_argument("rank_histogram: weight width differs from forecast columns");
    const std::size_t dom = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    std::size_t rank = 1;
    for (std::size_t i = 0; i < n; ++i) {
      const double fi = forecasts(r, i), fd_dom = forecasts(r, dom);
      if (fi < fd_dom || (fi == fd_dom && i < dom)) ++rank;
    }
    ++hist[rank - 1];
  }
  return hist;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << std::setprecision(10);
  return out;
}

std::string fmt(double v, int prec = 3) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  std::ostringstream s;
  s << std::fixed << std::setprecision(prec) << v;
  return s.str();
}

void write_metrics(const std::filesystem::path& path, const ReportInputs& in, std::size_t horizon) {
  auto out = open_out(path);
  const std::size_t total = in.returns.at(in.model_order.front()).size();
  const std::size_t used = std::min(horizon, total);
  out << "# horizon_days=" << horizon << " available_days=" << used
      << "; return and mdd in percent; mdd/vol = mdd / annualized vol in percent\n";
  out << "model,return,sharpe,sortino,mdd,mdd/vol\n";
  for (const auto& name : in.model_order) {
    const auto& vals = in.returns.at(name).values();
    std::span<const double> tail(vals.data() + vals.size() - used, used);
    out << name;
    try {
      const auto m = metrics(tail);
      out << ',' << fmt(m.annual_return) << ',' << fmt(m.sharpe) << ',' << fmt(m.sortino) << ',' << fmt(m.mdd)
          << ',' << fmt(m.mdd_over_vol) << '\n';
    } catch (const MetricsError&) {
      if (tail.empty()) {
        out << ",nan,nan,nan,nan,nan\n";
      } else {
        out << ',' << fmt(annualized_return_pct(tail)) << ",nan,nan," << fmt(max_drawdown_pct(tail)) << ",nan\n";
      }
    }
  }
}

}  // namespace

void write_report(const std::filesystem::path& dir, const ReportInputs& in) {
  if (in.model_order.empty()) throw std::invalid_argument("report: no models");
  for (const auto& name : in.model_order) {
    if (!in.returns.count(name)) throw std::invalid_argument("report: missing returns for model " + name);
  }
  const auto& ref_dates = in.returns.at(in.model_order.front()).dates();
  for (const auto& name : in.model_order) {
    if (in.returns.at(name).dates() != ref_dates) throw DataError("report: model return series are not aligned");
  }
  std::filesystem::create_directories(dir);

  write_metrics(dir / "metrics_1y.csv", in, 252);
  write_metrics(dir / "metrics_3y.csv", in, 756);
  write_metrics(dir / "metrics_5y.csv", in, 1260);

  {
    auto out = open_out(dir / "ttest.csv");
    auto lng = open_out(dir / "ttest_long.csv");
    out << "# cell = t-statistic (two-sided p-value in percent); '*' marks p < 5%\n";
    lng << "row,column,t_stat,p_value,n_obs,degenerate\n";
    out << "Avg Return";
    for (std::size_t j = 1; j < in.model_order.size(); ++j) out << ',' << in.model_order[j];
    out << '\n';
    for (std::size_t i = 0; i + 1 < in.model_order.size(); ++i) {
      out << in.model_order[i];
      for (std::size_t j = 1; j < in.model_order.size(); ++j) {
        out << ',';
        if (j <= i) continue;
        const auto t = ttest_running_avg_diff(in.returns.at(in.model_order[i]), in.returns.at(in.model_order[j]));
        out << fmt(t.t_stat, 1) << " (" << fmt(t.p_value * 100.0, 1) << "%)" << (t.p_value < 0.05 ? "*" : "");
        lng << in.model_order[i] << ',' << in.model_order[j] << ',' << t.t_stat << ',' << t.p_value << ','
            << t.n_obs << ',' << (t.degenerate ? 1 : 0) << '\n';
      }
      out << '\n';
    }
  }

  {
    auto out = open_out(dir / "sensitivity.csv");
    out << "feature,raw,score,rank\n";
    if (!in.sensitivity.empty()) {
      const auto& first = in.sensitivity.front();
      std::vector<double> raw(first.raw.size(), 0.0);
      for (const auto& s : in.sensitivity) {
        if (s.features != first.features) throw std::invalid_argument("report: sensitivity features differ by split");
        for (std::size_t j = 0; j < raw.size(); ++j) raw[j] += s.raw[j] / static_cast<double>(in.sensitivity.size());
      }
      const auto score = scale_scores(raw);
      const auto order = rank_descending(raw);
      for (std::size_t r = 0; r < order.size(); ++r) {
        const auto j = order[r];
        out << first.features[j] << ',' << raw[j] << ',' << fmt(score[j]) << ',' << r + 1 << '\n';
      }
    }
  }

  {
    auto out = open_out(dir / "allocations.csv");
    out << "date,model";
    for (const auto& s : in.strategies) out << ',' << s;
    out << '\n';
    for (const auto& [model, track] : in.allocations) {
      for (std::size_t k = 0; k < track.dates.size(); ++k) {
        out << format_date(track.dates[k]) << ',' << model;
        for (double v : track.weights[k]) out << ',' << v;
        out << '\n';
      }
    }
  }

  std::vector<std::size_t> hist;
  if (in.allocations.count(in.rank_model) && in.forecasts.cols() > 0) {
    hist = rank_histogram(in.allocations.at(in.rank_model), in.forecasts);
  }
  {
    auto out = open_out(dir / "rank_histogram.csv");
    out << "rank,count,share\n";
    const double total = static_cast<double>(std::accumulate(hist.begin(), hist.end(), std::size_t{0}));
    for (std::size_t r = 0; r < hist.size(); ++r) {
      out << r + 1 << ',' << hist[r] << ',' << (total > 0 ? hist[r] / total : 0.0) << '\n';
    }
  }

  // gnuplot data: whitespace separated, '#' comment header
  {
    auto eq = open_out(dir / "equity.dat");
    auto ra = open_out(dir / "running_average.dat");
    eq << "# date";
    ra << "# date";
    for (const auto& m : in.model_order) {
      eq << ' ' << m;
      ra << ' ' << m;
    }
    eq << '\n';
    ra << '\n';
    std::vector<double> level(in.model_order.size(), 1.0), sum(in.model_order.size(), 0.0);
    for (std::size_t t = 0; t < ref_dates.size(); ++t) {
      eq << format_date(ref_dates[t]);
      ra << format_date(ref_dates[t]);
      for (std::size_t m = 0; m < in.model_order.size(); ++m) {
        const double r = in.returns.at(in.model_order[m])[t];
        level[m] *= 1.0 + r;
        sum[m] += r;
        eq << ' ' << level[m];
        ra << ' ' << sum[m] / static_cast<double>(t + 1);
      }
      eq << '\n';
      ra << '\n';
    }
  }
  {
    auto out = open_out(dir / "rank_histogram.dat");
    out << "# rank count\n";
    for (std::size_t r = 0; r < hist.size(); ++r) out << r + 1 << ' ' << hist[r] << '\n';
  }
  for (const auto& [model, track] : in.allocations) {
    auto out = open_out(dir / ("allocations_" + model + ".dat"));
    out << "# date";
    for (const auto& s : in.strategies) out << ' ' << s;
    out << '\n';
    for (std::size_t k = 0; k < track.dates.size(); ++k) {
      out << format_date(track.dates[k]);
      for (double v : track.weights[k]) out << ' ' << v;
      out << '\n';
    }
  }
}

}  // namespace vtlab
