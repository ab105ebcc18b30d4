#include "vtlab/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace vtlab {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

void check_dates_increasing(const std::vector<Date>& dates, const char* what) {
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) {
      throw DataError(std::string(what) + ": dates not strictly increasing at " +
                      format_date(dates[i]));
    }
  }
}

}  // namespace

Date parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char dash1 = 0, dash2 = 0;
  std::istringstream in(text);
  in >> y >> dash1 >> m >> dash2 >> d;
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (in.fail() || dash1 != '-' || dash2 != '-' || !in.eof() || !date.ok()) {
    throw DataError("invalid ISO-8601 date '" + text + "'");
  }
  return date;
}

std::string format_date(Date d) {
  std::ostringstream out;
  out << std::setfill('0') << std::setw(4) << static_cast<int>(d.year()) << '-'
      << std::setw(2) << static_cast<unsigned>(d.month()) << '-' << std::setw(2)
      << static_cast<unsigned>(d.day());
  return out.str();
}

// --- ReturnSeries ----------------------------------------------------------

ReturnSeries::ReturnSeries(std::vector<Date> dates, std::vector<double> values)
    : dates_(std::move(dates)), values_(std::move(values)) {
  if (dates_.size() != values_.size()) {
    throw DataError("ReturnSeries: dates and values differ in length");
  }
  check_dates_increasing(dates_, "ReturnSeries");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] <= -1.0) {
      throw DataError("ReturnSeries: return " + std::to_string(values_[i]) + " at " +
                      format_date(dates_[i]) + " must be finite and > -1");
    }
  }
}

ReturnSeries ReturnSeries::slice(std::size_t first, std::size_t last) const {
  last = std::min(last, size());
  first = std::min(first, last);
  return ReturnSeries({dates_.begin() + first, dates_.begin() + last},
                      {values_.begin() + first, values_.begin() + last});
}

// --- SeriesPanel -----------------------------------------------------------

SeriesPanel::SeriesPanel(std::vector<Date> dates, std::vector<std::string> names,
                         std::vector<double> values)
    : dates_(std::move(dates)), names_(std::move(names)), values_(std::move(values)) {
  if (values_.size() != dates_.size() * names_.size()) {
    throw DataError("SeriesPanel: value count does not match dates x names");
  }
  check_dates_increasing(dates_, "SeriesPanel");
}

SeriesPanel SeriesPanel::from_series(const ReturnSeries& s, std::string name) {
  return SeriesPanel(s.dates(), {std::move(name)}, s.values());
}

SeriesPanel SeriesPanel::from_columns(std::vector<Date> dates, std::vector<std::string> names,
                                      const std::vector<std::vector<double>>& columns) {
  if (columns.size() != names.size()) throw DataError("from_columns: names/columns mismatch");
  const std::size_t rows = dates.size();
  std::vector<double> values(rows * names.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].size() != rows) {
      throw DataError("from_columns: column '" + names[c] + "' has wrong length");
    }
    for (std::size_t r = 0; r < rows; ++r) values[r * names.size() + c] = columns[c][r];
  }
  return SeriesPanel(std::move(dates), std::move(names), std::move(values));
}

std::vector<double> SeriesPanel::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = (*this)(r, c);
  return out;
}

std::vector<double> SeriesPanel::column(const std::string& name) const {
  return column(column_index(name));
}

std::size_t SeriesPanel::column_index(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("panel has no column '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

bool SeriesPanel::has_column(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

SeriesPanel SeriesPanel::slice(std::size_t first, std::size_t last) const {
  last = std::min(last, rows());
  first = std::min(first, last);
  return SeriesPanel({dates_.begin() + first, dates_.begin() + last}, names_,
                     {values_.begin() + first * cols(), values_.begin() + last * cols()});
}

SeriesPanel SeriesPanel::select(const std::vector<std::string>& names) const {
  std::vector<std::vector<double>> cols_out;
  for (const auto& n : names) cols_out.push_back(column(n));
  return from_columns(dates_, names, cols_out);
}

ReturnSeries SeriesPanel::series(std::size_t c) const { return ReturnSeries(dates_, column(c)); }

// --- CSV -------------------------------------------------------------------

namespace {

SeriesPanel read_csv(const std::filesystem::path& path, std::vector<std::size_t>* row_numbers) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
  auto header = split_csv_line(line);
  if (header.size() < 2) throw DataError(path.string() + ": header needs a date column and at least one series");
  std::vector<std::string> names(header.begin() + 1, header.end());

  struct Row {
    Date date;
    std::vector<double> values;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(path.string() + ": row " + std::to_string(row_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    Date d;
    try {
      d = parse_date(cells[0]);
    } catch (const DataError& e) {
      throw DataError(path.string() + ": row " + std::to_string(row_no) + ": " + e.what());
    }
    std::vector<double> vals(names.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (!parse_double(cells[c + 1], vals[c])) {
        throw DataError(path.string() + ": row " + std::to_string(row_no) + ": cannot parse '" +
                        cells[c + 1] + "' in column '" + names[c] + "'");
      }
    }
    rows.push_back({d, std::move(vals), row_no});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  std::vector<Date> dates;
  std::vector<double> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].date == rows[i - 1].date) {
      throw DataError(path.string() + ": duplicate date " + format_date(rows[i].date) +
                      " (row " + std::to_string(rows[i].line) + ")");
    }
    dates.push_back(rows[i].date);
    values.insert(values.end(), rows[i].values.begin(), rows[i].values.end());
    if (row_numbers) row_numbers->push_back(rows[i].line);
  }
  return SeriesPanel(std::move(dates), std::move(names), std::move(values));
}

}  // namespace

SeriesPanel load_panel_csv(const std::filesystem::path& path) { return read_csv(path, nullptr); }

ReturnSeries load_returns_csv(const std::filesystem::path& path, const std::string& column) {
  std::vector<std::size_t> lines;
  auto panel = read_csv(path, &lines);
  const auto c = panel.column_index(column);
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    if (panel(r, c) <= -1.0) {
      throw DataError(path.string() + ": row " + std::to_string(lines[r]) + ": return " +
                      std::to_string(panel(r, c)) + " on " + format_date(panel.dates()[r]) +
                      " is <= -1");
    }
  }
  return panel.series(c);
}

void write_panel_csv(const std::filesystem::path& path, const SeriesPanel& panel) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "date";
  for (const auto& n : panel.names()) out << ',' << n;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    out << format_date(panel.dates()[r]);
    for (std::size_t c = 0; c < panel.cols(); ++c) out << ',' << panel(r, c);
    out << '\n';
  }
}

// --- transforms -------------------------------------------------------------

SeriesPanel align(const std::vector<SeriesPanel>& panels) {
  if (panels.empty()) throw DataError("align: no inputs");
  std::vector<Date> common = panels.front().dates();
  for (std::size_t i = 1; i < panels.size(); ++i) {
    std::vector<Date> next;
    std::set_intersection(common.begin(), common.end(), panels[i].dates().begin(),
                          panels[i].dates().end(), std::back_inserter(next));
    common = std::move(next);
  }
  if (common.empty()) throw DataError("align: empty date intersection");

  std::vector<std::string> names;
  for (const auto& p : panels) names.insert(names.end(), p.names().begin(), p.names().end());
  std::vector<double> values(common.size() * names.size());
  std::size_t col_offset = 0;
  for (const auto& p : panels) {
    std::size_t src = 0;
    for (std::size_t r = 0; r < common.size(); ++r) {
      while (p.dates()[src] != common[r]) ++src;
      for (std::size_t c = 0; c < p.cols(); ++c) {
        values[r * names.size() + col_offset + c] = p(src, c);
      }
    }
    col_offset += p.cols();
  }
  return SeriesPanel(std::move(common), std::move(names), std::move(values));
}

SeriesPanel price_relatives(const PricePanel& prices) {
  if (prices.rows() < 2) throw DataError("price_relatives: need at least 2 rows");
  for (double v : prices.data()) {
    if (!(v > 0.0)) throw DataError("price_relatives: non-positive price");
  }
  const std::size_t n = prices.cols();
  std::vector<double> values((prices.rows() - 1) * n);
  for (std::size_t r = 1; r < prices.rows(); ++r) {
    for (std::size_t c = 0; c < n; ++c) values[(r - 1) * n + c] = prices(r, c) / prices(r - 1, c);
  }
  return SeriesPanel({prices.dates().begin() + 1, prices.dates().end()}, prices.names(),
                     std::move(values));
}

std::vector<double> rolling_std(std::span<const double> values, std::size_t d) {
  if (d < 2) throw std::invalid_argument("rolling_std: window must be >= 2");
  if (values.size() < d) throw DataError("rolling_std: series shorter than window");
  std::vector<double> out;
  out.reserve(values.size() - d + 1);
  // Two-pass per window keeps the result exact for constant inputs.
  for (std::size_t t = d - 1; t < values.size(); ++t) {
    double mean = 0.0;
    for (std::size_t k = t + 1 - d; k <= t; ++k) mean += values[k];
    mean /= static_cast<double>(d);
    double ss = 0.0;
    for (std::size_t k = t + 1 - d; k <= t; ++k) ss += (values[k] - mean) * (values[k] - mean);
    out.push_back(std::sqrt(ss / static_cast<double>(d - 1)));
  }
  return out;
}

ReturnSeries rolling_std(const ReturnSeries& series, std::size_t d) {
  auto vols = rolling_std(std::span<const double>(series.values()), d);
  return ReturnSeries({series.dates().begin() + static_cast<std::ptrdiff_t>(d - 1), series.dates().end()},
                      std::move(vols));
}

// --- synthetic market ------------------------------------------------------

void SyntheticMarketConfig::validate() const {
  if (n_days < 2) throw std::invalid_argument("synthetic market: n_days must be >= 2");
  if (regimes.empty()) throw std::invalid_argument("synthetic market: at least one regime");
  for (const auto& r : regimes) {
    if (!(r.persistence > 0.0 && r.persistence < 1.0)) {
      throw std::invalid_argument("synthetic market: persistence must lie in (0,1)");
    }
    if (!(r.omega > 0.0) || r.alpha < 0.0 || r.beta < 0.0 || r.alpha + r.beta >= 1.0) {
      throw std::invalid_argument("synthetic market: regime GARCH params not stationary");
    }
  }
  if (context_noise < 0.0 || implied_noise < 0.0) {
    throw std::invalid_argument("synthetic market: noise must be >= 0");
  }
}

std::vector<Date> business_days(Date start, std::size_t count) {
  using namespace std::chrono;
  std::vector<Date> out;
  out.reserve(count);
  sys_days day{start};
  while (out.size() < count) {
    weekday wd{day};
    if (wd != Saturday && wd != Sunday) out.emplace_back(day);
    day += days{1};
  }
  return out;
}

SyntheticMarket simulate_market(const SyntheticMarketConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const std::size_t n = cfg.n_days;
  const std::size_t k = cfg.regimes.size();
  SyntheticMarket m;
  m.regimes.resize(n);
  m.conditional_vol.resize(n);
  std::vector<double> returns(n);
  std::vector<double> eps(n);

  int regime = 0;
  const auto& r0 = cfg.regimes[0];
  double var = r0.omega / (1.0 - r0.alpha - r0.beta);
  double prev_eps = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0 && k > 1) {
      const double u = unif(rng);
      if (u >= cfg.regimes[static_cast<std::size_t>(regime)].persistence) {
        // Jump to one of the other regimes uniformly.
        const auto other = static_cast<int>(std::min<std::size_t>(
            static_cast<std::size_t>(unif(rng) * static_cast<double>(k - 1)), k - 2));
        regime = other >= regime ? other + 1 : other;
      }
    }
    const auto& spec = cfg.regimes[static_cast<std::size_t>(regime)];
    if (t > 0) var = spec.omega + spec.alpha * prev_eps * prev_eps + spec.beta * var;
    const double sigma = std::sqrt(var);
    prev_eps = sigma * normal(rng);
    eps[t] = prev_eps;
    returns[t] = std::max(spec.mu + prev_eps, -0.99);
    m.regimes[t] = regime;
    m.conditional_vol[t] = sigma;
  }

  auto dates = business_days(cfg.start, n);
  m.returns = ReturnSeries(dates, returns);

  std::vector<std::string> ctx_names{"regime_signal"};
  std::vector<std::vector<double>> ctx_cols(1 + cfg.nuisance_signals, std::vector<double>(n));
  for (std::size_t t = 0; t < n; ++t) {
    ctx_cols[0][t] = static_cast<double>(m.regimes[t]) + cfg.context_noise * normal(rng);
  }
  for (std::size_t j = 0; j < cfg.nuisance_signals; ++j) {
    ctx_names.push_back("nuisance_" + std::to_string(j + 1));
    double x = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      x = 0.95 * x + 0.3 * normal(rng);
      ctx_cols[j + 1][t] = x;
    }
  }
  m.context = SeriesPanel::from_columns(dates, ctx_names, ctx_cols);

  std::vector<std::string> iv_names;
  std::vector<std::vector<double>> iv_cols(cfg.implied_indices, std::vector<double>(n));
  // Index at t reflects the next-day variance as seen at the close of t under the current regime.
  std::vector<double> expected_vol(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& spec = cfg.regimes[static_cast<std::size_t>(m.regimes[t])];
    const double s = m.conditional_vol[t];
    expected_vol[t] = std::sqrt(spec.omega + spec.alpha * eps[t] * eps[t] + spec.beta * s * s);
  }
  for (std::size_t j = 0; j < cfg.implied_indices; ++j) {
    iv_names.push_back("implied_" + std::to_string(j + 1));
    const double bias = 1.0 + 0.1 * static_cast<double>(j);
    for (std::size_t t = 0; t < n; ++t) {
      iv_cols[j][t] = 100.0 * std::sqrt(252.0) * expected_vol[t] * bias *
                      std::exp(cfg.implied_noise * normal(rng));
    }
  }
  m.implied = SeriesPanel::from_columns(dates, iv_names, iv_cols);
  return m;
}

}  // namespace vtlab
