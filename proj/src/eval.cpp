#include "stockdiff/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "stockdiff/error.hpp"

namespace stockdiff::eval {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) throw ParameterError(std::string(what) + ": length mismatch");
  if (a.size() < 2) throw ParameterError(std::string(what) + ": need at least two observations");
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

double return_ratio(double close_t, double close_t_plus_i) {
  if (!(close_t > 0.0)) throw DataError("return ratio: base price must be positive");
  return (close_t_plus_i - close_t) / close_t;
}

double log_return(double close_t, double close_t_plus_i) {
  if (!(close_t > 0.0) || !(close_t_plus_i > 0.0)) throw DataError("log return: prices must be positive");
  return std::log(close_t_plus_i / close_t);
}

double information_coefficient(std::span<const double> predicted, std::span<const double> realized) {
  check_pair(predicted, realized, "information_coefficient");
  const double n = static_cast<double>(predicted.size());
  const double mp = std::accumulate(predicted.begin(), predicted.end(), 0.0) / n;
  const double mr = std::accumulate(realized.begin(), realized.end(), 0.0) / n;
  double cov = 0.0;
  double vp = 0.0;
  double vr = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double dp = predicted[i] - mp;
    const double dr = realized[i] - mr;
    cov += dp * dr;
    vp += dp * dp;
    vr += dr * dr;
  }
  if (vp <= 0.0 || vr <= 0.0) throw NumericError("information_coefficient: constant input, correlation undefined");
  return std::clamp(cov / (std::sqrt(vp) * std::sqrt(vr)), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) ranks[order[m]] = avg;
    i = j;
  }
  return ranks;
}

double rank_ic(std::span<const double> predicted, std::span<const double> realized) {
  check_pair(predicted, realized, "rank_ic");
  const std::vector<double> rp = average_ranks(predicted);
  const std::vector<double> rr = average_ranks(realized);
  try {
    return information_coefficient(rp, rr);
  } catch (const NumericError&) {
    throw NumericError("rank_ic: all values tied, rank correlation undefined");
  }
}

double spearman_tie_free(std::span<const double> predicted, std::span<const double> realized) {
  check_pair(predicted, realized, "spearman_tie_free");
  const std::vector<double> rp = average_ranks(predicted);
  const std::vector<double> rr = average_ranks(realized);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < rp.size(); ++i) sum_sq += (rp[i] - rr[i]) * (rp[i] - rr[i]);
  const double n = static_cast<double>(rp.size());
  return 1.0 - 6.0 * sum_sq / (n * (n * n - 1.0));
}

PredictionPanel PredictionPanel::from_rows(std::vector<PanelRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const PanelRow& a, const PanelRow& b) {
    return a.date != b.date ? a.date < b.date : a.ticker < b.ticker;
  });
  PredictionPanel panel;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const PanelRow& r = rows[i];
    if (!std::isfinite(r.score) || !std::isfinite(r.realized_return)) {
      throw DataError("panel: non-finite value for " + r.ticker + " on " + r.date);
    }
    if (i > 0 && rows[i - 1].date == r.date && rows[i - 1].ticker == r.ticker) {
      throw DataError("panel: duplicate row for " + r.ticker + " on " + r.date);
    }
    if (panel.dates.empty() || panel.dates.back().date != r.date) panel.dates.push_back({r.date, {}, {}, {}});
    auto& cs = panel.dates.back();
    cs.tickers.push_back(r.ticker);
    cs.score.push_back(r.score);
    cs.realized_return.push_back(r.realized_return);
  }
  return panel;
}

PredictionPanel read_panel_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("panel CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "date,ticker,score,realized_return") {
    throw DataError("panel CSV line 1: expected header date,ticker,score,realized_return");
  }
  std::vector<PanelRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) f.push_back(field);
    const std::string where = "panel CSV line " + std::to_string(line_no) + ": ";
    if (f.size() != 4) throw DataError(where + "expected 4 fields");
    PanelRow r;
    r.date = f[0];
    r.ticker = f[1];
    try {
      std::size_t u1 = 0;
      std::size_t u2 = 0;
      r.score = std::stod(f[2], &u1);
      r.realized_return = std::stod(f[3], &u2);
      if (u1 != f[2].size() || u2 != f[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(where + "bad numeric field");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw DataError("panel CSV has no data rows");
  return PredictionPanel::from_rows(std::move(rows));
}

PredictionPanel read_panel_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open panel CSV " + path);
  return read_panel_csv(in);
}

void write_panel_csv(const std::string& path, const PredictionPanel& panel) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write panel CSV " + path);
  out << "date,ticker,score,realized_return\n";
  for (const auto& cs : panel.dates) {
    for (std::size_t i = 0; i < cs.tickers.size(); ++i) {
      out << cs.date << ',' << cs.tickers[i] << ',' << format_double(cs.score[i]) << ','
          << format_double(cs.realized_return[i]) << '\n';
    }
  }
}

BacktestResult topk_dropk_backtest(const PredictionPanel& panel, int k) {
  if (k < 1) throw ParameterError("backtest: k must be >= 1");
  if (panel.dates.empty()) throw DataError("backtest: empty panel");
  BacktestResult result;
  double growth = 1.0;
  std::set<std::string> previous;
  int ic_days = 0;
  for (const auto& cs : panel.dates) {
    if (cs.tickers.empty()) throw DataError("backtest: empty universe on " + cs.date);
    std::vector<std::size_t> order(cs.tickers.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return cs.score[a] != cs.score[b] ? cs.score[a] > cs.score[b] : cs.tickers[a] < cs.tickers[b];
    });
    const std::size_t hold = std::min(static_cast<std::size_t>(k), order.size());

    BacktestDay day;
    day.date = cs.date;
    double total = 0.0;
    std::set<std::string> current;
    for (std::size_t i = 0; i < hold; ++i) {
      day.holdings.push_back(cs.tickers[order[i]]);
      current.insert(cs.tickers[order[i]]);
      total += cs.realized_return[order[i]];
    }
    std::sort(day.holdings.begin(), day.holdings.end());
    day.portfolio_return = total / static_cast<double>(hold);
    for (const auto& name : current) {
      if (!previous.count(name)) ++day.turnover;
    }
    previous = std::move(current);
    growth *= 1.0 + day.portfolio_return;
    day.cumulative_rr = growth - 1.0;
    try {
      day.ic = information_coefficient(cs.score, cs.realized_return);
      day.rank_ic = rank_ic(cs.score, cs.realized_return);
      day.has_ic = true;
      result.mean_ic += day.ic;
      result.mean_rank_ic += day.rank_ic;
      ++ic_days;
    } catch (const Error&) {
      // Single-name or constant cross-sections carry no correlation.
    }
    result.mean_daily_return += day.portfolio_return;
    result.total_turnover += day.turnover;
    result.days.push_back(std::move(day));
  }
  result.cumulative_rr = growth - 1.0;
  result.mean_daily_return /= static_cast<double>(result.days.size());
  if (ic_days > 0) {
    result.mean_ic /= ic_days;
    result.mean_rank_ic /= ic_days;
  }
  return result;
}

void write_trajectory_csv(const std::string& path, const BacktestResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trajectory " + path);
  out << "date,n_holdings,portfolio_return,cumulative_rr,turnover,ic,rank_ic,holdings\n";
  for (const auto& d : result.days) {
    std::string names;
    for (const auto& h : d.holdings) names += (names.empty() ? "" : " ") + h;
    out << d.date << ',' << d.holdings.size() << ',' << format_double(d.portfolio_return) << ','
        << format_double(d.cumulative_rr) << ',' << d.turnover << ',' << (d.has_ic ? format_double(d.ic) : "")
        << ',' << (d.has_ic ? format_double(d.rank_ic) : "") << ',' << names << '\n';
  }
}

void write_cumulative_csv(const std::string& path, const BacktestResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "date,cumulative_rr\n";
  for (const auto& d : result.days) out << d.date << ',' << format_double(d.cumulative_rr) << '\n';
}

nlohmann::json summary_json(const BacktestResult& result) {
  return nlohmann::json{{"cumulative_rr", result.cumulative_rr},
                        {"mean_daily_return", result.mean_daily_return},
                        {"mean_ic", result.mean_ic},
                        {"mean_rank_ic", result.mean_rank_ic},
                        {"days", result.days.size()},
                        {"total_turnover", result.total_turnover}};
}

PredictionPanel momentum_panel(const std::vector<dataio::StockRecord>& records, int lookback, int horizon) {
  if (lookback < 1 || horizon < 1) throw ParameterError("momentum panel: lookback and horizon must be >= 1");
  std::vector<PanelRow> rows;
  for (const auto& rec : records) {
    const auto n = rec.close.size();
    const auto lb = static_cast<std::size_t>(lookback);
    const auto hz = static_cast<std::size_t>(horizon);
    for (std::size_t t = lb; t + hz < n; ++t) {
      const auto& past = rec.close[t - lb];
      const auto& now = rec.close[t];
      const auto& future = rec.close[t + hz];
      if (!past || !now || !future) continue;
      rows.push_back({rec.dates[t], rec.ticker, return_ratio(*past, *now), return_ratio(*now, *future)});
    }
  }
  if (rows.empty()) throw DataError("momentum panel: no dates with both lookback and horizon history");
  return PredictionPanel::from_rows(std::move(rows));
}

}  // namespace stockdiff::eval
