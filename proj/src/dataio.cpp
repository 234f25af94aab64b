#include "stockdiff/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "stockdiff/error.hpp"
#include "stockdiff/scorenet.hpp"

namespace stockdiff::dataio {

namespace {

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const std::chrono::year_month_day ymd{std::chrono::year(std::stoi(s.substr(0, 4))),
                                        std::chrono::month(static_cast<unsigned>(std::stoi(s.substr(5, 2)))),
                                        std::chrono::day(static_cast<unsigned>(std::stoi(s.substr(8, 2))))};
  return ymd.ok();
}

std::size_t present_count(const StockRecord& r) {
  return static_cast<std::size_t>(
      std::count_if(r.close.begin(), r.close.end(), [](const auto& c) { return c.has_value(); }));
}

}  // namespace

std::string to_string(Board b) {
  switch (b) {
    case Board::MainBoard: return "MainBoard";
    case Board::ChiNext: return "ChiNext";
    case Board::STAR: return "STAR";
    case Board::BSE: return "BSE";
    case Board::ST: return "ST";
  }
  return "?";
}

Board parse_board(const std::string& name) {
  for (Board b : {Board::MainBoard, Board::ChiNext, Board::STAR, Board::BSE, Board::ST}) {
    if (to_string(b) == name) return b;
  }
  throw ParameterError("unknown board '" + name + "' (expected MainBoard|ChiNext|STAR|BSE|ST)");
}

Board classify_board(const std::string& ticker) {
  if (ticker.empty() || !std::all_of(ticker.begin(), ticker.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw DataError("ticker '" + ticker + "' is not a digit string");
  }
  if (starts_with(ticker, "688")) return Board::STAR;
  if (starts_with(ticker, "30")) return Board::ChiNext;
  if (starts_with(ticker, "002") || starts_with(ticker, "000") || starts_with(ticker, "60")) return Board::MainBoard;
  if (starts_with(ticker, "83") || starts_with(ticker, "87") || starts_with(ticker, "88")) return Board::BSE;
  throw DataError("ticker '" + ticker + "' matches no board prefix");
}

StockRecord repair_suspensions(const StockRecord& record, const RepairPolicy& policy, RepairReport* report) {
  if (present_count(record) < 2) {
    throw DataError("ticker " + record.ticker + ": fewer than two present closes, cannot repair");
  }
  RepairReport rep;
  StockRecord out = record;
  std::size_t first = 0;
  while (!out.close[first]) ++first;
  rep.trimmed_leading = static_cast<int>(first);
  out.dates.erase(out.dates.begin(), out.dates.begin() + static_cast<std::ptrdiff_t>(first));
  out.close.erase(out.close.begin(), out.close.begin() + static_cast<std::ptrdiff_t>(first));

  int long_gaps = 0;
  const std::size_t n = out.close.size();
  std::size_t i = 1;
  while (i < n) {
    if (out.close[i]) {
      ++i;
      continue;
    }
    const std::size_t gap_start = i;
    while (i < n && !out.close[i]) ++i;
    const std::size_t gap_len = i - gap_start;
    const double left = *out.close[gap_start - 1];
    rep.longest_gap = std::max(rep.longest_gap, static_cast<int>(gap_len));
    const bool interior = i < n;
    if (interior && gap_len <= static_cast<std::size_t>(policy.max_interp_gap)) {
      const double right = *out.close[i];
      for (std::size_t j = gap_start; j < i; ++j) {
        const double frac = static_cast<double>(j - gap_start + 1) / static_cast<double>(gap_len + 1);
        out.close[j] = left + (right - left) * frac;
      }
      ++rep.interpolated_gaps;
    } else {
      for (std::size_t j = gap_start; j < i; ++j) out.close[j] = left;
      ++rep.forward_filled_gaps;
      if (gap_len > static_cast<std::size_t>(policy.max_interp_gap)) ++long_gaps;
    }
  }
  if (long_gaps > policy.max_long_gaps || rep.longest_gap > policy.max_gap) out.exclude_from_training = true;
  if (report) *report = rep;
  return out;
}

StockRecord drop_ipo_head(const StockRecord& record, int n_days) {
  if (n_days < 0) throw ParameterError("drop_ipo_head: n_days must be >= 0");
  StockRecord out = record;
  const auto n = static_cast<std::size_t>(n_days);
  if (out.dates.size() < n) {
    out.dates.clear();
    out.close.clear();
    out.usable = false;
    return out;
  }
  out.dates.erase(out.dates.begin(), out.dates.begin() + static_cast<std::ptrdiff_t>(n));
  out.close.erase(out.close.begin(), out.close.begin() + static_cast<std::ptrdiff_t>(n));
  if (out.dates.empty()) out.usable = false;
  return out;
}

std::pair<std::vector<double>, NormStats> normalize_window(std::span<const double> raw) {
  if (raw.empty()) throw DataError("normalize_window: empty window");
  std::vector<double> logs(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] > 0.0) || !std::isfinite(raw[i])) throw DataError("normalize_window: nonpositive price");
    logs[i] = std::log(raw[i]);
  }
  const double n = static_cast<double>(raw.size());
  const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : logs) ss += (v - mean) * (v - mean);
  NormStats stats{mean, std::max(std::sqrt(ss / n), kScaleFloor)};
  for (auto& v : logs) v = (v - mean) / stats.scale;
  return {std::move(logs), stats};
}

std::vector<double> denormalize_window(std::span<const double> values, const NormStats& stats) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(values[i] * stats.scale + stats.mean);
  return out;
}

std::vector<SeriesWindow> make_windows(const StockRecord& record, int length, int step) {
  if (length < 1 || step < 1) throw ParameterError("make_windows: length and step must be >= 1");
  const std::size_t n = record.close.size();
  if (n < static_cast<std::size_t>(length)) {
    throw DataError("ticker " + record.ticker + ": " + std::to_string(n) + " days is shorter than window " +
                    std::to_string(length));
  }
  std::vector<double> closes(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!record.close[i]) throw DataError("ticker " + record.ticker + ": unrepaired gap at " + record.dates[i]);
    closes[i] = *record.close[i];
  }
  std::vector<SeriesWindow> out;
  const std::size_t count = (n - static_cast<std::size_t>(length)) / static_cast<std::size_t>(step) + 1;
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t offset = w * static_cast<std::size_t>(step);
    auto [values, stats] = normalize_window(std::span<const double>(closes).subspan(offset, static_cast<std::size_t>(length)));
    SeriesWindow win;
    win.ticker = record.ticker;
    win.start_date = record.dates[offset];
    win.values = std::move(values);
    win.stats = stats;
    win.industry_id = record.industry_id;
    win.board = record.board;
    out.push_back(std::move(win));
  }
  return out;
}

std::pair<std::vector<SeriesWindow>, std::vector<SeriesWindow>> split_train_test(
    const std::vector<SeriesWindow>& windows) {
  std::map<std::string, std::vector<const SeriesWindow*>> by_ticker;
  for (const auto& w : windows) by_ticker[w.ticker].push_back(&w);
  std::vector<SeriesWindow> train;
  std::vector<SeriesWindow> test;
  for (auto& [ticker, list] : by_ticker) {
    std::stable_sort(list.begin(), list.end(),
                     [](const SeriesWindow* a, const SeriesWindow* b) { return a->start_date < b->start_date; });
    const std::size_t n_train = (4 * list.size() + 4) / 5;
    for (std::size_t i = 0; i < list.size(); ++i) {
      SeriesWindow w = *list[i];
      w.split = i < n_train ? "train" : "test";
      (i < n_train ? train : test).push_back(std::move(w));
    }
  }
  return {std::move(train), std::move(test)};
}

StockRecord apply_adjustment_factors(const StockRecord& record, std::span<const double> factors) {
  if (factors.size() != record.close.size()) throw ParameterError("adjustment factors length mismatch");
  StockRecord out = record;
  for (std::size_t i = 0; i < out.close.size(); ++i) {
    if (out.close[i]) *out.close[i] *= factors[i];
  }
  return out;
}

std::vector<StockRecord> read_price_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("price CSV is empty");
  const auto header = split_csv_line(trim(line));
  if (header != std::vector<std::string>{"date", "ticker", "close", "industry_id"}) {
    throw DataError("price CSV line 1: expected header date,ticker,close,industry_id");
  }

  struct Row {
    std::optional<double> close;
  };
  std::map<std::string, std::map<std::string, Row>> rows;  // ticker -> date -> row
  std::map<std::string, std::pair<std::string, int>> industry;  // ticker -> (latest date, id)
  std::set<std::string> calendar;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(trim(line));
    const std::string where = "price CSV line " + std::to_string(line_no) + ": ";
    if (f.size() != 4) throw DataError(where + "expected 4 fields, got " + std::to_string(f.size()));
    if (!is_iso_date(f[0])) throw DataError(where + "bad date '" + f[0] + "'");
    if (f[1].empty()) throw DataError(where + "empty ticker");
    std::optional<double> close;
    if (!f[2].empty()) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(f[2], &used);
      } catch (const std::exception&) {
        throw DataError(where + "bad close '" + f[2] + "'");
      }
      if (used != f[2].size() || !std::isfinite(v) || v <= 0.0) throw DataError(where + "bad close '" + f[2] + "'");
      close = v;
    }
    int ind = 0;
    try {
      std::size_t used = 0;
      ind = std::stoi(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(where + "bad industry_id '" + f[3] + "'");
    }
    if (ind < 0 || ind >= scorenet::kNumIndustries) throw DataError(where + "industry_id out of range");
    auto& per_ticker = rows[f[1]];
    if (per_ticker.count(f[0])) throw DataError(where + "duplicate row for " + f[1] + " on " + f[0]);
    per_ticker[f[0]] = Row{close};
    calendar.insert(f[0]);
    auto& latest = industry[f[1]];
    if (latest.first.empty() || f[0] >= latest.first) latest = {f[0], ind};
  }
  if (rows.empty()) throw DataError("price CSV has no data rows");

  const std::vector<std::string> days(calendar.begin(), calendar.end());
  std::vector<StockRecord> records;
  for (const auto& [ticker, per_ticker] : rows) {
    StockRecord rec;
    rec.ticker = ticker;
    rec.industry_id = industry[ticker].second;
    const auto lo = std::lower_bound(days.begin(), days.end(), per_ticker.begin()->first);
    const auto hi = std::upper_bound(days.begin(), days.end(), per_ticker.rbegin()->first);
    rec.listed_in_span = lo != days.begin();
    for (auto it = lo; it != hi; ++it) {
      rec.dates.push_back(*it);
      const auto found = per_ticker.find(*it);
      rec.close.push_back(found == per_ticker.end() ? std::nullopt : found->second.close);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<StockRecord> read_price_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price CSV " + path);
  return read_price_csv(in);
}

std::set<std::string> read_denylist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open denylist " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty() && line[0] != '#') out.insert(line);
  }
  return out;
}

IngestResult ingest(const std::vector<StockRecord>& records, const IngestConfig& config,
                    const std::set<std::string>& denylist) {
  std::vector<SeriesWindow> all;
  nlohmann::json exclusions = nlohmann::json::array();
  nlohmann::json per_ticker = nlohmann::json::array();
  nlohmann::json warnings = nlohmann::json::array();
  int interpolated = 0;
  int forward_filled = 0;

  const auto exclude = [&](const std::string& ticker, const std::string& reason) {
    exclusions.push_back({{"ticker", ticker}, {"reason", reason}});
  };

  for (const StockRecord& raw : records) {
    StockRecord rec = raw;
    try {
      rec.board = classify_board(rec.ticker);
    } catch (const DataError& e) {
      warnings.push_back(e.what());
      exclude(rec.ticker, "unknown_prefix");
      continue;
    }
    if (denylist.count(rec.ticker)) {
      exclude(rec.ticker, "denylist");
      continue;
    }
    RepairReport rep;
    try {
      rec = repair_suspensions(rec, config.repair, &rep);
    } catch (const DataError& e) {
      warnings.push_back(e.what());
      exclude(rec.ticker, "insufficient_data");
      continue;
    }
    interpolated += rep.interpolated_gaps;
    forward_filled += rep.forward_filled_gaps;
    nlohmann::json entry = {{"ticker", rec.ticker},
                            {"board", to_string(rec.board)},
                            {"industry_id", rec.industry_id},
                            {"interpolated_gaps", rep.interpolated_gaps},
                            {"forward_filled_gaps", rep.forward_filled_gaps},
                            {"longest_gap", rep.longest_gap},
                            {"windows", 0}};
    if (rec.exclude_from_training) {
      exclude(rec.ticker, "suspension");
      per_ticker.push_back(entry);
      continue;
    }
    if (rec.listed_in_span) {
      rec = drop_ipo_head(rec, config.ipo_days);
      entry["ipo_days_dropped"] = config.ipo_days;
    }
    if (!rec.usable || rec.close.size() < static_cast<std::size_t>(config.window)) {
      exclude(rec.ticker, "too_short");
      per_ticker.push_back(entry);
      continue;
    }
    auto windows = make_windows(rec, config.window, config.step);
    entry["windows"] = windows.size();
    per_ticker.push_back(entry);
    for (auto& w : windows) all.push_back(std::move(w));
  }

  auto [train, test] = split_train_test(all);
  IngestResult result;
  result.windows = std::move(train);
  for (auto& w : test) result.windows.push_back(std::move(w));
  std::sort(result.windows.begin(), result.windows.end(), [](const SeriesWindow& a, const SeriesWindow& b) {
    return std::tie(a.ticker, a.start_date) < std::tie(b.ticker, b.start_date);
  });

  std::map<std::string, int> per_board;
  std::map<int, int> per_industry;
  std::size_t n_train = 0;
  for (const auto& w : result.windows) {
    ++per_board[to_string(w.board)];
    ++per_industry[w.industry_id];
    if (w.split == "train") ++n_train;
  }
  nlohmann::json industry_json = nlohmann::json::object();
  for (const auto& [id, count] : per_industry) industry_json[std::to_string(id)] = count;

  result.manifest = {{"records", records.size()},
                     {"windows", result.windows.size()},
                     {"train_windows", n_train},
                     {"test_windows", result.windows.size() - n_train},
                     {"window_length", config.window},
                     {"window_step", config.step},
                     {"per_board", per_board},
                     {"per_industry", industry_json},
                     {"gaps", {{"interpolated", interpolated}, {"forward_filled", forward_filled}}},
                     {"tickers", per_ticker},
                     {"exclusions", exclusions},
                     {"warnings", warnings}};
  return result;
}

nlohmann::json window_to_json(const SeriesWindow& w) {
  return nlohmann::json{{"ticker", w.ticker},
                        {"start_date", w.start_date},
                        {"industry_id", w.industry_id},
                        {"board_id", static_cast<int>(w.board)},
                        {"board", to_string(w.board)},
                        {"norm_mean", w.stats.mean},
                        {"norm_scale", w.stats.scale},
                        {"split", w.split},
                        {"synthetic", w.synthetic},
                        {"values", w.values}};
}

SeriesWindow window_from_json(const nlohmann::json& j) {
  try {
    SeriesWindow w;
    w.ticker = j.at("ticker").get<std::string>();
    w.start_date = j.at("start_date").get<std::string>();
    w.industry_id = j.at("industry_id").get<int>();
    const int board = j.at("board_id").get<int>();
    if (board < 0 || board >= scorenet::kNumBoards) throw DataError("window store: board_id out of range");
    w.board = static_cast<Board>(board);
    w.stats.mean = j.at("norm_mean").get<double>();
    w.stats.scale = j.at("norm_scale").get<double>();
    w.split = j.at("split").get<std::string>();
    w.synthetic = j.at("synthetic").get<bool>();
    w.values = j.at("values").get<std::vector<double>>();
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("window store: ") + e.what());
  }
}

void write_window_store(const std::string& path, const std::vector<SeriesWindow>& windows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write window store " + path);
  for (const auto& w : windows) out << window_to_json(w).dump() << '\n';
}

std::vector<SeriesWindow> read_window_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open window store " + path);
  std::vector<SeriesWindow> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(window_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("window store line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace stockdiff::dataio
