#pragma once

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace stockdiff::dataio {

// Slot order matches the board one-hot of the condition vector; ST keeps
// its slot but is never produced by ingest.
enum class Board { MainBoard = 0, ChiNext = 1, STAR = 2, BSE = 3, ST = 4 };

std::string to_string(Board b);
Board parse_board(const std::string& name);

// Throws DataError for tickers that match no prefix rule.
Board classify_board(const std::string& ticker);

struct StockRecord {
  std::string ticker;
  int industry_id = 0;
  Board board = Board::MainBoard;
  std::vector<std::string> dates;             // ISO-8601, strictly increasing
  std::vector<std::optional<double>> close;   // empty = suspended / missing
  bool usable = true;
  bool exclude_from_training = false;
  // First row falls after the start of the data calendar, so the head of the
  // series is the listing period.
  bool listed_in_span = false;
};

struct RepairPolicy {
  int max_interp_gap = 5;   // longer gaps are forward filled
  int max_long_gaps = 3;    // more long gaps than this excludes the record
  int max_gap = 60;         // any gap longer than this excludes the record
};

struct RepairReport {
  int interpolated_gaps = 0;
  int forward_filled_gaps = 0;
  int longest_gap = 0;
  int trimmed_leading = 0;
};

// Fills interior gaps: linear interpolation for short gaps, last close
// carried forward for long and trailing ones. Leading missing days are
// dropped. Originally present closes are never altered.
StockRecord repair_suspensions(const StockRecord& record, const RepairPolicy& policy = {},
                               RepairReport* report = nullptr);

StockRecord drop_ipo_head(const StockRecord& record, int n_days = 5);

struct NormStats {
  double mean = 0.0;   // of log prices
  double scale = 1.0;  // population std of log prices, floored
};

inline constexpr double kScaleFloor = 1e-8;

// Per-window z-score of log prices.
std::pair<std::vector<double>, NormStats> normalize_window(std::span<const double> raw);
std::vector<double> denormalize_window(std::span<const double> values, const NormStats& stats);

struct SeriesWindow {
  std::string ticker;
  std::string start_date;
  std::vector<double> values;
  NormStats stats;
  int industry_id = 0;
  Board board = Board::MainBoard;
  bool synthetic = false;
  std::string split = "train";
};

// Windows at offsets 0, step, 2 step, ...; count floor((n - L)/step) + 1.
std::vector<SeriesWindow> make_windows(const StockRecord& record, int length = 60, int step = 20);

// Chronological per ticker: the earliest ceil(0.8 n) windows of each ticker train.
std::pair<std::vector<SeriesWindow>, std::vector<SeriesWindow>> split_train_test(
    const std::vector<SeriesWindow>& windows);

// Ratio adjustment helper for unadjusted closes: multiplies every close
// before date i by factor[i]. Off by default in ingest.
StockRecord apply_adjustment_factors(const StockRecord& record, std::span<const double> factors);

// CSV with header date,ticker,close,industry_id. Rows absent for a ticker on
// a date that another ticker traded are treated as missing closes within the
// ticker's listed span. Throws DataError with line numbers on malformed rows.
std::vector<StockRecord> read_price_csv(std::istream& in);
std::vector<StockRecord> read_price_csv_file(const std::string& path);

std::set<std::string> read_denylist(const std::string& path);

struct IngestConfig {
  int window = 60;
  int step = 20;
  int ipo_days = 5;  // dropped from records listed inside the calendar
  RepairPolicy repair;
};

struct IngestResult {
  std::vector<SeriesWindow> windows;  // canonical order (ticker, start date), split assigned
  nlohmann::json manifest;
};

IngestResult ingest(const std::vector<StockRecord>& records, const IngestConfig& config,
                    const std::set<std::string>& denylist = {});

nlohmann::json window_to_json(const SeriesWindow& w);
SeriesWindow window_from_json(const nlohmann::json& j);
void write_window_store(const std::string& path, const std::vector<SeriesWindow>& windows);
std::vector<SeriesWindow> read_window_store(const std::string& path);

}  // namespace stockdiff::dataio
