#pragma once

#include <istream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stockdiff/dataio.hpp"

namespace stockdiff::eval {

double return_ratio(double close_t, double close_t_plus_i);
double log_return(double close_t, double close_t_plus_i);

// Pearson correlation; throws NumericError when either side is constant.
double information_coefficient(std::span<const double> predicted, std::span<const double> realized);

// 1-based ranks, ties share the average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman coefficient as Pearson on average ranks.
double rank_ic(std::span<const double> predicted, std::span<const double> realized);

// 1 - 6 sum d^2 / (N (N^2 - 1)); only valid without ties.
double spearman_tie_free(std::span<const double> predicted, std::span<const double> realized);

struct PanelRow {
  std::string date;
  std::string ticker;
  double score = 0.0;
  double realized_return = 0.0;
};

// Cross-sections grouped by date, each sorted by ticker.
struct PredictionPanel {
  struct CrossSection {
    std::string date;
    std::vector<std::string> tickers;
    std::vector<double> score;
    std::vector<double> realized_return;
  };
  std::vector<CrossSection> dates;

  static PredictionPanel from_rows(std::vector<PanelRow> rows);
};

PredictionPanel read_panel_csv(std::istream& in);
PredictionPanel read_panel_csv_file(const std::string& path);
void write_panel_csv(const std::string& path, const PredictionPanel& panel);

struct BacktestDay {
  std::string date;
  std::vector<std::string> holdings;
  double portfolio_return = 0.0;
  double cumulative_rr = 0.0;
  int turnover = 0;  // names entering the book that day
  double ic = 0.0;
  double rank_ic = 0.0;
  bool has_ic = false;
};

struct BacktestResult {
  std::vector<BacktestDay> days;
  double cumulative_rr = 0.0;
  double mean_daily_return = 0.0;
  double mean_ic = 0.0;
  double mean_rank_ic = 0.0;
  int total_turnover = 0;
};

// Holds the top min(k, universe) names by score each date (ties broken by
// ticker), equal weighted, long only, no costs; cumulative RR compounds daily.
BacktestResult topk_dropk_backtest(const PredictionPanel& panel, int k = 20);

void write_trajectory_csv(const std::string& path, const BacktestResult& result);
void write_cumulative_csv(const std::string& path, const BacktestResult& result);
nlohmann::json summary_json(const BacktestResult& result);

// Trailing-return predictor: score = RR over `lookback` days, label = forward
// RR over `horizon` days, for every date where both exist.
PredictionPanel momentum_panel(const std::vector<dataio::StockRecord>& records, int lookback = 5, int horizon = 5);

}  // namespace stockdiff::eval
