#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "stockdiff/dataio.hpp"
#include "stockdiff/error.hpp"
#include "stockdiff/random.hpp"

namespace sd = stockdiff;
namespace io = stockdiff::dataio;

namespace {

io::StockRecord record(const std::string& ticker, std::vector<std::optional<double>> closes) {
  io::StockRecord r;
  r.ticker = ticker;
  r.board = io::classify_board(ticker);
  for (std::size_t i = 0; i < closes.size(); ++i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "2022-%02zu-%02zu", 1 + i / 28, 1 + i % 28);
    r.dates.push_back(buf);
  }
  r.close = std::move(closes);
  return r;
}

io::StockRecord walk(const std::string& ticker, int n, std::uint64_t seed) {
  sd::Rng rng(seed);
  std::vector<std::optional<double>> c;
  double p = 20.0;
  for (int i = 0; i < n; ++i) {
    p *= std::exp(0.02 * rng.normal());
    c.push_back(p);
  }
  return record(ticker, c);
}

}  // namespace

TEST(ClassifyBoard, PrefixTable) {
  EXPECT_EQ(io::classify_board("300001"), io::Board::ChiNext);
  EXPECT_EQ(io::classify_board("688001"), io::Board::STAR);
  EXPECT_EQ(io::classify_board("600519"), io::Board::MainBoard);
  EXPECT_EQ(io::classify_board("000001"), io::Board::MainBoard);
  EXPECT_EQ(io::classify_board("002415"), io::Board::MainBoard);
  EXPECT_EQ(io::classify_board("830799"), io::Board::BSE);
  EXPECT_EQ(io::classify_board("873223"), io::Board::BSE);
  EXPECT_EQ(io::classify_board("889999"), io::Board::BSE);
  EXPECT_THROW(io::classify_board("123456"), sd::DataError);
  EXPECT_THROW(io::classify_board("60A001"), sd::DataError);
}

TEST(BoardNames, RoundTrip) {
  for (auto b : {io::Board::MainBoard, io::Board::ChiNext, io::Board::STAR, io::Board::BSE, io::Board::ST}) {
    EXPECT_EQ(io::parse_board(io::to_string(b)), b);
  }
  EXPECT_THROW(io::parse_board("Nasdaq"), sd::ParameterError);
}

TEST(Repair, InterpolatesShortGap) {
  const auto r = io::repair_suspensions(record("600000", {100.0, std::nullopt, std::nullopt, 106.0}));
  EXPECT_DOUBLE_EQ(*r.close[1], 102.0);
  EXPECT_DOUBLE_EQ(*r.close[2], 104.0);
  EXPECT_FALSE(r.exclude_from_training);
}

TEST(Repair, ForwardFillsLongGap) {
  std::vector<std::optional<double>> c{100.0};
  for (int i = 0; i < 6; ++i) c.push_back(std::nullopt);
  c.push_back(110.0);
  io::RepairReport rep;
  const auto r = io::repair_suspensions(record("600000", c), {}, &rep);
  for (int i = 1; i <= 6; ++i) EXPECT_EQ(*r.close[i], 100.0);
  EXPECT_EQ(*r.close[7], 110.0);
  EXPECT_EQ(rep.forward_filled_gaps, 1);
  EXPECT_EQ(rep.longest_gap, 6);
}

TEST(Repair, NoGapsIsIdentityAndPresentClosesUntouched) {
  const auto base = walk("600000", 50, 1);
  const auto r = io::repair_suspensions(base);
  EXPECT_EQ(r.close, base.close);
  auto gappy = base;
  for (int i : {3, 4, 10, 20, 21, 22, 23, 24, 25, 26}) gappy.close[i] = std::nullopt;
  const auto fixed = io::repair_suspensions(gappy);
  for (std::size_t i = 0; i < gappy.close.size(); ++i) {
    ASSERT_TRUE(fixed.close[i].has_value());
    if (gappy.close[i]) EXPECT_EQ(*fixed.close[i], *gappy.close[i]);
  }
}

TEST(Repair, FlagsFrequentOrOverlongSuspension) {
  auto r = walk("600000", 200, 2);
  for (int i = 10; i < 80; ++i) r.close[i] = std::nullopt;
  EXPECT_TRUE(io::repair_suspensions(r).exclude_from_training);
  auto f = walk("600000", 200, 3);
  for (int start : {10, 40, 70, 100}) {
    for (int i = start; i < start + 6; ++i) f.close[i] = std::nullopt;
  }
  EXPECT_TRUE(io::repair_suspensions(f).exclude_from_training);
  auto ok = walk("600000", 200, 4);
  for (int start : {10, 40, 70}) {
    for (int i = start; i < start + 6; ++i) ok.close[i] = std::nullopt;
  }
  EXPECT_FALSE(io::repair_suspensions(ok).exclude_from_training);
}

TEST(Repair, AllMissingRejected) {
  EXPECT_THROW(io::repair_suspensions(record("600000", {std::nullopt, std::nullopt})), sd::DataError);
}

TEST(IpoHead, Slicing) {
  const auto r = walk("600000", 10, 5);
  EXPECT_EQ(io::drop_ipo_head(r, 0).close, r.close);
  const auto cut = io::drop_ipo_head(r, 5);
  ASSERT_EQ(cut.close.size(), 5u);
  EXPECT_EQ(cut.close.front(), r.close[5]);
  EXPECT_EQ(cut.dates.front(), r.dates[5]);
  EXPECT_FALSE(io::drop_ipo_head(walk("600000", 4, 6), 5).usable);
  EXPECT_THROW(io::drop_ipo_head(r, -1), sd::ParameterError);
}

TEST(Windows, CountFormula) {
  EXPECT_EQ(io::make_windows(walk("600000", 60, 7)).size(), 1u);
  const auto w = io::make_windows(walk("600000", 100, 8));
  ASSERT_EQ(w.size(), 3u);
  const auto r = walk("600000", 100, 8);
  EXPECT_EQ(w[1].start_date, r.dates[20]);
  EXPECT_EQ(w[2].start_date, r.dates[40]);
  EXPECT_THROW(io::make_windows(walk("600000", 59, 9)), sd::DataError);
  for (int n = 10; n < 80; n += 7) {
    for (int len : {5, 10}) {
      for (int step : {1, 3, 7}) {
        EXPECT_EQ(static_cast<int>(io::make_windows(walk("600000", n, 10), len, step).size()), (n - len) / step + 1);
      }
    }
  }
}

TEST(Windows, CarryLabels) {
  auto r = walk("300750", 80, 11);
  r.industry_id = 42;
  for (const auto& w : io::make_windows(r)) {
    EXPECT_EQ(w.industry_id, 42);
    EXPECT_EQ(w.board, io::Board::ChiNext);
    EXPECT_EQ(w.values.size(), 60u);
  }
}

TEST(Normalize, ConstantWindow) {
  const std::vector<double> raw(8, 12.5);
  const auto [v, stats] = io::normalize_window(raw);
  for (double x : v) EXPECT_EQ(x, 0.0);
  EXPECT_DOUBLE_EQ(stats.mean, std::log(12.5));
  EXPECT_EQ(stats.scale, io::kScaleFloor);
}

TEST(Normalize, ZScoreAndRoundTrip) {
  sd::Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> raw(60);
    double p = 5.0 + 100.0 * rng.uniform();
    for (auto& x : raw) x = (p *= std::exp(0.03 * rng.normal()));
    const auto [v, stats] = io::normalize_window(raw);
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x / 60.0;
    for (double x : v) var += (x - mean) * (x - mean) / 60.0;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-12);
    const auto back = io::denormalize_window(v, stats);
    for (int i = 0; i < 60; ++i) EXPECT_NEAR(back[i], raw[i], 1e-9 * raw[i]);
  }
  const std::vector<double> bad{1.0, 0.0, 2.0};
  EXPECT_THROW(io::normalize_window(bad), sd::DataError);
}

TEST(Split, ChronologicalCeiling) {
  const auto five = io::make_windows(walk("600000", 140, 13));
  ASSERT_EQ(five.size(), 5u);
  const auto [tr5, te5] = io::split_train_test(five);
  EXPECT_EQ(tr5.size(), 4u);
  EXPECT_EQ(te5.size(), 1u);
  const auto one = io::make_windows(walk("600000", 60, 14));
  const auto [tr1, te1] = io::split_train_test(one);
  EXPECT_EQ(tr1.size(), 1u);
  EXPECT_EQ(te1.size(), 0u);
  const auto ten = io::make_windows(walk("600000", 240, 15));
  ASSERT_EQ(ten.size(), 10u);
  const auto [tr10, te10] = io::split_train_test(ten);
  ASSERT_EQ(tr10.size(), 8u);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(tr10[i].start_date, ten[i].start_date);
  for (const auto& w : te10) EXPECT_GT(w.start_date, tr10.back().start_date);
}

TEST(Split, PerTicker) {
  auto a = io::make_windows(walk("600000", 140, 16));  // 5 windows
  const auto b = io::make_windows(walk("300750", 100, 17));  // 3 windows
  a.insert(a.end(), b.begin(), b.end());
  const auto [train, test] = io::split_train_test(a);
  EXPECT_EQ(train.size(), 4u + 3u);
  EXPECT_EQ(test.size(), 1u);
}

TEST(Adjustment, ScalesEarlierCloses) {
  const auto r = record("600000", {10.0, 20.0, std::nullopt});
  const std::vector<double> f{0.5, 1.0, 1.0};
  const auto adj = io::apply_adjustment_factors(r, f);
  EXPECT_DOUBLE_EQ(*adj.close[0], 5.0);
  EXPECT_DOUBLE_EQ(*adj.close[1], 20.0);
  EXPECT_FALSE(adj.close[2].has_value());
}

TEST(PriceCsv, ParsesUnionCalendarAndLatestIndustry) {
  std::istringstream in(
      "date,ticker,close,industry_id\n"
      "2022-01-03,600000,10.0,1\n"
      "2022-01-03,300750,50.0,2\n"
      "2022-01-04,300750,51.0,2\n"
      "2022-01-05,600000,,1\n"
      "2022-01-05,300750,52.0,2\n"
      "2022-01-06,600000,11.0,3\n");
  const auto recs = io::read_price_csv(in);
  ASSERT_EQ(recs.size(), 2u);
  const auto& p = recs[1].ticker == "600000" ? recs[1] : recs[0];
  EXPECT_EQ(p.dates.size(), 4u);
  EXPECT_FALSE(p.close[1].has_value());
  EXPECT_FALSE(p.close[2].has_value());
  EXPECT_EQ(p.industry_id, 3);
}

TEST(PriceCsv, ErrorsCarryLineNumbers) {
  const auto fails = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      io::read_price_csv(in);
    } catch (const sd::DataError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  EXPECT_TRUE(fails("", "empty"));
  EXPECT_TRUE(fails("date,ticker,price\n", "header"));
  EXPECT_TRUE(fails("date,ticker,close,industry_id\n", "no data"));
  EXPECT_TRUE(fails("date,ticker,close,industry_id\n2022-01-03,600000,abc,1\n", "line 2"));
  EXPECT_TRUE(fails("date,ticker,close,industry_id\n2022-01-03,600000,1.0,1\n2022-13-03,600000,1.0,1\n", "line 3"));
  EXPECT_TRUE(fails("date,ticker,close,industry_id\n2022-01-03,600000,-1.0,1\n", "line 2"));
  EXPECT_TRUE(fails("date,ticker,close,industry_id\n2022-01-03,600000,1.0,124\n", "line 2"));
  EXPECT_TRUE(fails("date,ticker,close,industry_id\n2022-01-03,600000,1.0,1\n2022-01-03,600000,1.0,1\n", "duplicate"));
}

TEST(Ingest, ExcludesUnknownDenylistedAndSuspended) {
  std::vector<io::StockRecord> recs;
  for (const auto* t : {"600000", "300750", "123456", "688001", "601988"}) {
    io::StockRecord r = walk("600000", 150, std::hash<std::string>{}(t));
    r.ticker = t;
    recs.push_back(r);
  }
  for (int i = 10; i < 90; ++i) recs[4].close[i] = std::nullopt;
  const auto result = io::ingest(recs, {}, {"688001"});
  std::set<std::string> seen;
  for (const auto& w : result.windows) seen.insert(w.ticker);
  EXPECT_EQ(seen, (std::set<std::string>{"300750", "600000"}));
  EXPECT_EQ(result.manifest.at("exclusions").size(), 3u);
  EXPECT_EQ(result.manifest.at("warnings").size(), 1u);
  // 150 days listed before the calendar: floor(90 / 20) + 1 = 5 windows per ticker, 4 train.
  EXPECT_EQ(result.manifest.at("windows").get<int>(), 10);
  EXPECT_EQ(result.manifest.at("train_windows").get<int>(), 8);
  for (std::size_t i = 1; i < result.windows.size(); ++i) {
    const auto& a = result.windows[i - 1];
    const auto& b = result.windows[i];
    EXPECT_TRUE(std::tie(a.ticker, a.start_date) < std::tie(b.ticker, b.start_date));
  }
}

TEST(Ingest, DropsListingHeadOnlyForLateListings) {
  std::ostringstream csv;
  csv << "date,ticker,close,industry_id\n";
  for (int i = 0; i < 100; ++i) {
    char date[16];
    std::snprintf(date, sizeof date, "2022-%02d-%02d", 1 + i / 28, 1 + i % 28);
    csv << date << ",600000," << 10.0 + 0.1 * i << ",1\n";
    if (i >= 20) csv << date << ",300750," << 20.0 + 0.1 * i << ",2\n";
  }
  std::istringstream in(csv.str());
  const auto recs = io::read_price_csv(in);
  const auto result = io::ingest(recs, {});
  int early = 0, late = 0;
  for (const auto& w : result.windows) (w.ticker == "600000" ? early : late)++;
  EXPECT_EQ(early, 3);  // 100 days: floor(40 / 20) + 1
  EXPECT_EQ(late, 1);   // 80 days less a 5-day head: floor(15 / 20) + 1
}

TEST(WindowStore, RoundTrip) {
  auto windows = io::make_windows(walk("688001", 100, 18));
  windows[1].synthetic = true;
  windows[2].split = "test";
  const auto path = (std::filesystem::temp_directory_path() / "stockdiff_store_test.jsonl").string();
  io::write_window_store(path, windows);
  const auto back = io::read_window_store(path);
  ASSERT_EQ(back.size(), windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    EXPECT_EQ(back[i].values, windows[i].values);
    EXPECT_EQ(back[i].stats.mean, windows[i].stats.mean);
    EXPECT_EQ(back[i].board, windows[i].board);
    EXPECT_EQ(back[i].synthetic, windows[i].synthetic);
    EXPECT_EQ(back[i].split, windows[i].split);
  }
  std::ofstream(path) << "{not json}\n";
  EXPECT_THROW(io::read_window_store(path), sd::DataError);
  std::filesystem::remove(path);
}
