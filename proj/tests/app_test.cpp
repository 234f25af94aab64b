#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "stockdiff/app.hpp"
#include "stockdiff/dataio.hpp"
#include "stockdiff/error.hpp"

namespace sd = stockdiff;
namespace app = stockdiff::app;
namespace fs = std::filesystem;

namespace {

class AppTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stockdiff_app_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  app::RunConfig small_config() const {
    app::RunConfig cfg;
    cfg.merge({{"paths.out_dir", dir_.string()},
               {"seed", 7},
               {"schedule.T", 50},
               {"net.width", 8},
               {"net.blocks", 1},
               {"net.time_dim", 4},
               {"net.embed_dim", 2},
               {"net.cond_hidden", 4},
               {"train.epochs", 2},
               {"train.batch_size", 8},
               {"sample.steps", 10}});
    return cfg;
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  // One ticker of clean daily closes, optionally with a run of missing days.
  static std::string price_csv(const std::string& ticker, int days, int gap_start = -1, int gap_len = 0) {
    std::ostringstream out;
    out << "date,ticker,close,industry_id\n";
    for (int i = 0; i < days; ++i) {
      char date[16];
      std::snprintf(date, sizeof date, "2022-%02d-%02d", 1 + i / 28, 1 + i % 28);
      const bool missing = i >= gap_start && i < gap_start + gap_len;
      out << date << "," << ticker << ",";
      if (!missing) out << 10.0 + 0.05 * i + 0.3 * ((i * 7919) % 11) / 11.0;
      out << ",3\n";
    }
    return out.str();
  }

  // AR(1) windows of length 16 on the given board, all train split.
  void write_ar1_store(const std::string& name, int count, sd::dataio::Board board) const {
    std::vector<sd::dataio::SeriesWindow> windows;
    sd::Rng rng(3);
    for (int i = 0; i < count; ++i) {
      sd::dataio::SeriesWindow w;
      w.ticker = "T" + std::to_string(i);
      w.start_date = "2022-01-01";
      w.industry_id = i % 3;
      w.board = board;
      double v = rng.normal();
      for (int j = 0; j < 16; ++j) {
        v = 0.9 * v + 0.4 * rng.normal();
        w.values.push_back(v);
      }
      windows.push_back(w);
    }
    sd::dataio::write_window_store(path(name), windows);
  }

  fs::path dir_;
  std::ostringstream log_;
};

int run_cli(const std::string& args) {
  const int status = std::system((std::string(STOCKDIFF_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_F(AppTest, ConfigDefaultsAndTypes) {
  app::RunConfig cfg;
  EXPECT_EQ(cfg.integer("schedule.T"), 400);
  EXPECT_EQ(cfg.real("sample.omega"), 7.5);
  EXPECT_EQ(cfg.real("sample.lambda_antv"), 0.03);
  EXPECT_EQ(cfg.real("sample.lambda_bp"), 0.03);
  EXPECT_TRUE(cfg.is_null("seed"));
  EXPECT_THROW(cfg.require_seed(), sd::ParameterError);
  EXPECT_THROW(cfg.set("train.epoch=3"), sd::ParameterError);
  EXPECT_THROW(cfg.set("train.epochs=fast"), sd::ParameterError);
  EXPECT_THROW(cfg.set("train.epochs=2.5"), sd::ParameterError);
  EXPECT_THROW(cfg.set("noequals"), sd::ParameterError);
  cfg.set("train.lr=1");
  EXPECT_EQ(cfg.real("train.lr"), 1.0);
  cfg.set("seed=12");
  EXPECT_EQ(cfg.require_seed(), 12u);
  cfg.set("sample.board=STAR");
  cfg.set("sample.industry=4");
  EXPECT_EQ(*cfg.sample_condition()->board, 2);
  EXPECT_THROW(cfg.set("sample.mode", 3), sd::ParameterError);
}

TEST_F(AppTest, ConfigFile) {
  write("cfg.json", R"({"train.epochs": 3, "sample.mode": "ddpm"})");
  const auto cfg = app::RunConfig::from_file(path("cfg.json"));
  EXPECT_EQ(cfg.integer("train.epochs"), 3);
  EXPECT_EQ(cfg.str("sample.mode"), "ddpm");
  write("bad.json", R"({"train": {"epochs": 3}})");
  EXPECT_THROW(app::RunConfig::from_file(path("bad.json")), sd::ParameterError);
  EXPECT_THROW(app::RunConfig::from_file(path("missing.json")), sd::ParameterError);
}

TEST_F(AppTest, DigestIgnoresPathsOnly) {
  app::RunConfig a, b;
  b.set("paths.out_dir=/elsewhere");
  EXPECT_EQ(a.digest(), b.digest());
  b.set("train.lr=0.01");
  EXPECT_NE(a.digest(), b.digest());
  EXPECT_EQ(a.digest().size(), 16u);
  EXPECT_EQ(app::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(app::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST_F(AppTest, IngestCountsWindows) {
  write("p.csv", price_csv("600000", 100));
  auto cfg = small_config();
  cfg.set("paths.input_csv", path("p.csv"));
  app::cmd_ingest(cfg, log_);
  EXPECT_EQ(sd::dataio::read_window_store(path("windows.jsonl")).size(), 3u);
  const auto manifest = nlohmann::json::parse(slurp(path("manifest.json")));
  EXPECT_EQ(manifest.at("windows"), 3);
  EXPECT_EQ(manifest.at("config_digest"), cfg.digest());
}

TEST_F(AppTest, IngestEmptyFileWritesNothing) {
  write("empty.csv", "");
  auto cfg = small_config();
  cfg.set("paths.input_csv", path("empty.csv"));
  EXPECT_THROW(app::cmd_ingest(cfg, log_), sd::DataError);
  EXPECT_FALSE(fs::exists(path("windows.jsonl")));
}

TEST_F(AppTest, IngestReportsForwardFilledGap) {
  write("p.csv", price_csv("600000", 100, 40, 6));
  auto cfg = small_config();
  cfg.set("paths.input_csv", path("p.csv"));
  app::cmd_ingest(cfg, log_);
  const auto manifest = nlohmann::json::parse(slurp(path("manifest.json")));
  EXPECT_EQ(manifest.at("gaps").at("forward_filled"), 1);
  EXPECT_EQ(manifest.at("gaps").at("interpolated"), 0);
}

TEST_F(AppTest, TrainZeroEpochsKeepsInitialParams) {
  write_ar1_store("windows.jsonl", 12, sd::dataio::Board::MainBoard);
  auto cfg = small_config();
  cfg.set("train.epochs", 0);
  app::cmd_train(cfg, log_);
  const auto net = sd::scorenet::load_checkpoint(path("checkpoint.json"));
  const auto init = sd::scorenet::init_score_net(cfg.net_shape(16), sd::derive_seed(7, 0));
  EXPECT_EQ(net.params(), init.params());
}

TEST_F(AppTest, TrainIsReproducibleAndMakesProgress) {
  write_ar1_store("windows.jsonl", 64, sd::dataio::Board::MainBoard);
  auto cfg = small_config();
  cfg.set("train.epochs", 25);
  app::cmd_train(cfg, log_);
  const auto first = slurp(path("loss.csv"));
  const auto ckpt = slurp(path("checkpoint.json"));
  app::cmd_train(cfg, log_);
  EXPECT_EQ(slurp(path("loss.csv")), first);
  EXPECT_EQ(slurp(path("checkpoint.json")), ckpt);

  std::istringstream lines(first);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "epoch,loss");
  std::vector<double> losses;
  while (std::getline(lines, line)) losses.push_back(std::stod(line.substr(line.find(',') + 1)));
  ASSERT_EQ(losses.size(), 25u);
  EXPECT_LT(losses.back(), losses.front());
}

TEST_F(AppTest, TrainNeedsSeedAndWindows) {
  auto cfg = small_config();
  cfg.set("seed", nullptr);
  write_ar1_store("windows.jsonl", 4, sd::dataio::Board::MainBoard);
  EXPECT_THROW(app::cmd_train(cfg, log_), sd::ParameterError);
  cfg.set("seed", 1);
  write("windows.jsonl", "");
  EXPECT_THROW(app::cmd_train(cfg, log_), sd::DataError);
}

TEST_F(AppTest, SampleEmitsRunsAndMeans) {
  write_ar1_store("windows.jsonl", 12, sd::dataio::Board::MainBoard);
  auto cfg = small_config();
  app::cmd_train(cfg, log_);
  cfg.merge({{"sample.industry", 1}, {"sample.board", "ChiNext"}, {"sample.count", 2}, {"sample.m", 3}});
  app::cmd_sample(cfg, log_);
  std::istringstream in(slurp(path("samples.jsonl")));
  std::string line;
  int samples = 0, means = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("values").size(), 16u);
    EXPECT_EQ(j.at("industry_id"), 1);
    EXPECT_EQ(j.at("board_id"), 1);
    EXPECT_EQ(j.at("config_digest"), cfg.digest());
    (j.at("kind") == "mean" ? means : samples)++;
  }
  EXPECT_EQ(samples, 6);
  EXPECT_EQ(means, 2);
  const auto once = slurp(path("samples.jsonl"));
  app::cmd_sample(cfg, log_);
  EXPECT_EQ(slurp(path("samples.jsonl")), once);
}

TEST_F(AppTest, SampleRejectsOutOfRangeCondition) {
  write_ar1_store("windows.jsonl", 12, sd::dataio::Board::MainBoard);
  auto cfg = small_config();
  app::cmd_train(cfg, log_);
  cfg.merge({{"sample.industry", 500}, {"sample.board", 0}});
  EXPECT_THROW(app::cmd_sample(cfg, log_), sd::ParameterError);
  cfg.merge({{"sample.industry", nullptr}, {"sample.board", nullptr}});
  EXPECT_THROW(app::cmd_sample(cfg, log_), sd::ParameterError);  // null condition needs omega 0
  cfg.set("sample.omega", 0.0);
  EXPECT_NO_THROW(app::cmd_sample(cfg, log_));
}

TEST_F(AppTest, AugmentRatios) {
  write_ar1_store("windows.jsonl", 40, sd::dataio::Board::STAR);
  auto cfg = small_config();
  app::cmd_train(cfg, log_);
  cfg.set("augment.board", "STAR");

  cfg.set("augment.ratio", "1:0");
  app::cmd_augment(cfg, log_);
  EXPECT_EQ(slurp(path("augmented.jsonl")), slurp(path("windows.jsonl")));

  cfg.set("augment.ratio", "1:1");
  app::cmd_augment(cfg, log_);
  const auto out = sd::dataio::read_window_store(path("augmented.jsonl"));
  ASSERT_EQ(out.size(), 80u);
  int synthetic = 0;
  for (const auto& w : out) {
    if (!w.synthetic) continue;
    ++synthetic;
    EXPECT_EQ(w.board, sd::dataio::Board::STAR);
    EXPECT_EQ(w.split, "train");
    EXPECT_EQ(w.values.size(), 16u);
  }
  EXPECT_EQ(synthetic, 40);
  const auto manifest = nlohmann::json::parse(slurp(path("augment_manifest.json")));
  EXPECT_EQ(manifest.at("synthetic_windows"), 40);
}

TEST_F(AppTest, AugmentPreconditions) {
  write_ar1_store("windows.jsonl", 10, sd::dataio::Board::STAR);
  auto cfg = small_config();
  app::cmd_train(cfg, log_);
  cfg.set("augment.ratio", "1:1");
  EXPECT_THROW(app::cmd_augment(cfg, log_), sd::ParameterError);  // no board
  cfg.set("augment.board", "BSE");
  EXPECT_THROW(app::cmd_augment(cfg, log_), sd::DataError);  // board absent
  cfg.set("augment.board", "STAR");
  cfg.set("augment.transfer", true);
  cfg.set("augment.transfer_from", "ChiNext");
  EXPECT_THROW(app::cmd_augment(cfg, log_), sd::ParameterError);  // no source windows
  cfg.set("augment.transfer_from", "STAR");
  cfg.set("sample.transfer_level", 20);
  cfg.set("sample.band_high", 6);
  EXPECT_NO_THROW(app::cmd_augment(cfg, log_));
  cfg.set("augment.ratio", "2-1");
  EXPECT_THROW(app::cmd_augment(cfg, log_), sd::ParameterError);
}

TEST_F(AppTest, BacktestFromPanelAndFromPrices) {
  write("panel.csv",
        "date,ticker,score,realized_return\n"
        "2023-01-02,A,0.9,0.01\n2023-01-02,B,0.5,0.02\n2023-01-02,C,0.1,-0.01\n"
        "2023-01-03,A,0.2,0.03\n2023-01-03,B,0.8,-0.02\n2023-01-03,C,0.4,0.01\n");
  auto cfg = small_config();
  cfg.set("paths.panel", path("panel.csv"));
  cfg.set("eval.k", 2);
  app::cmd_backtest(cfg, log_);
  for (const char* f : {"trajectory.csv", "cumulative_rr.csv", "summary.json", "cumulative_rr.svg"}) {
    EXPECT_TRUE(fs::exists(path(f))) << f;
  }
  const auto summary = nlohmann::json::parse(slurp(path("summary.json")));
  // Day 1 holds A,B: 0.015; day 2 holds B,C: -0.005.
  EXPECT_NEAR(summary.at("cumulative_rr").get<double>(), 1.015 * 0.995 - 1.0, 1e-12);

  write("prices.csv", price_csv("600000", 40));
  cfg.set("paths.panel", "");
  cfg.set("paths.input_csv", path("prices.csv"));
  app::cmd_backtest(cfg, log_);
  EXPECT_TRUE(fs::exists(path("panel.csv")));
  cfg.set("paths.input_csv", "");
  EXPECT_THROW(app::cmd_backtest(cfg, log_), sd::ParameterError);
}

TEST_F(AppTest, ReportCollectsArtifacts) {
  auto cfg = small_config();
  EXPECT_THROW(app::cmd_report(cfg, log_), sd::DataError);
  write_ar1_store("windows.jsonl", 12, sd::dataio::Board::MainBoard);
  app::cmd_train(cfg, log_);
  app::cmd_report(cfg, log_);
  const auto report = nlohmann::json::parse(slurp(path("report.json")));
  EXPECT_EQ(report.at("train").at("epochs"), 2);
  EXPECT_TRUE(fs::exists(path("loss.svg")));
}

TEST_F(AppTest, SvgChart) {
  const auto svg = app::line_chart_svg("t", {1.0, 3.0, 2.0});
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("40.00,280.00"), std::string::npos);
  EXPECT_EQ(app::line_chart_svg("t", {}).find("<polyline"), std::string::npos);
}

TEST_F(AppTest, CliExitCodes) {
  write("p.csv", price_csv("600000", 100));
  write("bad.csv", "date,ticker,close,industry_id\n2022-01-01,600000,x,1\n");
  const std::string out = " --out " + dir_.string();
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("ingest --input " + path("p.csv") + out), 0);
  EXPECT_EQ(run_cli("ingest --input " + path("bad.csv") + out), 3);
  EXPECT_EQ(run_cli("ingest --set no.such=1 --input " + path("p.csv") + out), 2);
  EXPECT_EQ(run_cli("train --set net.width=4 --set net.blocks=1 --set train.epochs=0" + out), 2);  // no seed
  EXPECT_EQ(run_cli("train --seed 3 --set net.width=4 --set net.blocks=1 --set train.epochs=1" + out), 0);
  EXPECT_EQ(run_cli("sample --seed 3 --industry 999 --board 0" + out), 2);
  EXPECT_EQ(run_cli("sample --seed 3 --industry 1 --board MainBoard --set sample.steps=5" + out), 0);
  EXPECT_EQ(run_cli("train --seed 3 --set train.lr=1e300 --set net.width=4 --set net.blocks=1" + out), 4);
}
