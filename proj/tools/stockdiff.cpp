#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stockdiff/app.hpp"
#include "stockdiff/error.hpp"

namespace {

struct GlobalOptions {
  std::string config;
  std::string seed;
  std::string out;
  std::vector<std::string> sets;
};

struct CommandOptions {
  std::string input;
  std::string denylist;
  std::string store;
  std::string checkpoint;
  std::string panel;
  std::string board;
  std::string ratio;
  std::string industry;
  std::string cond_board;
  std::string mode;
  int count = 0;
  int m = 0;
  double omega = -1.0;
  bool transfer = false;
  std::string transfer_from;
  int k = 0;
};

void add_global(CLI::App* cmd, GlobalOptions& g) {
  cmd->add_option("--config", g.config, "flat JSON config file");
  cmd->add_option("--seed", g.seed, "master seed");
  cmd->add_option("--out", g.out, "output directory");
  cmd->add_option("--set", g.sets, "override a config key: key=value")->take_all();
}

stockdiff::app::RunConfig build_config(const GlobalOptions& g, const CommandOptions& o) {
  auto cfg = g.config.empty() ? stockdiff::app::RunConfig() : stockdiff::app::RunConfig::from_file(g.config);
  const auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) cfg.set(std::string(key) + "=" + v);
  };
  put("paths.out_dir", g.out);
  put("paths.input_csv", o.input);
  put("paths.denylist", o.denylist);
  put("paths.store", o.store);
  put("paths.checkpoint", o.checkpoint);
  put("paths.panel", o.panel);
  put("augment.board", o.board);
  put("augment.ratio", o.ratio);
  put("augment.transfer_from", o.transfer_from);
  put("sample.industry", o.industry);
  put("sample.board", o.cond_board);
  put("sample.mode", o.mode);
  if (o.count > 0) cfg.set("sample.count", o.count);
  if (o.m > 0) cfg.set("sample.m", o.m);
  if (o.omega >= 0.0) cfg.set("sample.omega", o.omega);
  if (o.transfer) cfg.set("augment.transfer", true);
  if (o.k > 0) cfg.set("eval.k", o.k);
  for (const auto& s : g.sets) cfg.set(s);
  if (!g.seed.empty()) cfg.set("seed=" + g.seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional diffusion generator for stock price windows"};
  app.require_subcommand(1);
  GlobalOptions g;
  CommandOptions o;

  auto* ingest = app.add_subcommand("ingest", "clean a price CSV into a normalized window store");
  add_global(ingest, g);
  ingest->add_option("--input", o.input, "price CSV (date,ticker,close,industry_id)");
  ingest->add_option("--denylist", o.denylist, "file of tickers to drop, one per line");
  ingest->add_option("--store", o.store, "window store path");

  auto* train = app.add_subcommand("train", "fit the noise predictor on the training windows");
  add_global(train, g);
  train->add_option("--store", o.store, "window store path");
  train->add_option("--checkpoint", o.checkpoint, "checkpoint output path");

  auto* sample = app.add_subcommand("sample", "draw conditional samples from a checkpoint");
  add_global(sample, g);
  sample->add_option("--checkpoint", o.checkpoint, "checkpoint path");
  sample->add_option("--industry", o.industry, "industry id");
  sample->add_option("--board", o.cond_board, "board name or id");
  sample->add_option("--mode", o.mode, "ddpm or ddim");
  sample->add_option("--count", o.count, "number of draws");
  sample->add_option("--m", o.m, "runs averaged per draw");
  sample->add_option("--omega", o.omega, "guidance weight");

  auto* augment = app.add_subcommand("augment", "add synthetic windows for one board");
  add_global(augment, g);
  augment->add_option("--store", o.store, "window store path");
  augment->add_option("--checkpoint", o.checkpoint, "checkpoint path");
  augment->add_option("--board", o.board, "target board");
  augment->add_option("--ratio", o.ratio, "real:synthetic ratio, e.g. 1:1");
  augment->add_flag("--transfer", o.transfer, "start from perturbed source windows");
  augment->add_option("--transfer-from", o.transfer_from, "source board for transfer mode");

  auto* backtest = app.add_subcommand("backtest", "top-k/drop-k backtest with IC and Rank IC");
  add_global(backtest, g);
  backtest->add_option("--panel", o.panel, "prediction panel CSV (date,ticker,score,realized_return)");
  backtest->add_option("--prices", o.input, "price CSV; builds a momentum panel");
  backtest->add_option("--k", o.k, "portfolio size");

  auto* report = app.add_subcommand("report", "summarize artifacts in the output directory");
  add_global(report, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto cfg = build_config(g, o);
    if (ingest->parsed()) stockdiff::app::cmd_ingest(cfg, std::cout);
    if (train->parsed()) stockdiff::app::cmd_train(cfg, std::cout);
    if (sample->parsed()) stockdiff::app::cmd_sample(cfg, std::cout);
    if (augment->parsed()) stockdiff::app::cmd_augment(cfg, std::cout);
    if (backtest->parsed()) stockdiff::app::cmd_backtest(cfg, std::cout);
    if (report->parsed()) stockdiff::app::cmd_report(cfg, std::cout);
  } catch (const stockdiff::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
