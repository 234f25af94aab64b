#include "stockdiff/app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <ostream>
#include <sstream>

#include "stockdiff/dataio.hpp"
#include "stockdiff/error.hpp"
#include "stockdiff/eval.hpp"

namespace stockdiff::app {

namespace fs = std::filesystem;

namespace {

const nlohmann::json& default_values() {
  static const nlohmann::json defaults{
      {"paths.input_csv", ""},
      {"paths.denylist", ""},
      {"paths.store", ""},
      {"paths.checkpoint", ""},
      {"paths.panel", ""},
      {"paths.out_dir", "out"},
      {"seed", nullptr},
      {"schedule.T", 400},
      {"schedule.beta_start", 1e-4},
      {"schedule.beta_end", 0.02},
      {"data.window", 60},
      {"data.step", 20},
      {"data.ipo_days", 5},
      {"data.max_interp_gap", 5},
      {"data.max_long_gaps", 3},
      {"data.max_gap", 60},
      {"net.width", 64},
      {"net.blocks", 4},
      {"net.time_dim", 32},
      {"net.embed_dim", 16},
      {"net.cond_hidden", 128},
      {"net.num_industries", scorenet::kNumIndustries},
      {"train.epochs", 20},
      {"train.batch_size", 64},
      {"train.lr", 1e-3},
      {"train.p_uncond", 0.1},
      {"train.weighting", "unit"},
      {"sample.mode", "ddim"},
      {"sample.steps", 50},
      {"sample.eta", 0.0},
      {"sample.omega", 7.5},
      {"sample.m", 1},
      {"sample.lambda_antv", 0.03},
      {"sample.lambda_bp", 0.03},
      {"sample.band_low", 1},
      {"sample.band_high", 10},
      {"sample.antv_k", 3},
      {"sample.antv_alpha", 1.0},
      {"sample.antv_sigma", 1.0},
      {"sample.count", 1},
      {"sample.industry", nullptr},
      {"sample.board", nullptr},
      {"sample.emit", "both"},
      {"sample.transfer_level", 200},
      {"augment.board", ""},
      {"augment.ratio", ""},
      {"augment.transfer", false},
      {"augment.transfer_from", ""},
      {"eval.k", 20},
      {"eval.lookback", 5},
      {"eval.horizon", 5},
  };
  return defaults;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

int parse_board_value(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<int>();
  return static_cast<int>(dataio::parse_board(v.get<std::string>()));
}

struct LoadedModel {
  scorenet::ScoreNet net;
  schedules::NoiseSchedule schedule;
};

LoadedModel load_model(const RunConfig& cfg) {
  const std::string path = cfg.path_or("paths.checkpoint", "checkpoint.json");
  nlohmann::json j;
  {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot read checkpoint " + path);
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError("checkpoint " + path + ": " + e.what());
    }
  }
  auto net = scorenet::net_from_checkpoint(j);
  auto schedule = j.contains("schedule") ? schedules::schedule_from_json(j.at("schedule")) : cfg.schedule();
  return {std::move(net), std::move(schedule)};
}

std::pair<long, long> parse_ratio(const std::string& text) {
  const auto colon = text.find(':');
  if (text.empty() || colon == std::string::npos) {
    throw ParameterError("augment.ratio must be given as real:synthetic, e.g. 1:1");
  }
  try {
    const long real = std::stol(text.substr(0, colon));
    const long syn = std::stol(text.substr(colon + 1));
    if (real < 1 || syn < 0) throw std::invalid_argument("range");
    return {real, syn};
  } catch (const std::exception&) {
    throw ParameterError("augment.ratio '" + text + "' is not of the form a:b with a >= 1, b >= 0");
  }
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig::RunConfig() : values_(default_values()) {}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("config " + path + ": " + e.what());
  }
  RunConfig cfg;
  cfg.merge(j);
  return cfg;
}

void RunConfig::merge(const nlohmann::json& overrides) {
  if (!overrides.is_object()) throw ParameterError("config must be a flat JSON object");
  for (const auto& [key, value] : overrides.items()) set(key, value);
}

void RunConfig::set(const std::string& key, const nlohmann::json& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ParameterError("unknown config key '" + key + "'");
  const nlohmann::json& def = default_values().at(key);
  bool ok = false;
  if (def.is_null()) {
    ok = value.is_null() || value.is_number_integer() || value.is_number_unsigned() || value.is_string();
  } else if (def.is_boolean()) {
    ok = value.is_boolean();
  } else if (def.is_string()) {
    ok = value.is_string();
  } else if (def.is_number_integer()) {
    ok = value.is_number_integer() || value.is_number_unsigned();
  } else if (def.is_number_float()) {
    ok = value.is_number();
  }
  if (!ok) throw ParameterError("config key '" + key + "' has the wrong type");
  values_[key] = def.is_number_float() ? nlohmann::json(value.get<double>()) : value;
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ParameterError("expected key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  if (!values_.contains(key)) throw ParameterError("unknown config key '" + key + "'");
  const nlohmann::json& def = default_values().at(key);
  if (def.is_string()) {
    set(key, text);
    return;
  }
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    if (!def.is_null()) throw ParameterError("cannot parse value for '" + key + "': " + text);
    parsed = text;
  }
  set(key, parsed);
}

std::string RunConfig::str(const std::string& key) const { return values_.at(key).get<std::string>(); }
int RunConfig::integer(const std::string& key) const { return values_.at(key).get<int>(); }
double RunConfig::real(const std::string& key) const { return values_.at(key).get<double>(); }
bool RunConfig::flag(const std::string& key) const { return values_.at(key).get<bool>(); }
bool RunConfig::is_null(const std::string& key) const { return values_.at(key).is_null(); }

std::uint64_t RunConfig::require_seed() const {
  const auto& s = values_.at("seed");
  if (s.is_null()) throw ParameterError("a seed is required (--seed N or \"seed\" in the config)");
  if (s.is_string()) {
    try {
      return std::stoull(s.get<std::string>());
    } catch (const std::exception&) {
      throw ParameterError("seed must be a non-negative integer");
    }
  }
  if (s.is_number_integer() && s.get<long long>() < 0) throw ParameterError("seed must be non-negative");
  return s.get<std::uint64_t>();
}

std::string RunConfig::digest() const {
  nlohmann::json content = nlohmann::json::object();
  for (const auto& [key, value] : values_.items()) {
    if (key.rfind("paths.", 0) != 0) content[key] = value;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(content.dump());
  return ss.str();
}

schedules::NoiseSchedule RunConfig::schedule() const {
  return schedules::make_linear_schedule(integer("schedule.T"), real("schedule.beta_start"), real("schedule.beta_end"));
}

scorenet::NetShape RunConfig::net_shape(int series_len) const {
  scorenet::NetShape s;
  s.series_len = series_len;
  s.width = integer("net.width");
  s.blocks = integer("net.blocks");
  s.time_dim = integer("net.time_dim");
  s.embed_dim = integer("net.embed_dim");
  s.cond_hidden = integer("net.cond_hidden");
  s.num_industries = integer("net.num_industries");
  s.validate();
  return s;
}

scorenet::TrainConfig RunConfig::train_config() const {
  scorenet::TrainConfig t;
  t.epochs = integer("train.epochs");
  t.batch_size = integer("train.batch_size");
  t.learning_rate = real("train.lr");
  t.p_uncond = real("train.p_uncond");
  t.weighting = scorenet::parse_weighting(str("train.weighting"));
  t.validate();
  return t;
}

samplers::SamplerConfig RunConfig::sampler_config(std::uint64_t seed) const {
  samplers::SamplerConfig s;
  s.mode = samplers::parse_sampler_mode(str("sample.mode"));
  s.sub_steps = integer("sample.steps");
  s.eta = real("sample.eta");
  s.omega = real("sample.omega");
  s.runs = integer("sample.m");
  s.lambda_antv = real("sample.lambda_antv");
  s.lambda_bp = real("sample.lambda_bp");
  s.band = {integer("sample.band_low"), integer("sample.band_high")};
  s.antv.k = integer("sample.antv_k");
  s.antv.alpha = real("sample.antv_alpha");
  s.antv.sigma_w = real("sample.antv_sigma");
  s.transfer_level = integer("sample.transfer_level");
  s.seed = seed;
  return s;
}

std::optional<scorenet::Condition> RunConfig::sample_condition() const {
  const auto& ind = values_.at("sample.industry");
  const auto& board = values_.at("sample.board");
  if (ind.is_null() && board.is_null()) return scorenet::Condition::null();
  if (ind.is_null() || board.is_null()) {
    throw ParameterError("sample.industry and sample.board must be given together");
  }
  scorenet::Condition c;
  try {
    c.industry = ind.is_string() ? std::stoi(ind.get<std::string>()) : ind.get<int>();
  } catch (const std::exception&) {
    throw ParameterError("sample.industry must be an integer id");
  }
  c.board = parse_board_value(board);
  return c;
}

std::string RunConfig::path_or(const std::string& key, const std::string& fallback) const {
  const std::string v = str(key);
  return v.empty() ? (fs::path(out_dir()) / fallback).string() : v;
}

std::string RunConfig::out_dir() const { return str("paths.out_dir"); }

void cmd_ingest(const RunConfig& cfg, std::ostream& log) {
  const std::string input = cfg.str("paths.input_csv");
  if (input.empty()) throw ParameterError("ingest needs paths.input_csv (--input)");
  const auto records = dataio::read_price_csv_file(input);
  std::set<std::string> denylist;
  if (!cfg.str("paths.denylist").empty()) denylist = dataio::read_denylist(cfg.str("paths.denylist"));

  dataio::IngestConfig ic;
  ic.window = cfg.integer("data.window");
  ic.step = cfg.integer("data.step");
  ic.ipo_days = cfg.integer("data.ipo_days");
  ic.repair.max_interp_gap = cfg.integer("data.max_interp_gap");
  ic.repair.max_long_gaps = cfg.integer("data.max_long_gaps");
  ic.repair.max_gap = cfg.integer("data.max_gap");
  auto result = dataio::ingest(records, ic, denylist);
  if (result.windows.empty()) throw DataError("ingest produced no windows");
  for (const auto& w : result.manifest.at("warnings")) log << "warning: " << w.get<std::string>() << '\n';

  fs::create_directories(cfg.out_dir());
  const std::string store = cfg.path_or("paths.store", "windows.jsonl");
  dataio::write_window_store(store, result.windows);
  result.manifest["config_digest"] = cfg.digest();
  write_json((fs::path(cfg.out_dir()) / "manifest.json").string(), result.manifest);
  log << "ingest: " << result.windows.size() << " windows from " << records.size() << " tickers -> " << store << '\n';
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  const std::uint64_t seed = cfg.require_seed();
  const std::string store = cfg.path_or("paths.store", "windows.jsonl");
  const auto windows = dataio::read_window_store(store);
  std::vector<scorenet::TrainingExample> data;
  for (const auto& w : windows) {
    if (w.split != "train") continue;
    data.push_back({w.values, scorenet::Condition{w.industry_id, static_cast<int>(w.board)}});
  }
  if (data.empty()) throw DataError("window store " + store + " has no training windows");
  const auto len = data.front().x0.size();
  for (const auto& ex : data) {
    if (ex.x0.size() != len) throw DataError("window store mixes window lengths");
  }

  const auto schedule = cfg.schedule();
  const auto shape = cfg.net_shape(static_cast<int>(len));
  auto tc = cfg.train_config();
  tc.seed = derive_seed(seed, 1);
  const auto initial = scorenet::init_score_net(shape, derive_seed(seed, 0));

  std::string loss_csv = "epoch,loss\n";
  const auto net = scorenet::train(initial, data, schedule, tc, [&](int epoch, double loss) {
    loss_csv += std::to_string(epoch) + "," + format_double(loss) + "\n";
    log << "epoch " << epoch << " loss " << loss << '\n';
  });

  fs::create_directories(cfg.out_dir());
  nlohmann::json ckpt = scorenet::checkpoint_json(net);
  ckpt["schedule"] = schedules::to_json(schedule);
  ckpt["config_digest"] = cfg.digest();
  const std::string ckpt_path = cfg.path_or("paths.checkpoint", "checkpoint.json");
  write_text(ckpt_path, ckpt.dump() + "\n");
  write_text((fs::path(cfg.out_dir()) / "loss.csv").string(), loss_csv);
  log << "train: " << data.size() << " windows, " << net.num_params() << " parameters -> " << ckpt_path << '\n';
}

void cmd_sample(const RunConfig& cfg, std::ostream& log) {
  const std::uint64_t seed = cfg.require_seed();
  const auto model = load_model(cfg);
  const auto condition = *cfg.sample_condition();
  const int count = cfg.integer("sample.count");
  if (count < 1) throw ParameterError("sample.count must be >= 1");
  const std::string emit = cfg.str("sample.emit");
  if (emit != "mean" && emit != "raw" && emit != "both") throw ParameterError("sample.emit must be mean|raw|both");
  const auto len = static_cast<std::size_t>(model.net.shape().series_len);
  const std::string digest = cfg.digest();

  std::string lines;
  const auto emit_line = [&](const std::string& kind, int index, int run, std::uint64_t s,
                             const std::vector<double>& values) {
    nlohmann::json j{{"kind", kind},
                     {"index", index},
                     {"industry_id", condition.industry ? nlohmann::json(*condition.industry) : nlohmann::json()},
                     {"board_id", condition.board ? nlohmann::json(*condition.board) : nlohmann::json()},
                     {"seed", s},
                     {"config_digest", digest},
                     {"values", values}};
    if (run >= 0) j["run"] = run;
    lines += j.dump() + "\n";
  };
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    const auto sc = cfg.sampler_config(s);
    const auto result = samplers::sample(model.net, condition, model.schedule, sc, len);
    if (emit != "mean") {
      for (std::size_t r = 0; r < result.runs.size(); ++r) emit_line("sample", i, static_cast<int>(r), s, result.runs[r]);
    }
    if (emit != "raw") emit_line("mean", i, -1, s, result.mean);
  }
  const std::string path = (fs::path(cfg.out_dir()) / "samples.jsonl").string();
  write_text(path, lines);
  log << "sample: " << count << " condition draws -> " << path << '\n';
}

void cmd_augment(const RunConfig& cfg, std::ostream& log) {
  const std::string board_name = cfg.str("augment.board");
  if (board_name.empty()) throw ParameterError("augment needs a target board (augment.board / --board)");
  const auto target = dataio::parse_board(board_name);
  const auto [ratio_real, ratio_syn] = parse_ratio(cfg.str("augment.ratio"));

  const std::string store = cfg.path_or("paths.store", "windows.jsonl");
  auto windows = dataio::read_window_store(store);
  std::vector<const dataio::SeriesWindow*> reals;
  for (const auto& w : windows) {
    if (w.board == target && w.split == "train" && !w.synthetic) reals.push_back(&w);
  }
  if (reals.empty()) throw DataError("target board " + board_name + " has no training windows in " + store);

  const bool transfer = cfg.flag("augment.transfer");
  std::vector<const dataio::SeriesWindow*> sources;
  if (transfer) {
    const std::string from = cfg.str("augment.transfer_from").empty() ? board_name : cfg.str("augment.transfer_from");
    const auto source_board = dataio::parse_board(from);
    for (const auto& w : windows) {
      if (w.board == source_board && w.split == "train" && !w.synthetic) sources.push_back(&w);
    }
    if (sources.empty()) throw ParameterError("transfer mode: source board " + from + " has no windows to perturb");
  }

  const long n_real = static_cast<long>(reals.size());
  const long n_syn = (n_real * ratio_syn + ratio_real / 2) / ratio_real;
  std::vector<dataio::SeriesWindow> synthetic;
  if (n_syn > 0) {
    const std::uint64_t seed = cfg.require_seed();
    const auto model = load_model(cfg);
    const auto len = static_cast<std::size_t>(model.net.shape().series_len);
    if (reals.front()->values.size() != len) throw DataError("store window length does not match the checkpoint");
    for (long j = 0; j < n_syn; ++j) {
      const auto& tmpl = *reals[static_cast<std::size_t>(j % n_real)];
      auto sc = cfg.sampler_config(derive_seed(seed, static_cast<std::uint64_t>(j)));
      if (transfer) sc.source = sources[static_cast<std::size_t>(j) % sources.size()]->values;
      const scorenet::Condition c{tmpl.industry_id, static_cast<int>(tmpl.board)};
      auto result = samplers::sample(model.net, c, model.schedule, sc, len);
      dataio::SeriesWindow w = tmpl;
      w.ticker = "SYN" + std::to_string(j) + "-" + tmpl.ticker;
      w.values = std::move(result.mean);
      w.synthetic = true;
      w.split = "train";
      synthetic.push_back(std::move(w));
    }
  }
  for (auto& w : synthetic) windows.push_back(std::move(w));

  fs::create_directories(cfg.out_dir());
  const std::string out_store = (fs::path(cfg.out_dir()) / "augmented.jsonl").string();
  dataio::write_window_store(out_store, windows);
  write_json((fs::path(cfg.out_dir()) / "augment_manifest.json").string(),
             {{"target_board", board_name},
              {"ratio", cfg.str("augment.ratio")},
              {"real_windows", n_real},
              {"synthetic_windows", n_syn},
              {"total_windows", windows.size()},
              {"transfer", transfer},
              {"config_digest", cfg.digest()}});
  log << "augment: " << n_syn << " synthetic windows for " << board_name << " -> " << out_store << '\n';
}

void cmd_backtest(const RunConfig& cfg, std::ostream& log) {
  eval::PredictionPanel panel;
  fs::create_directories(cfg.out_dir());
  if (!cfg.str("paths.panel").empty()) {
    panel = eval::read_panel_csv_file(cfg.str("paths.panel"));
  } else if (!cfg.str("paths.input_csv").empty()) {
    const auto raw = dataio::read_price_csv_file(cfg.str("paths.input_csv"));
    dataio::RepairPolicy policy;
    policy.max_interp_gap = cfg.integer("data.max_interp_gap");
    policy.max_long_gaps = cfg.integer("data.max_long_gaps");
    policy.max_gap = cfg.integer("data.max_gap");
    std::vector<dataio::StockRecord> records;
    for (const auto& r : raw) {
      try {
        records.push_back(dataio::repair_suspensions(r, policy));
      } catch (const DataError& e) {
        log << "warning: " << e.what() << '\n';
      }
    }
    panel = eval::momentum_panel(records, cfg.integer("eval.lookback"), cfg.integer("eval.horizon"));
    eval::write_panel_csv((fs::path(cfg.out_dir()) / "panel.csv").string(), panel);
  } else {
    throw ParameterError("backtest needs paths.panel (--panel) or paths.input_csv (--prices)");
  }

  const auto result = eval::topk_dropk_backtest(panel, cfg.integer("eval.k"));
  const fs::path out(cfg.out_dir());
  eval::write_trajectory_csv((out / "trajectory.csv").string(), result);
  eval::write_cumulative_csv((out / "cumulative_rr.csv").string(), result);
  auto summary = eval::summary_json(result);
  summary["k"] = cfg.integer("eval.k");
  summary["config_digest"] = cfg.digest();
  write_json((out / "summary.json").string(), summary);
  std::vector<double> curve;
  for (const auto& d : result.days) curve.push_back(d.cumulative_rr);
  write_text((out / "cumulative_rr.svg").string(), line_chart_svg("cumulative RR", curve));
  log << "backtest: " << result.days.size() << " dates, cumulative RR " << result.cumulative_rr << ", mean IC "
      << result.mean_ic << ", mean Rank IC " << result.mean_rank_ic << '\n';
}

void cmd_report(const RunConfig& cfg, std::ostream& log) {
  const fs::path out(cfg.out_dir());
  nlohmann::json report = nlohmann::json::object();
  if (fs::exists(out / "manifest.json")) {
    const auto m = read_json((out / "manifest.json").string());
    report["ingest"] = {{"windows", m.at("windows")},
                        {"train_windows", m.at("train_windows")},
                        {"test_windows", m.at("test_windows")},
                        {"per_board", m.at("per_board")},
                        {"exclusions", m.at("exclusions").size()}};
  }
  if (fs::exists(out / "loss.csv")) {
    std::ifstream in(out / "loss.csv");
    std::string line;
    std::getline(in, line);
    std::vector<double> losses;
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      if (comma != std::string::npos) losses.push_back(std::stod(line.substr(comma + 1)));
    }
    if (!losses.empty()) {
      report["train"] = {{"epochs", losses.size()}, {"first_loss", losses.front()}, {"final_loss", losses.back()}};
      write_text((out / "loss.svg").string(), line_chart_svg("training loss", losses));
    }
  }
  if (fs::exists(out / "augment_manifest.json")) report["augment"] = read_json((out / "augment_manifest.json").string());
  if (fs::exists(out / "summary.json")) report["backtest"] = read_json((out / "summary.json").string());
  if (report.empty()) throw DataError("report: no artifacts found in " + cfg.out_dir());
  report["config_digest"] = cfg.digest();
  write_json((out / "report.json").string(), report);
  log << "report: " << (out / "report.json").string() << '\n';
}

std::string line_chart_svg(const std::string& title, const std::vector<double>& ys) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 320.0;
  constexpr double kMargin = 40.0;
  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kMargin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin << "\" y2=\""
      << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\"/>\n";
  if (!ys.empty()) {
    const auto [lo_it, hi_it] = std::minmax_element(ys.begin(), ys.end());
    const double lo = *lo_it;
    const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
    const double span_x = static_cast<double>(std::max<std::size_t>(1, ys.size() - 1));
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double px = kMargin + (kWidth - 2 * kMargin) * static_cast<double>(i) / span_x;
      const double py = kHeight - kMargin - (kHeight - 2 * kMargin) * (ys[i] - lo) / (hi - lo);
      svg << (i ? " " : "") << px << "," << py;
    }
    svg << "\"/>\n";
    svg << std::setprecision(6);
    svg << "<text x=\"2\" y=\"" << kMargin << "\" font-family=\"sans-serif\" font-size=\"10\">" << hi << "</text>\n";
    svg << "<text x=\"2\" y=\"" << kHeight - kMargin << "\" font-family=\"sans-serif\" font-size=\"10\">" << lo
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace stockdiff::app
