#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stockdiff/samplers.hpp"
#include "stockdiff/schedules.hpp"
#include "stockdiff/scorenet.hpp"

namespace stockdiff::app {

// Flat configuration with dotted keys, e.g. {"schedule.T": 400, "train.epochs": 20}.
// Every key has a default; unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  static RunConfig from_file(const std::string& path);

  // Merges a flat JSON object; types must match the defaults.
  void merge(const nlohmann::json& overrides);
  // "key=value", value parsed according to the key's default type.
  void set(const std::string& assignment);
  void set(const std::string& key, const nlohmann::json& value);

  const nlohmann::json& values() const { return values_; }

  std::string str(const std::string& key) const;
  int integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  bool is_null(const std::string& key) const;

  std::uint64_t require_seed() const;

  // FNV-1a over the canonical dump of every non-path key.
  std::string digest() const;

  schedules::NoiseSchedule schedule() const;
  scorenet::NetShape net_shape(int series_len) const;
  scorenet::TrainConfig train_config() const;
  samplers::SamplerConfig sampler_config(std::uint64_t seed) const;
  std::optional<scorenet::Condition> sample_condition() const;

  // Resolves paths.<name>, falling back to <out_dir>/<fallback>.
  std::string path_or(const std::string& key, const std::string& fallback) const;
  std::string out_dir() const;

 private:
  nlohmann::json values_;
};

std::uint64_t fnv1a64(const std::string& bytes);

void cmd_ingest(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_sample(const RunConfig& cfg, std::ostream& log);
void cmd_augment(const RunConfig& cfg, std::ostream& log);
void cmd_backtest(const RunConfig& cfg, std::ostream& log);
void cmd_report(const RunConfig& cfg, std::ostream& log);

// Polyline chart with axes and min/max labels.
std::string line_chart_svg(const std::string& title, const std::vector<double>& ys);

}  // namespace stockdiff::app
