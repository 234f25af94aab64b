#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stockdiff/random.hpp"
#include "stockdiff/schedules.hpp"

namespace stockdiff::scorenet {

inline constexpr int kNumBoards = 5;
inline constexpr int kNumIndustries = 124;

// Raw condition labels; both empty is the unconditional (null) condition.
struct Condition {
  std::optional<int> industry;
  std::optional<int> board;

  static Condition null() { return {}; }
  bool is_null() const { return !industry && !board; }
};

// Encoded condition: [encoder(embedding row) | board one-hot], all zeros when null.
struct ConditionVector {
  Condition labels;
  std::vector<double> encoded;
};

struct NetShape {
  int series_len = 60;
  int width = 64;
  int blocks = 4;
  int time_dim = 32;
  int num_industries = kNumIndustries;
  int embed_dim = 16;
  int cond_hidden = 128;

  int cond_dim() const { return embed_dim + kNumBoards; }
  void validate() const;
  bool operator==(const NetShape&) const = default;
};

// Offsets of every tensor inside the flat, row-major parameter vector.
struct ParamLayout {
  struct Affine {
    std::size_t w = 0;  // rows x cols
    std::size_t b = 0;
    int rows = 0;
    int cols = 0;
  };
  struct Block {
    Affine hidden;    // width x width, acts on the running state
    std::size_t time_proj = 0;  // width x time_dim
    std::size_t cond_proj = 0;  // width x cond_dim
    Affine out;       // width x width
  };

  std::size_t embedding = 0;  // num_industries x embed_dim
  Affine enc1, enc2, enc3;
  Affine input;
  std::vector<Block> blocks;
  Affine output;
  std::size_t total = 0;

  explicit ParamLayout(const NetShape& shape);
};

// Anything that predicts the forward noise of x at step t.
class EpsPredictor {
 public:
  virtual ~EpsPredictor() = default;
  virtual std::vector<double> predict_eps(std::span<const double> x, int t, const Condition& c) const = 0;
};

class ScoreNet : public EpsPredictor {
 public:
  explicit ScoreNet(const NetShape& shape);
  ScoreNet(const NetShape& shape, std::vector<double> params);

  const NetShape& shape() const { return shape_; }
  const ParamLayout& layout() const { return layout_; }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }
  std::size_t num_params() const { return params_.size(); }

  ConditionVector encode_condition(const Condition& c) const;

  std::vector<double> predict_eps(std::span<const double> x, int t, const Condition& c) const override;
  std::vector<double> predict_eps(std::span<const double> x, int t, const ConditionVector& c) const;

  // Intermediate activations of one forward pass, kept for backward().
  struct Trace {
    std::vector<double> x;
    std::vector<double> temb;
    bool conditioned = false;
    int industry = 0;
    std::vector<double> cond;  // encoded condition
    std::vector<double> enc_a1, enc_a2;       // encoder pre-activations
    std::vector<std::vector<double>> states;  // state entering each block, plus the final state
    std::vector<std::vector<double>> pre;     // block pre-activations
    std::vector<double> output;
  };

  Trace forward(std::span<const double> x, int t, const Condition& c) const;
  // Accumulates d(upstream . output)/d(params) into grad.
  void backward(const Trace& trace, std::span<const double> upstream, std::span<double> grad) const;

 private:
  NetShape shape_;
  ParamLayout layout_;
  std::vector<double> params_;
};

// Random initialization; embedding rows ~ N(0,1), affine weights scaled by
// fan-in, output layer scaled down so the initial prediction is small.
ScoreNet init_score_net(const NetShape& shape, std::uint64_t seed);

// Interleaved [sin(t f_0), cos(t f_0), sin(t f_1), ...] with f_i = 10000^(-i/(dim/2)).
std::vector<double> time_embedding(int t, int dim);

enum class LossWeighting { Elbo, Unit };

LossWeighting parse_weighting(const std::string& name);
std::string to_string(LossWeighting w);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double p_uncond = 0.1;
  LossWeighting weighting = LossWeighting::Unit;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingExample {
  std::vector<double> x0;
  Condition condition;
};

// Random draws that define one stochastic loss evaluation.
struct DsmDraw {
  int t = 1;
  std::vector<double> eps;
  bool dropped = false;  // condition replaced by null
};

std::vector<DsmDraw> draw_dsm_batch(std::span<const TrainingExample> batch, const schedules::NoiseSchedule& schedule,
                                    double p_uncond, Rng& rng);

double dsm_weight(int t, const schedules::NoiseSchedule& schedule, LossWeighting weighting);

// Mean over the batch of w_t * ||eps_hat(x_t, t, c) - eps||^2, for any predictor.
double dsm_objective(const EpsPredictor& model, std::span<const TrainingExample> batch,
                     std::span<const DsmDraw> draws, const schedules::NoiseSchedule& schedule,
                     LossWeighting weighting);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

LossAndGrad dsm_loss(const ScoreNet& net, std::span<const TrainingExample> batch, std::span<const DsmDraw> draws,
                     const schedules::NoiseSchedule& schedule, LossWeighting weighting);

LossAndGrad dsm_loss(const ScoreNet& net, std::span<const TrainingExample> batch,
                     const schedules::NoiseSchedule& schedule, double p_uncond, LossWeighting weighting, Rng& rng);

// Adaptive-moment optimizer state over a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  long steps_ = 0;
};

using EpochLogger = std::function<void(int epoch, double mean_loss)>;

ScoreNet train(const ScoreNet& initial, std::span<const TrainingExample> data, const schedules::NoiseSchedule& schedule,
               const TrainConfig& config, const EpochLogger& log = {});

// Score recovered from an eps prediction: -eps_hat / sqrt(1 - abar_t).
std::vector<double> score_from_eps(std::span<const double> eps_hat, int t, const schedules::NoiseSchedule& schedule);

nlohmann::json checkpoint_json(const ScoreNet& net);
ScoreNet net_from_checkpoint(const nlohmann::json& j);
void save_checkpoint(const ScoreNet& net, const std::string& path);
ScoreNet load_checkpoint(const std::string& path);

}  // namespace stockdiff::scorenet
