#include "stockdiff/scorenet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "stockdiff/error.hpp"

namespace stockdiff::scorenet {

namespace {

constexpr const char* kCheckpointFormat = "stockdiff.scorenet";
constexpr int kCheckpointVersion = 1;

ParamLayout::Affine make_affine(std::size_t& cursor, int rows, int cols) {
  ParamLayout::Affine a;
  a.rows = rows;
  a.cols = cols;
  a.w = cursor;
  cursor += static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  a.b = cursor;
  cursor += static_cast<std::size_t>(rows);
  return a;
}

// out = W in + b
void affine(const std::vector<double>& p, const ParamLayout::Affine& a, std::span<const double> in,
            std::span<double> out) {
  for (int r = 0; r < a.rows; ++r) {
    const double* row = p.data() + a.w + static_cast<std::size_t>(r) * static_cast<std::size_t>(a.cols);
    double acc = p[a.b + static_cast<std::size_t>(r)];
    for (int c = 0; c < a.cols; ++c) acc += row[c] * in[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = acc;
  }
}

// out += M in, M is rows x cols at offset
void matvec_add(const std::vector<double>& p, std::size_t offset, int rows, int cols, std::span<const double> in,
                std::span<double> out) {
  for (int r = 0; r < rows; ++r) {
    const double* row = p.data() + offset + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += row[c] * in[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] += acc;
  }
}

// gM += g_out (x) in; g_in += M^T g_out (when g_in is non-empty)
void matvec_backward(const std::vector<double>& p, std::size_t offset, int rows, int cols,
                     std::span<const double> in, std::span<const double> g_out, std::span<double> grad,
                     std::span<double> g_in) {
  for (int r = 0; r < rows; ++r) {
    const double g = g_out[static_cast<std::size_t>(r)];
    if (g == 0.0) continue;
    const std::size_t base = offset + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
    for (int c = 0; c < cols; ++c) {
      grad[base + static_cast<std::size_t>(c)] += g * in[static_cast<std::size_t>(c)];
      if (!g_in.empty()) g_in[static_cast<std::size_t>(c)] += g * p[base + static_cast<std::size_t>(c)];
    }
  }
}

void affine_backward(const std::vector<double>& p, const ParamLayout::Affine& a, std::span<const double> in,
                     std::span<const double> g_out, std::span<double> grad, std::span<double> g_in) {
  matvec_backward(p, a.w, a.rows, a.cols, in, g_out, grad, g_in);
  for (int r = 0; r < a.rows; ++r) grad[a.b + static_cast<std::size_t>(r)] += g_out[static_cast<std::size_t>(r)];
}

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }
double silu(double a) { return a * sigmoid(a); }
double silu_grad(double a) {
  const double s = sigmoid(a);
  return s * (1.0 + a * (1.0 - s));
}

std::vector<double> apply_silu(const std::vector<double>& a) {
  std::vector<double> out(a.size());
  std::transform(a.begin(), a.end(), out.begin(), silu);
  return out;
}

void check_condition(const Condition& c, const NetShape& shape) {
  if (c.industry.has_value() != c.board.has_value()) {
    throw ParameterError("condition needs both industry and board, or neither");
  }
  if (c.industry && (*c.industry < 0 || *c.industry >= shape.num_industries)) {
    throw ParameterError("industry id " + std::to_string(*c.industry) + " outside [0," +
                         std::to_string(shape.num_industries) + ")");
  }
  if (c.board && (*c.board < 0 || *c.board >= kNumBoards)) {
    throw ParameterError("board id " + std::to_string(*c.board) + " outside [0," + std::to_string(kNumBoards) + ")");
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Shared by both dsm_loss overloads and dsm_objective.
template <typename Predict>
double weighted_residual_loss(std::span<const TrainingExample> batch, std::span<const DsmDraw> draws,
                              const schedules::NoiseSchedule& schedule, LossWeighting weighting, Predict&& predict) {
  if (batch.empty()) throw ParameterError("dsm loss: empty batch");
  if (batch.size() != draws.size()) throw ParameterError("dsm loss: batch and draws differ in size");
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const DsmDraw& d = draws[i];
    const std::vector<double> x_t = schedules::forward_perturb(batch[i].x0, d.t, d.eps, schedule);
    const Condition c = d.dropped ? Condition::null() : batch[i].condition;
    const double w = dsm_weight(d.t, schedule, weighting);
    total += predict(x_t, d, c, w, batch.size());
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace

void NetShape::validate() const {
  if (series_len < 1 || width < 1 || blocks < 0 || time_dim < 2 || time_dim % 2 != 0 || num_industries < 1 ||
      embed_dim < 1 || cond_hidden < 1) {
    throw ParameterError("invalid network shape (time_dim must be even and >= 2; sizes positive)");
  }
}

ParamLayout::ParamLayout(const NetShape& shape) {
  shape.validate();
  std::size_t cursor = 0;
  embedding = cursor;
  cursor += static_cast<std::size_t>(shape.num_industries) * static_cast<std::size_t>(shape.embed_dim);
  enc1 = make_affine(cursor, shape.cond_hidden, shape.embed_dim);
  enc2 = make_affine(cursor, shape.cond_hidden, shape.cond_hidden);
  enc3 = make_affine(cursor, shape.embed_dim, shape.cond_hidden);
  input = make_affine(cursor, shape.width, shape.series_len);
  blocks.resize(static_cast<std::size_t>(shape.blocks));
  for (auto& blk : blocks) {
    blk.hidden = make_affine(cursor, shape.width, shape.width);
    blk.time_proj = cursor;
    cursor += static_cast<std::size_t>(shape.width) * static_cast<std::size_t>(shape.time_dim);
    blk.cond_proj = cursor;
    cursor += static_cast<std::size_t>(shape.width) * static_cast<std::size_t>(shape.cond_dim());
    blk.out = make_affine(cursor, shape.width, shape.width);
  }
  output = make_affine(cursor, shape.series_len, shape.width);
  total = cursor;
}

ScoreNet::ScoreNet(const NetShape& shape) : shape_(shape), layout_(shape), params_(layout_.total, 0.0) {}

ScoreNet::ScoreNet(const NetShape& shape, std::vector<double> params)
    : shape_(shape), layout_(shape), params_(std::move(params)) {
  if (params_.size() != layout_.total) {
    throw ParameterError("parameter count " + std::to_string(params_.size()) + " does not match shape (" +
                         std::to_string(layout_.total) + ")");
  }
}

ConditionVector ScoreNet::encode_condition(const Condition& c) const {
  check_condition(c, shape_);
  ConditionVector out{c, std::vector<double>(static_cast<std::size_t>(shape_.cond_dim()), 0.0)};
  if (c.is_null()) return out;

  const auto e = static_cast<std::size_t>(shape_.embed_dim);
  const auto row = params_.begin() + static_cast<std::ptrdiff_t>(layout_.embedding + static_cast<std::size_t>(*c.industry) * e);
  const std::vector<double> emb(row, row + static_cast<std::ptrdiff_t>(e));
  std::vector<double> a1(static_cast<std::size_t>(shape_.cond_hidden));
  std::vector<double> a2(a1.size());
  affine(params_, layout_.enc1, emb, a1);
  affine(params_, layout_.enc2, apply_silu(a1), a2);
  affine(params_, layout_.enc3, apply_silu(a2), std::span<double>(out.encoded).first(e));
  out.encoded[e + static_cast<std::size_t>(*c.board)] = 1.0;
  return out;
}

ScoreNet::Trace ScoreNet::forward(std::span<const double> x, int t, const Condition& c) const {
  if (x.size() != static_cast<std::size_t>(shape_.series_len)) {
    throw ParameterError("predict_eps: input length " + std::to_string(x.size()) + " != model length " +
                         std::to_string(shape_.series_len));
  }
  if (t < 0) throw ParameterError("predict_eps: negative step");
  check_condition(c, shape_);

  Trace tr;
  tr.x.assign(x.begin(), x.end());
  tr.temb = time_embedding(t, shape_.time_dim);
  tr.conditioned = !c.is_null();
  tr.cond.assign(static_cast<std::size_t>(shape_.cond_dim()), 0.0);
  if (tr.conditioned) {
    tr.industry = *c.industry;
    const auto e = static_cast<std::size_t>(shape_.embed_dim);
    const auto row = params_.begin() + static_cast<std::ptrdiff_t>(layout_.embedding + static_cast<std::size_t>(tr.industry) * e);
    const std::vector<double> emb(row, row + static_cast<std::ptrdiff_t>(e));
    tr.enc_a1.resize(static_cast<std::size_t>(shape_.cond_hidden));
    tr.enc_a2.resize(tr.enc_a1.size());
    affine(params_, layout_.enc1, emb, tr.enc_a1);
    affine(params_, layout_.enc2, apply_silu(tr.enc_a1), tr.enc_a2);
    affine(params_, layout_.enc3, apply_silu(tr.enc_a2), std::span<double>(tr.cond).first(e));
    tr.cond[e + static_cast<std::size_t>(*c.board)] = 1.0;
  }

  const auto width = static_cast<std::size_t>(shape_.width);
  std::vector<double> h(width);
  affine(params_, layout_.input, x, h);
  for (const auto& blk : layout_.blocks) {
    tr.states.push_back(h);
    std::vector<double> a(width);
    affine(params_, blk.hidden, h, a);
    matvec_add(params_, blk.time_proj, shape_.width, shape_.time_dim, tr.temb, a);
    matvec_add(params_, blk.cond_proj, shape_.width, shape_.cond_dim(), tr.cond, a);
    std::vector<double> r(width);
    std::transform(a.begin(), a.end(), r.begin(), [](double v) { return v > 0.0 ? v : 0.0; });
    std::vector<double> delta(width);
    affine(params_, blk.out, r, delta);
    for (std::size_t i = 0; i < width; ++i) h[i] += delta[i];
    tr.pre.push_back(std::move(a));
  }
  tr.states.push_back(h);
  tr.output.resize(static_cast<std::size_t>(shape_.series_len));
  affine(params_, layout_.output, h, tr.output);
  if (!all_finite(tr.output)) {
    throw NumericError("predict_eps: non-finite activation at step " + std::to_string(t));
  }
  return tr;
}

void ScoreNet::backward(const Trace& tr, std::span<const double> upstream, std::span<double> grad) const {
  if (grad.size() != params_.size() || upstream.size() != tr.output.size()) {
    throw ParameterError("backward: shape mismatch");
  }
  const auto width = static_cast<std::size_t>(shape_.width);
  std::vector<double> g_h(width, 0.0);
  affine_backward(params_, layout_.output, tr.states.back(), upstream, grad, g_h);

  std::vector<double> g_cond(static_cast<std::size_t>(shape_.cond_dim()), 0.0);
  for (std::size_t b = layout_.blocks.size(); b-- > 0;) {
    const auto& blk = layout_.blocks[b];
    const std::vector<double>& a = tr.pre[b];
    std::vector<double> r(width);
    std::transform(a.begin(), a.end(), r.begin(), [](double v) { return v > 0.0 ? v : 0.0; });
    std::vector<double> g_r(width, 0.0);
    affine_backward(params_, blk.out, r, g_h, grad, g_r);
    std::vector<double> g_a(width);
    for (std::size_t i = 0; i < width; ++i) g_a[i] = a[i] > 0.0 ? g_r[i] : 0.0;
    // Residual path keeps g_h; the hidden affine adds its input gradient on top.
    affine_backward(params_, blk.hidden, tr.states[b], g_a, grad, g_h);
    matvec_backward(params_, blk.time_proj, shape_.width, shape_.time_dim, tr.temb, g_a, grad, {});
    matvec_backward(params_, blk.cond_proj, shape_.width, shape_.cond_dim(), tr.cond, g_a, grad,
                    tr.conditioned ? std::span<double>(g_cond) : std::span<double>());
  }
  affine_backward(params_, layout_.input, tr.x, g_h, grad, {});

  if (!tr.conditioned) return;
  const auto e = static_cast<std::size_t>(shape_.embed_dim);
  const auto hidden = static_cast<std::size_t>(shape_.cond_hidden);
  const std::vector<double> s2 = apply_silu(tr.enc_a2);
  std::vector<double> g_s2(hidden, 0.0);
  affine_backward(params_, layout_.enc3, s2, std::span<const double>(g_cond).first(e), grad, g_s2);
  std::vector<double> g_a2(hidden);
  for (std::size_t i = 0; i < hidden; ++i) g_a2[i] = g_s2[i] * silu_grad(tr.enc_a2[i]);
  const std::vector<double> s1 = apply_silu(tr.enc_a1);
  std::vector<double> g_s1(hidden, 0.0);
  affine_backward(params_, layout_.enc2, s1, g_a2, grad, g_s1);
  std::vector<double> g_a1(hidden);
  for (std::size_t i = 0; i < hidden; ++i) g_a1[i] = g_s1[i] * silu_grad(tr.enc_a1[i]);
  const std::size_t row = layout_.embedding + static_cast<std::size_t>(tr.industry) * e;
  const std::vector<double> emb(params_.begin() + static_cast<std::ptrdiff_t>(row),
                                params_.begin() + static_cast<std::ptrdiff_t>(row + e));
  std::vector<double> g_emb(e, 0.0);
  affine_backward(params_, layout_.enc1, emb, g_a1, grad, g_emb);
  for (std::size_t i = 0; i < e; ++i) grad[row + i] += g_emb[i];
}

std::vector<double> ScoreNet::predict_eps(std::span<const double> x, int t, const Condition& c) const {
  return forward(x, t, c).output;
}

std::vector<double> ScoreNet::predict_eps(std::span<const double> x, int t, const ConditionVector& c) const {
  if (c.encoded.size() != static_cast<std::size_t>(shape_.cond_dim())) {
    throw ParameterError("condition vector length does not match network");
  }
  return forward(x, t, c.labels).output;
}

ScoreNet init_score_net(const NetShape& shape, std::uint64_t seed) {
  ScoreNet net(shape);
  Rng rng(seed);
  auto& p = net.mutable_params();
  const ParamLayout& lay = net.layout();
  const auto fill = [&](std::size_t offset, std::size_t count, double scale) {
    for (std::size_t i = 0; i < count; ++i) p[offset + i] = scale * (2.0 * rng.uniform() - 1.0);
  };
  const auto fan_in = [](int cols) { return std::sqrt(3.0 / static_cast<double>(cols)); };
  const auto fill_affine = [&](const ParamLayout::Affine& a, double gain) {
    fill(a.w, static_cast<std::size_t>(a.rows) * static_cast<std::size_t>(a.cols), gain * fan_in(a.cols));
  };

  const std::size_t emb_count = static_cast<std::size_t>(shape.num_industries) * static_cast<std::size_t>(shape.embed_dim);
  for (std::size_t i = 0; i < emb_count; ++i) p[lay.embedding + i] = rng.normal();
  fill_affine(lay.enc1, 1.0);
  fill_affine(lay.enc2, 1.0);
  fill_affine(lay.enc3, 1.0);
  fill_affine(lay.input, 1.0);
  for (const auto& blk : lay.blocks) {
    fill_affine(blk.hidden, std::sqrt(2.0));
    fill(blk.time_proj, static_cast<std::size_t>(shape.width) * static_cast<std::size_t>(shape.time_dim),
         fan_in(shape.time_dim));
    fill(blk.cond_proj, static_cast<std::size_t>(shape.width) * static_cast<std::size_t>(shape.cond_dim()),
         fan_in(shape.cond_dim()));
    fill_affine(blk.out, 0.5 / std::sqrt(static_cast<double>(std::max(1, shape.blocks))));
  }
  fill_affine(lay.output, 0.1);
  return net;
}

std::vector<double> time_embedding(int t, int dim) {
  if (dim <= 0 || dim % 2 != 0) throw ParameterError("time embedding width must be positive and even");
  if (t < 0) throw ParameterError("time embedding step must be >= 0");
  const int half = dim / 2;
  std::vector<double> out(static_cast<std::size_t>(dim));
  for (int i = 0; i < half; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(i) / half);
    const double phase = static_cast<double>(t) * freq;
    out[static_cast<std::size_t>(2 * i)] = std::sin(phase);
    out[static_cast<std::size_t>(2 * i + 1)] = std::cos(phase);
  }
  return out;
}

LossWeighting parse_weighting(const std::string& name) {
  if (name == "elbo") return LossWeighting::Elbo;
  if (name == "unit") return LossWeighting::Unit;
  throw ParameterError("unknown loss weighting '" + name + "' (expected elbo|unit)");
}

std::string to_string(LossWeighting w) { return w == LossWeighting::Elbo ? "elbo" : "unit"; }

void TrainConfig::validate() const {
  if (epochs < 0) throw ParameterError("epochs must be >= 0");
  if (batch_size < 1) throw ParameterError("batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be > 0");
  if (!(p_uncond >= 0.0 && p_uncond < 1.0)) throw ParameterError("p_uncond must lie in [0,1)");
}

std::vector<DsmDraw> draw_dsm_batch(std::span<const TrainingExample> batch, const schedules::NoiseSchedule& schedule,
                                    double p_uncond, Rng& rng) {
  std::vector<DsmDraw> draws;
  draws.reserve(batch.size());
  for (const auto& ex : batch) {
    DsmDraw d;
    d.t = static_cast<int>(rng.uniform_int(1, schedule.steps()));
    d.eps = rng.normal_vector(ex.x0.size());
    d.dropped = rng.uniform() < p_uncond;
    draws.push_back(std::move(d));
  }
  return draws;
}

double dsm_weight(int t, const schedules::NoiseSchedule& schedule, LossWeighting weighting) {
  return weighting == LossWeighting::Elbo ? 1.0 - schedule.alpha_bar(t) : 1.0;
}

double dsm_objective(const EpsPredictor& model, std::span<const TrainingExample> batch,
                     std::span<const DsmDraw> draws, const schedules::NoiseSchedule& schedule,
                     LossWeighting weighting) {
  return weighted_residual_loss(batch, draws, schedule, weighting,
                                [&](const std::vector<double>& x_t, const DsmDraw& d, const Condition& c, double w,
                                    std::size_t) {
                                  const std::vector<double> eps_hat = model.predict_eps(x_t, d.t, c);
                                  double sq = 0.0;
                                  for (std::size_t j = 0; j < eps_hat.size(); ++j) {
                                    const double r = eps_hat[j] - d.eps[j];
                                    sq += r * r;
                                  }
                                  return w * sq;
                                });
}

LossAndGrad dsm_loss(const ScoreNet& net, std::span<const TrainingExample> batch, std::span<const DsmDraw> draws,
                     const schedules::NoiseSchedule& schedule, LossWeighting weighting) {
  LossAndGrad out;
  out.grad.assign(net.num_params(), 0.0);
  out.loss = weighted_residual_loss(
      batch, draws, schedule, weighting,
      [&](const std::vector<double>& x_t, const DsmDraw& d, const Condition& c, double w, std::size_t n) {
        const ScoreNet::Trace tr = net.forward(x_t, d.t, c);
        std::vector<double> upstream(tr.output.size());
        double sq = 0.0;
        for (std::size_t j = 0; j < upstream.size(); ++j) {
          const double r = tr.output[j] - d.eps[j];
          sq += r * r;
          upstream[j] = 2.0 * w * r / static_cast<double>(n);
        }
        net.backward(tr, upstream, out.grad);
        return w * sq;
      });
  return out;
}

LossAndGrad dsm_loss(const ScoreNet& net, std::span<const TrainingExample> batch,
                     const schedules::NoiseSchedule& schedule, double p_uncond, LossWeighting weighting, Rng& rng) {
  const std::vector<DsmDraw> draws = draw_dsm_batch(batch, schedule, p_uncond, rng);
  return dsm_loss(net, batch, draws, schedule, weighting);
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

ScoreNet train(const ScoreNet& initial, std::span<const TrainingExample> data, const schedules::NoiseSchedule& schedule,
               const TrainConfig& config, const EpochLogger& log) {
  config.validate();
  if (data.empty()) throw DataError("training set is empty");
  for (const auto& ex : data) {
    if (ex.x0.size() != static_cast<std::size_t>(initial.shape().series_len)) {
      throw DataError("training window length does not match the network input length");
    }
  }

  ScoreNet net = initial;
  Adam adam(net.num_params(), config.learning_rate);
  Rng rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      std::vector<TrainingExample> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(data[order[i]]);
      const LossAndGrad lg = dsm_loss(net, batch, schedule, config.p_uncond, config.weighting, rng);
      if (!std::isfinite(lg.loss) || !all_finite(lg.grad)) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch << ", batch starting at " << start << " (loss " << lg.loss
            << ")";
        throw NumericError(msg.str());
      }
      adam.step(net.mutable_params(), lg.grad);
      epoch_loss += lg.loss * static_cast<double>(stop - start);
    }
    epoch_loss /= static_cast<double>(order.size());
    if (log) log(epoch, epoch_loss);
  }
  return net;
}

std::vector<double> score_from_eps(std::span<const double> eps_hat, int t, const schedules::NoiseSchedule& schedule) {
  const double scale = -1.0 / std::sqrt(1.0 - schedule.alpha_bar(t));
  std::vector<double> out(eps_hat.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * eps_hat[i];
  return out;
}

nlohmann::json checkpoint_json(const ScoreNet& net) {
  const NetShape& s = net.shape();
  return nlohmann::json{
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"shape",
       {{"series_len", s.series_len},
        {"width", s.width},
        {"blocks", s.blocks},
        {"time_dim", s.time_dim},
        {"num_industries", s.num_industries},
        {"embed_dim", s.embed_dim},
        {"cond_hidden", s.cond_hidden}}},
      {"num_params", net.num_params()},
      {"params", net.params()},
  };
}

ScoreNet net_from_checkpoint(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw ParameterError("checkpoint: unexpected format tag");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw ParameterError("checkpoint: unsupported version " + std::to_string(j.at("version").get<int>()));
    }
    const auto& sj = j.at("shape");
    NetShape s;
    s.series_len = sj.at("series_len").get<int>();
    s.width = sj.at("width").get<int>();
    s.blocks = sj.at("blocks").get<int>();
    s.time_dim = sj.at("time_dim").get<int>();
    s.num_industries = sj.at("num_industries").get<int>();
    s.embed_dim = sj.at("embed_dim").get<int>();
    s.cond_hidden = sj.at("cond_hidden").get<int>();
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != j.at("num_params").get<std::size_t>()) {
      throw ParameterError("checkpoint: num_params does not match the stored array");
    }
    return ScoreNet(s, std::move(params));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ScoreNet& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write checkpoint " + path);
  out << checkpoint_json(net).dump() << '\n';
}

ScoreNet load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("checkpoint " + path + ": " + e.what());
  }
  return net_from_checkpoint(j);
}

}  // namespace stockdiff::scorenet
