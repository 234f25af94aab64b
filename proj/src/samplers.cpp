#include "stockdiff/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stockdiff/error.hpp"

namespace stockdiff::samplers {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* where) {
  if (a != b) throw ParameterError(std::string(where) + ": length mismatch");
}

void require_finite(std::span<const double> x, int step) {
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericError("sampler state became non-finite at step " + std::to_string(step));
  }
}

}  // namespace

std::vector<double> guided_eps(const EpsPredictor& model, std::span<const double> x, int t, const Condition& c,
                               double omega) {
  if (c.is_null() && omega != 0.0) {
    throw ParameterError("guidance with a null condition requires omega = 0");
  }
  if (omega == 0.0) return model.predict_eps(x, t, Condition::null());
  if (omega == 1.0) return model.predict_eps(x, t, c);
  const std::vector<double> cond = model.predict_eps(x, t, c);
  const std::vector<double> uncond = model.predict_eps(x, t, Condition::null());
  std::vector<double> out(cond.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = omega * cond[i] + (1.0 - omega) * uncond[i];
  return out;
}

std::vector<double> ddpm_mean(std::span<const double> x_t, int t, std::span<const double> eps_hat,
                              const NoiseSchedule& schedule) {
  require_same_length(x_t.size(), eps_hat.size(), "ddpm_step");
  const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(t));
  const double eps_coef = schedule.beta(t) / std::sqrt(1.0 - schedule.alpha_bar(t));
  std::vector<double> out(x_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = inv_sqrt_alpha * (x_t[i] - eps_coef * eps_hat[i]);
  return out;
}

std::vector<double> ddpm_step(std::span<const double> x_t, int t, std::span<const double> eps_hat,
                              const NoiseSchedule& schedule, Rng& rng) {
  std::vector<double> out = ddpm_mean(x_t, t, eps_hat, schedule);
  if (t > 1) {
    const double sd = std::sqrt(schedule.posterior_var(t));
    for (auto& v : out) v += sd * rng.normal();
  }
  return out;
}

std::vector<int> make_subsequence(int steps, int sub_steps, SubsequenceStrategy strategy) {
  if (sub_steps < 1 || sub_steps > steps) {
    throw ParameterError("subsequence length " + std::to_string(sub_steps) + " outside [1," + std::to_string(steps) +
                         "]");
  }
  std::vector<int> tau(static_cast<std::size_t>(sub_steps));
  switch (strategy) {
    case SubsequenceStrategy::Uniform: {
      const int stride = steps / sub_steps;
      for (int i = 0; i < sub_steps; ++i) {
        tau[static_cast<std::size_t>(i)] = steps - (sub_steps - 1 - i) * stride;
      }
      break;
    }
  }
  return tau;
}

std::vector<double> predict_x0(std::span<const double> x_t, int t, std::span<const double> eps_hat,
                               const NoiseSchedule& schedule) {
  require_same_length(x_t.size(), eps_hat.size(), "predict_x0");
  const double abar = schedule.alpha_bar(t);
  const double noise = std::sqrt(1.0 - abar);
  const double signal = std::sqrt(abar);
  std::vector<double> out(x_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x_t[i] - noise * eps_hat[i]) / signal;
  return out;
}

std::vector<double> ddim_mean(std::span<const double> x_t, int t, int t_prev, std::span<const double> eps_hat,
                              const NoiseSchedule& schedule, double sigma) {
  if (t_prev < 0 || t_prev >= t) throw ParameterError("ddim_step: need 0 <= t_prev < t");
  const double abar_prev = schedule.alpha_bar(t_prev);
  const double budget = 1.0 - abar_prev - sigma * sigma;
  if (budget < -1e-15 || sigma < 0.0) {
    throw ParameterError("ddim_step: sigma^2 exceeds the direction budget 1 - abar(t_prev)");
  }
  const std::vector<double> x0 = predict_x0(x_t, t, eps_hat, schedule);
  const double signal = std::sqrt(abar_prev);
  const double direction = std::sqrt(std::max(0.0, budget));
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = signal * x0[i] + direction * eps_hat[i];
  return out;
}

std::vector<double> ddim_step(std::span<const double> x_t, int t, int t_prev, std::span<const double> eps_hat,
                              const NoiseSchedule& schedule, double sigma, Rng& rng) {
  std::vector<double> out = ddim_mean(x_t, t, t_prev, eps_hat, schedule, sigma);
  if (sigma > 0.0) {
    for (auto& v : out) v += sigma * rng.normal();
  }
  return out;
}

double ddim_sigma(int t, int t_prev, const NoiseSchedule& schedule, double eta) {
  if (eta == 0.0 || t_prev == 0) return 0.0;
  const double abar_t = schedule.alpha_bar(t);
  const double abar_prev = schedule.alpha_bar(t_prev);
  const double var = (1.0 - abar_prev) / (1.0 - abar_t) * (1.0 - abar_t / abar_prev);
  return eta * std::sqrt(std::max(0.0, var));
}

std::vector<double> langevin_sample(const ScoreFn& score, const schedules::SigmaLadder& ladder,
                                    std::span<const double> step_sizes, int inner_steps, std::size_t dim, Rng& rng) {
  if (inner_steps < 1) throw ParameterError("langevin: inner step count must be >= 1");
  if (step_sizes.size() != ladder.sigma.size()) {
    throw ParameterError("langevin: need one step size per noise level");
  }
  for (double e : step_sizes) {
    if (!(e > 0.0)) throw ParameterError("langevin: step sizes must be positive");
  }
  const double sigma_max = ladder.sigma.back();
  std::vector<double> x(dim);
  for (auto& v : x) v = sigma_max * rng.normal();

  for (std::size_t level = ladder.sigma.size(); level-- > 0;) {
    const double step = step_sizes[level];
    const double noise = std::sqrt(2.0 * step);
    for (int m = 0; m < inner_steps; ++m) {
      const std::vector<double> s = score(x, ladder.sigma[level]);
      if (s.size() != dim) throw ParameterError("langevin: score output has the wrong length");
      for (std::size_t i = 0; i < dim; ++i) {
        if (!std::isfinite(s[i])) {
          throw NumericError("langevin: non-finite score at level " + std::to_string(level + 1));
        }
        x[i] += step * s[i] + noise * rng.normal();
      }
    }
  }
  return x;
}

std::vector<double> perturb_to_level(std::span<const double> x0, int t, const NoiseSchedule& schedule, Rng& rng) {
  schedule.check_step(t);
  const std::vector<double> eps = rng.normal_vector(x0.size());
  return schedules::forward_perturb(x0, t, eps, schedule);
}

SamplerMode parse_sampler_mode(const std::string& name) {
  if (name == "ddim") return SamplerMode::Ddim;
  if (name == "ddpm") return SamplerMode::Ddpm;
  throw ParameterError("unknown sampler mode '" + name + "' (expected ddim|ddpm)");
}

std::string to_string(SamplerMode m) { return m == SamplerMode::Ddim ? "ddim" : "ddpm"; }

void SamplerConfig::validate(const NoiseSchedule& schedule, std::size_t series_len) const {
  if (mode == SamplerMode::Ddim && (sub_steps < 1 || sub_steps > schedule.steps())) {
    throw ParameterError("sampler: T' must lie in [1, T]");
  }
  if (runs < 1) throw ParameterError("sampler: m must be >= 1");
  if (lambda_antv < 0.0 || lambda_bp < 0.0) throw ParameterError("sampler: step weights must be >= 0");
  if (eta < 0.0) throw ParameterError("sampler: eta must be >= 0");
  if (lambda_antv > 0.0) {
    regularizers::AntvConfig check = antv;
    check.rate = lambda_antv;
    check.validate();
  }
  if (source) {
    if (source->size() != series_len) throw ParameterError("sampler: source window length mismatch");
    band.validate(series_len);
    schedule.check_step(transfer_level);
  }
}

std::vector<int> sampling_path(const NoiseSchedule& schedule, const SamplerConfig& cfg) {
  std::vector<int> path;
  if (cfg.mode == SamplerMode::Ddim) {
    path = make_subsequence(schedule.steps(), cfg.sub_steps);
  } else {
    path.resize(static_cast<std::size_t>(schedule.steps()));
    for (int t = 1; t <= schedule.steps(); ++t) path[static_cast<std::size_t>(t - 1)] = t;
  }
  if (cfg.source) {
    std::erase_if(path, [&](int t) { return t > cfg.transfer_level; });
    if (path.empty()) throw ParameterError("sampler: transfer level lies below the first sampling step");
  }
  std::reverse(path.begin(), path.end());
  return path;
}

SampleResult sample(const EpsPredictor& model, const Condition& condition, const NoiseSchedule& schedule,
                    const SamplerConfig& cfg, std::size_t series_len) {
  cfg.validate(schedule, series_len);
  const std::vector<int> path = sampling_path(schedule, cfg);
  regularizers::AntvConfig antv = cfg.antv;
  antv.rate = cfg.lambda_antv;
  // Band-pass pull on the bin-averaged loss so the step contracts for any n.
  const double bp_rate = cfg.lambda_bp / static_cast<double>(series_len);

  SampleResult result;
  result.runs.reserve(static_cast<std::size_t>(cfg.runs));
  for (int run = 0; run < cfg.runs; ++run) {
    Rng rng(cfg.share_seed_across_runs ? cfg.seed : derive_seed(cfg.seed, static_cast<std::uint64_t>(run)));
    std::vector<double> x = cfg.source ? perturb_to_level(*cfg.source, path.front(), schedule, rng)
                                       : rng.normal_vector(series_len);
    for (std::size_t i = 0; i < path.size(); ++i) {
      const int t = path[i];
      const std::vector<double> eps_hat = guided_eps(model, x, t, condition, cfg.omega);
      if (cfg.mode == SamplerMode::Ddim) {
        const int t_prev = i + 1 < path.size() ? path[i + 1] : 0;
        x = ddim_step(x, t, t_prev, eps_hat, schedule, ddim_sigma(t, t_prev, schedule, cfg.eta), rng);
      } else {
        x = ddpm_step(x, t, eps_hat, schedule, rng);
      }
      if (cfg.lambda_antv > 0.0) x = regularizers::antv_step(x, antv);
      if (cfg.source && cfg.lambda_bp > 0.0) x = regularizers::bp_grad_step(x, *cfg.source, cfg.band, bp_rate);
      require_finite(x, t);
    }
    result.runs.push_back(std::move(x));
  }

  result.mean.assign(series_len, 0.0);
  for (const auto& r : result.runs) {
    for (std::size_t i = 0; i < series_len; ++i) result.mean[i] += r[i];
  }
  for (auto& v : result.mean) v /= static_cast<double>(result.runs.size());
  return result;
}

}  // namespace stockdiff::samplers
