#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stockdiff/random.hpp"
#include "stockdiff/regularizers.hpp"
#include "stockdiff/schedules.hpp"
#include "stockdiff/scorenet.hpp"

namespace stockdiff::samplers {

using scorenet::Condition;
using scorenet::EpsPredictor;
using schedules::NoiseSchedule;

// omega * eps(x,t,c) + (1 - omega) * eps(x,t,null). omega 0 and 1 return the
// single prediction untouched.
std::vector<double> guided_eps(const EpsPredictor& model, std::span<const double> x, int t, const Condition& c,
                               double omega);

// Posterior mean of x_{t-1} given x_t and the predicted noise.
std::vector<double> ddpm_mean(std::span<const double> x_t, int t, std::span<const double> eps_hat,
                              const NoiseSchedule& schedule);

// Mean plus sqrt(posterior_var(t)) z; no noise is drawn at t = 1.
std::vector<double> ddpm_step(std::span<const double> x_t, int t, std::span<const double> eps_hat,
                              const NoiseSchedule& schedule, Rng& rng);

enum class SubsequenceStrategy { Uniform };

// Increasing step indices ending at T; uniform stride floor(T / T') anchored at T.
std::vector<int> make_subsequence(int steps, int sub_steps, SubsequenceStrategy strategy = SubsequenceStrategy::Uniform);

// (x - sqrt(1 - abar_t) eps_hat) / sqrt(abar_t)
std::vector<double> predict_x0(std::span<const double> x_t, int t, std::span<const double> eps_hat,
                               const NoiseSchedule& schedule);

// Deterministic part of the jump t -> t_prev (t_prev = 0 means the data level).
std::vector<double> ddim_mean(std::span<const double> x_t, int t, int t_prev, std::span<const double> eps_hat,
                              const NoiseSchedule& schedule, double sigma);

// ddim_mean + sigma z. sigma must satisfy sigma^2 <= 1 - abar(t_prev).
std::vector<double> ddim_step(std::span<const double> x_t, int t, int t_prev, std::span<const double> eps_hat,
                              const NoiseSchedule& schedule, double sigma, Rng& rng);

// eta * sqrt((1 - abar_prev)/(1 - abar_t) * (1 - abar_t/abar_prev)); equals
// eta * sqrt(posterior_var(t)) on adjacent steps.
double ddim_sigma(int t, int t_prev, const NoiseSchedule& schedule, double eta);

using ScoreFn = std::function<std::vector<double>(std::span<const double> x, double sigma)>;

// Annealed Langevin dynamics over levels N..1 with M inner steps per level,
// starting from N(0, sigma_max^2 I).
std::vector<double> langevin_sample(const ScoreFn& score, const schedules::SigmaLadder& ladder,
                                    std::span<const double> step_sizes, int inner_steps, std::size_t dim, Rng& rng);

// Starts a transfer run from a real window: forward_perturb at step t.
std::vector<double> perturb_to_level(std::span<const double> x0, int t, const NoiseSchedule& schedule, Rng& rng);

enum class SamplerMode { Ddpm, Ddim };

SamplerMode parse_sampler_mode(const std::string& name);
std::string to_string(SamplerMode m);

struct SamplerConfig {
  SamplerMode mode = SamplerMode::Ddim;
  int sub_steps = 50;  // T'
  double eta = 0.0;    // 0 deterministic, 1 matches DDPM variance
  double omega = 7.5;
  int runs = 1;        // m
  double lambda_antv = 0.03;
  double lambda_bp = 0.03;
  regularizers::AntvConfig antv;
  regularizers::BandSpec band;
  // Transfer mode: start from the perturbed source instead of pure noise and
  // pull towards its band-limited spectrum.
  std::optional<std::vector<double>> source;
  int transfer_level = 200;  // step index the source is perturbed to
  std::uint64_t seed = 0;
  bool share_seed_across_runs = false;

  void validate(const NoiseSchedule& schedule, std::size_t series_len) const;
};

struct SampleResult {
  std::vector<double> mean;
  std::vector<std::vector<double>> runs;
};

// Steps actually visited in a run, from the highest down to the lowest.
std::vector<int> sampling_path(const NoiseSchedule& schedule, const SamplerConfig& cfg);

SampleResult sample(const EpsPredictor& model, const Condition& condition, const NoiseSchedule& schedule,
                    const SamplerConfig& cfg, std::size_t series_len);

}  // namespace stockdiff::samplers
