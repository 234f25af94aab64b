#include "stockdiff/schedules.hpp"

#include <cmath>
#include <string>

#include "stockdiff/error.hpp"

namespace stockdiff::schedules {

NoiseSchedule::NoiseSchedule(std::vector<double> beta) : beta_(std::move(beta)) {
  if (beta_.empty()) {
    throw ParameterError("noise schedule needs at least one step");
  }
  double prev = 0.0;
  for (std::size_t i = 0; i < beta_.size(); ++i) {
    const double b = beta_[i];
    if (!(b > 0.0 && b < 1.0)) {
      throw ParameterError("beta[" + std::to_string(i + 1) + "] outside (0,1)");
    }
    if (b < prev) {
      throw ParameterError("beta must be nondecreasing (step " + std::to_string(i + 1) + ")");
    }
    prev = b;
  }

  const std::size_t n = beta_.size();
  alpha_.resize(n);
  alpha_bar_.resize(n);
  posterior_var_.resize(n);
  double abar = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    alpha_[i] = 1.0 - beta_[i];
    const double abar_prev = abar;
    abar *= alpha_[i];
    alpha_bar_[i] = abar;
    posterior_var_[i] = (1.0 - abar_prev) * beta_[i] / (1.0 - abar);
  }
}

void NoiseSchedule::check_step(int t) const {
  if (t < 1 || t > steps()) {
    throw ParameterError("step " + std::to_string(t) + " outside [1," + std::to_string(steps()) + "]");
  }
}

std::size_t NoiseSchedule::index(int t) const {
  check_step(t);
  return static_cast<std::size_t>(t - 1);
}

NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1) {
    throw ParameterError("schedule step count must be >= 1");
  }
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw ParameterError("beta endpoints must satisfy 0 < start <= end < 1");
  }
  std::vector<double> beta(static_cast<std::size_t>(steps));
  if (steps == 1) {
    beta[0] = beta_start;
  } else {
    const double span = beta_end - beta_start;
    for (int i = 0; i < steps; ++i) {
      beta[static_cast<std::size_t>(i)] = beta_start + span * i / (steps - 1);
    }
    beta.back() = beta_end;
  }
  return NoiseSchedule(std::move(beta));
}

SigmaLadder make_sigma_ladder(double sigma_min, double sigma_max, int levels) {
  if (!(sigma_min > 0.0 && sigma_min < sigma_max)) {
    throw ParameterError("sigma ladder needs 0 < sigma_min < sigma_max");
  }
  if (levels < 2) {
    throw ParameterError("sigma ladder needs at least two levels");
  }
  SigmaLadder ladder;
  ladder.sigma.resize(static_cast<std::size_t>(levels));
  const double ratio = sigma_max / sigma_min;
  for (int i = 0; i < levels; ++i) {
    ladder.sigma[static_cast<std::size_t>(i)] =
        sigma_min * std::pow(ratio, static_cast<double>(i) / (levels - 1));
  }
  ladder.sigma.front() = sigma_min;
  ladder.sigma.back() = sigma_max;
  return ladder;
}

std::vector<double> forward_perturb(std::span<const double> x0, int t, std::span<const double> eps,
                                    const NoiseSchedule& schedule) {
  if (x0.size() != eps.size()) {
    throw ParameterError("forward_perturb: x0 and eps lengths differ");
  }
  const double abar = schedule.alpha_bar(t);
  const double signal = std::sqrt(abar);
  const double noise = std::sqrt(1.0 - abar);
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    out[i] = signal * x0[i] + noise * eps[i];
  }
  return out;
}

std::vector<double> forward_step(std::span<const double> x_prev, int t, std::span<const double> z,
                                 const NoiseSchedule& schedule) {
  if (x_prev.size() != z.size()) {
    throw ParameterError("forward_step: length mismatch");
  }
  const double keep = std::sqrt(1.0 - schedule.beta(t));
  const double noise = std::sqrt(schedule.beta(t));
  std::vector<double> out(x_prev.size());
  for (std::size_t i = 0; i < x_prev.size(); ++i) {
    out[i] = keep * x_prev[i] + noise * z[i];
  }
  return out;
}

nlohmann::json to_json(const NoiseSchedule& schedule) {
  return nlohmann::json{{"T", schedule.steps()}, {"beta", schedule.betas()}};
}

NoiseSchedule schedule_from_json(const nlohmann::json& j) {
  try {
    auto beta = j.at("beta").get<std::vector<double>>();
    if (j.at("T").get<int>() != static_cast<int>(beta.size())) {
      throw ParameterError("schedule JSON: T does not match beta length");
    }
    return NoiseSchedule(std::move(beta));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("schedule JSON: ") + e.what());
  }
}

}  // namespace stockdiff::schedules
