#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "stockdiff/random.hpp"

namespace stockdiff::schedules {

// Discrete variance-preserving schedule. Steps are 1-based: index t in [1, T]
// reads element t-1 of every vector.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> beta);

  int steps() const { return static_cast<int>(beta_.size()); }
  double beta(int t) const { return beta_[index(t)]; }
  double alpha(int t) const { return alpha_[index(t)]; }
  // abar(0) == 1 by convention.
  double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bar_[index(t)]; }
  double posterior_var(int t) const { return posterior_var_[index(t)]; }

  const std::vector<double>& betas() const { return beta_; }
  const std::vector<double>& alphas() const { return alpha_; }
  const std::vector<double>& alpha_bars() const { return alpha_bar_; }
  const std::vector<double>& posterior_vars() const { return posterior_var_; }

  void check_step(int t) const;

 private:
  std::size_t index(int t) const;

  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
  std::vector<double> posterior_var_;
};

// Variance-exploding noise ladder, sigma_1 = sigma_min < ... < sigma_N = sigma_max.
struct SigmaLadder {
  std::vector<double> sigma;
  int levels() const { return static_cast<int>(sigma.size()); }
};

NoiseSchedule make_linear_schedule(int steps, double beta_start = 1e-4, double beta_end = 0.02);

SigmaLadder make_sigma_ladder(double sigma_min, double sigma_max, int levels);

// sqrt(abar_t) * x0 + sqrt(1 - abar_t) * eps
std::vector<double> forward_perturb(std::span<const double> x0, int t, std::span<const double> eps,
                                    const NoiseSchedule& schedule);

// Single discrete VP step x_t = sqrt(1 - beta_t) x_{t-1} + sqrt(beta_t) z.
std::vector<double> forward_step(std::span<const double> x_prev, int t, std::span<const double> z,
                                 const NoiseSchedule& schedule);

// {"T": ..., "beta": [...]}; derived vectors are recomputed on load.
nlohmann::json to_json(const NoiseSchedule& schedule);
NoiseSchedule schedule_from_json(const nlohmann::json& j);

}  // namespace stockdiff::schedules
