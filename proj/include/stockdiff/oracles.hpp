#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace stockdiff::oracles {

// Reference implementations for tests. Nothing here calls into the
// production modules; only primitive arithmetic is shared.

struct GaussianSpec {
  double mean = 0.0;
  double var = 1.0;
};

double gaussian_log_density(double x, const GaussianSpec& spec);
double gaussian_score(double x, const GaussianSpec& spec);

// Score of the marginal after x_t = sqrt(abar) x0 + sqrt(1-abar) eps, x0 ~ spec.
double perturbed_gaussian_score(double x, const GaussianSpec& spec, double alpha_bar);

// Gaussian-kernel density score at x from samples, Silverman bandwidth.
double kde_score(double x, std::span<const double> samples);
double silverman_bandwidth(std::span<const double> samples);

using ScalarField = std::function<double(std::span<const double>)>;

std::vector<double> finite_diff_grad(const ScalarField& f, std::span<const double> x, double h);

struct MomentEstimate {
  double mean = 0.0;
  double var = 0.0;        // unbiased
  double mean_se = 0.0;    // sqrt(var / n)
};

MomentEstimate moments(std::span<const double> samples);

// Plain product loop over (1 - beta).
std::vector<double> naive_alpha_bar(std::span<const double> beta);
// (1 - abar_{t-1}) beta_t / (1 - abar_t) with abar_0 = 1, from its own loop.
std::vector<double> naive_posterior_var(std::span<const double> beta);

// exp(linspace(log a, log b, n))
std::vector<double> log_linspace(double a, double b, int n);

// X_k = sum_j x_j (cos(2 pi jk/n) - i sin(2 pi jk/n)) evaluated term by term.
std::vector<std::complex<double>> direct_dft(std::span<const double> x);

// Textbook two-pass Pearson.
double pearson_two_pass(std::span<const double> a, std::span<const double> b);

// rank_i = 1 + #{j: v_j < v_i} + (#{j: v_j == v_i} - 1)/2, by counting.
std::vector<double> counting_ranks(std::span<const double> v);
double spearman_by_counting(std::span<const double> a, std::span<const double> b);

struct ReferenceDay {
  std::vector<std::string> holdings;  // sorted
  double portfolio_return = 0.0;
  double cumulative_rr = 0.0;
};

// For every ticker counts how many others outrank it (higher score, or equal
// score and smaller ticker); holds it when that count is below k.
std::vector<ReferenceDay> reference_topk(const std::vector<std::vector<std::string>>& tickers,
                                         const std::vector<std::vector<double>>& scores,
                                         const std::vector<std::vector<double>>& returns, int k);

// One-dimensional score model with its derivative.
struct ToyScoreModel {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

struct EquivalenceResult {
  double explicit_loss = 0.0;  // 1/2 E[(s - grad log p)^2]
  double trace_loss = 0.0;     // E[s' + s^2 / 2]
  double constant = 0.0;       // 1/2 E[(grad log p)^2]
  double drift = 0.0;          // explicit - trace - constant
  double drift_se = 0.0;
};

EquivalenceResult score_matching_equivalence_check(const ToyScoreModel& model, const GaussianSpec& spec,
                                                   std::size_t n_samples, std::uint64_t seed);

}  // namespace stockdiff::oracles
