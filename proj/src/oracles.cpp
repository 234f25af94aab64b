#include "stockdiff/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace stockdiff::oracles {

double gaussian_log_density(double x, const GaussianSpec& spec) {
  const double d = x - spec.mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * spec.var) - d * d / (2.0 * spec.var);
}

double gaussian_score(double x, const GaussianSpec& spec) { return -(x - spec.mean) / spec.var; }

double perturbed_gaussian_score(double x, const GaussianSpec& spec, double alpha_bar) {
  const GaussianSpec marginal{std::sqrt(alpha_bar) * spec.mean, alpha_bar * spec.var + (1.0 - alpha_bar)};
  return gaussian_score(x, marginal);
}

double silverman_bandwidth(std::span<const double> samples) {
  const MomentEstimate m = moments(samples);
  return 1.06 * std::sqrt(m.var) * std::pow(static_cast<double>(samples.size()), -0.2);
}

double kde_score(double x, std::span<const double> samples) {
  const double h = silverman_bandwidth(samples);
  const double h2 = h * h;
  // Shift exponents by the largest to avoid underflow far in the tails.
  double max_expo = -INFINITY;
  for (double s : samples) max_expo = std::max(max_expo, -(x - s) * (x - s) / (2.0 * h2));
  double num = 0.0;
  double den = 0.0;
  for (double s : samples) {
    const double k = std::exp(-(x - s) * (x - s) / (2.0 * h2) - max_expo);
    num += k * (-(x - s) / h2);
    den += k;
  }
  return num / den;
}

std::vector<double> finite_diff_grad(const ScalarField& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f(probe);
    probe[i] = orig - h;
    const double down = f(probe);
    probe[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) throw std::domain_error("finite_diff_grad: non-finite f");
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

MomentEstimate moments(std::span<const double> samples) {
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double var = ss / (n - 1.0);
  return {mean, var, std::sqrt(var / n)};
}

std::vector<double> naive_alpha_bar(std::span<const double> beta) {
  std::vector<double> out;
  for (std::size_t t = 0; t < beta.size(); ++t) {
    double prod = 1.0;
    for (std::size_t i = 0; i <= t; ++i) prod *= (1.0 - beta[i]);
    out.push_back(prod);
  }
  return out;
}

std::vector<double> naive_posterior_var(std::span<const double> beta) {
  const std::vector<double> abar = naive_alpha_bar(beta);
  std::vector<double> out;
  for (std::size_t t = 0; t < beta.size(); ++t) {
    const double prev = t == 0 ? 1.0 : abar[t - 1];
    out.push_back((1.0 - prev) * beta[t] / (1.0 - abar[t]));
  }
  return out;
}

std::vector<double> log_linspace(double a, double b, int n) {
  std::vector<double> out;
  const double la = std::log(a);
  const double lb = std::log(b);
  for (int i = 0; i < n; ++i) out.push_back(std::exp(la + (lb - la) * i / (n - 1)));
  return out;
}

std::vector<std::complex<double>> direct_dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) * static_cast<double>(k) / static_cast<double>(n);
      re += x[j] * std::cos(theta);
      im -= x[j] * std::sin(theta);
    }
    out[k] = {re, im};
  }
  return out;
}

double pearson_two_pass(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  long double ma = 0.0L;
  long double mb = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<long double>(n);
  mb /= static_cast<long double>(n);
  long double sab = 0.0L;
  long double saa = 0.0L;
  long double sbb = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

std::vector<double> counting_ranks(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    int less = 0;
    int equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    out[i] = 1.0 + less + (equal - 1) / 2.0;
  }
  return out;
}

double spearman_by_counting(std::span<const double> a, std::span<const double> b) {
  const std::vector<double> ra = counting_ranks(a);
  const std::vector<double> rb = counting_ranks(b);
  return pearson_two_pass(ra, rb);
}

std::vector<ReferenceDay> reference_topk(const std::vector<std::vector<std::string>>& tickers,
                                         const std::vector<std::vector<double>>& scores,
                                         const std::vector<std::vector<double>>& returns, int k) {
  std::vector<ReferenceDay> out;
  double wealth = 1.0;
  for (std::size_t d = 0; d < tickers.size(); ++d) {
    ReferenceDay day;
    double sum = 0.0;
    const std::size_t n = tickers[d].size();
    for (std::size_t i = 0; i < n; ++i) {
      int beaten_by = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const bool better = scores[d][j] > scores[d][i] ||
                            (scores[d][j] == scores[d][i] && tickers[d][j] < tickers[d][i]);
        if (better) ++beaten_by;
      }
      if (beaten_by < k) {
        day.holdings.push_back(tickers[d][i]);
        sum += returns[d][i];
      }
    }
    std::sort(day.holdings.begin(), day.holdings.end());
    day.portfolio_return = sum / static_cast<double>(day.holdings.size());
    wealth = wealth * (1.0 + day.portfolio_return);
    day.cumulative_rr = wealth - 1.0;
    out.push_back(std::move(day));
  }
  return out;
}

EquivalenceResult score_matching_equivalence_check(const ToyScoreModel& model, const GaussianSpec& spec,
                                                   std::size_t n_samples, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> draw(spec.mean, std::sqrt(spec.var));
  double sum_explicit = 0.0;
  double sum_trace = 0.0;
  double sum_const = 0.0;
  std::vector<double> diffs(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double x = draw(engine);
    const double s = model.value(x);
    const double ds = model.derivative(x);
    const double g = gaussian_score(x, spec);
    const double e = 0.5 * (s - g) * (s - g);
    const double tr = ds + 0.5 * s * s;
    const double c = 0.5 * g * g;
    sum_explicit += e;
    sum_trace += tr;
    sum_const += c;
    diffs[i] = e - tr - c;
  }
  const double n = static_cast<double>(n_samples);
  EquivalenceResult r;
  r.explicit_loss = sum_explicit / n;
  r.trace_loss = sum_trace / n;
  r.constant = sum_const / n;
  const MomentEstimate m = moments(diffs);
  r.drift = m.mean;
  r.drift_se = m.mean_se;
  return r;
}

}  // namespace stockdiff::oracles
