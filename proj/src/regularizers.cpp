#include "stockdiff/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "stockdiff/error.hpp"

namespace stockdiff::regularizers {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::size_t window_lo(std::size_t i, int k) {
  return i >= static_cast<std::size_t>(k) ? i - static_cast<std::size_t>(k) : 0;
}

std::size_t window_hi(std::size_t i, int k, std::size_t n) {
  return std::min(n - 1, i + static_cast<std::size_t>(k));
}

std::size_t smallest_factor(std::size_t n) {
  for (std::size_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) return p;
  }
  return n;
}

// Decimation in time over the smallest prime factor p; prime lengths fall
// back to direct summation.
Spectrum fft_recursive(const Spectrum& x, double direction) {
  const std::size_t n = x.size();
  if (n <= 1) return x;
  const std::size_t p = smallest_factor(n);
  if (p == n) {
    Spectrum out(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double angle = direction * 2.0 * std::numbers::pi * static_cast<double>((j * k) % n) /
                             static_cast<double>(n);
        acc += x[j] * std::polar(1.0, angle);
      }
      out[k] = acc;
    }
    return out;
  }

  const std::size_t m = n / p;
  std::vector<Spectrum> sub(p, Spectrum(m));
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t q = 0; q < m; ++q) sub[r][q] = x[q * p + r];
    sub[r] = fft_recursive(sub[r], direction);
  }

  Spectrum out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t r = 0; r < p; ++r) {
      const double angle =
          direction * 2.0 * std::numbers::pi * static_cast<double>((r * k) % n) / static_cast<double>(n);
      acc += std::polar(1.0, angle) * sub[r][k % m];
    }
    out[k] = acc;
  }
  return out;
}

void require_same_length(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw ParameterError(std::string(where) + ": length mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
}

}  // namespace

void AntvConfig::validate() const {
  if (k < 1 || !(alpha > 0.0) || !(sigma_w > 0.0) || !(rate >= 0.0)) {
    throw ParameterError("ANTV config needs k >= 1, alpha > 0, sigma_w > 0, rate >= 0");
  }
}

double antv_weight(double xi, double xj, double sigma_w) {
  const double d = xi - xj;
  return std::exp(-d * d / (2.0 * sigma_w * sigma_w));
}

double antv_loss(std::span<const double> x, const AntvConfig& cfg) {
  const std::size_t n = x.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = window_lo(i, cfg.k); j <= window_hi(i, cfg.k, n); ++j) {
      total += std::abs((x[j] - x[i]) * antv_weight(x[i], x[j], cfg.sigma_w));
    }
  }
  return cfg.alpha * total;
}

std::vector<double> antv_exact_gradient(std::span<const double> x, const AntvConfig& cfg) {
  // Windows are symmetric (|i-j| <= k), so every unordered pair appears twice
  // and d/dx_i |d| exp(-d^2/2s^2) with d = x_j - x_i contributes twice.
  const std::size_t n = x.size();
  const double s2 = cfg.sigma_w * cfg.sigma_w;
  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = window_lo(i, cfg.k); j <= window_hi(i, cfg.k, n); ++j) {
      if (j == i) continue;
      const double d = x[j] - x[i];
      const double w = std::exp(-d * d / (2.0 * s2));
      acc += -sign(d) * w * (1.0 - d * d / s2);
    }
    grad[i] = 2.0 * cfg.alpha * acc;
  }
  return grad;
}

std::vector<double> antv_step(std::span<const double> x, const AntvConfig& cfg, AntvGradient mode) {
  std::vector<double> out(x.begin(), x.end());
  const std::size_t n = out.size();
  const double s2 = cfg.sigma_w * cfg.sigma_w;
  for (std::size_t i = 0; i < n; ++i) {
    double grad = 0.0;
    for (std::size_t j = window_lo(i, cfg.k); j <= window_hi(i, cfg.k, n); ++j) {
      if (j == i) continue;
      const double d = out[j] - out[i];
      const double w = antv_weight(out[i], out[j], cfg.sigma_w);
      if (mode == AntvGradient::Listed) {
        grad += sign(d * w) * w * -1.0;
      } else {
        grad += 2.0 * -sign(d) * w * (1.0 - d * d / s2);
      }
    }
    out[i] -= cfg.rate * cfg.alpha * grad;
  }
  return out;
}

void BandSpec::validate(std::size_t n) const {
  const int nyquist = static_cast<int>(n / 2);
  if (f_low < 0 || f_low >= f_high || f_high > nyquist) {
    throw ParameterError("band [" + std::to_string(f_low) + "," + std::to_string(f_high) +
                         "] invalid for length " + std::to_string(n) + " (need 0 <= low < high <= " +
                         std::to_string(nyquist) + ")");
  }
}

Spectrum dft_direct(std::span<const double> x) {
  const std::size_t n = x.size();
  Spectrum out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      acc += x[j] * std::polar(1.0, angle);
    }
    out[k] = acc;
  }
  return out;
}

Spectrum fft(const Spectrum& x) { return fft_recursive(x, -1.0); }

Spectrum dft(std::span<const double> x) { return fft(Spectrum(x.begin(), x.end())); }

Spectrum ifft(const Spectrum& spectrum) {
  Spectrum out = fft_recursive(spectrum, 1.0);
  const double scale = spectrum.empty() ? 1.0 : 1.0 / static_cast<double>(spectrum.size());
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<double> ifft_real(const Spectrum& spectrum) {
  const Spectrum full = ifft(spectrum);
  std::vector<double> out(full.size());
  std::transform(full.begin(), full.end(), out.begin(), [](const auto& c) { return c.real(); });
  return out;
}

Spectrum band_pass(const Spectrum& spectrum, const BandSpec& band) {
  const std::size_t n = spectrum.size();
  Spectrum out(spectrum);
  for (std::size_t k = 0; k < n; ++k) {
    const auto freq = static_cast<int>(std::min(k, n - k));
    if (freq < band.f_low || freq > band.f_high) out[k] = 0.0;
  }
  return out;
}

std::vector<double> band_limited(std::span<const double> x_ref, const BandSpec& band) {
  return ifft_real(band_pass(dft(x_ref), band));
}

double bp_loss(std::span<const double> x_t, std::span<const double> x_ref, const BandSpec& band) {
  require_same_length(x_t.size(), x_ref.size(), "bp_loss");
  const Spectrum lhs = dft(x_t);
  const Spectrum rhs = band_pass(dft(x_ref), band);
  double total = 0.0;
  for (std::size_t k = 0; k < lhs.size(); ++k) total += std::norm(lhs[k] - rhs[k]);
  return total;
}

std::vector<double> bp_gradient(std::span<const double> x_t, std::span<const double> x_ref,
                                const BandSpec& band) {
  require_same_length(x_t.size(), x_ref.size(), "bp_gradient");
  const std::vector<double> target = band_limited(x_ref, band);
  const double scale = 2.0 * static_cast<double>(x_t.size());
  std::vector<double> grad(x_t.size());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = scale * (x_t[i] - target[i]);
  return grad;
}

std::vector<double> bp_grad_step(std::span<const double> x_t, std::span<const double> x_ref,
                                 const BandSpec& band, double rate) {
  const std::vector<double> grad = bp_gradient(x_t, x_ref, band);
  std::vector<double> out(x_t.begin(), x_t.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= rate * grad[i];
  return out;
}

}  // namespace stockdiff::regularizers
