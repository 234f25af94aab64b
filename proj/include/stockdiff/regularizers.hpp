#pragma once

#include <complex>
#include <span>
#include <vector>

namespace stockdiff::regularizers {

using Spectrum = std::vector<std::complex<double>>;

struct AntvConfig {
  int k = 3;              // half-window
  double alpha = 1.0;     // regularization weight
  double sigma_w = 1.0;   // Gaussian kernel width
  double rate = 0.03;     // step size of the correction pass

  void validate() const;
};

enum class AntvGradient {
  Listed,  // kernel weight frozen, sign(D) * w * (-1) per neighbour, as listed in the algorithm
  Exact,   // true derivative of antv_loss, kernel derivative included
};

double antv_weight(double xi, double xj, double sigma_w);

// alpha * sum_i sum_{j in [max(0,i-k), min(n-1,i+k)]} |(x_j - x_i) w(i,j)|
double antv_loss(std::span<const double> x, const AntvConfig& cfg);

// Full gradient of antv_loss w.r.t. every x_i.
std::vector<double> antv_exact_gradient(std::span<const double> x, const AntvConfig& cfg);

// One sequential pass i = 0..n-1, x_i <- x_i - rate * grad_i, where later
// centres see the already-updated earlier points.
std::vector<double> antv_step(std::span<const double> x, const AntvConfig& cfg,
                              AntvGradient mode = AntvGradient::Listed);

// Frequency band in cycles per window, inclusive on both ends.
struct BandSpec {
  int f_low = 1;
  int f_high = 10;

  void validate(std::size_t n) const;
};

// Reference transform: X_k = sum_j x_j exp(-2 pi i j k / n), O(n^2).
Spectrum dft_direct(std::span<const double> x);
// Mixed-radix Cooley-Tukey; agrees with dft_direct to rounding.
Spectrum dft(std::span<const double> x);
Spectrum fft(const Spectrum& x);
// Inverse with 1/n normalization.
Spectrum ifft(const Spectrum& spectrum);
// Real part of ifft, for spectra that are conjugate-symmetric.
std::vector<double> ifft_real(const Spectrum& spectrum);

// Zeroes every bin whose frequency min(k, n-k) lies outside [f_low, f_high].
Spectrum band_pass(const Spectrum& spectrum, const BandSpec& band);

// Time-domain image of the band-limited reference spectrum.
std::vector<double> band_limited(std::span<const double> x_ref, const BandSpec& band);

// || F(x_t) - BandPass(F(x_ref)) ||^2 over all bins.
double bp_loss(std::span<const double> x_t, std::span<const double> x_ref, const BandSpec& band);

// 2n (x_t - ifft(BandPass(F(x_ref))))
std::vector<double> bp_gradient(std::span<const double> x_t, std::span<const double> x_ref,
                                const BandSpec& band);

std::vector<double> bp_grad_step(std::span<const double> x_t, std::span<const double> x_ref,
                                 const BandSpec& band, double rate);

}  // namespace stockdiff::regularizers
