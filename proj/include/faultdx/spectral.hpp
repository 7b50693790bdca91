#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "faultdx/core.hpp"

namespace faultdx::spectral {

enum class Window : int { None = 0, Hann = 1 };

struct SpectralConfig {
  double f_max_hz = 0.0;  // 0 keeps the full band up to Nyquist
  Window window = Window::None;
  bool detrend_mean = true;
  // Paper order normalizes the full-band spectrum before cutting; the
  // default cuts first so the statistics come from the retained band only.
  bool paper_order = false;
};

/// Single-sided amplitude spectrum of x. Bin spacing fs/N; DC and Nyquist
/// carry weight 1/N, interior bins 2/N, so a pure in-bin sine of amplitude
/// A shows up as a bin of magnitude A.
Spectrum fft_magnitude(const TimeSeries& x);

/// Z-score over the spectrum's own bins using the population std.
Spectrum zscore(const Spectrum& s);

/// Drops every bin above f_max_hz.
Spectrum frequency_cut(const Spectrum& s, double f_max_hz);

/// detrend -> window -> fft -> cut -> zscore (or cut/zscore swapped under
/// paper_order). This is the one path from raw signal to network input.
Spectrum preprocess(const TimeSeries& x, const SpectralConfig& cfg);

std::size_t preprocessed_bin_count(std::size_t n_samples, double sample_rate_hz,
                                   const SpectralConfig& cfg);

/// Exact DFT coefficient X_k of one bin (Goertzel recurrence); used where
/// a full transform would be wasteful.
std::complex<double> dft_bin(const std::vector<double>& x, std::size_t k);

/// DFT-at-bin-k of the unit-amplitude sine sin(2*pi*f*n/fs + phase),
/// length n, in closed form.
std::complex<double> sine_dft_bin(double freq_hz, double phase_rad, std::size_t n,
                                  double sample_rate_hz, std::size_t k);

}  // namespace faultdx::spectral
