#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "faultdx/core.hpp"
#include "faultdx/rng.hpp"

namespace testutil {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Reference one-sided amplitude spectrum via the O(N^2) DFT definition,
/// accumulated in long double. Matches the library normalization: DC and
/// Nyquist weight 1/N, interior bins 2/N.
inline std::vector<double> naive_dft_magnitude(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const std::size_t bins = n / 2 + 1;
  std::vector<double> out(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    long double re = 0.0L;
    long double im = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const long double ang =
          -2.0L * static_cast<long double>(kPi) * static_cast<long double>(k) *
          static_cast<long double>(i) / static_cast<long double>(n);
      re += static_cast<long double>(x[i]) * std::cos(ang);
      im += static_cast<long double>(x[i]) * std::sin(ang);
    }
    const long double mag = std::sqrt(re * re + im * im);
    const bool edge = (k == 0) || (n % 2 == 0 && k == n / 2);
    const long double scale = edge ? 1.0L : 2.0L;
    out[k] = static_cast<double>(mag * scale / static_cast<long double>(n));
  }
  return out;
}

inline std::complex<double> naive_dft_bin(const std::vector<double>& x, std::size_t k) {
  const std::size_t n = x.size();
  long double re = 0.0L;
  long double im = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double ang = -2.0L * static_cast<long double>(kPi) * static_cast<long double>(k) *
                            static_cast<long double>(i) / static_cast<long double>(n);
    re += static_cast<long double>(x[i]) * std::cos(ang);
    im += static_cast<long double>(x[i]) * std::sin(ang);
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}

inline std::vector<double> random_samples(std::size_t n, faultdx::Rng& rng, double scale = 1.0) {
  std::vector<double> x(n);
  for (double& v : x) v = scale * rng.normal();
  return x;
}

inline faultdx::TimeSeries random_signal(std::size_t n, double fs, faultdx::Rng& rng,
                                         double scale = 1.0) {
  return faultdx::TimeSeries(random_samples(n, rng, scale), fs);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  if (a.size() != b.size()) return 1e300;
  return worst;
}

inline double db_gain(double now, double before) { return 20.0 * std::log10(now / before); }

}  // namespace testutil
