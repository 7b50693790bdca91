#include "faultdx/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>

namespace faultdx::spectral {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// FFTW planning is not thread-safe; execution on private buffers is.
// Each thread keeps its own plan per transform length.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

struct PlanEntry {
  std::size_t n = 0;
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  PlanEntry(const PlanEntry&) = delete;
  PlanEntry& operator=(const PlanEntry&) = delete;

  explicit PlanEntry(std::size_t n_) : n(n_) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    if (!in || !out) {
      fftw_free(in);
      fftw_free(out);
      throw std::bad_alloc();
    }
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    if (!plan) {
      fftw_free(in);
      fftw_free(out);
      throw NumericError("fft_magnitude: planner failed for length " + std::to_string(n));
    }
  }

  ~PlanEntry() {
    if (plan) {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
  }
};

PlanEntry& plan_for(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<PlanEntry>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<PlanEntry>(n)).first;
  }
  return *it->second;
}

std::size_t bins_upto(double f_max_hz, double df_hz, std::size_t full_bins) {
  std::size_t kept = 0;
  for (std::size_t k = 0; k < full_bins; ++k) {
    if (static_cast<double>(k) * df_hz <= f_max_hz * (1.0 + 1e-12)) {
      kept = k + 1;
    } else {
      break;
    }
  }
  return kept;
}

}  // namespace

Spectrum fft_magnitude(const TimeSeries& x) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("fft_magnitude: need at least 2 samples");
  PlanEntry& entry = plan_for(n);
  std::copy(x.samples().begin(), x.samples().end(), entry.in);
  fftw_execute_dft_r2c(entry.plan, entry.in, entry.out);

  const std::size_t bins = n / 2 + 1;
  std::vector<double> mags(bins);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = entry.out[k][0];
    const double im = entry.out[k][1];
    double m = std::sqrt(re * re + im * im) * inv_n;
    const bool interior = k != 0 && !(n % 2 == 0 && k == n / 2);
    if (interior) m *= 2.0;
    mags[k] = m;
  }
  const double df = x.sample_rate_hz() / static_cast<double>(n);
  return Spectrum(std::move(mags), df, 0.0, false);
}

Spectrum zscore(const Spectrum& s) {
  const auto& m = s.magnitudes();
  const double n = static_cast<double>(m.size());
  const double mean = std::accumulate(m.begin(), m.end(), 0.0) / n;
  double var = 0.0;
  for (double v : m) var += (v - mean) * (v - mean);
  var /= n;
  const double sd = std::sqrt(var);
  if (sd < 1e-12)
    throw DataError("zscore: degenerate spectrum, standard deviation below 1e-12");
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = (m[i] - mean) / sd;
  return Spectrum(std::move(out), s.df_hz(), s.f_start_hz(), true);
}

Spectrum frequency_cut(const Spectrum& s, double f_max_hz) {
  if (!(f_max_hz > s.df_hz()))
    throw std::invalid_argument("frequency_cut: f_max must exceed the bin spacing");
  std::size_t kept = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s.frequency_at(k) <= f_max_hz * (1.0 + 1e-12)) {
      kept = k + 1;
    } else {
      break;
    }
  }
  if (kept == 0) throw std::invalid_argument("frequency_cut: cut removes every bin");
  std::vector<double> out(s.magnitudes().begin(), s.magnitudes().begin() + kept);
  return Spectrum(std::move(out), s.df_hz(), s.f_start_hz(), s.normalized());
}

Spectrum preprocess(const TimeSeries& x, const SpectralConfig& cfg) {
  std::vector<double> samples = x.samples();
  if (cfg.detrend_mean) {
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                        static_cast<double>(samples.size());
    for (double& v : samples) v -= mean;
  }
  double amplitude_correction = 1.0;
  if (cfg.window == Window::Hann && samples.size() >= 2) {
    const std::size_t n = samples.size();
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w =
          0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1));
      samples[i] *= w;
      wsum += w;
    }
    amplitude_correction = static_cast<double>(n) / wsum;
  }
  Spectrum spec = fft_magnitude(TimeSeries(std::move(samples), x.sample_rate_hz()));
  if (amplitude_correction != 1.0) {
    for (double& v : spec.magnitudes()) v *= amplitude_correction;
  }
  if (cfg.paper_order) {
    Spectrum normed = zscore(spec);
    return cfg.f_max_hz > 0.0 ? frequency_cut(normed, cfg.f_max_hz) : normed;
  }
  if (cfg.f_max_hz > 0.0) spec = frequency_cut(spec, cfg.f_max_hz);
  return zscore(spec);
}

std::size_t preprocessed_bin_count(std::size_t n_samples, double sample_rate_hz,
                                   const SpectralConfig& cfg) {
  if (n_samples < 2) throw std::invalid_argument("preprocessed_bin_count: need >= 2 samples");
  const std::size_t full = n_samples / 2 + 1;
  if (cfg.f_max_hz <= 0.0) return full;
  const double df = sample_rate_hz / static_cast<double>(n_samples);
  const std::size_t kept = bins_upto(cfg.f_max_hz, df, full);
  if (kept == 0) throw std::invalid_argument("preprocessed_bin_count: cut removes every bin");
  return kept;
}

std::complex<double> dft_bin(const std::vector<double>& x, std::size_t k) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("dft_bin: empty input");
  if (k >= n) throw std::invalid_argument("dft_bin: bin index out of range");
  const double omega = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
  const double c = std::cos(omega);
  const double coeff = 2.0 * c;
  double s1 = 0.0, s2 = 0.0;
  for (double v : x) {
    const double s0 = v + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  const double s0 = coeff * s1 - s2;
  return {s0 - c * s1, s1 * std::sin(omega)};
}

std::complex<double> sine_dft_bin(double freq_hz, double phase_rad, std::size_t n,
                                  double sample_rate_hz, std::size_t k) {
  if (n == 0) throw std::invalid_argument("sine_dft_bin: empty length");
  if (k >= n) throw std::invalid_argument("sine_dft_bin: bin index out of range");
  const double omega = 2.0 * kPi * freq_hz / sample_rate_hz;
  const double theta = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
  auto dirichlet = [n](double alpha) -> std::complex<double> {
    const double half = 0.5 * alpha;
    const double denom = std::sin(half);
    const double dn = static_cast<double>(n);
    if (std::abs(denom) < 1e-15) return {dn, 0.0};
    const double ratio = std::sin(half * dn) / denom;
    const double rot = half * (dn - 1.0);
    return std::polar(ratio, rot);
  };
  const std::complex<double> i_unit(0.0, 1.0);
  const std::complex<double> pos = std::exp(i_unit * phase_rad) * dirichlet(omega - theta);
  const std::complex<double> neg = std::exp(-i_unit * phase_rad) * dirichlet(-omega - theta);
  return (pos - neg) / (2.0 * i_unit);
}

}  // namespace faultdx::spectral
