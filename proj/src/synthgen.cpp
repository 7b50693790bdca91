#include "faultdx/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <string>

#include "faultdx/spectral.hpp"

namespace faultdx::synthgen {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kRefFloor = 1e-12;

void check_below_nyquist(double f_hz, double sample_rate_hz, const char* what) {
  if (!(f_hz < 0.5 * sample_rate_hz)) {
    throw std::invalid_argument(std::string(what) + " at " + std::to_string(f_hz) +
                                " Hz reaches Nyquist of fs " + std::to_string(sample_rate_hz));
  }
}

void add_sine(std::vector<double>& acc, const SineComponent& c, double fs) {
  const double w = 2.0 * kPi * c.frequency_hz / fs;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    acc[i] += c.amplitude * std::sin(w * static_cast<double>(i) + c.phase_rad);
  }
}

double spectrum_median(const Spectrum& s) {
  std::vector<double> m = s.magnitudes();
  const std::size_t n = m.size();
  const std::size_t mid = n / 2;
  std::nth_element(m.begin(), m.begin() + mid, m.end());
  double med = m[mid];
  if (n % 2 == 0) {
    const double lower = *std::max_element(m.begin(), m.begin() + mid);
    med = 0.5 * (med + lower);
  }
  return med;
}

/// Tracks raw complex DFT values at the bins targeted by injected
/// components: the baseline's own value plus every accepted component's
/// closed-form contribution. Lets each amplitude draw be checked against
/// the actually achieved spectral gain, including adverse-phase cancels.
class GainTracker {
 public:
  GainTracker(const TimeSeries& baseline, const Spectrum& baseline_spec)
      : baseline_(baseline),
        spec_(baseline_spec),
        n_(baseline.size()),
        fs_(baseline.sample_rate_hz()) {}

  std::size_t bin_of(double f_hz) const { return spec_.bin_nearest(f_hz); }

  /// Draws an amplitude for a tone at f until the injected-so-far
  /// spectrum clears min_gain_db over the baseline at the nearest bin.
  /// scale is applied to every draw (gear sidebands use 0.5); max_amp,
  /// when finite, rejects draws above it and reports failure instead of
  /// escalating past the cap.
  struct Draw {
    double amplitude = 0.0;
    bool ok = false;
  };

  Draw draw_with_floor(double f_hz, const AmplitudeRule& rule, Rng& rng, double scale = 1.0,
                       double max_amp = std::numeric_limits<double>::infinity()) {
    const std::size_t k = bin_of(f_hz);
    if (scale * min_drawable(k, rule) > max_amp) return {0.0, false};

    const std::complex<double> base = base_value(k);
    const std::complex<double> tone = spectral::sine_dft_bin(f_hz, 0.0, n_, fs_, k);
    const double target = std::pow(10.0, rule.min_gain_db / 20.0) * std::abs(base);

    double best_amp = -1.0;
    double best_mag = -1.0;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double amp = scale * draw_amplitude(k, rule, rng);
      if (amp > max_amp) continue;
      const double mag = std::abs(base + extra_at(k) + amp * tone);
      if (mag >= target) {
        return {amp, true};
      }
      if (mag > best_mag) {
        best_mag = mag;
        best_amp = amp;
      }
    }
    if (std::isfinite(max_amp)) return {std::max(best_amp, 0.0), false};

    // Adverse phase alignment can defeat every in-range draw; grow the
    // amplitude until the bin clears the floor. |base + A*tone| is
    // unbounded in A whenever the tone actually reaches this bin.
    double amp = best_amp > 0.0 ? best_amp : scale * kRefFloor;
    for (int attempt = 0; attempt < 200; ++attempt) {
      if (std::abs(base + extra_at(k) + amp * tone) >= target) break;
      amp *= 1.25;
    }
    return {amp, true};
  }

  /// Registers an accepted component so later draws see its leakage.
  void commit(const SineComponent& c) {
    committed_.push_back(c);
    for (auto& [bin, value] : extra_) {
      value += c.amplitude * spectral::sine_dft_bin(c.frequency_hz, c.phase_rad, n_, fs_, bin);
    }
  }

 private:
  double median() {
    if (!median_ready_) {
      median_ = spectrum_median(spec_);
      median_ready_ = true;
    }
    return median_;
  }

  double reference(std::size_t k) {
    return std::max({spec_.magnitudes()[k], median(), kRefFloor});
  }

  // Same draw rule as sample_fault_amplitude, with the median cached
  // across the many draws one synthesis makes against one baseline.
  double draw_amplitude(std::size_t k, const AmplitudeRule& rule, Rng& rng) {
    const double gain_db = rng.uniform(rule.min_gain_db, rule.max_gain_db);
    return reference(k) * std::pow(10.0, gain_db / 20.0);
  }

  double min_drawable(std::size_t k, const AmplitudeRule& rule) {
    return reference(k) * std::pow(10.0, rule.min_gain_db / 20.0);
  }

  std::complex<double> base_value(std::size_t k) {
    auto it = base_.find(k);
    if (it == base_.end()) {
      it = base_.emplace(k, spectral::dft_bin(baseline_.samples(), k)).first;
      std::complex<double> extra(0.0, 0.0);
      for (const auto& c : committed_) {
        extra += c.amplitude * spectral::sine_dft_bin(c.frequency_hz, c.phase_rad, n_, fs_, k);
      }
      extra_.emplace(k, extra);
    }
    return it->second;
  }

  std::complex<double> extra_at(std::size_t k) const {
    auto it = extra_.find(k);
    return it == extra_.end() ? std::complex<double>(0.0, 0.0) : it->second;
  }

  const TimeSeries& baseline_;
  const Spectrum& spec_;
  std::size_t n_;
  double fs_;
  std::vector<SineComponent> committed_;
  std::map<std::size_t, std::complex<double>> base_;
  std::map<std::size_t, std::complex<double>> extra_;
  double median_ = 0.0;
  bool median_ready_ = false;
};

SynthResult assemble(const TimeSeries& baseline, const std::vector<SineComponent>& components) {
  std::vector<double> injected(baseline.size(), 0.0);
  for (const auto& c : components) add_sine(injected, c, baseline.sample_rate_hz());
  std::vector<double> out = baseline.samples();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += injected[i];
  return SynthResult{TimeSeries(std::move(out), baseline.sample_rate_hz()),
                     TimeSeries(std::move(injected), baseline.sample_rate_hz()), components};
}

}  // namespace

void AmplitudeRule::validate() const {
  if (!(min_gain_db >= 0.0) || !(max_gain_db >= min_gain_db))
    throw std::invalid_argument("AmplitudeRule: need max_gain_db >= min_gain_db >= 0");
}

void SurrogateParams::validate() const {
  if (!(tone_amplitude >= 0.0) || !(noise_std >= 0.0))
    throw std::invalid_argument("SurrogateParams: negative amplitude or noise level");
  if (extra_tones < 0) throw std::invalid_argument("SurrogateParams: negative tone count");
  if (!(tone_freq_min_hz > 0.0) || !(tone_freq_max_hz >= tone_freq_min_hz))
    throw std::invalid_argument("SurrogateParams: bad tone frequency range");
  if (!(tone_amp_min >= 0.0) || !(tone_amp_max >= tone_amp_min))
    throw std::invalid_argument("SurrogateParams: bad tone amplitude range");
}

TimeSeries sine(const SineComponent& component, std::size_t n, double sample_rate_hz) {
  if (n < 1) throw std::invalid_argument("sine: need at least one sample");
  if (component.amplitude < 0.0) throw std::invalid_argument("sine: negative amplitude");
  check_below_nyquist(component.frequency_hz, sample_rate_hz, "sine component");
  std::vector<double> samples(n, 0.0);
  add_sine(samples, component, sample_rate_hz);
  return TimeSeries(std::move(samples), sample_rate_hz);
}

double gmf(int n_teeth, double shaft_hz) {
  if (n_teeth < 1) throw std::invalid_argument("gmf: tooth count must be positive");
  if (!(shaft_hz > 0.0)) throw std::invalid_argument("gmf: shaft speed must be positive");
  return static_cast<double>(n_teeth) * shaft_hz;
}

double sample_fault_amplitude(const Spectrum& baseline, double f_hz, const AmplitudeRule& rule,
                              Rng& rng) {
  rule.validate();
  const double f_last = baseline.frequency_at(baseline.size() - 1);
  if (f_hz < baseline.f_start_hz() || f_hz > f_last + 0.5 * baseline.df_hz())
    throw std::invalid_argument("sample_fault_amplitude: frequency outside baseline spectrum");
  const double bin_mag = baseline.magnitudes()[baseline.bin_nearest(f_hz)];
  const double ref = std::max({bin_mag, spectrum_median(baseline), kRefFloor});
  const double gain_db = rng.uniform(rule.min_gain_db, rule.max_gain_db);
  return ref * std::pow(10.0, gain_db / 20.0);
}

SynthResult gen_unbalance(const TimeSeries& baseline, const MachineSpec& spec,
                          const AmplitudeRule& rule, Rng& rng) {
  spec.validate();
  rule.validate();
  check_below_nyquist(spec.rotation_hz, baseline.sample_rate_hz(), "unbalance tone");
  const Spectrum bspec = spectral::fft_magnitude(baseline);
  GainTracker tracker(baseline, bspec);
  const double amp = tracker.draw_with_floor(spec.rotation_hz, rule, rng).amplitude;
  return assemble(baseline, {SineComponent{amp, spec.rotation_hz, 0.0}});
}

SynthResult gen_misalignment(const TimeSeries& baseline, const MachineSpec& spec,
                             const AmplitudeRule& rule, Rng& rng) {
  spec.validate();
  rule.validate();
  const double fr = spec.rotation_hz;
  check_below_nyquist(3.0 * fr, baseline.sample_rate_hz(), "misalignment 3x harmonic");
  const Spectrum bspec = spectral::fft_magnitude(baseline);
  GainTracker tracker(baseline, bspec);

  double a1 = tracker.draw_with_floor(fr, rule, rng).amplitude;
  double a2 = tracker.draw_with_floor(2.0 * fr, rule, rng).amplitude;
  // The 2x line must dominate the 1x line: resample the 1x draw while it
  // sticks out, then as a last resort raise the 2x amplitude to match.
  if (a1 > a2) {
    const auto redraw = tracker.draw_with_floor(fr, rule, rng, 1.0, a2);
    if (redraw.ok) {
      a1 = redraw.amplitude;
    } else {
      a2 = a1;
    }
  }

  std::vector<SineComponent> comps;
  comps.push_back({a1, fr, 0.0});
  tracker.commit(comps.back());
  comps.push_back({a2, 2.0 * fr, 0.0});
  tracker.commit(comps.back());
  const double a3 = tracker.draw_with_floor(3.0 * fr, rule, rng).amplitude;
  comps.push_back({a3, 3.0 * fr, 0.0});
  return assemble(baseline, comps);
}

SynthResult gen_looseness(const TimeSeries& baseline, const MachineSpec& spec,
                          const AmplitudeRule& rule, Rng& rng) {
  spec.validate();
  rule.validate();
  const double fr = spec.rotation_hz;
  const int n_harm = spec.looseness_harmonic_count;
  check_below_nyquist(static_cast<double>(n_harm) * fr, baseline.sample_rate_hz(),
                      "looseness top harmonic");
  const Spectrum bspec = spectral::fft_magnitude(baseline);
  GainTracker tracker(baseline, bspec);

  std::vector<double> freqs;
  for (int k = 1; k <= n_harm; ++k) freqs.push_back(static_cast<double>(k) * fr);
  for (int k = 1; k <= n_harm; ++k) freqs.push_back((static_cast<double>(k) - 0.5) * fr);

  std::vector<SineComponent> comps;
  for (double f : freqs) {
    const double amp = tracker.draw_with_floor(f, rule, rng).amplitude;
    comps.push_back({amp, f, 0.0});
    tracker.commit(comps.back());
  }
  return assemble(baseline, comps);
}

SynthResult gen_gear_fault(const TimeSeries& baseline, const MachineSpec& spec,
                           const AmplitudeRule& rule, Rng& rng) {
  spec.validate();
  rule.validate();
  if (!spec.gmf_hz) throw std::invalid_argument("gen_gear_fault: MachineSpec is missing gmf_hz");
  const double gmf_hz = *spec.gmf_hz;
  const double fr = spec.rotation_hz;
  check_below_nyquist(3.0 * gmf_hz + fr, baseline.sample_rate_hz(), "gear 3x GMF sideband");
  const Spectrum bspec = spectral::fft_magnitude(baseline);
  GainTracker tracker(baseline, bspec);

  std::vector<SineComponent> comps;
  for (int k = 1; k <= 3; ++k) {
    const double f = static_cast<double>(k) * gmf_hz;
    const double amp = tracker.draw_with_floor(f, rule, rng).amplitude;
    comps.push_back({amp, f, 0.0});
    tracker.commit(comps.back());
    for (double side : {f - fr, f + fr}) {
      const double samp = tracker.draw_with_floor(side, rule, rng, 0.5).amplitude;
      comps.push_back({samp, side, 0.0});
      tracker.commit(comps.back());
    }
  }
  return assemble(baseline, comps);
}

SynthResult gen_bearing_fault(const TimeSeries& baseline, const MachineSpec& spec, double fault_hz,
                              const AmplitudeRule& rule, Rng& rng) {
  spec.validate();
  rule.validate();
  if (!(fault_hz > 0.0)) throw std::invalid_argument("gen_bearing_fault: fault_hz must be positive");
  const double fs = baseline.sample_rate_hz();
  const double f_res = spec.resolve_impact_resonance(fs);
  check_below_nyquist(f_res, fs, "bearing impact resonance");
  check_below_nyquist(fault_hz, fs, "bearing fault frequency");

  const Spectrum bspec = spectral::fft_magnitude(baseline);
  const double amp = sample_fault_amplitude(bspec, f_res, rule, rng);

  const double tau = 5.0 / f_res;
  const std::size_t burst_len =
      std::min(baseline.size(), static_cast<std::size_t>(std::ceil(6.0 * tau * fs)));
  const double w = 2.0 * kPi * f_res;

  std::vector<double> injected(baseline.size(), 0.0);
  const double period_s = 1.0 / fault_hz;
  for (std::size_t k = 0;; ++k) {
    const double t0 = static_cast<double>(k) * period_s;
    const std::size_t start = static_cast<std::size_t>(std::ceil(t0 * fs));
    if (start >= baseline.size()) break;
    const std::size_t stop = std::min(baseline.size(), start + burst_len);
    for (std::size_t i = start; i < stop; ++i) {
      const double dt = static_cast<double>(i) / fs - t0;
      injected[i] += amp * std::sin(w * dt) * std::exp(-dt / tau);
    }
  }

  std::vector<double> out = baseline.samples();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += injected[i];
  return SynthResult{TimeSeries(std::move(out), fs), TimeSeries(std::move(injected), fs), {}};
}

TimeSeries gen_normal(const TimeSeries& baseline, Rng&) { return baseline; }

TimeSeries gen_baseline_surrogate(const MachineSpec& spec, double sample_rate_hz, std::size_t n,
                                  const SurrogateParams& params, Rng& rng) {
  spec.validate();
  params.validate();
  if (n < 2) throw std::invalid_argument("gen_baseline_surrogate: need at least 2 samples");
  check_below_nyquist(spec.rotation_hz, sample_rate_hz, "surrogate rotation tone");

  std::vector<double> samples(n, 0.0);
  add_sine(samples, SineComponent{params.tone_amplitude, spec.rotation_hz, 0.0}, sample_rate_hz);
  if (params.noise_std > 0.0) {
    for (double& v : samples) v += params.noise_std * rng.normal();
  }
  const double f_hi = std::min(params.tone_freq_max_hz, 0.45 * sample_rate_hz);
  for (int k = 0; k < params.extra_tones; ++k) {
    const double f = rng.uniform(params.tone_freq_min_hz, std::max(params.tone_freq_min_hz, f_hi));
    const double amp = params.noise_std * rng.uniform(params.tone_amp_min, params.tone_amp_max);
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    add_sine(samples, SineComponent{amp, f, phase}, sample_rate_hz);
  }
  return TimeSeries(std::move(samples), sample_rate_hz);
}

std::vector<LabeledSignal> gen_all_conditions(const TimeSeries& baseline, const MachineSpec& spec,
                                              const AmplitudeRule& rule, Rng& rng) {
  spec.validate();
  if (!spec.bpfo_hz || !spec.bpfi_hz)
    throw std::invalid_argument("gen_all_conditions: MachineSpec is missing bpfo_hz or bpfi_hz");
  if (!spec.gmf_hz)
    throw std::invalid_argument("gen_all_conditions: MachineSpec is missing gmf_hz");

  std::vector<LabeledSignal> out;
  out.reserve(kNumLabels);
  out.push_back({gen_normal(baseline, rng), FaultLabel::Normal});
  out.push_back({gen_bearing_fault(baseline, spec, *spec.bpfo_hz, rule, rng).signal,
                 FaultLabel::Bpfo});
  out.push_back({gen_bearing_fault(baseline, spec, *spec.bpfi_hz, rule, rng).signal,
                 FaultLabel::Bpfi});
  out.push_back({gen_unbalance(baseline, spec, rule, rng).signal, FaultLabel::Unbalance});
  out.push_back({gen_misalignment(baseline, spec, rule, rng).signal, FaultLabel::Misalignment});
  out.push_back({gen_looseness(baseline, spec, rule, rng).signal, FaultLabel::Looseness});
  out.push_back({gen_gear_fault(baseline, spec, rule, rng).signal, FaultLabel::GearFault});
  return out;
}

}  // namespace faultdx::synthgen
