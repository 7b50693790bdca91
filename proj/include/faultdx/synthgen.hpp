#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "faultdx/core.hpp"
#include "faultdx/rng.hpp"

namespace faultdx::synthgen {

struct SineComponent {
  double amplitude = 0.0;   // peak amplitude, >= 0
  double frequency_hz = 0.0;
  double phase_rad = 0.0;
};

/// Injected fault components must lift the spectrum at their bin by a
/// gain drawn uniformly from [min_gain_db, max_gain_db] over the baseline.
struct AmplitudeRule {
  double min_gain_db = 3.0;
  double max_gain_db = 20.0;

  void validate() const;
};

struct SurrogateParams {
  double tone_amplitude = 1.0;  // rotation-frequency tone
  double noise_std = 0.1;
  int extra_tones = 8;
  double tone_freq_min_hz = 30.0;
  double tone_freq_max_hz = 3000.0;
  // Extra-tone amplitudes are drawn in units of noise_std.
  double tone_amp_min = 0.5;
  double tone_amp_max = 1.5;

  void validate() const;
};

/// A generated fault signal together with the pure injected part
/// (signal == baseline + injected) and the deterministic components,
/// so spectral effects are testable in isolation.
struct SynthResult {
  TimeSeries signal;
  TimeSeries injected;
  std::vector<SineComponent> components;
};

struct LabeledSignal {
  TimeSeries signal;
  FaultLabel label;
};

/// samples[i] = A sin(2 pi f i / fs + phase).
TimeSeries sine(const SineComponent& component, std::size_t n, double sample_rate_hz);

double gmf(int n_teeth, double shaft_hz);

/// Amplitude whose dB gain over the baseline bin nearest f is uniform in
/// the rule's range. Reference level is max(bin magnitude, median
/// magnitude, 1e-12); the median guards silent bins, the absolute floor
/// guards all-zero baselines.
double sample_fault_amplitude(const Spectrum& baseline, double f_hz, const AmplitudeRule& rule,
                              Rng& rng);

SynthResult gen_unbalance(const TimeSeries& baseline, const MachineSpec& spec,
                          const AmplitudeRule& rule, Rng& rng);

SynthResult gen_misalignment(const TimeSeries& baseline, const MachineSpec& spec,
                             const AmplitudeRule& rule, Rng& rng);

SynthResult gen_looseness(const TimeSeries& baseline, const MachineSpec& spec,
                          const AmplitudeRule& rule, Rng& rng);

SynthResult gen_gear_fault(const TimeSeries& baseline, const MachineSpec& spec,
                           const AmplitudeRule& rule, Rng& rng);

/// Decaying resonance burst repeated at the fault frequency: the burst
/// b(t) = A sin(2 pi f_res t) exp(-t/tau) convolved with a unit impulse
/// comb of period 1/fault_hz. components stays empty; the comb has no
/// single deterministic line.
SynthResult gen_bearing_fault(const TimeSeries& baseline, const MachineSpec& spec, double fault_hz,
                              const AmplitudeRule& rule, Rng& rng);

TimeSeries gen_normal(const TimeSeries& baseline, Rng& rng);

/// Standalone fabricated baseline: fr tone + white noise + extra tones
/// near the noise floor at random frequencies/phases.
TimeSeries gen_baseline_surrogate(const MachineSpec& spec, double sample_rate_hz, std::size_t n,
                                  const SurrogateParams& params, Rng& rng);

/// One signal per FaultLabel, in label-encoding order.
std::vector<LabeledSignal> gen_all_conditions(const TimeSeries& baseline, const MachineSpec& spec,
                                              const AmplitudeRule& rule, Rng& rng);

}  // namespace faultdx::synthgen
