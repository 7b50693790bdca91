#include "faultdx/core.hpp"

#include <algorithm>
#include <cmath>

#include "faultdx/rng.hpp"

namespace faultdx {

namespace {
constexpr const char* kLabelNames[kNumLabels] = {
    "Normal", "BPFO", "BPFI", "Unbalance", "Misalignment", "Looseness", "GearFault"};
}

const char* label_name(FaultLabel label) {
  const int i = static_cast<int>(label);
  if (i < 0 || i >= kNumLabels) throw std::invalid_argument("label_name: index out of range");
  return kLabelNames[i];
}

FaultLabel label_from_index(int index) {
  if (index < 0 || index >= kNumLabels)
    throw std::invalid_argument("label_from_index: index out of range");
  return static_cast<FaultLabel>(index);
}

std::optional<FaultLabel> label_from_name(const std::string& name) {
  for (int i = 0; i < kNumLabels; ++i) {
    if (name == kLabelNames[i]) return static_cast<FaultLabel>(i);
  }
  return std::nullopt;
}

std::array<double, kNumLabels> label_to_onehot(FaultLabel label) {
  std::array<double, kNumLabels> out{};
  out[static_cast<std::size_t>(static_cast<int>(label))] = 1.0;
  return out;
}

TimeSeries::TimeSeries(std::vector<double> samples, double sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
  if (samples_.empty()) throw std::invalid_argument("TimeSeries: empty sample vector");
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_))
    throw std::invalid_argument("TimeSeries: sample rate must be positive and finite");
  for (double v : samples_) {
    if (!std::isfinite(v)) throw std::invalid_argument("TimeSeries: non-finite sample");
  }
}

Spectrum::Spectrum(std::vector<double> magnitudes, double df_hz, double f_start_hz,
                   bool normalized)
    : magnitudes_(std::move(magnitudes)),
      df_hz_(df_hz),
      f_start_hz_(f_start_hz),
      normalized_(normalized) {
  if (magnitudes_.empty()) throw std::invalid_argument("Spectrum: empty magnitude vector");
  if (!(df_hz_ > 0.0) || !std::isfinite(df_hz_))
    throw std::invalid_argument("Spectrum: df must be positive and finite");
  if (!std::isfinite(f_start_hz_) || f_start_hz_ < 0.0)
    throw std::invalid_argument("Spectrum: f_start must be finite and non-negative");
  for (double v : magnitudes_) {
    if (!std::isfinite(v)) throw std::invalid_argument("Spectrum: non-finite magnitude");
    if (!normalized_ && v < 0.0)
      throw std::invalid_argument("Spectrum: negative magnitude in raw spectrum");
  }
}

std::size_t Spectrum::bin_nearest(double f_hz) const {
  const double pos = (f_hz - f_start_hz_) / df_hz_;
  const double clamped = std::clamp(pos, 0.0, static_cast<double>(magnitudes_.size() - 1));
  return static_cast<std::size_t>(std::llround(clamped));
}

void MachineSpec::validate() const {
  if (!(rotation_hz > 0.0) || !std::isfinite(rotation_hz))
    throw std::invalid_argument("MachineSpec: rotation_hz must be positive");
  auto check = [](const std::optional<double>& v, const char* what) {
    if (v && (!(*v > 0.0) || !std::isfinite(*v)))
      throw std::invalid_argument(std::string("MachineSpec: ") + what + " must be positive");
  };
  check(gmf_hz, "gmf_hz");
  check(bpfo_hz, "bpfo_hz");
  check(bpfi_hz, "bpfi_hz");
  check(impact_resonance_hz, "impact_resonance_hz");
  if (looseness_harmonic_count < 1)
    throw std::invalid_argument("MachineSpec: looseness_harmonic_count must be >= 1");
}

double MachineSpec::resolve_impact_resonance(double sample_rate_hz) const {
  return impact_resonance_hz ? *impact_resonance_hz : sample_rate_hz / 8.0;
}

const char* augment_op_name(AugmentOp op) {
  switch (op) {
    case AugmentOp::None: return "none";
    case AugmentOp::GaussianNoise: return "gaussian_noise";
    case AugmentOp::MaskingNoise: return "masking_noise";
    case AugmentOp::Translation: return "translation";
    case AugmentOp::AmplitudeShift: return "amplitude_shift";
    case AugmentOp::TimeStretch: return "time_stretch";
  }
  throw std::invalid_argument("augment_op_name: bad op");
}

std::size_t LabeledDataset::count_split(Split s) const {
  return static_cast<std::size_t>(std::count(split.begin(), split.end(), s));
}

std::vector<std::size_t> LabeledDataset::indices_of(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == s) out.push_back(i);
  }
  return out;
}

std::array<std::size_t, kNumLabels> LabeledDataset::class_counts() const {
  std::array<std::size_t, kNumLabels> counts{};
  for (const auto& s : samples) counts[static_cast<std::size_t>(static_cast<int>(s.label))]++;
  return counts;
}

std::uint64_t LabeledDataset::digest() const {
  std::uint64_t h = kFnvOffset;
  const std::uint64_t n = samples.size();
  h = fnv1a64(&n, sizeof(n), h);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::int32_t label = static_cast<std::int32_t>(samples[i].label);
    const std::int32_t sp = static_cast<std::int32_t>(split[i]);
    h = fnv1a64(&label, sizeof(label), h);
    h = fnv1a64(&sp, sizeof(sp), h);
    const auto& mags = samples[i].spectrum.magnitudes();
    h = fnv1a64(mags.data(), mags.size() * sizeof(double), h);
  }
  return h;
}

}  // namespace faultdx
