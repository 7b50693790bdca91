#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace faultdx {

// File/format problems (bad signal file, corrupt model, config typos).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric breakdown (non-finite loss, degenerate statistics).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Machine condition vocabulary. The integer encoding is load-bearing:
/// one-hot targets and confusion-matrix axes use this order.
enum class FaultLabel : int {
  Normal = 0,
  Bpfo = 1,
  Bpfi = 2,
  Unbalance = 3,
  Misalignment = 4,
  Looseness = 5,
  GearFault = 6,
};

inline constexpr int kNumLabels = 7;

const char* label_name(FaultLabel label);
FaultLabel label_from_index(int index);
std::optional<FaultLabel> label_from_name(const std::string& name);

std::array<double, kNumLabels> label_to_onehot(FaultLabel label);

/// Uniformly sampled real-valued vibration signal.
class TimeSeries {
 public:
  TimeSeries(std::vector<double> samples, double sample_rate_hz);

  const std::vector<double>& samples() const { return samples_; }
  std::vector<double>& samples() { return samples_; }
  double sample_rate_hz() const { return sample_rate_hz_; }
  std::size_t size() const { return samples_.size(); }
  double nyquist_hz() const { return 0.5 * sample_rate_hz_; }
  double duration_s() const { return static_cast<double>(samples_.size()) / sample_rate_hz_; }

 private:
  std::vector<double> samples_;
  double sample_rate_hz_;
};

/// Single-sided magnitude spectrum. Bin k sits at f_start_hz + k*df_hz.
/// Magnitudes are non-negative until z-score normalization flips
/// `normalized` and allows signed values.
class Spectrum {
 public:
  Spectrum(std::vector<double> magnitudes, double df_hz, double f_start_hz = 0.0,
           bool normalized = false);

  const std::vector<double>& magnitudes() const { return magnitudes_; }
  std::vector<double>& magnitudes() { return magnitudes_; }
  double df_hz() const { return df_hz_; }
  double f_start_hz() const { return f_start_hz_; }
  bool normalized() const { return normalized_; }
  std::size_t size() const { return magnitudes_.size(); }

  double frequency_at(std::size_t bin) const { return f_start_hz_ + static_cast<double>(bin) * df_hz_; }
  /// Index of the bin whose center frequency is closest to f, clamped to range.
  std::size_t bin_nearest(double f_hz) const;

 private:
  std::vector<double> magnitudes_;
  double df_hz_;
  double f_start_hz_;
  bool normalized_;
};

/// Characteristic frequencies and synthesis parameters of one machine.
/// Frequencies not applicable to the machine stay unset; generators that
/// need them reject the call. `impact_resonance_hz` unset means "pick
/// fs/8 at synthesis time".
struct MachineSpec {
  double rotation_hz = 0.0;
  std::optional<double> gmf_hz;
  std::optional<double> bpfo_hz;
  std::optional<double> bpfi_hz;
  std::optional<double> impact_resonance_hz;
  int looseness_harmonic_count = 4;

  void validate() const;
  double resolve_impact_resonance(double sample_rate_hz) const;
};

enum class AugmentOp : int {
  None = 0,
  GaussianNoise = 1,
  MaskingNoise = 2,
  Translation = 3,
  AmplitudeShift = 4,
  TimeStretch = 5,
};

const char* augment_op_name(AugmentOp op);

/// Enough bookkeeping to regenerate a sample from the experiment config.
struct Provenance {
  std::string origin_signal_id;
  AugmentOp augmentation_op = AugmentOp::None;
  std::uint64_t rng_seed = 0;
};

struct LabeledSample {
  Spectrum spectrum;
  FaultLabel label;
  Provenance provenance;
};

enum class Split : int { Train = 0, Validation = 1, Test = 2 };

struct LabeledDataset {
  std::vector<LabeledSample> samples;
  std::vector<Split> split;  // parallel to samples

  std::size_t size() const { return samples.size(); }
  std::size_t count_split(Split s) const;
  std::vector<std::size_t> indices_of(Split s) const;
  std::array<std::size_t, kNumLabels> class_counts() const;
  /// FNV-1a digest over labels, splits and magnitude bytes, for
  /// reproducibility checks.
  std::uint64_t digest() const;
};

}  // namespace faultdx
