#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "faultdx/core.hpp"
#include "faultdx/rng.hpp"
#include "faultdx/spectral.hpp"
#include "faultdx/synthgen.hpp"

namespace faultdx::augment {

/// Draw ranges for the five operators. alpha_gauss is expressed in units
/// of the signal's own sample std; shift in samples (harness derives it
/// from a length fraction); the rest are dimensionless factors.
struct AugmentParams {
  double alpha_gauss_min = 0.01;
  double alpha_gauss_max = 0.1;
  double alpha_mask_min = 0.01;
  double alpha_mask_max = 0.1;
  std::int64_t shift_min = 0;
  std::int64_t shift_max = 0;
  double alpha_scal_min = 0.8;
  double alpha_scal_max = 1.2;
  double alpha_stre_min = 0.95;
  double alpha_stre_max = 1.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BuildPlan {
  std::size_t n_total = 0;
  std::size_t n_r = 0;
  std::size_t q_aug = 0;
};

struct AugmentedSignal {
  TimeSeries signal;
  AugmentOp op;
  double parameter;  // the drawn value actually applied
};

TimeSeries gaussian_noise(const TimeSeries& x, double alpha, Rng& rng);

/// Zeroes exactly round(alpha_mask * len) distinct positions.
TimeSeries masking_noise(const TimeSeries& x, double alpha_mask, Rng& rng);

/// Positive shift moves content toward later samples; the vacated gap is
/// zero-filled, length preserved.
TimeSeries signal_translation(const TimeSeries& x, std::int64_t shift);

TimeSeries amplitude_shift(const TimeSeries& x, double alpha_scal);

/// Resamples by alpha_stre about the window center with linear
/// interpolation; sources outside the window read as zero.
TimeSeries time_stretch(const TimeSeries& x, double alpha_stre);

/// One output per operator, parameters drawn uniformly from the ranges,
/// in the fixed order gaussian, masking, translation, amplitude, stretch.
std::array<AugmentedSignal, 5> augment_five(const TimeSeries& x, const AugmentParams& params,
                                            Rng& rng);

/// ceil(n_total / (7 * 5 * n_r)): repetitions needed so the expanded pool
/// reaches the requested size.
std::size_t compute_q_aug(std::size_t n_total, std::size_t n_r);

BuildPlan make_build_plan(std::size_t n_total, std::size_t n_r);

/// Expands baselines into the full labeled training pool: every baseline
/// through all seven conditions, each condition through all five
/// operators, q_aug times; spectra via `spectral_cfg`; excess discarded
/// class-stratified at random; 90/10 train/validation split. Baseline ids
/// (for provenance) default to their index when `ids` is empty.
LabeledDataset build_training_pool(const std::vector<TimeSeries>& baselines,
                                   const MachineSpec& spec, const synthgen::AmplitudeRule& rule,
                                   const AugmentParams& params,
                                   const spectral::SpectralConfig& spectral_cfg,
                                   std::size_t n_total, std::uint64_t seed,
                                   const std::vector<std::string>& ids = {},
                                   unsigned threads = 0);

}  // namespace faultdx::augment
