#pragma once

#include <array>
#include <utility>
#include <vector>

#include "faultdx/core.hpp"
#include "faultdx/net1d.hpp"

namespace faultdx::explain {

/// Per-bin relevance aligned with the explained spectrum. `relevance` is
/// peak-scaled to 1 when any activation survives the ReLU; `raw` keeps
/// the unscaled values.
struct Heatmap {
  std::vector<double> relevance;
  std::vector<double> raw;
  FaultLabel target_class = FaultLabel::Normal;
  bool normalized_peak = false;
};

struct Explanation {
  FaultLabel label = FaultLabel::Normal;
  std::array<double, kNumLabels> probabilities{};
  Heatmap heatmap;
  std::vector<std::pair<double, double>> top_frequencies;  // (Hz, relevance)
};

///// Grad-CAM over the conv feature maps: per-filter weights are the mean
/// gradient of the target logit over positions, the map is
/// ReLU(sum_f weight_f * A_f) linearly interpolated back to input length.
Heatmap gradcam(const net1d::TrainedModel& model, const Spectrum& spectrum, FaultLabel target);

/// predict + gradcam on the predicted class; top_frequencies lists local
/// maxima above half the peak, strongest first, ties by ascending
/// frequency.
Explanation explain_prediction(const net1d::TrainedModel& model, const Spectrum& spectrum);

}  // namespace faultdx::explain
