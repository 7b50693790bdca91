#include "faultdx/explain.hpp"

#include <algorithm>
#include <cmath>

namespace faultdx::explain {

Heatmap gradcam(const net1d::TrainedModel& model, const Spectrum& spectrum, FaultLabel target) {
  const auto& arch = model.arch;
  if (spectrum.size() != static_cast<std::size_t>(arch.input_len))
    throw std::invalid_argument("gradcam: spectrum length does not match the model input");

  net1d::ForwardCache cache;
  net1d::forward(arch, model.weights, spectrum.magnitudes(), cache, nullptr);
  const std::vector<double> dmaps =
      net1d::head_gradient(arch, model.weights, cache, static_cast<int>(target));

  const std::size_t F = static_cast<std::size_t>(arch.conv_filters);
  const std::size_t CL = static_cast<std::size_t>(arch.conv_len());
  std::vector<double> cam(CL, 0.0);
  for (std::size_t f = 0; f < F; ++f) {
    const double* g = dmaps.data() + f * CL;
    double alpha = 0.0;
    for (std::size_t i = 0; i < CL; ++i) alpha += g[i];
    alpha /= static_cast<double>(CL);
    const double* a = cache.conv_a.data() + f * CL;
    for (std::size_t i = 0; i < CL; ++i) cam[i] += alpha * a[i];
  }
  for (double& v : cam) v = v > 0.0 ? v : 0.0;

  const std::size_t L = static_cast<std::size_t>(arch.input_len);
  std::vector<double> raw(L, 0.0);
  if (CL == 1 || L == 1) {
    std::fill(raw.begin(), raw.end(), cam[0]);
  } else {
    const double step = static_cast<double>(CL - 1) / static_cast<double>(L - 1);
    for (std::size_t i = 0; i < L; ++i) {
      const double src = static_cast<double>(i) * step;
      const double lo = std::floor(src);
      const double frac = src - lo;
      const std::size_t j = static_cast<std::size_t>(lo);
      raw[i] = frac == 0.0 ? cam[j] : cam[j] * (1.0 - frac) + cam[j + 1] * frac;
    }
  }

  Heatmap heat;
  heat.raw = raw;
  heat.target_class = target;
  const double peak = *std::max_element(raw.begin(), raw.end());
  heat.normalized_peak = peak > 0.0;
  heat.relevance = std::move(raw);
  if (heat.normalized_peak) {
    for (double& v : heat.relevance) v /= peak;
  }
  return heat;
}

Explanation explain_prediction(const net1d::TrainedModel& model, const Spectrum& spectrum) {
  Explanation out;
  const auto [label, probs] = net1d::predict(model, spectrum);
  out.label = label;
  out.probabilities = probs;
  out.heatmap = gradcam(model, spectrum, label);

  const auto& rel = out.heatmap.relevance;
  const std::size_t n = rel.size();
  const double peak = *std::max_element(rel.begin(), rel.end());
  if (peak > 0.0) {
    const double threshold = 0.5 * peak;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = rel[i];
      if (!(v > threshold)) continue;
      const bool rises = i == 0 || v > rel[i - 1];
      const bool falls = i + 1 == n || v >= rel[i + 1];
      if (rises && falls) out.top_frequencies.emplace_back(spectrum.frequency_at(i), v);
    }
    std::sort(out.top_frequencies.begin(), out.top_frequencies.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });
  }
  return out;
}

}  // namespace faultdx::explain
