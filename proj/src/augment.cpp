#include "faultdx/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "faultdx/threading.hpp"

namespace faultdx::augment {

namespace {

double sample_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / n);
}

void check_range(double lo, double hi, const char* what) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument(std::string("AugmentParams: bad ") + what + " range");
}

}  // namespace

void AugmentParams::validate() const {
  check_range(alpha_gauss_min, alpha_gauss_max, "alpha_gauss");
  check_range(alpha_mask_min, alpha_mask_max, "alpha_mask");
  check_range(alpha_scal_min, alpha_scal_max, "alpha_scal");
  check_range(alpha_stre_min, alpha_stre_max, "alpha_stre");
  if (shift_min > shift_max) throw std::invalid_argument("AugmentParams: bad shift range");
  if (alpha_gauss_min < 0.0) throw std::invalid_argument("AugmentParams: negative alpha_gauss");
  if (alpha_mask_min < 0.0 || alpha_mask_max > 1.0)
    throw std::invalid_argument("AugmentParams: alpha_mask outside [0,1]");
  if (!(alpha_stre_min > 0.0)) throw std::invalid_argument("AugmentParams: alpha_stre must be > 0");
  if (!(alpha_scal_min > 0.0)) throw std::invalid_argument("AugmentParams: alpha_scal must be > 0");
}

TimeSeries gaussian_noise(const TimeSeries& x, double alpha, Rng& rng) {
  if (alpha < 0.0) throw std::invalid_argument("gaussian_noise: negative alpha");
  std::vector<double> out = x.samples();
  if (alpha > 0.0) {
    for (double& v : out) v += alpha * rng.normal();
  }
  return TimeSeries(std::move(out), x.sample_rate_hz());
}

TimeSeries masking_noise(const TimeSeries& x, double alpha_mask, Rng& rng) {
  if (alpha_mask < 0.0 || alpha_mask > 1.0)
    throw std::invalid_argument("masking_noise: alpha_mask outside [0,1]");
  const std::size_t n = x.size();
  const std::size_t count =
      static_cast<std::size_t>(std::llround(alpha_mask * static_cast<double>(n)));
  std::vector<double> out = x.samples();
  if (count > 0) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n - 1)));
      std::swap(idx[i], idx[j]);
      out[idx[i]] = 0.0;
    }
  }
  return TimeSeries(std::move(out), x.sample_rate_hz());
}

TimeSeries signal_translation(const TimeSeries& x, std::int64_t shift) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  if (shift <= -n || shift >= n)
    throw std::invalid_argument("signal_translation: |shift| must be below the signal length");
  std::vector<double> out(x.size(), 0.0);
  const auto& in = x.samples();
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t src = i - shift;
    if (src >= 0 && src < n) out[static_cast<std::size_t>(i)] = in[static_cast<std::size_t>(src)];
  }
  return TimeSeries(std::move(out), x.sample_rate_hz());
}

TimeSeries amplitude_shift(const TimeSeries& x, double alpha_scal) {
  if (!(alpha_scal > 0.0)) throw std::invalid_argument("amplitude_shift: alpha_scal must be > 0");
  std::vector<double> out = x.samples();
  for (double& v : out) v *= alpha_scal;
  return TimeSeries(std::move(out), x.sample_rate_hz());
}

TimeSeries time_stretch(const TimeSeries& x, double alpha_stre) {
  if (!(alpha_stre > 0.0)) throw std::invalid_argument("time_stretch: alpha_stre must be > 0");
  const std::size_t n = x.size();
  const auto& in = x.samples();
  std::vector<double> out(n, 0.0);
  const double center = 0.5 * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double src = center + (static_cast<double>(i) - center) / alpha_stre;
    if (src < 0.0 || src > static_cast<double>(n - 1)) continue;
    const double lo = std::floor(src);
    const double frac = src - lo;
    const std::size_t j = static_cast<std::size_t>(lo);
    out[i] = frac == 0.0 ? in[j] : in[j] * (1.0 - frac) + in[j + 1] * frac;
  }
  return TimeSeries(std::move(out), x.sample_rate_hz());
}

std::array<AugmentedSignal, 5> augment_five(const TimeSeries& x, const AugmentParams& params,
                                            Rng& rng) {
  params.validate();
  const double rel = rng.uniform(params.alpha_gauss_min, params.alpha_gauss_max);
  const double alpha_gauss = rel * sample_std(x.samples());
  TimeSeries gauss = gaussian_noise(x, alpha_gauss, rng);

  const double alpha_mask = rng.uniform(params.alpha_mask_min, params.alpha_mask_max);
  TimeSeries mask = masking_noise(x, alpha_mask, rng);

  const std::int64_t limit = static_cast<std::int64_t>(x.size()) - 1;
  const std::int64_t shift = std::clamp(rng.uniform_int(params.shift_min, params.shift_max),
                                        -limit, limit);
  TimeSeries shifted = signal_translation(x, shift);

  const double alpha_scal = rng.uniform(params.alpha_scal_min, params.alpha_scal_max);
  TimeSeries scaled = amplitude_shift(x, alpha_scal);

  const double alpha_stre = rng.uniform(params.alpha_stre_min, params.alpha_stre_max);
  TimeSeries stretched = time_stretch(x, alpha_stre);

  return {AugmentedSignal{std::move(gauss), AugmentOp::GaussianNoise, alpha_gauss},
          AugmentedSignal{std::move(mask), AugmentOp::MaskingNoise, alpha_mask},
          AugmentedSignal{std::move(shifted), AugmentOp::Translation,
                          static_cast<double>(shift)},
          AugmentedSignal{std::move(scaled), AugmentOp::AmplitudeShift, alpha_scal},
          AugmentedSignal{std::move(stretched), AugmentOp::TimeStretch, alpha_stre}};
}

std::size_t compute_q_aug(std::size_t n_total, std::size_t n_r) {
  if (n_total < 1 || n_r < 1)
    throw std::invalid_argument("compute_q_aug: n_total and n_r must be >= 1");
  const std::size_t per_pass = 35 * n_r;
  return (n_total + per_pass - 1) / per_pass;
}

BuildPlan make_build_plan(std::size_t n_total, std::size_t n_r) {
  BuildPlan plan;
  plan.n_total = n_total;
  plan.n_r = n_r;
  plan.q_aug = compute_q_aug(n_total, n_r);
  return plan;
}

LabeledDataset build_training_pool(const std::vector<TimeSeries>& baselines,
                                   const MachineSpec& spec, const synthgen::AmplitudeRule& rule,
                                   const AugmentParams& params,
                                   const spectral::SpectralConfig& spectral_cfg,
                                   std::size_t n_total, std::uint64_t seed,
                                   const std::vector<std::string>& ids, unsigned threads) {
  if (baselines.empty()) throw std::invalid_argument("build_training_pool: no baselines");
  if (n_total < 35)
    throw std::invalid_argument("build_training_pool: n_total below one expansion pass (35)");
  if (!ids.empty() && ids.size() != baselines.size())
    throw std::invalid_argument("build_training_pool: ids/baselines size mismatch");
  params.validate();

  const std::size_t n_r = baselines.size();
  const std::size_t q_aug = compute_q_aug(n_total, n_r);
  const std::size_t n_tasks = q_aug * n_r;
  const std::uint64_t pool_seed = derive_seed(seed, "pool", params.seed);

  std::vector<std::optional<LabeledSample>> slots(n_tasks * 35);
  parallel_for(n_tasks, threads, [&](std::size_t t) {
    const std::size_t rep = t / n_r;
    const std::size_t b = t % n_r;
    const std::uint64_t task_seed =
        derive_seed(pool_seed, "task", static_cast<std::uint64_t>(rep),
                    static_cast<std::uint64_t>(b));
    Rng rng(task_seed);
    const std::string origin =
        (ids.empty() ? "baseline-" + std::to_string(b) : ids[b]) + "/rep" + std::to_string(rep);
    const auto conditions = synthgen::gen_all_conditions(baselines[b], spec, rule, rng);
    for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
      const auto five = augment_five(conditions[ci].signal, params, rng);
      for (std::size_t oi = 0; oi < five.size(); ++oi) {
        Spectrum sp = spectral::preprocess(five[oi].signal, spectral_cfg);
        slots[t * 35 + ci * 5 + oi] = LabeledSample{
            std::move(sp), conditions[ci].label, Provenance{origin, five[oi].op, task_seed}};
      }
    }
  });

  const std::size_t generated = slots.size();
  const std::size_t excess = generated - std::min(n_total, generated);
  std::vector<bool> removed(generated, false);
  if (excess > 0) {
    Rng discard_rng(derive_seed(pool_seed, "discard"));
    std::array<std::vector<std::size_t>, kNumLabels> by_class;
    for (std::size_t i = 0; i < generated; ++i) {
      by_class[static_cast<std::size_t>(static_cast<int>(slots[i]->label))].push_back(i);
    }
    std::array<std::size_t, kNumLabels> to_remove{};
    to_remove.fill(excess / kNumLabels);
    std::array<std::size_t, kNumLabels> order{};
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const std::size_t j = static_cast<std::size_t>(
          discard_rng.uniform_int(static_cast<std::int64_t>(i),
                                  static_cast<std::int64_t>(order.size() - 1)));
      std::swap(order[i], order[j]);
    }
    for (std::size_t i = 0; i < excess % kNumLabels; ++i) to_remove[order[i]]++;
    for (std::size_t c = 0; c < kNumLabels; ++c) {
      auto& pool = by_class[c];
      const std::size_t r = std::min(to_remove[c], pool.size());
      for (std::size_t i = 0; i < r; ++i) {
        const std::size_t j = static_cast<std::size_t>(
            discard_rng.uniform_int(static_cast<std::int64_t>(i),
                                    static_cast<std::int64_t>(pool.size() - 1)));
        std::swap(pool[i], pool[j]);
        removed[pool[i]] = true;
      }
    }
  }

  LabeledDataset ds;
  ds.samples.reserve(n_total);
  std::vector<std::size_t> group_of;
  group_of.reserve(n_total);
  for (std::size_t i = 0; i < generated; ++i) {
    if (!removed[i]) {
      ds.samples.push_back(std::move(*slots[i]));
      group_of.push_back(i / 5);
    }
  }

  // The five operator variants of one generated signal are near-duplicates;
  // splitting them across train and validation would leak and inflate the
  // validation accuracy that drives early stopping, so groups stay together.
  const std::size_t n = ds.samples.size();
  const std::size_t n_val =
      static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n)));
  std::vector<std::vector<std::size_t>> groups;
  {
    std::size_t prev = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i < n; ++i) {
      if (group_of[i] != prev) {
        groups.emplace_back();
        prev = group_of[i];
      }
      groups.back().push_back(i);
    }
  }
  Rng split_rng(derive_seed(pool_seed, "split"));
  for (std::size_t i = 0; i + 1 < groups.size(); ++i) {
    const std::size_t j = static_cast<std::size_t>(split_rng.uniform_int(
        static_cast<std::int64_t>(i), static_cast<std::int64_t>(groups.size() - 1)));
    std::swap(groups[i], groups[j]);
  }
  ds.split.assign(n, Split::Train);
  std::size_t assigned = 0;
  for (const auto& g : groups) {
    if (assigned >= n_val) break;
    for (std::size_t i : g) {
      if (assigned >= n_val) break;
      ds.split[i] = Split::Validation;
      ++assigned;
    }
  }
  return ds;
}

}  // namespace faultdx::augment
