#include "faultdx/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "faultdx/augment.hpp"
#include "faultdx/rng.hpp"
#include "faultdx/signal_io.hpp"
#include "faultdx/spectral.hpp"
#include "faultdx/synthgen.hpp"
#include "faultdx/threading.hpp"

namespace faultdx::harness {
namespace {

std::vector<std::filesystem::path> sorted_txt_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

augment::AugmentParams resolve_augment_params(const ExperimentConfig& cfg,
                                              const std::vector<TimeSeries>& baselines) {
  augment::AugmentParams p = cfg.augment;
  std::size_t min_len = baselines.front().size();
  for (const TimeSeries& b : baselines) min_len = std::min(min_len, b.size());
  auto reach = static_cast<std::int64_t>(
      std::llround(cfg.shift_frac * static_cast<double>(min_len)));
  reach = std::min<std::int64_t>(reach, static_cast<std::int64_t>(min_len) - 1);
  p.shift_min = -reach;
  p.shift_max = reach;
  return p;
}

}  // namespace

BaselineSet make_training_baselines(const ExperimentConfig& cfg) {
  BaselineSet set;
  if (cfg.n_r == 0) {
    for (std::size_t b = 0; b < cfg.surrogates_when_zero_real; ++b) {
      Rng rng(derive_seed(cfg.master_seed, "zero-real-baseline", b));
      set.signals.push_back(synthgen::gen_baseline_surrogate(cfg.machine, cfg.surrogate_fs,
                                                             cfg.surrogate_n, cfg.surrogate, rng));
      set.ids.push_back("surrogate-" + std::to_string(b));
    }
    return set;
  }
  if (cfg.baseline_source == "files") {
    auto files = sorted_txt_files(cfg.train_signal_dir);
    if (files.size() < cfg.n_r) {
      throw DataError("need " + std::to_string(cfg.n_r) + " baseline signals in " +
                      cfg.train_signal_dir + ", found " + std::to_string(files.size()));
    }
    for (std::size_t b = 0; b < cfg.n_r; ++b) {
      set.signals.push_back(load_signal(files[b]));
      set.ids.push_back(files[b].filename().string());
    }
    return set;
  }
  for (std::size_t b = 0; b < cfg.n_r; ++b) {
    Rng rng(derive_seed(cfg.master_seed, "train-baseline", b));
    set.signals.push_back(synthgen::gen_baseline_surrogate(cfg.machine, cfg.surrogate_fs,
                                                           cfg.surrogate_n, cfg.surrogate, rng));
    set.ids.push_back("train-" + std::to_string(b));
  }
  return set;
}

LabeledDataset build_test_set(const ExperimentConfig& cfg) {
  LabeledDataset ds;
  if (cfg.baseline_source == "files" && !cfg.test_signal_dir.empty()) {
    for (int li = 0; li < kNumLabels; ++li) {
      FaultLabel label = label_from_index(li);
      std::filesystem::path dir = std::filesystem::path(cfg.test_signal_dir) / label_name(label);
      if (!std::filesystem::is_directory(dir)) continue;
      for (const auto& file : sorted_txt_files(dir)) {
        TimeSeries sig = load_signal(file);
        Provenance prov{file.filename().string(), AugmentOp::None, 0};
        ds.samples.push_back(
            LabeledSample{spectral::preprocess(sig, cfg.spectral), label, prov});
        ds.split.push_back(Split::Test);
      }
    }
    if (ds.samples.empty()) {
      throw DataError("no test signals found under " + cfg.test_signal_dir);
    }
    return ds;
  }

  const std::size_t n_base = cfg.test_baselines;
  const std::size_t total = n_base * static_cast<std::size_t>(kNumLabels);
  std::vector<std::optional<LabeledSample>> slots(total);
  parallel_for(n_base, resolve_threads(cfg.train.threads), [&](std::size_t b) {
    std::uint64_t base_seed = derive_seed(cfg.master_seed, "test-baseline", b);
    Rng base_rng(base_seed);
    TimeSeries baseline = synthgen::gen_baseline_surrogate(cfg.machine, cfg.surrogate_fs,
                                                           cfg.surrogate_n, cfg.surrogate, base_rng);
    std::uint64_t cond_seed = derive_seed(cfg.master_seed, "test-cond", b);
    Rng cond_rng(cond_seed);
    auto conds = synthgen::gen_all_conditions(baseline, cfg.machine, cfg.amplitude, cond_rng);
    for (std::size_t ci = 0; ci < conds.size(); ++ci) {
      Provenance prov{"test-" + std::to_string(b), AugmentOp::None, cond_seed};
      slots[b * kNumLabels + ci] =
          LabeledSample{spectral::preprocess(conds[ci].signal, cfg.spectral), conds[ci].label,
                        std::move(prov)};
    }
  });
  for (auto& slot : slots) {
    ds.samples.push_back(std::move(*slot));
    ds.split.push_back(Split::Test);
  }
  return ds;
}

Evaluation evaluate_model(const net1d::TrainedModel& model, const LabeledDataset& test_set) {
  Evaluation ev;
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < test_set.samples.size(); ++i) {
    if (test_set.split[i] != Split::Test) continue;
    const LabeledSample& s = test_set.samples[i];
    auto [pred, probs] = net1d::predict(model, s.spectrum);
    (void)probs;
    ev.confusion[static_cast<int>(s.label)][static_cast<int>(pred)] += 1;
    if (pred == s.label) ++correct;
    ++ev.total;
  }
  if (ev.total == 0) throw std::invalid_argument("test set has no samples marked Test");
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(ev.total);
  return ev;
}

LabeledDataset build_pool_for_run(const ExperimentConfig& cfg, const BaselineSet& baselines,
                                  int run_index) {
  if (baselines.signals.empty()) throw std::invalid_argument("no baselines to build a pool from");
  augment::AugmentParams aug = resolve_augment_params(cfg, baselines.signals);
  std::uint64_t pool_seed = derive_seed(cfg.master_seed, "run", run_index, "pool");
  return augment::build_training_pool(baselines.signals, cfg.machine, cfg.amplitude, aug,
                                      cfg.spectral, cfg.n_total, pool_seed, baselines.ids,
                                      cfg.train.threads);
}

RunResult run_single(const ExperimentConfig& cfg, const BaselineSet& baselines,
                     const LabeledDataset& test_set, int run_index) {
  auto t0 = std::chrono::steady_clock::now();

  LabeledDataset pool = build_pool_for_run(cfg, baselines, run_index);

  net1d::Architecture arch = cfg.arch;
  arch.input_len = pool.samples.front().spectrum.size();
  arch.validate();

  net1d::TrainConfig tcfg = cfg.train;
  tcfg.seed = derive_seed(cfg.master_seed, "run", run_index, "train");

  RunResult result;
  result.run_index = run_index;
  result.model = net1d::train(pool, arch, tcfg);

  Evaluation ev = evaluate_model(result.model, test_set);
  result.accuracy = ev.accuracy;
  result.confusion = ev.confusion;

  auto t1 = std::chrono::steady_clock::now();
  result.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

EvalReport aggregate_runs(const std::vector<RunResult>& runs, std::size_t test_total) {
  if (runs.empty()) throw std::invalid_argument("no runs to aggregate");
  EvalReport report;
  report.test_total = test_total;
  for (const RunResult& r : runs) {
    report.per_run_accuracy.push_back(r.accuracy);
    report.confusions.push_back(r.confusion);
    report.wall_seconds.push_back(r.wall_seconds);
  }
  const double n = static_cast<double>(runs.size());
  double mean = 0.0;
  for (double a : report.per_run_accuracy) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : report.per_run_accuracy) var += (a - mean) * (a - mean);
  var /= n;
  report.mean_accuracy = mean;
  report.std_accuracy = std::sqrt(var);

  for (int i = 0; i < kNumLabels; ++i) {
    for (int j = 0; j < kNumLabels; ++j) {
      double m = 0.0;
      for (const auto& c : report.confusions) m += static_cast<double>(c[i][j]);
      m /= n;
      double v = 0.0;
      for (const auto& c : report.confusions) {
        double d = static_cast<double>(c[i][j]) - m;
        v += d * d;
      }
      v /= n;
      report.confusion_mean[i][j] = m;
      report.confusion_std[i][j] = std::sqrt(v);
    }
  }
  return report;
}

EvalReport run_experiment(const ExperimentConfig& cfg, const LabeledDataset& test_set,
                          const RunCallback& on_run) {
  BaselineSet baselines = make_training_baselines(cfg);
  std::vector<RunResult> runs;
  runs.reserve(static_cast<std::size_t>(cfg.repetitions));
  for (int r = 1; r <= cfg.repetitions; ++r) {
    runs.push_back(run_single(cfg, baselines, test_set, r));
    if (on_run) on_run(runs.back());
  }
  return aggregate_runs(runs, test_set.count_split(Split::Test));
}

std::vector<SweepRow> sweep_total_size(const ExperimentConfig& cfg,
                                       const std::vector<std::size_t>& sizes,
                                       const RunCallback& on_run) {
  if (sizes.empty()) throw std::invalid_argument("sweep needs at least one size");
  LabeledDataset test_set = build_test_set(cfg);
  std::vector<SweepRow> rows;
  for (std::size_t s : sizes) {
    ExperimentConfig c = cfg;
    c.n_total = s;
    EvalReport rep = run_experiment(c, test_set, on_run);
    rows.push_back(SweepRow{static_cast<double>(s), rep.mean_accuracy, rep.std_accuracy});
  }
  return rows;
}

std::vector<SweepRow> sweep_real_count(const ExperimentConfig& cfg,
                                       const std::vector<std::size_t>& counts,
                                       const RunCallback& on_run) {
  if (counts.empty()) throw std::invalid_argument("sweep needs at least one count");
  LabeledDataset test_set = build_test_set(cfg);
  std::vector<SweepRow> rows;
  for (std::size_t k : counts) {
    ExperimentConfig c = cfg;
    c.n_r = k;
    EvalReport rep = run_experiment(c, test_set, on_run);
    rows.push_back(SweepRow{static_cast<double>(k), rep.mean_accuracy, rep.std_accuracy});
  }
  return rows;
}

}  // namespace faultdx::harness
