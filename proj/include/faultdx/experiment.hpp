#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "faultdx/config.hpp"
#include "faultdx/core.hpp"
#include "faultdx/net1d.hpp"

namespace faultdx::harness {

using ConfusionCounts = std::array<std::array<std::int64_t, kNumLabels>, kNumLabels>;
using ConfusionStats = std::array<std::array<double, kNumLabels>, kNumLabels>;

struct BaselineSet {
  std::vector<TimeSeries> signals;
  std::vector<std::string> ids;
};

struct RunResult {
  int run_index = 0;  // 1-based
  double accuracy = 0.0;
  ConfusionCounts confusion{};  // rows true, columns predicted
  double wall_seconds = 0.0;
  net1d::TrainedModel model;
};

struct EvalReport {
  std::vector<double> per_run_accuracy;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population
  std::vector<ConfusionCounts> confusions;
  ConfusionStats confusion_mean{};
  ConfusionStats confusion_std{};
  std::vector<double> wall_seconds;
  std::size_t test_total = 0;
};

/// Healthy baselines for pool building. Surrogate mode draws them from the
/// per-baseline seed streams of `cfg.master_seed`; with n_r = 0 a separate
/// stream supplies `cfg.surrogates_when_zero_real` stand-ins. File mode
/// loads the first n_r signals of `cfg.train_signal_dir` in name order.
BaselineSet make_training_baselines(const ExperimentConfig& cfg);

/// Held-out fault samples, one spectrum per condition per test baseline,
/// never augmented. Surrogate mode synthesizes them; file mode reads
/// `<test_dir>/<LabelName>/*.txt`.
LabeledDataset build_test_set(const ExperimentConfig& cfg);

struct Evaluation {
  double accuracy = 0.0;
  ConfusionCounts confusion{};
  std::size_t total = 0;
};

Evaluation evaluate_model(const net1d::TrainedModel& model, const LabeledDataset& test_set);

/// Augmented training pool for one run; `run_index` (1-based) selects the
/// run's seed stream. Translation ranges come from cfg.shift_frac and the
/// shortest baseline.
LabeledDataset build_pool_for_run(const ExperimentConfig& cfg, const BaselineSet& baselines,
                                  int run_index);

/// One pool-build + train + evaluate cycle. `run_index` is 1-based and
/// selects the run's seed streams.
RunResult run_single(const ExperimentConfig& cfg, const BaselineSet& baselines,
                     const LabeledDataset& test_set, int run_index);

using RunCallback = std::function<void(const RunResult&)>;

/// The full protocol: cfg.repetitions independent runs against one fixed
/// test set, aggregated to mean/std accuracy and confusion statistics.
/// `on_run` (optional) fires after each run so callers can persist partial
/// results; runs already reported survive a later abort.
EvalReport run_experiment(const ExperimentConfig& cfg, const LabeledDataset& test_set,
                          const RunCallback& on_run = nullptr);

EvalReport aggregate_runs(const std::vector<RunResult>& runs, std::size_t test_total);

struct SweepRow {
  double parameter = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

/// Repeats the experiment for each pool size, same test set throughout.
std::vector<SweepRow> sweep_total_size(const ExperimentConfig& cfg,
                                       const std::vector<std::size_t>& sizes,
                                       const RunCallback& on_run = nullptr);

/// Repeats the experiment for each baseline count (0 switches to surrogate
/// stand-ins), same test set throughout.
std::vector<SweepRow> sweep_real_count(const ExperimentConfig& cfg,
                                       const std::vector<std::size_t>& counts,
                                       const RunCallback& on_run = nullptr);

}  // namespace faultdx::harness
