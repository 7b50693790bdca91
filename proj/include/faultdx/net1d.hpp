#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "faultdx/core.hpp"
#include "faultdx/rng.hpp"

namespace faultdx::net1d {

/// conv(valid, stride 1) -> ReLU -> dropout -> max-pool -> flatten ->
/// dense+ReLU -> dense -> softmax.
struct Architecture {
  int input_len = 0;
  int conv_filters = 32;
  int kernel_size = 5;
  int pool_size = 4;
  double dropout_rate = 0.5;
  int dense_units = 100;
  int n_classes = kNumLabels;

  int conv_len() const { return input_len - kernel_size + 1; }
  int pooled_len() const { return conv_len() / pool_size; }
  int flat_len() const { return conv_filters * pooled_len(); }

  void validate() const;
};

/// One tensor set in declaration order: conv kernels [filters x kernel],
/// conv biases [filters], hidden dense [dense_units x flat_len] + bias,
/// output dense [n_classes x dense_units] + bias. Doubles as gradient and
/// Adam-moment storage.
struct ParamSet {
  std::vector<double> conv_k;
  std::vector<double> conv_b;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<double> b2;

  static ParamSet zeros(const Architecture& arch);
  void fill_zero();
  std::size_t total_count() const;
  bool shaped_like(const Architecture& arch) const;
  std::array<std::vector<double>*, 6> tensors();
  std::array<const std::vector<double>*, 6> tensors() const;
};

using ModelWeights = ParamSet;

/// Fan-in-scaled uniform init for the ReLU stack; biases start at zero.
ModelWeights init_weights(const Architecture& arch, Rng& rng);

struct ForwardCache {
  std::vector<double> input;
  std::vector<double> conv_z;     // pre-activation, [filters x conv_len]
  std::vector<double> conv_a;     // post-ReLU feature maps (Grad-CAM reads these)
  std::vector<double> conv_p;     // post-dropout maps fed to pooling
  std::vector<int> pool_arg;      // argmax position per pool window
  std::vector<double> flat;
  std::vector<double> z1;
  std::vector<double> h1;
  std::vector<double> logits;
  std::vector<double> probs;
};

/// Inverted-dropout mask over the conv maps: entries are 0 or 1/(1-rate).
std::vector<double> make_dropout_mask(const Architecture& arch, double rate, Rng& rng);

/// Runs the stack and fills the cache. mask == nullptr means inference
/// (dropout disabled); training passes a mask from make_dropout_mask.
void forward(const Architecture& arch, const ModelWeights& w, std::span<const double> x,
             ForwardCache& cache, const std::vector<double>* mask = nullptr);

double loss(std::span<const double> probs, std::span<const double> onehot);

/// Accumulates this sample's gradients into grads (caller zeroes between
/// batches). Max-pool routes to the cached argmax; the dropout mask from
/// the forward pass is reapplied on the way back.
void backward(const Architecture& arch, const ModelWeights& w, const ForwardCache& cache,
              std::span<const double> onehot, const std::vector<double>* mask, ParamSet& grads);

struct AdamParams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  ParamSet m;
  ParamSet v;

  static AdamState zeros(const Architecture& arch);
};

/// Standard bias-corrected Adam update, t counts steps from 1.
void adam_step(ModelWeights& w, const ParamSet& grads, AdamState& state, std::int64_t t,
               const AdamParams& params);

struct TrainConfig {
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int patience = 8;
  double min_delta = 0.001;  // validation-accuracy improvement threshold
  int max_epochs = 200;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

/// Tracks best validation accuracy; an epoch improves only when it beats
/// the best by more than min_delta. The first epoch always becomes the
/// best. Stops after `patience` consecutive non-improving epochs.
class EarlyStopper {
 public:
  EarlyStopper(int patience, double min_delta);

  /// Returns true when training should stop after this observation.
  bool observe(double val_metric);
  bool improved_last() const { return improved_last_; }
  int best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_metric_; }
  int epochs_seen() const { return epochs_seen_; }

 private:
  int patience_;
  double min_delta_;
  double best_metric_ = 0.0;
  int best_epoch_ = 0;
  int wait_ = 0;
  int epochs_seen_ = 0;
  bool improved_last_ = false;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainedModel {
  Architecture arch;
  ModelWeights weights;
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

/// Mini-batch Adam over the train split with per-epoch validation
/// accuracy, early stopping, and best-weights restoration. Deterministic
/// for a fixed config regardless of thread count.
TrainedModel train(const LabeledDataset& dataset, const Architecture& arch,
                   const TrainConfig& cfg);

std::pair<FaultLabel, std::array<double, kNumLabels>> predict(const TrainedModel& model,
                                                              const Spectrum& spectrum);

/// Logits computed from externally supplied conv feature maps through the
/// inference head (pool -> flatten -> dense stack). Grad-CAM tests
/// finite-difference against this.
std::vector<double> head_logits_from_maps(const Architecture& arch, const ModelWeights& w,
                                          std::span<const double> conv_maps);

/// d(logit[target])/d(conv feature map) at the cached activations,
/// inference mode.
std::vector<double> head_gradient(const Architecture& arch, const ModelWeights& w,
                                  const ForwardCache& cache, int target);

std::uint64_t weights_digest(const ModelWeights& w);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace faultdx::net1d
