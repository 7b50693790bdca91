#include "faultdx/net1d.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "faultdx/threading.hpp"

namespace faultdx::net1d {

namespace {

constexpr double kLossEps = 1e-12;
constexpr std::size_t kGradBlock = 8;
constexpr std::size_t kEvalBlock = 64;

inline double relu(double v) { return v > 0.0 ? v : 0.0; }

void add_into(ParamSet& acc, const ParamSet& other) {
  auto dst = acc.tensors();
  auto src = other.tensors();
  for (std::size_t t = 0; t < dst.size(); ++t) {
    double* a = dst[t]->data();
    const double* b = src[t]->data();
    const std::size_t n = dst[t]->size();
    for (std::size_t i = 0; i < n; ++i) a[i] += b[i];
  }
}

void scale(ParamSet& p, double factor) {
  for (auto* t : p.tensors()) {
    for (double& v : *t) v *= factor;
  }
}

}  // namespace

void Architecture::validate() const {
  if (kernel_size < 1) throw std::invalid_argument("Architecture: kernel_size must be >= 1");
  if (input_len < kernel_size)
    throw std::invalid_argument("Architecture: input_len must be >= kernel_size");
  if (conv_filters < 1) throw std::invalid_argument("Architecture: conv_filters must be >= 1");
  if (pool_size < 1) throw std::invalid_argument("Architecture: pool_size must be >= 1");
  if (conv_len() < pool_size)
    throw std::invalid_argument("Architecture: pool_size exceeds the conv output length");
  if (!(dropout_rate >= 0.0) || !(dropout_rate < 1.0))
    throw std::invalid_argument("Architecture: dropout_rate must be in [0, 1)");
  if (dense_units < 1) throw std::invalid_argument("Architecture: dense_units must be >= 1");
  if (n_classes < 2) throw std::invalid_argument("Architecture: n_classes must be >= 2");
}

ParamSet ParamSet::zeros(const Architecture& arch) {
  ParamSet p;
  p.conv_k.assign(static_cast<std::size_t>(arch.conv_filters) * arch.kernel_size, 0.0);
  p.conv_b.assign(static_cast<std::size_t>(arch.conv_filters), 0.0);
  p.w1.assign(static_cast<std::size_t>(arch.dense_units) * arch.flat_len(), 0.0);
  p.b1.assign(static_cast<std::size_t>(arch.dense_units), 0.0);
  p.w2.assign(static_cast<std::size_t>(arch.n_classes) * arch.dense_units, 0.0);
  p.b2.assign(static_cast<std::size_t>(arch.n_classes), 0.0);
  return p;
}

void ParamSet::fill_zero() {
  for (auto* t : tensors()) std::fill(t->begin(), t->end(), 0.0);
}

std::size_t ParamSet::total_count() const {
  std::size_t n = 0;
  for (const auto* t : tensors()) n += t->size();
  return n;
}

bool ParamSet::shaped_like(const Architecture& arch) const {
  const ParamSet ref = zeros(arch);
  auto a = tensors();
  auto b = ref.tensors();
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t]->size() != b[t]->size()) return false;
  }
  return true;
}

std::array<std::vector<double>*, 6> ParamSet::tensors() {
  return {&conv_k, &conv_b, &w1, &b1, &w2, &b2};
}

std::array<const std::vector<double>*, 6> ParamSet::tensors() const {
  return {&conv_k, &conv_b, &w1, &b1, &w2, &b2};
}

ModelWeights init_weights(const Architecture& arch, Rng& rng) {
  arch.validate();
  ModelWeights w = ParamSet::zeros(arch);
  auto fill_uniform = [&rng](std::vector<double>& v, double fan_in) {
    const double limit = std::sqrt(6.0 / fan_in);
    for (double& x : v) x = rng.uniform(-limit, limit);
  };
  fill_uniform(w.conv_k, static_cast<double>(arch.kernel_size));
  fill_uniform(w.w1, static_cast<double>(arch.flat_len()));
  fill_uniform(w.w2, static_cast<double>(arch.dense_units));
  return w;
}

std::vector<double> make_dropout_mask(const Architecture& arch, double rate, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(arch.conv_filters) * arch.conv_len();
  std::vector<double> mask(n, 1.0);
  if (rate <= 0.0) return mask;
  if (!(rate < 1.0)) throw std::invalid_argument("make_dropout_mask: rate must be < 1");
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

void forward(const Architecture& arch, const ModelWeights& w, std::span<const double> x,
             ForwardCache& cache, const std::vector<double>* mask) {
  const std::size_t L = static_cast<std::size_t>(arch.input_len);
  const std::size_t F = static_cast<std::size_t>(arch.conv_filters);
  const std::size_t K = static_cast<std::size_t>(arch.kernel_size);
  const std::size_t CL = static_cast<std::size_t>(arch.conv_len());
  const std::size_t P = static_cast<std::size_t>(arch.pool_size);
  const std::size_t PL = static_cast<std::size_t>(arch.pooled_len());
  const std::size_t FL = static_cast<std::size_t>(arch.flat_len());
  const std::size_t H = static_cast<std::size_t>(arch.dense_units);
  const std::size_t C = static_cast<std::size_t>(arch.n_classes);

  if (x.size() != L) throw std::invalid_argument("forward: input length mismatch");
  if (!w.shaped_like(arch)) throw std::invalid_argument("forward: weight shape mismatch");
  if (mask && mask->size() != F * CL)
    throw std::invalid_argument("forward: dropout mask length mismatch");

  cache.input.assign(x.begin(), x.end());
  cache.conv_z.resize(F * CL);
  cache.conv_a.resize(F * CL);
  cache.conv_p.resize(F * CL);
  cache.pool_arg.resize(F * PL);
  cache.flat.resize(FL);
  cache.z1.resize(H);
  cache.h1.resize(H);
  cache.logits.resize(C);
  cache.probs.resize(C);

  for (std::size_t f = 0; f < F; ++f) {
    double* z = cache.conv_z.data() + f * CL;
    std::fill(z, z + CL, w.conv_b[f]);
    const double* k = w.conv_k.data() + f * K;
    for (std::size_t j = 0; j < K; ++j) {
      const double kv = k[j];
      const double* xs = x.data() + j;
      for (std::size_t i = 0; i < CL; ++i) z[i] += kv * xs[i];
    }
  }
  for (std::size_t i = 0; i < F * CL; ++i) cache.conv_a[i] = relu(cache.conv_z[i]);
  if (mask) {
    const double* m = mask->data();
    for (std::size_t i = 0; i < F * CL; ++i) cache.conv_p[i] = cache.conv_a[i] * m[i];
  } else {
    cache.conv_p = cache.conv_a;
  }

  for (std::size_t f = 0; f < F; ++f) {
    const double* p = cache.conv_p.data() + f * CL;
    for (std::size_t wd = 0; wd < PL; ++wd) {
      std::size_t arg = wd * P;
      double best = p[arg];
      for (std::size_t i = wd * P + 1; i < wd * P + P; ++i) {
        if (p[i] > best) {
          best = p[i];
          arg = i;
        }
      }
      cache.pool_arg[f * PL + wd] = static_cast<int>(f * CL + arg);
      cache.flat[f * PL + wd] = best;
    }
  }

  for (std::size_t h = 0; h < H; ++h) {
    const double* row = w.w1.data() + h * FL;
    double acc = w.b1[h];
    for (std::size_t i = 0; i < FL; ++i) acc += row[i] * cache.flat[i];
    cache.z1[h] = acc;
    cache.h1[h] = relu(acc);
  }

  for (std::size_t c = 0; c < C; ++c) {
    const double* row = w.w2.data() + c * H;
    double acc = w.b2[c];
    for (std::size_t h = 0; h < H; ++h) acc += row[h] * cache.h1[h];
    cache.logits[c] = acc;
  }

  const double m = *std::max_element(cache.logits.begin(), cache.logits.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    cache.probs[c] = std::exp(cache.logits[c] - m);
    sum += cache.probs[c];
  }
  for (std::size_t c = 0; c < C; ++c) cache.probs[c] /= sum;
}

double loss(std::span<const double> probs, std::span<const double> onehot) {
  if (probs.size() != onehot.size()) throw std::invalid_argument("loss: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (onehot[i] != 0.0) acc -= onehot[i] * std::log(probs[i] + kLossEps);
  }
  return acc;
}

void backward(const Architecture& arch, const ModelWeights& w, const ForwardCache& cache,
              std::span<const double> onehot, const std::vector<double>* mask, ParamSet& grads) {
  const std::size_t F = static_cast<std::size_t>(arch.conv_filters);
  const std::size_t K = static_cast<std::size_t>(arch.kernel_size);
  const std::size_t CL = static_cast<std::size_t>(arch.conv_len());
  const std::size_t PL = static_cast<std::size_t>(arch.pooled_len());
  const std::size_t FL = static_cast<std::size_t>(arch.flat_len());
  const std::size_t H = static_cast<std::size_t>(arch.dense_units);
  const std::size_t C = static_cast<std::size_t>(arch.n_classes);
  if (onehot.size() != C) throw std::invalid_argument("backward: onehot length mismatch");

  std::vector<double> dlogits(C);
  for (std::size_t c = 0; c < C; ++c) dlogits[c] = cache.probs[c] - onehot[c];

  std::vector<double> dh1(H, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    const double d = dlogits[c];
    grads.b2[c] += d;
    double* gw = grads.w2.data() + c * H;
    const double* row = w.w2.data() + c * H;
    for (std::size_t h = 0; h < H; ++h) {
      gw[h] += d * cache.h1[h];
      dh1[h] += row[h] * d;
    }
  }

  std::vector<double> dflat(FL, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    const double dz = cache.z1[h] > 0.0 ? dh1[h] : 0.0;
    if (dz == 0.0) continue;
    grads.b1[h] += dz;
    double* gw = grads.w1.data() + h * FL;
    const double* row = w.w1.data() + h * FL;
    for (std::size_t i = 0; i < FL; ++i) {
      gw[i] += dz * cache.flat[i];
      dflat[i] += row[i] * dz;
    }
  }

  std::vector<double> dconv(F * CL, 0.0);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t wd = 0; wd < PL; ++wd) {
      dconv[static_cast<std::size_t>(cache.pool_arg[f * PL + wd])] += dflat[f * PL + wd];
    }
  }
  if (mask) {
    const double* m = mask->data();
    for (std::size_t i = 0; i < F * CL; ++i) dconv[i] *= m[i];
  }
  for (std::size_t i = 0; i < F * CL; ++i) {
    if (cache.conv_z[i] <= 0.0) dconv[i] = 0.0;
  }

  const double* x = cache.input.data();
  for (std::size_t f = 0; f < F; ++f) {
    const double* dz = dconv.data() + f * CL;
    double bias_acc = 0.0;
    for (std::size_t i = 0; i < CL; ++i) bias_acc += dz[i];
    grads.conv_b[f] += bias_acc;
    double* gk = grads.conv_k.data() + f * K;
    for (std::size_t j = 0; j < K; ++j) {
      const double* xs = x + j;
      double acc = 0.0;
      for (std::size_t i = 0; i < CL; ++i) acc += dz[i] * xs[i];
      gk[j] += acc;
    }
  }
}

AdamState AdamState::zeros(const Architecture& arch) {
  return AdamState{ParamSet::zeros(arch), ParamSet::zeros(arch)};
}

void adam_step(ModelWeights& w, const ParamSet& grads, AdamState& state, std::int64_t t,
               const AdamParams& params) {
  if (t < 1) throw std::invalid_argument("adam_step: step count starts at 1");
  if (!(params.beta1 >= 0.0 && params.beta1 < 1.0 && params.beta2 >= 0.0 && params.beta2 < 1.0))
    throw std::invalid_argument("adam_step: betas must lie in [0, 1)");
  const double c1 = 1.0 - std::pow(params.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(params.beta2, static_cast<double>(t));
  auto wt = w.tensors();
  auto gt = grads.tensors();
  auto mt = state.m.tensors();
  auto vt = state.v.tensors();
  for (std::size_t k = 0; k < wt.size(); ++k) {
    double* wp = wt[k]->data();
    const double* gp = gt[k]->data();
    double* mp = mt[k]->data();
    double* vp = vt[k]->data();
    const std::size_t n = wt[k]->size();
    if (gt[k]->size() != n || mt[k]->size() != n || vt[k]->size() != n)
      throw std::invalid_argument("adam_step: tensor shape mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      const double g = gp[i];
      mp[i] = params.beta1 * mp[i] + (1.0 - params.beta1) * g;
      vp[i] = params.beta2 * vp[i] + (1.0 - params.beta2) * g * g;
      const double mhat = mp[i] / c1;
      const double vhat = vp[i] / c2;
      wp[i] -= params.learning_rate * mhat / (std::sqrt(vhat) + params.epsilon);
    }
  }
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("TrainConfig: learning_rate must be finite and >= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
    throw std::invalid_argument("TrainConfig: betas must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("TrainConfig: epsilon must be > 0");
  if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
  if (std::isnan(min_delta) || min_delta < 0.0)
    throw std::invalid_argument("TrainConfig: min_delta must be >= 0");
  if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
}

EarlyStopper::EarlyStopper(int patience, double min_delta)
    : patience_(patience), min_delta_(min_delta) {
  if (patience < 1) throw std::invalid_argument("EarlyStopper: patience must be >= 1");
  if (std::isnan(min_delta) || min_delta < 0.0)
    throw std::invalid_argument("EarlyStopper: min_delta must be >= 0");
}

bool EarlyStopper::observe(double val_metric) {
  epochs_seen_++;
  const bool first = epochs_seen_ == 1;
  if (first || val_metric > best_metric_ + min_delta_) {
    best_metric_ = val_metric;
    best_epoch_ = epochs_seen_;
    wait_ = 0;
    improved_last_ = true;
    return false;
  }
  improved_last_ = false;
  wait_++;
  return wait_ >= patience_;
}

namespace {

struct SplitView {
  std::vector<const double*> inputs;
  std::vector<int> labels;
};

SplitView collect_split(const LabeledDataset& dataset, Split which, int input_len) {
  SplitView view;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    if (dataset.split[i] != which) continue;
    const auto& mags = dataset.samples[i].spectrum.magnitudes();
    if (mags.size() != static_cast<std::size_t>(input_len))
      throw std::invalid_argument("train: sample spectrum length does not match input_len");
    view.inputs.push_back(mags.data());
    view.labels.push_back(static_cast<int>(dataset.samples[i].label));
  }
  return view;
}

double evaluate_accuracy(const Architecture& arch, const ModelWeights& w, const SplitView& view,
                         unsigned threads, std::vector<ForwardCache>& caches) {
  const std::size_t n = view.inputs.size();
  const std::size_t n_blocks = (n + kEvalBlock - 1) / kEvalBlock;
  if (caches.size() < n_blocks) caches.resize(n_blocks);
  std::vector<std::size_t> correct(n_blocks, 0);
  parallel_for(n_blocks, threads, [&](std::size_t bi) {
    ForwardCache& cache = caches[bi];
    const std::size_t lo = bi * kEvalBlock;
    const std::size_t hi = std::min(n, lo + kEvalBlock);
    for (std::size_t s = lo; s < hi; ++s) {
      forward(arch, w, std::span<const double>(view.inputs[s], arch.input_len), cache, nullptr);
      const std::size_t pred = static_cast<std::size_t>(
          std::max_element(cache.probs.begin(), cache.probs.end()) - cache.probs.begin());
      if (static_cast<int>(pred) == view.labels[s]) correct[bi]++;
    }
  });
  const std::size_t total = std::accumulate(correct.begin(), correct.end(), std::size_t{0});
  return static_cast<double>(total) / static_cast<double>(n);
}

}  // namespace

TrainedModel train(const LabeledDataset& dataset, const Architecture& arch,
                   const TrainConfig& cfg) {
  arch.validate();
  cfg.validate();
  if (arch.n_classes != kNumLabels)
    throw std::invalid_argument("train: architecture must emit one class per fault label");

  SplitView tr = collect_split(dataset, Split::Train, arch.input_len);
  SplitView va = collect_split(dataset, Split::Validation, arch.input_len);
  if (tr.inputs.empty() || va.inputs.empty())
    throw std::invalid_argument("train: dataset needs nonempty train and validation splits");

  const std::size_t n_train = tr.inputs.size();
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t max_blocks = (batch + kGradBlock - 1) / kGradBlock;

  Rng init_rng(derive_seed(cfg.seed, "init"));
  ModelWeights weights = init_weights(arch, init_rng);
  AdamState adam = AdamState::zeros(arch);
  const AdamParams adam_params{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};

  std::vector<ParamSet> block_grads(max_blocks, ParamSet::zeros(arch));
  std::vector<double> block_loss(max_blocks, 0.0);
  std::vector<ForwardCache> caches(max_blocks);
  std::vector<ForwardCache> eval_caches;
  ParamSet grand = ParamSet::zeros(arch);

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  EarlyStopper stopper(cfg.patience, cfg.min_delta);
  TrainedModel model;
  model.arch = arch;
  ModelWeights best = weights;
  int best_epoch = 0;
  std::int64_t t = 0;

  std::array<std::array<double, kNumLabels>, kNumLabels> onehots{};
  for (int c = 0; c < kNumLabels; ++c) onehots[c] = label_to_onehot(label_from_index(c));

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = 0; i + 1 < n_train; ++i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform_int(
          static_cast<std::int64_t>(i), static_cast<std::int64_t>(n_train - 1)));
      std::swap(order[i], order[j]);
    }

    double epoch_loss_sum = 0.0;
    for (std::size_t start = 0; start < n_train; start += batch) {
      const std::size_t bn = std::min(batch, n_train - start);
      const std::size_t n_blocks = (bn + kGradBlock - 1) / kGradBlock;
      for (std::size_t bi = 0; bi < n_blocks; ++bi) {
        block_grads[bi].fill_zero();
        block_loss[bi] = 0.0;
      }
      parallel_for(n_blocks, cfg.threads, [&](std::size_t bi) {
        ForwardCache& cache = caches[bi];
        const std::size_t lo = bi * kGradBlock;
        const std::size_t hi = std::min(bn, lo + kGradBlock);
        for (std::size_t s = lo; s < hi; ++s) {
          const std::size_t pos = start + s;
          const std::size_t idx = order[pos];
          std::vector<double> mask;
          const std::vector<double>* mask_ptr = nullptr;
          if (arch.dropout_rate > 0.0) {
            Rng mask_rng(derive_seed(cfg.seed, "dropout", static_cast<std::uint64_t>(epoch),
                                     static_cast<std::uint64_t>(pos)));
            mask = make_dropout_mask(arch, arch.dropout_rate, mask_rng);
            mask_ptr = &mask;
          }
          forward(arch, weights, std::span<const double>(tr.inputs[idx], arch.input_len), cache,
                  mask_ptr);
          const auto& oh = onehots[static_cast<std::size_t>(tr.labels[idx])];
          block_loss[bi] += loss(cache.probs, oh);
          backward(arch, weights, cache, oh, mask_ptr, block_grads[bi]);
        }
      });

      grand.fill_zero();
      double batch_loss_sum = 0.0;
      for (std::size_t bi = 0; bi < n_blocks; ++bi) {
        add_into(grand, block_grads[bi]);
        batch_loss_sum += block_loss[bi];
      }
      if (!std::isfinite(batch_loss_sum)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch starting at sample " + std::to_string(start));
      }
      scale(grand, 1.0 / static_cast<double>(bn));
      ++t;
      adam_step(weights, grand, adam, t, adam_params);
      epoch_loss_sum += batch_loss_sum;
    }

    const double train_loss = epoch_loss_sum / static_cast<double>(n_train);
    const double val_acc = evaluate_accuracy(arch, weights, va, cfg.threads, eval_caches);
    model.history.push_back(EpochStats{train_loss, val_acc});

    const bool stop = stopper.observe(val_acc);
    if (stopper.improved_last()) {
      best = weights;
      best_epoch = epoch;
    }
    if (stop) break;
  }

  model.weights = std::move(best);
  model.best_epoch = best_epoch;
  return model;
}

std::pair<FaultLabel, std::array<double, kNumLabels>> predict(const TrainedModel& model,
                                                              const Spectrum& spectrum) {
  if (spectrum.size() != static_cast<std::size_t>(model.arch.input_len))
    throw std::invalid_argument("predict: spectrum length does not match the model input");
  ForwardCache cache;
  forward(model.arch, model.weights, spectrum.magnitudes(), cache, nullptr);
  std::array<double, kNumLabels> probs{};
  if (cache.probs.size() != probs.size())
    throw std::invalid_argument("predict: model does not emit one output per fault label");
  std::copy(cache.probs.begin(), cache.probs.end(), probs.begin());
  const std::size_t arg = static_cast<std::size_t>(
      std::max_element(probs.begin(), probs.end()) - probs.begin());
  return {label_from_index(static_cast<int>(arg)), probs};
}

std::vector<double> head_logits_from_maps(const Architecture& arch, const ModelWeights& w,
                                          std::span<const double> conv_maps) {
  const std::size_t F = static_cast<std::size_t>(arch.conv_filters);
  const std::size_t CL = static_cast<std::size_t>(arch.conv_len());
  const std::size_t P = static_cast<std::size_t>(arch.pool_size);
  const std::size_t PL = static_cast<std::size_t>(arch.pooled_len());
  const std::size_t FL = static_cast<std::size_t>(arch.flat_len());
  const std::size_t H = static_cast<std::size_t>(arch.dense_units);
  const std::size_t C = static_cast<std::size_t>(arch.n_classes);
  if (conv_maps.size() != F * CL)
    throw std::invalid_argument("head_logits_from_maps: feature map length mismatch");

  std::vector<double> flat(FL);
  for (std::size_t f = 0; f < F; ++f) {
    const double* p = conv_maps.data() + f * CL;
    for (std::size_t wd = 0; wd < PL; ++wd) {
      double best = p[wd * P];
      for (std::size_t i = wd * P + 1; i < wd * P + P; ++i) best = std::max(best, p[i]);
      flat[f * PL + wd] = best;
    }
  }
  std::vector<double> h1(H);
  for (std::size_t h = 0; h < H; ++h) {
    const double* row = w.w1.data() + h * FL;
    double acc = w.b1[h];
    for (std::size_t i = 0; i < FL; ++i) acc += row[i] * flat[i];
    h1[h] = relu(acc);
  }
  std::vector<double> logits(C);
  for (std::size_t c = 0; c < C; ++c) {
    const double* row = w.w2.data() + c * H;
    double acc = w.b2[c];
    for (std::size_t h = 0; h < H; ++h) acc += row[h] * h1[h];
    logits[c] = acc;
  }
  return logits;
}

std::vector<double> head_gradient(const Architecture& arch, const ModelWeights& w,
                                  const ForwardCache& cache, int target) {
  const std::size_t F = static_cast<std::size_t>(arch.conv_filters);
  const std::size_t CL = static_cast<std::size_t>(arch.conv_len());
  const std::size_t PL = static_cast<std::size_t>(arch.pooled_len());
  const std::size_t FL = static_cast<std::size_t>(arch.flat_len());
  const std::size_t H = static_cast<std::size_t>(arch.dense_units);
  if (target < 0 || target >= arch.n_classes)
    throw std::invalid_argument("head_gradient: target class out of range");

  std::vector<double> dflat(FL, 0.0);
  const double* w2row = w.w2.data() + static_cast<std::size_t>(target) * H;
  for (std::size_t h = 0; h < H; ++h) {
    const double dz = cache.z1[h] > 0.0 ? w2row[h] : 0.0;
    if (dz == 0.0) continue;
    const double* row = w.w1.data() + h * FL;
    for (std::size_t i = 0; i < FL; ++i) dflat[i] += row[i] * dz;
  }
  std::vector<double> dmaps(F * CL, 0.0);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t wd = 0; wd < PL; ++wd) {
      dmaps[static_cast<std::size_t>(cache.pool_arg[f * PL + wd])] += dflat[f * PL + wd];
    }
  }
  return dmaps;
}

std::uint64_t weights_digest(const ModelWeights& w) {
  std::uint64_t h = kFnvOffset;
  for (const auto* t : w.tensors()) {
    h = fnv1a64(t->data(), t->size() * sizeof(double), h);
  }
  return h;
}

namespace {

constexpr char kMagic[4] = {'F', 'D', 'X', '1'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(const std::string& data, const std::string& path) : data_(data), path_(path) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(u_bytes(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(u_bytes(4)); }
  std::uint64_t u64() { return u_bytes(8); }
  double f64() { return std::bit_cast<double>(u_bytes(8)); }

  void raw(char* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::uint64_t u_bytes(std::size_t n) {
    need(n);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }

  void need(std::size_t n) {
    if (pos_ + n > data_.size()) throw DataError("load_model: truncated model file " + path_);
  }

  const std::string& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

void append_tensor(std::string& out, const std::vector<double>& t) {
  for (double v : t) put_f64(out, v);
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  model.arch.validate();
  if (!model.weights.shaped_like(model.arch))
    throw std::invalid_argument("save_model: weights do not match the architecture");

  std::string payload;
  payload.reserve(32 + model.weights.total_count() * 8);
  put_u32(payload, static_cast<std::uint32_t>(model.arch.input_len));
  put_u32(payload, static_cast<std::uint32_t>(model.arch.conv_filters));
  put_u32(payload, static_cast<std::uint32_t>(model.arch.kernel_size));
  put_u32(payload, static_cast<std::uint32_t>(model.arch.pool_size));
  put_u32(payload, static_cast<std::uint32_t>(model.arch.dense_units));
  put_u32(payload, static_cast<std::uint32_t>(model.arch.n_classes));
  put_f64(payload, model.arch.dropout_rate);
  for (const auto* t : model.weights.tensors()) append_tensor(payload, *t);

  std::string blob;
  blob.reserve(payload.size() + 14);
  blob.append(kMagic, sizeof(kMagic));
  put_u16(blob, kVersion);
  blob += payload;
  put_u64(blob, fnv1a64(payload.data(), payload.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("save_model: cannot open " + path.string() + " for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw DataError("save_model: write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_model: cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (data.size() < sizeof(kMagic) + 2 + 8 || std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
    throw DataError("load_model: bad magic in " + path.string());

  const std::string body = data.substr(sizeof(kMagic));
  Reader r(body, path.string());
  if (r.u16() != kVersion) throw DataError("load_model: unsupported version in " + path.string());

  Architecture arch;
  arch.input_len = static_cast<int>(r.u32());
  arch.conv_filters = static_cast<int>(r.u32());
  arch.kernel_size = static_cast<int>(r.u32());
  arch.pool_size = static_cast<int>(r.u32());
  arch.dense_units = static_cast<int>(r.u32());
  arch.n_classes = static_cast<int>(r.u32());
  arch.dropout_rate = r.f64();
  try {
    arch.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError("load_model: invalid architecture in " + path.string() + ": " + e.what());
  }

  TrainedModel model;
  model.arch = arch;
  model.weights = ParamSet::zeros(arch);
  for (auto* t : model.weights.tensors()) {
    for (double& v : *t) v = r.f64();
  }
  const std::size_t payload_len = r.pos() - 2;
  const std::uint64_t stored = r.u64();
  if (r.remaining() != 0) throw DataError("load_model: trailing bytes in " + path.string());
  const std::uint64_t actual = fnv1a64(body.data() + 2, payload_len);
  if (stored != actual) throw DataError("load_model: checksum mismatch in " + path.string());
  for (const auto* t : model.weights.tensors()) {
    for (double v : *t) {
      if (!std::isfinite(v)) throw DataError("load_model: non-finite weight in " + path.string());
    }
  }
  return model;
}

}  // namespace faultdx::net1d
