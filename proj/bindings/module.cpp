#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "faultdx/augment.hpp"
#include "faultdx/core.hpp"
#include "faultdx/explain.hpp"
#include "faultdx/net1d.hpp"
#include "faultdx/rng.hpp"
#include "faultdx/spectral.hpp"
#include "faultdx/synthgen.hpp"

namespace py = pybind11;
using namespace faultdx;

namespace {

FaultLabel label_by_name(const std::string& name) {
  for (int i = 0; i < kNumLabels; ++i) {
    const FaultLabel label = label_from_index(i);
    if (name == label_name(label)) return label;
  }
  throw std::invalid_argument("unknown fault label: " + name);
}

MachineSpec make_spec(double rotation_hz, std::optional<double> gmf_hz,
                      std::optional<double> bpfo_hz, std::optional<double> bpfi_hz,
                      std::optional<double> impact_resonance_hz, int looseness_harmonics) {
  MachineSpec spec;
  spec.rotation_hz = rotation_hz;
  spec.gmf_hz = gmf_hz;
  spec.bpfo_hz = bpfo_hz;
  spec.bpfi_hz = bpfi_hz;
  spec.impact_resonance_hz = impact_resonance_hz;
  spec.looseness_harmonic_count = looseness_harmonics;
  return spec;
}

spectral::SpectralConfig make_spectral(double f_max_hz, const std::string& window,
                                       bool detrend_mean) {
  spectral::SpectralConfig cfg;
  cfg.f_max_hz = f_max_hz;
  cfg.detrend_mean = detrend_mean;
  if (window == "none") {
    cfg.window = spectral::Window::None;
  } else if (window == "hann") {
    cfg.window = spectral::Window::Hann;
  } else {
    throw std::invalid_argument("window must be 'none' or 'hann', got '" + window + "'");
  }
  return cfg;
}

Spectrum preprocess_signal(const std::vector<double>& samples, double sample_rate_hz,
                           double f_max_hz, const std::string& window, bool detrend_mean) {
  const TimeSeries x(samples, sample_rate_hz);
  return spectral::preprocess(x, make_spectral(f_max_hz, window, detrend_mean));
}

}  // namespace

PYBIND11_MODULE(_faultdx, m) {
  m.doc() = "Fault diagnosis workbench for rotating machinery: synthetic "
            "vibration signals, magnitude spectra, a small 1D CNN and "
            "Grad-CAM explanations.";
  m.attr("__version__") = "0.1.0";

  m.def("label_names", []() {
    std::vector<std::string> names;
    for (int i = 0; i < kNumLabels; ++i) names.emplace_back(label_name(label_from_index(i)));
    return names;
  });

  m.def(
      "gen_baseline_surrogate",
      [](double rotation_hz, double sample_rate_hz, std::size_t n, std::uint64_t seed,
         double tone_amplitude, double noise_std, int extra_tones, double tone_freq_min,
         double tone_freq_max, double tone_amp_min, double tone_amp_max) {
        MachineSpec spec;
        spec.rotation_hz = rotation_hz;
        synthgen::SurrogateParams params;
        params.tone_amplitude = tone_amplitude;
        params.noise_std = noise_std;
        params.extra_tones = extra_tones;
        params.tone_freq_min_hz = tone_freq_min;
        params.tone_freq_max_hz = tone_freq_max;
        params.tone_amp_min = tone_amp_min;
        params.tone_amp_max = tone_amp_max;
        Rng rng(seed);
        return synthgen::gen_baseline_surrogate(spec, sample_rate_hz, n, params, rng).samples();
      },
      py::arg("rotation_hz"), py::arg("sample_rate_hz"), py::arg("n"), py::arg("seed"),
      py::arg("tone_amplitude") = 1.0, py::arg("noise_std") = 0.1, py::arg("extra_tones") = 8,
      py::arg("tone_freq_min") = 30.0, py::arg("tone_freq_max") = 3000.0,
      py::arg("tone_amp_min") = 0.5, py::arg("tone_amp_max") = 1.5,
      "Fabricated healthy baseline: rotation tone plus noise and clutter tones.");

  m.def(
      "gen_condition",
      [](const std::vector<double>& samples, double sample_rate_hz, const std::string& label,
         double rotation_hz, std::uint64_t seed, std::optional<double> gmf_hz,
         std::optional<double> bpfo_hz, std::optional<double> bpfi_hz,
         std::optional<double> impact_resonance_hz, int looseness_harmonics, double min_gain_db,
         double max_gain_db) {
        const TimeSeries baseline(samples, sample_rate_hz);
        const MachineSpec spec = make_spec(rotation_hz, gmf_hz, bpfo_hz, bpfi_hz,
                                           impact_resonance_hz, looseness_harmonics);
        const synthgen::AmplitudeRule rule{min_gain_db, max_gain_db};
        Rng rng(seed);
        switch (label_by_name(label)) {
          case FaultLabel::Normal:
            return synthgen::gen_normal(baseline, rng).samples();
          case FaultLabel::Bpfo:
            if (!spec.bpfo_hz) throw std::invalid_argument("BPFO requires bpfo_hz");
            return synthgen::gen_bearing_fault(baseline, spec, *spec.bpfo_hz, rule, rng)
                .signal.samples();
          case FaultLabel::Bpfi:
            if (!spec.bpfi_hz) throw std::invalid_argument("BPFI requires bpfi_hz");
            return synthgen::gen_bearing_fault(baseline, spec, *spec.bpfi_hz, rule, rng)
                .signal.samples();
          case FaultLabel::Unbalance:
            return synthgen::gen_unbalance(baseline, spec, rule, rng).signal.samples();
          case FaultLabel::Misalignment:
            return synthgen::gen_misalignment(baseline, spec, rule, rng).signal.samples();
          case FaultLabel::Looseness:
            return synthgen::gen_looseness(baseline, spec, rule, rng).signal.samples();
          case FaultLabel::GearFault:
            return synthgen::gen_gear_fault(baseline, spec, rule, rng).signal.samples();
        }
        throw std::logic_error("unreachable");
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("label"), py::arg("rotation_hz"),
      py::arg("seed"), py::arg("gmf_hz") = std::nullopt, py::arg("bpfo_hz") = std::nullopt,
      py::arg("bpfi_hz") = std::nullopt, py::arg("impact_resonance_hz") = std::nullopt,
      py::arg("looseness_harmonics") = 4, py::arg("min_gain_db") = 3.0,
      py::arg("max_gain_db") = 20.0,
      "Injects the named fault condition into a baseline signal.");

  m.def(
      "fft_magnitude",
      [](const std::vector<double>& samples, double sample_rate_hz) {
        const Spectrum s = spectral::fft_magnitude(TimeSeries(samples, sample_rate_hz));
        return std::make_pair(s.magnitudes(), s.df_hz());
      },
      py::arg("samples"), py::arg("sample_rate_hz"),
      "One-sided amplitude spectrum; returns (magnitudes, bin_width_hz).");

  m.def(
      "preprocess",
      [](const std::vector<double>& samples, double sample_rate_hz, double f_max_hz,
         const std::string& window, bool detrend_mean) {
        const Spectrum s =
            preprocess_signal(samples, sample_rate_hz, f_max_hz, window, detrend_mean);
        return std::make_pair(s.magnitudes(), s.df_hz());
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("f_max_hz") = 1000.0,
      py::arg("window") = "none", py::arg("detrend_mean") = true,
      "FFT magnitude, cut to [0, f_max_hz], z-score normalized.");

  m.def(
      "gaussian_noise",
      [](const std::vector<double>& samples, double sample_rate_hz, double alpha,
         std::uint64_t seed) {
        Rng rng(seed);
        return augment::gaussian_noise(TimeSeries(samples, sample_rate_hz), alpha, rng).samples();
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("alpha"), py::arg("seed"));

  m.def(
      "masking_noise",
      [](const std::vector<double>& samples, double sample_rate_hz, double alpha,
         std::uint64_t seed) {
        Rng rng(seed);
        return augment::masking_noise(TimeSeries(samples, sample_rate_hz), alpha, rng).samples();
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("alpha"), py::arg("seed"));

  m.def(
      "signal_translation",
      [](const std::vector<double>& samples, double sample_rate_hz, std::int64_t shift) {
        return augment::signal_translation(TimeSeries(samples, sample_rate_hz), shift).samples();
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("shift"));

  m.def(
      "amplitude_shift",
      [](const std::vector<double>& samples, double sample_rate_hz, double alpha) {
        return augment::amplitude_shift(TimeSeries(samples, sample_rate_hz), alpha).samples();
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("alpha"));

  m.def(
      "time_stretch",
      [](const std::vector<double>& samples, double sample_rate_hz, double alpha) {
        return augment::time_stretch(TimeSeries(samples, sample_rate_hz), alpha).samples();
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("alpha"));

  m.def("compute_q_aug", &augment::compute_q_aug, py::arg("n_total"), py::arg("n_r"),
        "Augmentation repetitions needed to expand n_r baselines to n_total samples.");

  m.def(
      "train_model",
      [](const std::vector<std::vector<double>>& spectra, const std::vector<int>& labels,
         double df_hz, const std::string& path, int conv_filters, int kernel_size, int pool_size,
         double dropout_rate, int dense_units, int batch_size, double learning_rate, int patience,
         double min_delta, int max_epochs, std::uint64_t seed, int val_every) {
        if (spectra.empty() || spectra.size() != labels.size()) {
          throw std::invalid_argument("spectra and labels must be equal-length and non-empty");
        }
        if (val_every < 2) throw std::invalid_argument("val_every must be at least 2");
        LabeledDataset ds;
        for (std::size_t i = 0; i < spectra.size(); ++i) {
          if (labels[i] < 0 || labels[i] >= kNumLabels) {
            throw std::invalid_argument("label index out of range");
          }
          ds.samples.push_back(
              {Spectrum(spectra[i], df_hz, 0.0, true), label_from_index(labels[i]), {}});
          ds.split.push_back(i % static_cast<std::size_t>(val_every) ==
                                     static_cast<std::size_t>(val_every) - 1
                                 ? Split::Validation
                                 : Split::Train);
        }

        net1d::Architecture arch;
        arch.input_len = static_cast<int>(spectra.front().size());
        arch.conv_filters = conv_filters;
        arch.kernel_size = kernel_size;
        arch.pool_size = pool_size;
        arch.dropout_rate = dropout_rate;
        arch.dense_units = dense_units;

        net1d::TrainConfig cfg;
        cfg.batch_size = batch_size;
        cfg.learning_rate = learning_rate;
        cfg.patience = patience;
        cfg.min_delta = min_delta;
        cfg.max_epochs = max_epochs;
        cfg.seed = seed;
        cfg.threads = 1;

        const net1d::TrainedModel model = net1d::train(ds, arch, cfg);
        net1d::save_model(model, path);
        return model.history[static_cast<std::size_t>(model.best_epoch) - 1].val_accuracy;
      },
      py::arg("spectra"), py::arg("labels"), py::arg("df_hz"), py::arg("path"),
      py::arg("conv_filters") = 8, py::arg("kernel_size") = 5, py::arg("pool_size") = 2,
      py::arg("dropout_rate") = 0.5, py::arg("dense_units") = 32, py::arg("batch_size") = 32,
      py::arg("learning_rate") = 1e-3, py::arg("patience") = 8, py::arg("min_delta") = 0.001,
      py::arg("max_epochs") = 100, py::arg("seed") = 0, py::arg("val_every") = 10,
      "Trains the 1D CNN on preprocessed spectra (every val_every-th sample "
      "is held out for validation) and saves the model; returns the best "
      "validation accuracy.");

  m.def(
      "diagnose",
      [](const std::string& model_path, const std::vector<double>& samples,
         double sample_rate_hz, double f_max_hz, const std::string& window, bool detrend_mean) {
        const net1d::TrainedModel model = net1d::load_model(model_path);
        const Spectrum spec =
            preprocess_signal(samples, sample_rate_hz, f_max_hz, window, detrend_mean);
        const auto [label, probs] = net1d::predict(model, spec);
        return std::make_pair(std::string(label_name(label)),
                              std::vector<double>(probs.begin(), probs.end()));
      },
      py::arg("model_path"), py::arg("samples"), py::arg("sample_rate_hz"),
      py::arg("f_max_hz") = 1000.0, py::arg("window") = "none", py::arg("detrend_mean") = true,
      "Classifies a raw signal; returns (label, probabilities in label order).");

  m.def(
      "explain",
      [](const std::string& model_path, const std::vector<double>& samples,
         double sample_rate_hz, double f_max_hz, const std::string& window, bool detrend_mean) {
        const net1d::TrainedModel model = net1d::load_model(model_path);
        const Spectrum spec =
            preprocess_signal(samples, sample_rate_hz, f_max_hz, window, detrend_mean);
        const explain::Explanation ex = explain::explain_prediction(model, spec);
        py::dict out;
        out["label"] = std::string(label_name(ex.label));
        out["probabilities"] = std::vector<double>(ex.probabilities.begin(),
                                                   ex.probabilities.end());
        out["relevance"] = ex.heatmap.relevance;
        out["df_hz"] = spec.df_hz();
        std::vector<std::pair<double, double>> tops = ex.top_frequencies;
        out["top_frequencies"] = tops;
        return out;
      },
      py::arg("model_path"), py::arg("samples"), py::arg("sample_rate_hz"),
      py::arg("f_max_hz") = 1000.0, py::arg("window") = "none", py::arg("detrend_mean") = true,
      "Grad-CAM explanation of the predicted class over the input spectrum.");
}
