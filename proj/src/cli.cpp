#include "faultdx/cli.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "faultdx/augment.hpp"
#include "faultdx/config.hpp"
#include "faultdx/core.hpp"
#include "faultdx/dataset_io.hpp"
#include "faultdx/experiment.hpp"
#include "faultdx/explain.hpp"
#include "faultdx/net1d.hpp"
#include "faultdx/report.hpp"
#include "faultdx/rng.hpp"
#include "faultdx/signal_io.hpp"
#include "faultdx/spectral.hpp"
#include "faultdx/synthgen.hpp"

namespace faultdx::harness {
namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

struct UsageError {
  std::string message;
};

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> set_exprs;
  std::string seed_text;
  std::string out_override;
};

void add_common(CLI::App* sub, CommonOpts& opts, bool config_required) {
  auto* c = sub->add_option("--config", opts.config_path, "experiment config file");
  if (config_required) c->required();
  sub->add_option("--set", opts.set_exprs, "override a config key, e.g. --set train.patience=4");
  sub->add_option("--seed", opts.seed_text, "override the master seed");
  sub->add_option("--out", opts.out_override, "output directory (default from config)");
}

std::vector<std::pair<std::string, std::string>> collect_overrides(const CommonOpts& opts) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string& expr : opts.set_exprs) {
    auto eq = expr.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError{"--set expects key=value, got '" + expr + "'"};
    }
    overrides.emplace_back(expr.substr(0, eq), expr.substr(eq + 1));
  }
  if (!opts.seed_text.empty()) overrides.emplace_back("master_seed", opts.seed_text);
  return overrides;
}

ExperimentConfig load_config(const CommonOpts& opts) {
  ExperimentConfig cfg = load_experiment_config(opts.config_path, collect_overrides(opts));
  if (!opts.out_override.empty()) cfg.out_dir = opts.out_override;
  return cfg;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos);
    if (item.empty()) throw UsageError{std::string(flag) + ": empty entry in list"};
    errno = 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(item.c_str(), &end, 10);
    if (end == item.c_str() || *end != '\0' || errno == ERANGE ||
        item.find('-') != std::string::npos) {
      throw UsageError{std::string(flag) + ": expected a non-negative integer, got '" + item +
                       "'"};
    }
    out.push_back(static_cast<std::size_t>(v));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw UsageError{std::string(flag) + ": empty list"};
  return out;
}

std::string pad3(std::size_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%03zu", v);
  return buf;
}

/// Spectral settings for diagnose/explain when no config is given: defaults
/// plus a cut frequency chosen so the preprocessed bin count matches the
/// model, inferred from the signal's own bin width.
spectral::SpectralConfig spectral_for_model(const net1d::TrainedModel& model,
                                            const TimeSeries& signal) {
  spectral::SpectralConfig scfg;
  const std::size_t full_bins = signal.size() / 2 + 1;
  const std::size_t want = model.arch.input_len;
  if (want > full_bins) {
    throw DataError("model expects " + std::to_string(want) + " bins but the signal only has " +
                    std::to_string(full_bins) + "; pass --config to control preprocessing");
  }
  if (want < full_bins) {
    const double df = signal.sample_rate_hz() / static_cast<double>(signal.size());
    scfg.f_max_hz = static_cast<double>(want - 1) * df;
  }
  return scfg;
}

Spectrum preprocess_for_model(const net1d::TrainedModel& model, const TimeSeries& signal,
                              const std::optional<ExperimentConfig>& cfg) {
  spectral::SpectralConfig scfg =
      cfg.has_value() ? cfg->spectral : spectral_for_model(model, signal);
  Spectrum spec = spectral::preprocess(signal, scfg);
  if (spec.size() != model.arch.input_len) {
    throw DataError("preprocessed signal has " + std::to_string(spec.size()) +
                    " bins but the model expects " + std::to_string(model.arch.input_len));
  }
  return spec;
}

ordered_json probabilities_json(const std::array<double, kNumLabels>& probs) {
  ordered_json j = ordered_json::object();
  for (int k = 0; k < kNumLabels; ++k) j[label_name(label_from_index(k))] = probs[k];
  return j;
}

int cmd_gen(const CommonOpts& common, std::size_t count, bool with_conditions,
            std::ostream& out) {
  ExperimentConfig cfg = load_config(common);
  if (count == 0) count = cfg.n_r == 0 ? 1 : cfg.n_r;
  fs::path dir = cfg.out_dir;
  fs::create_directories(dir);

  for (std::size_t b = 0; b < count; ++b) {
    Rng rng(derive_seed(cfg.master_seed, "train-baseline", b));
    TimeSeries baseline = synthgen::gen_baseline_surrogate(cfg.machine, cfg.surrogate_fs,
                                                           cfg.surrogate_n, cfg.surrogate, rng);
    fs::path file = dir / ("baseline_" + pad3(b) + ".txt");
    save_signal(baseline, file);
    out << "wrote " << file.string() << "\n";
    if (with_conditions) {
      Rng cond_rng(derive_seed(cfg.master_seed, "gen-cond", b));
      auto conds = synthgen::gen_all_conditions(baseline, cfg.machine, cfg.amplitude, cond_rng);
      for (const auto& cond : conds) {
        fs::path cfile = dir / ("cond_" + pad3(b) + "_" + label_name(cond.label) + ".txt");
        save_signal(cond.signal, cfile);
        out << "wrote " << cfile.string() << "\n";
      }
    }
  }
  return 0;
}

int cmd_build_dataset(const CommonOpts& common, const std::string& out_file, std::ostream& out) {
  ExperimentConfig cfg = load_config(common);
  BaselineSet baselines = make_training_baselines(cfg);
  LabeledDataset pool = build_pool_for_run(cfg, baselines, 1);

  fs::path path = out_file.empty() ? fs::path(cfg.out_dir) / "dataset.fdd" : fs::path(out_file);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_dataset(pool, path);

  auto counts = pool.class_counts();
  out << "wrote " << path.string() << "\n";
  out << "samples: " << pool.size() << " (train " << pool.count_split(Split::Train)
      << ", validation " << pool.count_split(Split::Validation) << ")\n";
  for (int k = 0; k < kNumLabels; ++k) {
    out << "  " << label_name(label_from_index(k)) << ": " << counts[k] << "\n";
  }
  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(pool.digest()));
  out << "digest: " << digest << "\n";
  return 0;
}

void write_history_csv(const net1d::TrainedModel& model, const fs::path& path) {
  std::ofstream hist(path);
  if (!hist) throw DataError("cannot open file for writing: " + path.string());
  hist << "epoch,train_loss,val_accuracy\n";
  for (std::size_t e = 0; e < model.history.size(); ++e) {
    char line[96];
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", e + 1, model.history[e].train_loss,
                  model.history[e].val_accuracy);
    hist << line;
  }
  if (!hist) throw DataError("write failed: " + path.string());
}

int cmd_train(const CommonOpts& common, const std::string& dataset_path, std::ostream& out) {
  ExperimentConfig cfg = load_config(common);
  LabeledDataset pool;
  if (!dataset_path.empty()) {
    pool = load_dataset(dataset_path);
  } else {
    BaselineSet baselines = make_training_baselines(cfg);
    pool = build_pool_for_run(cfg, baselines, 1);
  }
  if (pool.samples.empty()) throw DataError("training pool is empty");

  net1d::Architecture arch = cfg.arch;
  arch.input_len = pool.samples.front().spectrum.size();
  arch.validate();
  net1d::TrainConfig tcfg = cfg.train;
  tcfg.seed = derive_seed(cfg.master_seed, "run", 1, "train");

  net1d::TrainedModel model = net1d::train(pool, arch, tcfg);

  fs::path dir = cfg.out_dir;
  fs::create_directories(dir);
  fs::path model_path = dir / "model.fdx";
  net1d::save_model(model, model_path);
  write_history_csv(model, dir / "history.csv");

  out << "wrote " << model_path.string() << "\n";
  out << "epochs: " << model.history.size() << ", best epoch: " << model.best_epoch << "\n";
  char acc[64];
  std::snprintf(acc, sizeof(acc), "best validation accuracy: %.4f\n",
                model.history.empty()
                    ? 0.0
                    : model.history[static_cast<std::size_t>(model.best_epoch - 1)].val_accuracy);
  out << acc;
  return 0;
}

int cmd_evaluate(const CommonOpts& common, std::ostream& out) {
  ExperimentConfig cfg = load_config(common);
  fs::path dir = cfg.out_dir;
  fs::create_directories(dir);

  LabeledDataset test_set = build_test_set(cfg);
  std::size_t test_total = test_set.count_split(Split::Test);

  std::vector<RunResult> done;
  auto on_run = [&](const RunResult& r) {
    fs::path model_path = dir / ("model_run" + std::to_string(r.run_index) + ".fdx");
    net1d::save_model(r.model, model_path);
    done.push_back(r);
    write_report(aggregate_runs(done, test_total), dir);
    char line[128];
    std::snprintf(line, sizeof(line), "run %d: accuracy %.4f (%.1f s)\n", r.run_index, r.accuracy,
                  r.wall_seconds);
    out << line;
  };

  EvalReport report = run_experiment(cfg, test_set, on_run);
  write_report(report, dir);

  char summary[128];
  std::snprintf(summary, sizeof(summary), "mean accuracy %.4f, std %.4f over %zu runs\n",
                report.mean_accuracy, report.std_accuracy, report.per_run_accuracy.size());
  out << summary;
  out << "wrote " << (dir / "report.txt").string() << " and " << (dir / "report.csv").string()
      << "\n";
  return 0;
}

int cmd_diagnose(const CommonOpts& common, const std::string& model_path,
                 const std::string& signal_path, std::ostream& out) {
  std::optional<ExperimentConfig> cfg;
  if (!common.config_path.empty()) cfg = load_config(common);

  net1d::TrainedModel model = net1d::load_model(model_path);
  TimeSeries signal = load_signal(signal_path);
  Spectrum spec = preprocess_for_model(model, signal, cfg);

  auto [label, probs] = net1d::predict(model, spec);
  ordered_json j;
  j["label"] = label_name(label);
  j["probabilities"] = probabilities_json(probs);
  out << j.dump() << "\n";
  return 0;
}

int cmd_explain(const CommonOpts& common, const std::string& model_path,
                const std::string& signal_path, bool svg, std::ostream& out) {
  std::optional<ExperimentConfig> cfg;
  if (!common.config_path.empty()) cfg = load_config(common);

  net1d::TrainedModel model = net1d::load_model(model_path);
  TimeSeries signal = load_signal(signal_path);
  Spectrum spec = preprocess_for_model(model, signal, cfg);

  explain::Explanation ex = explain::explain_prediction(model, spec);

  fs::path dir = !common.out_override.empty() ? fs::path(common.out_override)
                 : cfg.has_value()            ? fs::path(cfg->out_dir)
                                              : fs::path(".");
  fs::create_directories(dir);
  fs::path csv_path = dir / "heatmap.csv";
  export_heatmap(spec, ex.heatmap, csv_path);
  if (svg) export_heatmap_svg(spec, ex.heatmap, dir / "heatmap.svg");

  ordered_json j;
  j["label"] = label_name(ex.label);
  j["probabilities"] = probabilities_json(ex.probabilities);
  ordered_json tops = ordered_json::array();
  for (const auto& [hz, rel] : ex.top_frequencies) {
    tops.push_back(ordered_json{{"hz", hz}, {"relevance", rel}});
  }
  j["top_frequencies"] = tops;
  j["heatmap_csv"] = csv_path.string();
  out << j.dump() << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& common, const std::string& list_text, bool real_sweep,
              std::ostream& out) {
  ExperimentConfig cfg = load_config(common);
  fs::path dir = cfg.out_dir;
  fs::create_directories(dir);

  std::vector<std::size_t> values =
      parse_size_list(list_text, real_sweep ? "--counts" : "--sizes");

  auto on_run = [&](const RunResult& r) {
    char line[96];
    std::snprintf(line, sizeof(line), "  run %d: accuracy %.4f (%.1f s)\n", r.run_index,
                  r.accuracy, r.wall_seconds);
    out << line;
  };

  std::vector<SweepRow> rows;
  const char* param = real_sweep ? "n_r" : "n_total";
  const char* stem = real_sweep ? "sweep_real" : "sweep_total";
  if (real_sweep) {
    rows = sweep_real_count(cfg, values, on_run);
  } else {
    rows = sweep_total_size(cfg, values, on_run);
  }
  write_sweep(rows, param, stem, dir);

  for (const SweepRow& r : rows) {
    char line[96];
    std::snprintf(line, sizeof(line), "%s=%g: mean accuracy %.4f, std %.4f\n", param, r.parameter,
                  r.mean_accuracy, r.std_accuracy);
    out << line;
  }
  out << "wrote " << (dir / (std::string(stem) + ".csv")).string() << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fault diagnosis workbench for rotating machinery"};
  app.require_subcommand(1);

  CommonOpts gen_opts;
  std::size_t gen_count = 0;
  bool gen_conditions = false;
  CLI::App* gen = app.add_subcommand("gen", "generate synthetic baseline signals");
  add_common(gen, gen_opts, true);
  gen->add_option("--count", gen_count, "number of baselines (default: n_r from config)");
  gen->add_flag("--conditions", gen_conditions, "also write the seven condition signals");

  CommonOpts build_opts;
  std::string build_out_file;
  CLI::App* build = app.add_subcommand("build-dataset", "build the augmented training pool");
  add_common(build, build_opts, true);
  build->add_option("--dataset", build_out_file, "output dataset path (default <out>/dataset.fdd)");

  CommonOpts train_opts;
  std::string train_dataset;
  CLI::App* train = app.add_subcommand("train", "train a single model");
  add_common(train, train_opts, true);
  train->add_option("--dataset", train_dataset, "train from a saved dataset instead of building one");

  CommonOpts eval_opts;
  CLI::App* evaluate = app.add_subcommand("evaluate", "run the full multi-run experiment");
  add_common(evaluate, eval_opts, true);

  CommonOpts diag_opts;
  std::string diag_model;
  std::string diag_signal;
  CLI::App* diagnose = app.add_subcommand("diagnose", "classify one signal file");
  add_common(diagnose, diag_opts, false);
  diagnose->add_option("--model", diag_model, "trained model file")->required();
  diagnose->add_option("--signal", diag_signal, "signal file")->required();

  CommonOpts explain_opts;
  std::string explain_model;
  std::string explain_signal;
  bool explain_svg = false;
  CLI::App* explain_cmd = app.add_subcommand("explain", "classify and locate the evidence");
  add_common(explain_cmd, explain_opts, false);
  explain_cmd->add_option("--model", explain_model, "trained model file")->required();
  explain_cmd->add_option("--signal", explain_signal, "signal file")->required();
  explain_cmd->add_flag("--svg", explain_svg, "also write heatmap.svg");

  CommonOpts sweep_total_opts;
  std::string sweep_sizes = "1050,2100,3150,4200,5250";
  CLI::App* sweep_total = app.add_subcommand("sweep-total", "accuracy vs training pool size");
  add_common(sweep_total, sweep_total_opts, true);
  sweep_total->add_option("--sizes", sweep_sizes, "comma-separated pool sizes");

  CommonOpts sweep_real_opts;
  std::string sweep_counts = "0,1,2,3,5,10,15,25,30,50,75";
  CLI::App* sweep_real = app.add_subcommand("sweep-real", "accuracy vs baseline signal count");
  add_common(sweep_real, sweep_real_opts, true);
  sweep_real->add_option("--counts", sweep_counts, "comma-separated baseline counts (0 = surrogates)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    out << target->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_opts, gen_count, gen_conditions, out);
    if (build->parsed()) return cmd_build_dataset(build_opts, build_out_file, out);
    if (train->parsed()) return cmd_train(train_opts, train_dataset, out);
    if (evaluate->parsed()) return cmd_evaluate(eval_opts, out);
    if (diagnose->parsed()) return cmd_diagnose(diag_opts, diag_model, diag_signal, out);
    if (explain_cmd->parsed()) {
      return cmd_explain(explain_opts, explain_model, explain_signal, explain_svg, out);
    }
    if (sweep_total->parsed()) return cmd_sweep(sweep_total_opts, sweep_sizes, false, out);
    if (sweep_real->parsed()) return cmd_sweep(sweep_real_opts, sweep_counts, true, out);
  } catch (const UsageError& e) {
    err << "error: " << e.message << "\n";
    return 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << "error: no command\n";
  return 1;
}

}  // namespace faultdx::harness
