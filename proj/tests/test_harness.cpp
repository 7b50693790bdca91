#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "faultdx/augment.hpp"
#include "faultdx/cli.hpp"
#include "faultdx/config.hpp"
#include "faultdx/core.hpp"
#include "faultdx/dataset_io.hpp"
#include "faultdx/experiment.hpp"
#include "faultdx/explain.hpp"
#include "faultdx/net1d.hpp"
#include "faultdx/report.hpp"
#include "faultdx/rng.hpp"
#include "faultdx/signal_io.hpp"
#include "test_util.hpp"

using namespace faultdx;
using namespace faultdx::harness;
namespace fs = std::filesystem;
namespace tu = testutil;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "faultdx_harness_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  REQUIRE(out.good());
}

// A deliberately small experiment so harness paths run in seconds.
std::string tiny_config_text(const fs::path& out_dir) {
  std::ostringstream cfg;
  cfg << "master_seed = 11\n"
         "repetitions = 2\n"
         "n_total = 70\n"
         "n_r = 2\n"
         "out_dir = " << out_dir.string() << "\n"
         "machine.rotation_hz = 20.0\n"
         "machine.gmf_hz = 160\n"
         "machine.bpfo_hz = 107\n"
         "machine.bpfi_hz = 156\n"
         "machine.impact_resonance_hz = 256\n"
         "surrogate.fs = 2048\n"
         "surrogate.n = 1024\n"
         "surrogate.count_test = 2\n"
         "surrogate.tone_amplitude = 0.3\n"
         "surrogate.noise_std = 1.0\n"
         "surrogate.extra_tones = 2\n"
         "surrogate.tone_freq_max = 900\n"
         "spectral.f_max_hz = 300\n"
         "net.conv_filters = 4\n"
         "net.kernel_size = 3\n"
         "net.pool_size = 2\n"
         "net.dense_units = 8\n"
         "net.dropout_rate = 0.3\n"
         "train.batch_size = 16\n"
         "train.learning_rate = 0.003\n"
         "train.patience = 2\n"
         "train.max_epochs = 3\n"
         "train.threads = 1\n";
  return cfg.str();
}

ExperimentConfig tiny_config(const fs::path& out_dir) {
  KeyValues kv = KeyValues::from_string(tiny_config_text(out_dir), "tiny.cfg");
  return config_from_keyvalues(kv);
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  std::vector<const char*> argv;
  argv.push_back("faultdx");
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int rc = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text != nullptr) *out_text = out.str();
  if (err_text != nullptr) *err_text = err.str();
  return rc;
}

}  // namespace

TEST_CASE("KeyValues parses, tracks usage and reports malformed values") {
  const std::string text =
      "# leading comment\n"
      "\n"
      "alpha = 1.5   # trailing comment\n"
      "  group.sub =  text value \n"
      "count = 42\n"
      "flag = on\n"
      "big = 18446744073709551615\n"
      "bad_number = 12x\n"
      "inf_value = inf\n"
      "never_read = 1\n";
  KeyValues kv = KeyValues::from_string(text, "mem.cfg");

  CHECK(kv.has("alpha"));
  CHECK_FALSE(kv.has("missing"));
  CHECK(kv.get_double("alpha", 0.0) == 1.5);
  CHECK(kv.get_string("group.sub", "") == "text value");
  CHECK(kv.get_int("count", 0) == 42);
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_u64("big", 0) == 18446744073709551615ull);
  CHECK(std::isinf(kv.get_double("inf_value", 0.0)));
  CHECK(kv.get_double("not_there", 2.5) == 2.5);

  try {
    kv.get_double("bad_number", 0.0);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("mem.cfg:8") != std::string::npos);
    CHECK(msg.find("bad_number") != std::string::npos);
  }
  CHECK_THROWS_AS(kv.get_int("alpha", 0), DataError);
  CHECK_THROWS_AS(kv.get_u64("alpha", 0), DataError);
  CHECK_THROWS_AS(kv.get_bool("count", false), DataError);

  const auto unused = kv.unused_keys();
  REQUIRE(unused.size() == 1);
  CHECK(unused[0] == "never_read");

  kv.set("alpha", "2.25");
  CHECK(kv.get_double("alpha", 0.0) == 2.25);

  CHECK_THROWS_AS(KeyValues::from_string("no equals sign\n", "bad.cfg"), DataError);
  CHECK_THROWS_AS(KeyValues::from_string("= 3\n", "bad.cfg"), DataError);
  CHECK_THROWS_AS(KeyValues::from_file(fs::path("/nonexistent/nowhere.cfg")), DataError);
}

TEST_CASE("config mapping covers every key and rejects unknown ones") {
  const fs::path dir = fresh_dir("config_map");
  ExperimentConfig cfg = tiny_config(dir / "out");
  CHECK(cfg.master_seed == 11);
  CHECK(cfg.repetitions == 2);
  CHECK(cfg.n_total == 70);
  CHECK(cfg.n_r == 2);
  CHECK(cfg.machine.rotation_hz == 20.0);
  REQUIRE(cfg.machine.gmf_hz.has_value());
  CHECK(*cfg.machine.gmf_hz == 160.0);
  REQUIRE(cfg.machine.impact_resonance_hz.has_value());
  CHECK(*cfg.machine.impact_resonance_hz == 256.0);
  CHECK(cfg.surrogate_fs == 2048.0);
  CHECK(cfg.surrogate_n == 1024);
  CHECK(cfg.test_baselines == 2);
  CHECK(cfg.surrogate.tone_amplitude == 0.3);
  CHECK(cfg.surrogate.extra_tones == 2);
  CHECK(cfg.spectral.f_max_hz == 300.0);
  CHECK(cfg.arch.conv_filters == 4);
  CHECK(cfg.arch.kernel_size == 3);
  CHECK(cfg.arch.pool_size == 2);
  CHECK(cfg.arch.dense_units == 8);
  CHECK(cfg.arch.dropout_rate == 0.3);
  CHECK(cfg.train.batch_size == 16);
  CHECK(cfg.train.learning_rate == 0.003);
  CHECK(cfg.train.patience == 2);
  CHECK(cfg.train.max_epochs == 3);
  CHECK(cfg.train.threads == 1);

  // Defaults survive when keys are absent.
  CHECK(cfg.augment.alpha_gauss_min == 0.01);
  CHECK(cfg.shift_frac == 0.05);
  CHECK(cfg.baseline_source == "surrogate");
  CHECK(cfg.spectral.window == spectral::Window::None);
  CHECK(cfg.spectral.detrend_mean);
  CHECK_FALSE(cfg.spectral.paper_order);

  {
    KeyValues kv = KeyValues::from_string("mystery_key = 1\n", "m.cfg");
    try {
      config_from_keyvalues(kv);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("mystery_key") != std::string::npos);
    }
  }
  {
    KeyValues kv = KeyValues::from_string("n_total = 10\n", "m.cfg");
    CHECK_THROWS_AS(config_from_keyvalues(kv), DataError);
  }
  {
    KeyValues kv = KeyValues::from_string("spectral.window = hamming\n", "m.cfg");
    CHECK_THROWS_AS(config_from_keyvalues(kv), DataError);
  }
  {
    KeyValues kv = KeyValues::from_string(
        "machine.rotation_hz = 20\nspectral.window = Hann\n", "m.cfg");
    CHECK(config_from_keyvalues(kv).spectral.window == spectral::Window::Hann);
  }
}

TEST_CASE("config file overrides apply after the file is read") {
  const fs::path dir = fresh_dir("config_override");
  const fs::path cfg_path = dir / "exp.cfg";
  spit(cfg_path, tiny_config_text(dir / "out"));

  const ExperimentConfig plain = load_experiment_config(cfg_path);
  CHECK(plain.master_seed == 11);
  CHECK(plain.train.patience == 2);

  const ExperimentConfig tweaked = load_experiment_config(
      cfg_path, {{"master_seed", "99"}, {"train.patience", "5"}, {"n_total", "105"}});
  CHECK(tweaked.master_seed == 99);
  CHECK(tweaked.train.patience == 5);
  CHECK(tweaked.n_total == 105);
  CHECK(tweaked.n_r == plain.n_r);

  CHECK_THROWS_AS(load_experiment_config(cfg_path, {{"no_such_key", "1"}}), DataError);
  CHECK_THROWS_AS(load_experiment_config(dir / "missing.cfg"), DataError);
}

TEST_CASE("signal files round-trip bitwise") {
  const fs::path dir = fresh_dir("signal_io");
  Rng rng(0xf001);
  const TimeSeries sig = tu::random_signal(257, 12345.5, rng, 3.0);

  const fs::path path = dir / "sig.txt";
  save_signal(sig, path);
  const TimeSeries back = load_signal(path);
  REQUIRE(back.size() == sig.size());
  CHECK(back.sample_rate_hz() == sig.sample_rate_hz());
  for (std::size_t i = 0; i < sig.size(); ++i) CHECK(back.samples()[i] == sig.samples()[i]);

  spit(dir / "manual.txt",
       "# a hand-written signal\n"
       "\n"
       "fs 100.0\n"
       "1.0\n"
       " 2.5\n"
       "-3e-2\n");
  const TimeSeries manual = load_signal(dir / "manual.txt");
  REQUIRE(manual.size() == 3);
  CHECK(manual.sample_rate_hz() == 100.0);
  CHECK(manual.samples()[1] == 2.5);
  CHECK(manual.samples()[2] == -3e-2);

  spit(dir / "nofs.txt", "1.0\n2.0\n3.0\n");
  try {
    load_signal(dir / "nofs.txt");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("nofs.txt") != std::string::npos);
  }

  spit(dir / "badsample.txt", "fs 100\n1.0\nbogus\n");
  try {
    load_signal(dir / "badsample.txt");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("badsample.txt:3") != std::string::npos);
  }

  spit(dir / "short.txt", "fs 100\n1.0\n");
  CHECK_THROWS_AS(load_signal(dir / "short.txt"), DataError);
  spit(dir / "badfs.txt", "fs -5\n1.0\n2.0\n");
  CHECK_THROWS_AS(load_signal(dir / "badfs.txt"), DataError);
  CHECK_THROWS_AS(load_signal(dir / "missing.txt"), DataError);
}

TEST_CASE("dataset files round-trip and detect damage") {
  const fs::path dir = fresh_dir("dataset_io");

  MachineSpec spec;
  spec.rotation_hz = 20.0;
  spec.gmf_hz = 160.0;
  spec.bpfo_hz = 107.0;
  spec.bpfi_hz = 156.0;
  spec.impact_resonance_hz = 256.0;
  std::vector<TimeSeries> baselines;
  Rng rng(0xf011);
  baselines.push_back(tu::random_signal(1024, 2048.0, rng, 0.3));
  spectral::SpectralConfig scfg;
  scfg.f_max_hz = 400.0;
  const LabeledDataset ds =
      augment::build_training_pool(baselines, spec, {3.0, 20.0}, {}, scfg, 35, 77, {"rig-x"});

  const fs::path path = dir / "pool.fdd";
  save_dataset(ds, path);
  const LabeledDataset back = load_dataset(path);
  REQUIRE(back.size() == ds.size());
  CHECK(back.digest() == ds.digest());
  CHECK(back.split == ds.split);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.samples[i].label == ds.samples[i].label);
    CHECK(back.samples[i].spectrum.magnitudes() == ds.samples[i].spectrum.magnitudes());
    CHECK(back.samples[i].spectrum.df_hz() == ds.samples[i].spectrum.df_hz());
    CHECK(back.samples[i].spectrum.f_start_hz() == ds.samples[i].spectrum.f_start_hz());
    CHECK(back.samples[i].spectrum.normalized() == ds.samples[i].spectrum.normalized());
    CHECK(back.samples[i].provenance.origin_signal_id == ds.samples[i].provenance.origin_signal_id);
    CHECK(back.samples[i].provenance.augmentation_op == ds.samples[i].provenance.augmentation_op);
    CHECK(back.samples[i].provenance.rng_seed == ds.samples[i].provenance.rng_seed);
  }

  const std::string good = slurp(path);

  std::string corrupted = good;
  corrupted[good.size() / 2] = static_cast<char>(corrupted[good.size() / 2] ^ 0x40);
  spit(dir / "corrupt.fdd", corrupted);
  CHECK_THROWS_AS(load_dataset(dir / "corrupt.fdd"), DataError);

  spit(dir / "trunc.fdd", good.substr(0, good.size() - 9));
  CHECK_THROWS_AS(load_dataset(dir / "trunc.fdd"), DataError);

  std::string magic = good;
  magic[0] = 'X';
  spit(dir / "magic.fdd", magic);
  CHECK_THROWS_AS(load_dataset(dir / "magic.fdd"), DataError);

  spit(dir / "trailing.fdd", good + std::string(1, '\0'));
  CHECK_THROWS_AS(load_dataset(dir / "trailing.fdd"), DataError);

  CHECK_THROWS_AS(load_dataset(dir / "missing.fdd"), DataError);
}

TEST_CASE("training baselines come from the configured source") {
  const fs::path dir = fresh_dir("baselines");
  ExperimentConfig cfg = tiny_config(dir / "out");

  const BaselineSet surro = make_training_baselines(cfg);
  REQUIRE(surro.signals.size() == 2);
  REQUIRE(surro.ids.size() == 2);
  CHECK(surro.ids[0] == "train-0");
  CHECK(surro.ids[1] == "train-1");
  CHECK(surro.signals[0].size() == cfg.surrogate_n);
  CHECK(surro.signals[0].samples() != surro.signals[1].samples());

  const BaselineSet again = make_training_baselines(cfg);
  CHECK(again.signals[0].samples() == surro.signals[0].samples());

  ExperimentConfig zero = cfg;
  zero.n_r = 0;
  zero.surrogates_when_zero_real = 3;
  const BaselineSet stand_ins = make_training_baselines(zero);
  REQUIRE(stand_ins.signals.size() == 3);
  CHECK(stand_ins.ids[0] == "surrogate-0");
  // The zero-real stream is distinct from the train stream.
  CHECK(stand_ins.signals[0].samples() != surro.signals[0].samples());

  const fs::path sig_dir = dir / "signals";
  fs::create_directories(sig_dir);
  Rng rng(0xf021);
  save_signal(tu::random_signal(512, 2048.0, rng, 1.0), sig_dir / "b_second.txt");
  save_signal(tu::random_signal(512, 2048.0, rng, 1.0), sig_dir / "a_first.txt");
  save_signal(tu::random_signal(512, 2048.0, rng, 1.0), sig_dir / "c_third.txt");

  ExperimentConfig files = cfg;
  files.baseline_source = "files";
  files.train_signal_dir = sig_dir.string();
  files.n_r = 2;
  const BaselineSet loaded = make_training_baselines(files);
  REQUIRE(loaded.ids.size() == 2);
  CHECK(loaded.ids[0] == "a_first.txt");
  CHECK(loaded.ids[1] == "b_second.txt");

  files.n_r = 5;
  CHECK_THROWS_AS(make_training_baselines(files), DataError);
}

TEST_CASE("the synthetic test set is balanced, held out and stable") {
  const fs::path dir = fresh_dir("test_set");
  const ExperimentConfig cfg = tiny_config(dir / "out");

  const LabeledDataset test_set = build_test_set(cfg);
  REQUIRE(test_set.size() == 7 * cfg.test_baselines);
  CHECK(test_set.count_split(Split::Test) == test_set.size());
  const auto counts = test_set.class_counts();
  for (std::size_t c = 0; c < kNumLabels; ++c) CHECK(counts[c] == cfg.test_baselines);

  const std::size_t bins =
      spectral::preprocessed_bin_count(cfg.surrogate_n, cfg.surrogate_fs, cfg.spectral);
  for (const auto& s : test_set.samples) CHECK(s.spectrum.size() == bins);

  CHECK(build_test_set(cfg).digest() == test_set.digest());

  // The test stream depends only on the master seed, not on the training
  // pool shape.
  ExperimentConfig other = cfg;
  other.n_r = 5;
  other.n_total = 105;
  other.repetitions = 1;
  CHECK(build_test_set(other).digest() == test_set.digest());

  ExperimentConfig reseeded = cfg;
  reseeded.master_seed = 12;
  CHECK(build_test_set(reseeded).digest() != test_set.digest());
}

TEST_CASE("per-run pools share the test set but not each other") {
  const fs::path dir = fresh_dir("run_pools");
  const ExperimentConfig cfg = tiny_config(dir / "out");
  const BaselineSet baselines = make_training_baselines(cfg);

  const LabeledDataset pool1 = build_pool_for_run(cfg, baselines, 1);
  const LabeledDataset pool2 = build_pool_for_run(cfg, baselines, 2);
  CHECK(pool1.size() == cfg.n_total);
  CHECK(pool2.size() == cfg.n_total);
  CHECK(pool1.digest() != pool2.digest());
  CHECK(build_pool_for_run(cfg, baselines, 1).digest() == pool1.digest());

  const std::size_t n_val = pool1.count_split(Split::Validation);
  CHECK(std::llabs(static_cast<long long>(n_val) - 7) <= 1);
}

TEST_CASE("evaluate_model fills the confusion matrix") {
  net1d::Architecture arch;
  arch.input_len = 16;
  arch.conv_filters = 4;
  arch.kernel_size = 3;
  arch.pool_size = 2;
  arch.dropout_rate = 0.0;
  arch.dense_units = 12;
  arch.n_classes = 7;

  LabeledDataset ds;
  Rng rng(0xf031);
  for (int c = 0; c < 7; ++c) {
    for (int i = 0; i < 12; ++i) {
      std::vector<double> mags(16);
      for (double& v : mags) v = 0.05 * rng.uniform(0.0, 1.0);
      mags[static_cast<std::size_t>(1 + 2 * c)] += 1.0;
      ds.samples.push_back({Spectrum(std::move(mags), 1.0), label_from_index(c), {}});
      ds.split.push_back(i < 9 ? Split::Train : (i < 10 ? Split::Validation : Split::Test));
    }
  }

  net1d::TrainConfig tcfg;
  tcfg.batch_size = 8;
  tcfg.learning_rate = 0.01;
  tcfg.max_epochs = 60;
  tcfg.seed = 3;
  tcfg.threads = 1;
  const net1d::TrainedModel model = net1d::train(ds, arch, tcfg);

  const Evaluation ev = evaluate_model(model, ds);
  CHECK(ev.total == 14);  // two Test samples per class
  CHECK(ev.accuracy == doctest::Approx(1.0));
  for (int t = 0; t < 7; ++t) {
    for (int p = 0; p < 7; ++p) {
      CHECK(ev.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] ==
            (t == p ? 2 : 0));
    }
  }
}

TEST_CASE("aggregate_runs computes mean and population std") {
  std::vector<RunResult> runs(2);
  runs[0].run_index = 1;
  runs[0].accuracy = 0.5;
  runs[0].wall_seconds = 10.0;
  runs[1].run_index = 2;
  runs[1].accuracy = 0.75;
  runs[1].wall_seconds = 20.0;
  runs[0].confusion[0][0] = 3;
  runs[0].confusion[0][1] = 1;
  runs[1].confusion[0][0] = 1;
  runs[1].confusion[0][1] = 3;

  const EvalReport rep = aggregate_runs(runs, 28);
  REQUIRE(rep.per_run_accuracy.size() == 2);
  CHECK(rep.per_run_accuracy[0] == 0.5);
  CHECK(rep.per_run_accuracy[1] == 0.75);
  CHECK(rep.mean_accuracy == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(rep.std_accuracy == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(rep.test_total == 28);
  REQUIRE(rep.confusions.size() == 2);
  CHECK(rep.confusion_mean[0][0] == doctest::Approx(2.0));
  CHECK(rep.confusion_mean[0][1] == doctest::Approx(2.0));
  CHECK(rep.confusion_std[0][0] == doctest::Approx(1.0));
  REQUIRE(rep.wall_seconds.size() == 2);
  CHECK(rep.wall_seconds[1] == 20.0);

  CHECK_THROWS_AS(aggregate_runs({}, 28), std::invalid_argument);
}

TEST_CASE("a tiny experiment runs end to end with per-run callbacks") {
  const fs::path dir = fresh_dir("experiment");
  const ExperimentConfig cfg = tiny_config(dir / "out");
  const LabeledDataset test_set = build_test_set(cfg);

  std::vector<int> seen;
  const EvalReport rep = run_experiment(cfg, test_set, [&](const RunResult& r) {
    seen.push_back(r.run_index);
    CHECK(r.model.history.size() >= 1);
  });
  CHECK(seen == std::vector<int>{1, 2});
  REQUIRE(rep.per_run_accuracy.size() == 2);
  CHECK(rep.test_total == test_set.size());
  const double mean = (rep.per_run_accuracy[0] + rep.per_run_accuracy[1]) / 2.0;
  CHECK(rep.mean_accuracy == doctest::Approx(mean).epsilon(1e-12));
  for (double a : rep.per_run_accuracy) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}

TEST_CASE("reports are wall-clock independent and reproducible") {
  const fs::path dir_a = fresh_dir("report_a");
  const fs::path dir_b = fresh_dir("report_b");

  std::vector<RunResult> runs(2);
  runs[0].run_index = 1;
  runs[0].accuracy = 0.9;
  runs[0].wall_seconds = 1.0;
  runs[1].run_index = 2;
  runs[1].accuracy = 0.95;
  runs[1].wall_seconds = 2.0;
  runs[0].confusion[2][2] = 5;
  runs[1].confusion[2][3] = 5;

  write_report(aggregate_runs(runs, 10), dir_a);
  runs[0].wall_seconds = 123.0;
  runs[1].wall_seconds = 456.0;
  write_report(aggregate_runs(runs, 10), dir_b);

  const std::string txt_a = slurp(dir_a / "report.txt");
  const std::string csv_a = slurp(dir_a / "report.csv");
  CHECK(txt_a == slurp(dir_b / "report.txt"));
  CHECK(csv_a == slurp(dir_b / "report.csv"));

  CHECK(txt_a.find("mean accuracy") != std::string::npos);
  CHECK(csv_a.find("record,run,true_label,pred_label,value") != std::string::npos);
  CHECK(csv_a.find("accuracy,1,,,") != std::string::npos);
  CHECK(csv_a.find("test_total,,,,10") != std::string::npos);
}

TEST_CASE("sweep tables keep one row per parameter value") {
  const fs::path dir = fresh_dir("sweep_out");
  std::vector<SweepRow> rows{{1050.0, 0.8, 0.02}, {5250.0, 0.9, 0.01}};
  write_sweep(rows, "n_total", "sweep_total", dir);
  const std::string csv = slurp(dir / "sweep_total.csv");
  CHECK(csv.find("n_total,mean_accuracy,std_accuracy") != std::string::npos);
  CHECK(csv.find("1050") != std::string::npos);
  CHECK(csv.find("5250") != std::string::npos);
  CHECK(fs::exists(dir / "sweep_total.txt"));
}

TEST_CASE("heatmap exports align bins with relevance") {
  const fs::path dir = fresh_dir("heatmap_out");
  std::vector<double> mags{0.1, 0.9, 0.4, 0.2};
  const Spectrum spec(mags, 2.0);
  explain::Heatmap h;
  h.relevance = {0.0, 1.0, 0.5, 0.25};
  h.raw = {0.0, 4.0, 2.0, 1.0};
  h.normalized_peak = true;

  const fs::path csv_path = dir / "heatmap.csv";
  export_heatmap(spec, h, csv_path);
  std::istringstream csv(slurp(csv_path));
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "frequency_hz,magnitude,relevance");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 4);

  export_heatmap_svg(spec, h, dir / "heatmap.svg");
  const std::string svg = slurp(dir / "heatmap.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);

  explain::Heatmap wrong = h;
  wrong.relevance.pop_back();
  CHECK_THROWS_AS(export_heatmap(spec, wrong, dir / "bad.csv"), std::invalid_argument);
}

TEST_CASE("cli handles help, usage errors and bad configs") {
  std::string out;
  std::string err;

  CHECK(run_cli({"--help"}, &out, &err) == 0);
  CHECK(out.find("gen") != std::string::npos);

  CHECK(run_cli({"gen", "--help"}, &out, &err) == 0);
  CHECK(out.find("--count") != std::string::npos);

  CHECK(run_cli({}, &out, &err) == 1);
  CHECK(run_cli({"no-such-command"}, &out, &err) == 1);
  CHECK_FALSE(err.empty());

  CHECK(run_cli({"evaluate", "--config", "/nonexistent/exp.cfg"}, &out, &err) == 2);
  CHECK(err.find("error:") != std::string::npos);

  const fs::path dir = fresh_dir("cli_bad_cfg");
  spit(dir / "bad.cfg", "n_total = banana\n");
  CHECK(run_cli({"evaluate", "--config", (dir / "bad.cfg").string()}, &out, &err) == 2);
  CHECK(err.find("banana") != std::string::npos);

  spit(dir / "unknown.cfg", "definitely_not_a_key = 1\n");
  CHECK(run_cli({"evaluate", "--config", (dir / "unknown.cfg").string()}, &out, &err) == 2);

  CHECK(run_cli({"diagnose", "--model", "/nonexistent/m.fdx", "--signal", "/nonexistent/s.txt"},
                &out, &err) == 2);

  const fs::path cfg_path = dir / "ok.cfg";
  spit(cfg_path, tiny_config_text(dir / "out"));
  CHECK(run_cli({"sweep-total", "--config", cfg_path.string(), "--sizes", "abc"}, &out, &err) ==
        1);
  CHECK(run_cli({"sweep-total", "--config", cfg_path.string(), "--sizes", ""}, &out, &err) == 1);
  CHECK(run_cli({"gen", "--config", cfg_path.string(), "--set", "garbage"}, &out, &err) == 1);
}

TEST_CASE("cli gen, build-dataset, train, diagnose and explain cooperate") {
  const fs::path dir = fresh_dir("cli_flow");
  const fs::path out_dir = dir / "out";
  const fs::path cfg_path = dir / "exp.cfg";
  spit(cfg_path, tiny_config_text(out_dir));

  std::string out;
  std::string err;

  REQUIRE(run_cli({"gen", "--config", cfg_path.string(), "--count", "1", "--conditions"}, &out,
                  &err) == 0);
  CHECK(fs::exists(out_dir / "baseline_000.txt"));
  CHECK(fs::exists(out_dir / "cond_000_Normal.txt"));
  CHECK(fs::exists(out_dir / "cond_000_BPFO.txt"));
  CHECK(fs::exists(out_dir / "cond_000_GearFault.txt"));
  const TimeSeries gen_sig = load_signal(out_dir / "baseline_000.txt");
  CHECK(gen_sig.size() == 1024);
  CHECK(gen_sig.sample_rate_hz() == 2048.0);

  REQUIRE(run_cli({"build-dataset", "--config", cfg_path.string()}, &out, &err) == 0);
  CHECK(out.find("samples: 70") != std::string::npos);
  const LabeledDataset pool = load_dataset(out_dir / "dataset.fdd");
  CHECK(pool.size() == 70);

  REQUIRE(run_cli({"train", "--config", cfg_path.string(), "--dataset",
                   (out_dir / "dataset.fdd").string()},
                  &out, &err) == 0);
  CHECK(fs::exists(out_dir / "model.fdx"));
  CHECK(fs::exists(out_dir / "history.csv"));
  const std::string history = slurp(out_dir / "history.csv");
  CHECK(history.find("epoch,train_loss,val_accuracy") != std::string::npos);

  REQUIRE(run_cli({"diagnose", "--model", (out_dir / "model.fdx").string(), "--signal",
                   (out_dir / "cond_000_Unbalance.txt").string(), "--config", cfg_path.string()},
                  &out, &err) == 0);
  {
    const auto j = nlohmann::json::parse(out);
    CHECK(j.contains("label"));
    CHECK(j.contains("probabilities"));
    REQUIRE(j["probabilities"].size() == 7);
    double sum = 0.0;
    bool found = false;
    for (int k = 0; k < kNumLabels; ++k) {
      const std::string name = label_name(label_from_index(k));
      REQUIRE(j["probabilities"].contains(name));
      sum += j["probabilities"][name].get<double>();
      found = found || j["label"].get<std::string>() == name;
    }
    CHECK(found);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }

  REQUIRE(run_cli({"explain", "--model", (out_dir / "model.fdx").string(), "--signal",
                   (out_dir / "cond_000_Unbalance.txt").string(), "--config", cfg_path.string(),
                   "--svg"},
                  &out, &err) == 0);
  {
    const auto j = nlohmann::json::parse(out);
    CHECK(j.contains("top_frequencies"));
    CHECK(j["top_frequencies"].is_array());
    CHECK(fs::exists(out_dir / "heatmap.csv"));
    CHECK(fs::exists(out_dir / "heatmap.svg"));
  }

  // Signal too short for the model: a data error, not a crash.
  save_signal(TimeSeries(std::vector<double>{1.0, 2.0, 3.0, 4.0}, 2048.0), dir / "short.txt");
  CHECK(run_cli({"diagnose", "--model", (out_dir / "model.fdx").string(), "--signal",
                 (dir / "short.txt").string()},
                &out, &err) == 2);
}

TEST_CASE("cli evaluate writes reports and models per run") {
  const fs::path dir = fresh_dir("cli_eval");
  const fs::path out_dir = dir / "out";
  const fs::path cfg_path = dir / "exp.cfg";
  spit(cfg_path, tiny_config_text(out_dir));

  std::string out;
  std::string err;
  REQUIRE(run_cli({"evaluate", "--config", cfg_path.string()}, &out, &err) == 0);
  CHECK(out.find("run 1: accuracy") != std::string::npos);
  CHECK(out.find("run 2: accuracy") != std::string::npos);
  CHECK(out.find("mean accuracy") != std::string::npos);
  CHECK(fs::exists(out_dir / "report.txt"));
  CHECK(fs::exists(out_dir / "report.csv"));
  CHECK(fs::exists(out_dir / "model_run1.fdx"));
  CHECK(fs::exists(out_dir / "model_run2.fdx"));
  const net1d::TrainedModel m1 = net1d::load_model(out_dir / "model_run1.fdx");
  CHECK(m1.arch.conv_filters == 4);

  // The out directory override relocates every artifact.
  const fs::path moved = dir / "moved";
  REQUIRE(run_cli({"evaluate", "--config", cfg_path.string(), "--out", moved.string()}, &out,
                  &err) == 0);
  CHECK(fs::exists(moved / "report.txt"));
  CHECK(slurp(moved / "report.csv") == slurp(out_dir / "report.csv"));
}
