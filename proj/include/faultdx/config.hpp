#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "faultdx/augment.hpp"
#include "faultdx/core.hpp"
#include "faultdx/net1d.hpp"
#include "faultdx/spectral.hpp"
#include "faultdx/synthgen.hpp"

namespace faultdx::harness {

/// Line-oriented `key = value` settings with `#` comments and dotted key
/// groups. Reads are tracked so unknown keys can be reported instead of
/// silently ignored.
class KeyValues {
 public:
  static KeyValues from_file(const std::filesystem::path& path);
  static KeyValues from_string(const std::string& text, const std::string& origin);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  std::optional<double> get_optional_double(const std::string& key);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);

  /// Keys present in the source but never read.
  std::vector<std::string> unused_keys() const;

 private:
  std::string describe(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::set<std::string> used_;
  std::string origin_;
};

struct ExperimentConfig {
  MachineSpec machine;
  synthgen::AmplitudeRule amplitude;
  synthgen::SurrogateParams surrogate;
  double surrogate_fs = 25000.0;
  std::size_t surrogate_n = 25000;
  std::size_t test_baselines = 50;
  std::size_t surrogates_when_zero_real = 30;

  spectral::SpectralConfig spectral;
  augment::AugmentParams augment;
  double shift_frac = 0.05;  // translation range as a fraction of signal length

  net1d::Architecture arch;  // input_len resolved from the preprocessed bin count
  net1d::TrainConfig train;

  std::size_t n_total = 5250;
  std::size_t n_r = 30;
  int repetitions = 10;
  std::uint64_t master_seed = 42;

  std::string baseline_source = "surrogate";  // or "files"
  std::string train_signal_dir;
  std::string test_signal_dir;
  std::string out_dir = "out";

  void validate() const;
};

ExperimentConfig config_from_keyvalues(KeyValues& kv);

/// Loads the config file, then applies `key=value` overrides in order.
ExperimentConfig load_experiment_config(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace faultdx::harness
