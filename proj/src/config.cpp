#include "faultdx/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace faultdx::harness {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a])) != 0) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])) != 0) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

KeyValues KeyValues::from_string(const std::string& text, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(origin + ":" + std::to_string(line_no) +
                      ": expected 'key = value', got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    kv.values_[key] = value;
    kv.lines_[key] = line_no;
  }
  return kv;
}

KeyValues KeyValues::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path.string());
}

void KeyValues::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  lines_[key] = 0;
}

bool KeyValues::has(const std::string& key) const { return values_.count(key) != 0; }

std::string KeyValues::describe(const std::string& key) const {
  auto it = lines_.find(key);
  std::string where = origin_.empty() ? std::string("config") : origin_;
  if (it != lines_.end() && it->second > 0) where += ":" + std::to_string(it->second);
  return where + ": key '" + key + "'";
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  return it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  const std::string& v = it->second;
  if (lower(v) == "inf" || lower(v) == "+inf") return std::numeric_limits<double>::infinity();
  errno = 0;
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE) {
    throw DataError(describe(key) + ": expected a number, got '" + v + "'");
  }
  return x;
}

std::optional<double> KeyValues::get_optional_double(const std::string& key) {
  if (!has(key)) return std::nullopt;
  return get_double(key, 0.0);
}

std::int64_t KeyValues::get_int(const std::string& key, std::int64_t fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  const std::string& v = it->second;
  errno = 0;
  char* end = nullptr;
  long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE) {
    throw DataError(describe(key) + ": expected an integer, got '" + v + "'");
  }
  return x;
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  const std::string& v = it->second;
  errno = 0;
  char* end = nullptr;
  unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE || v.find('-') != std::string::npos) {
    throw DataError(describe(key) + ": expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  std::string v = lower(it->second);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw DataError(describe(key) + ": expected a boolean, got '" + it->second + "'");
}

std::vector<std::string> KeyValues::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (used_.count(k) == 0) out.push_back(k);
  }
  return out;
}

void ExperimentConfig::validate() const {
  machine.validate();
  amplitude.validate();
  surrogate.validate();
  augment.validate();
  train.validate();
  if (!(surrogate_fs > 0.0)) throw std::invalid_argument("surrogate.fs must be positive");
  if (surrogate_n < 2) throw std::invalid_argument("surrogate.n must be at least 2");
  if (test_baselines == 0) throw std::invalid_argument("surrogate.count_test must be positive");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (n_total < 35) throw std::invalid_argument("n_total must be at least 35");
  if (!(shift_frac >= 0.0 && shift_frac < 1.0)) {
    throw std::invalid_argument("augment.shift_frac must lie in [0, 1)");
  }
  if (baseline_source != "surrogate" && baseline_source != "files") {
    throw std::invalid_argument("baseline.source must be 'surrogate' or 'files'");
  }
  if (baseline_source == "files" && train_signal_dir.empty()) {
    throw std::invalid_argument("baseline.source=files requires baseline.train_dir");
  }
  if (arch.conv_filters == 0 || arch.kernel_size == 0 || arch.pool_size == 0 ||
      arch.dense_units == 0) {
    throw std::invalid_argument("network sizes must be positive");
  }
  if (!(arch.dropout_rate >= 0.0 && arch.dropout_rate < 1.0)) {
    throw std::invalid_argument("net.dropout_rate must lie in [0, 1)");
  }
}

ExperimentConfig config_from_keyvalues(KeyValues& kv) {
  ExperimentConfig cfg;

  cfg.master_seed = kv.get_u64("master_seed", cfg.master_seed);
  cfg.repetitions = static_cast<int>(kv.get_int("repetitions", cfg.repetitions));
  cfg.n_total = static_cast<std::size_t>(kv.get_u64("n_total", cfg.n_total));
  cfg.n_r = static_cast<std::size_t>(kv.get_u64("n_r", cfg.n_r));
  cfg.out_dir = kv.get_string("out_dir", cfg.out_dir);

  cfg.baseline_source = kv.get_string("baseline.source", cfg.baseline_source);
  cfg.train_signal_dir = kv.get_string("baseline.train_dir", cfg.train_signal_dir);
  cfg.test_signal_dir = kv.get_string("baseline.test_dir", cfg.test_signal_dir);

  cfg.machine.rotation_hz = kv.get_double("machine.rotation_hz", cfg.machine.rotation_hz);
  cfg.machine.gmf_hz = kv.get_optional_double("machine.gmf_hz");
  cfg.machine.bpfo_hz = kv.get_optional_double("machine.bpfo_hz");
  cfg.machine.bpfi_hz = kv.get_optional_double("machine.bpfi_hz");
  cfg.machine.impact_resonance_hz = kv.get_optional_double("machine.impact_resonance_hz");
  cfg.machine.looseness_harmonic_count = static_cast<int>(
      kv.get_int("machine.looseness_harmonics", cfg.machine.looseness_harmonic_count));

  cfg.amplitude.min_gain_db = kv.get_double("amplitude.min_gain_db", cfg.amplitude.min_gain_db);
  cfg.amplitude.max_gain_db = kv.get_double("amplitude.max_gain_db", cfg.amplitude.max_gain_db);

  cfg.surrogate_fs = kv.get_double("surrogate.fs", cfg.surrogate_fs);
  cfg.surrogate_n = static_cast<std::size_t>(kv.get_u64("surrogate.n", cfg.surrogate_n));
  cfg.test_baselines =
      static_cast<std::size_t>(kv.get_u64("surrogate.count_test", cfg.test_baselines));
  cfg.surrogates_when_zero_real = static_cast<std::size_t>(
      kv.get_u64("surrogate.count_when_zero_real", cfg.surrogates_when_zero_real));
  cfg.surrogate.tone_amplitude =
      kv.get_double("surrogate.tone_amplitude", cfg.surrogate.tone_amplitude);
  cfg.surrogate.noise_std = kv.get_double("surrogate.noise_std", cfg.surrogate.noise_std);
  cfg.surrogate.extra_tones =
      static_cast<int>(kv.get_int("surrogate.extra_tones", cfg.surrogate.extra_tones));
  cfg.surrogate.tone_freq_min_hz =
      kv.get_double("surrogate.tone_freq_min", cfg.surrogate.tone_freq_min_hz);
  cfg.surrogate.tone_freq_max_hz =
      kv.get_double("surrogate.tone_freq_max", cfg.surrogate.tone_freq_max_hz);
  cfg.surrogate.tone_amp_min = kv.get_double("surrogate.tone_amp_min", cfg.surrogate.tone_amp_min);
  cfg.surrogate.tone_amp_max = kv.get_double("surrogate.tone_amp_max", cfg.surrogate.tone_amp_max);

  cfg.spectral.f_max_hz = kv.get_double("spectral.f_max_hz", cfg.spectral.f_max_hz);
  std::string window = kv.get_string("spectral.window", "none");
  std::string window_l;
  for (char c : window) window_l += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (window_l == "none") {
    cfg.spectral.window = spectral::Window::None;
  } else if (window_l == "hann") {
    cfg.spectral.window = spectral::Window::Hann;
  } else {
    throw DataError("spectral.window must be 'none' or 'hann', got '" + window + "'");
  }
  cfg.spectral.detrend_mean = kv.get_bool("spectral.detrend_mean", cfg.spectral.detrend_mean);
  cfg.spectral.paper_order = kv.get_bool("spectral.paper_order", cfg.spectral.paper_order);

  cfg.augment.alpha_gauss_min = kv.get_double("augment.alpha_gauss.min", cfg.augment.alpha_gauss_min);
  cfg.augment.alpha_gauss_max = kv.get_double("augment.alpha_gauss.max", cfg.augment.alpha_gauss_max);
  cfg.augment.alpha_mask_min = kv.get_double("augment.alpha_mask.min", cfg.augment.alpha_mask_min);
  cfg.augment.alpha_mask_max = kv.get_double("augment.alpha_mask.max", cfg.augment.alpha_mask_max);
  cfg.augment.alpha_scal_min = kv.get_double("augment.alpha_scal.min", cfg.augment.alpha_scal_min);
  cfg.augment.alpha_scal_max = kv.get_double("augment.alpha_scal.max", cfg.augment.alpha_scal_max);
  cfg.augment.alpha_stre_min = kv.get_double("augment.alpha_stre.min", cfg.augment.alpha_stre_min);
  cfg.augment.alpha_stre_max = kv.get_double("augment.alpha_stre.max", cfg.augment.alpha_stre_max);
  cfg.shift_frac = kv.get_double("augment.shift_frac", cfg.shift_frac);

  cfg.arch.conv_filters =
      static_cast<std::size_t>(kv.get_u64("net.conv_filters", cfg.arch.conv_filters));
  cfg.arch.kernel_size =
      static_cast<std::size_t>(kv.get_u64("net.kernel_size", cfg.arch.kernel_size));
  cfg.arch.pool_size = static_cast<std::size_t>(kv.get_u64("net.pool_size", cfg.arch.pool_size));
  cfg.arch.dropout_rate = kv.get_double("net.dropout_rate", cfg.arch.dropout_rate);
  cfg.arch.dense_units =
      static_cast<std::size_t>(kv.get_u64("net.dense_units", cfg.arch.dense_units));

  cfg.train.batch_size = static_cast<int>(kv.get_int("train.batch_size", cfg.train.batch_size));
  cfg.train.learning_rate = kv.get_double("train.learning_rate", cfg.train.learning_rate);
  cfg.train.beta1 = kv.get_double("train.beta1", cfg.train.beta1);
  cfg.train.beta2 = kv.get_double("train.beta2", cfg.train.beta2);
  cfg.train.epsilon = kv.get_double("train.epsilon", cfg.train.epsilon);
  cfg.train.patience = static_cast<int>(kv.get_int("train.patience", cfg.train.patience));
  cfg.train.min_delta = kv.get_double("train.min_delta", cfg.train.min_delta);
  cfg.train.max_epochs = static_cast<int>(kv.get_int("train.max_epochs", cfg.train.max_epochs));
  cfg.train.threads = static_cast<unsigned>(kv.get_u64("train.threads", cfg.train.threads));

  auto leftover = kv.unused_keys();
  if (!leftover.empty()) {
    std::string msg = "unknown config key(s):";
    for (const auto& k : leftover) msg += " " + k;
    throw DataError(msg);
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  KeyValues kv = KeyValues::from_file(path);
  for (const auto& [k, v] : overrides) kv.set(k, v);
  return config_from_keyvalues(kv);
}

}  // namespace faultdx::harness
