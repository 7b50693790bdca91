#include "faultdx/dataset_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "faultdx/rng.hpp"

namespace faultdx::harness {
namespace {

constexpr char kMagic[4] = {'F', 'D', 'D', '1'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size, std::string name)
      : data_(data), size_(size), name_(std::move(name)) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

  const std::uint8_t* take(std::size_t n) {
    if (remaining() < n) throw DataError(name_ + ": truncated dataset file");
    const std::uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  std::uint16_t u16() {
    const std::uint8_t* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }

  std::uint32_t u32() {
    const std::uint8_t* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    const std::uint8_t* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string name_;
};

}  // namespace

void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path) {
  if (dataset.samples.empty()) throw std::invalid_argument("dataset is empty");
  if (dataset.split.size() != dataset.samples.size()) {
    throw std::invalid_argument("dataset split vector out of sync with samples");
  }
  const Spectrum& first = dataset.samples.front().spectrum;
  for (const LabeledSample& s : dataset.samples) {
    if (s.spectrum.size() != first.size() || s.spectrum.df_hz() != first.df_hz() ||
        s.spectrum.f_start_hz() != first.f_start_hz() ||
        s.spectrum.normalized() != first.normalized()) {
      throw std::invalid_argument("dataset samples must share one bin grid");
    }
  }
  if (dataset.samples.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("dataset too large for the container format");
  }

  std::vector<std::uint8_t> payload;
  put_u32(payload, static_cast<std::uint32_t>(dataset.samples.size()));
  put_u32(payload, static_cast<std::uint32_t>(first.size()));
  put_f64(payload, first.df_hz());
  put_f64(payload, first.f_start_hz());
  payload.push_back(first.normalized() ? 1 : 0);

  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const LabeledSample& s = dataset.samples[i];
    put_u32(payload, static_cast<std::uint32_t>(s.label));
    payload.push_back(static_cast<std::uint8_t>(dataset.split[i]));
    put_u64(payload, s.provenance.rng_seed);
    payload.push_back(static_cast<std::uint8_t>(s.provenance.augmentation_op));
    const std::string& id = s.provenance.origin_signal_id;
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw std::invalid_argument("origin id too long");
    }
    put_u16(payload, static_cast<std::uint16_t>(id.size()));
    payload.insert(payload.end(), id.begin(), id.end());
    for (double m : s.spectrum.magnitudes()) put_f64(payload, m);
  }

  std::vector<std::uint8_t> blob;
  blob.reserve(payload.size() + 14);
  blob.insert(blob.end(), kMagic, kMagic + 4);
  put_u16(blob, kVersion);
  blob.insert(blob.end(), payload.begin(), payload.end());
  put_u64(blob, fnv1a64(payload.data(), payload.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file: " + path.string());
  std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (blob.size() < 14) throw DataError(name + ": truncated dataset file");
  if (std::memcmp(blob.data(), kMagic, 4) != 0) {
    throw DataError(name + ": not a dataset file (bad magic)");
  }

  Reader r(blob.data() + 4, blob.size() - 4, name);
  std::uint16_t version = r.u16();
  if (version != kVersion) {
    throw DataError(name + ": unsupported dataset version " + std::to_string(version));
  }

  const std::uint8_t* payload = blob.data() + 6;
  const std::size_t payload_size = blob.size() - 14;
  std::uint64_t want = fnv1a64(payload, payload_size);

  std::uint64_t got = 0;
  for (int i = 0; i < 8; ++i) {
    got |= static_cast<std::uint64_t>(blob[blob.size() - 8 + i]) << (8 * i);
  }
  if (want != got) throw DataError(name + ": checksum mismatch, file is corrupt");

  Reader body(payload, payload_size, name);
  std::uint32_t n_samples = body.u32();
  std::uint32_t n_bins = body.u32();
  double df = body.f64();
  double f_start = body.f64();
  bool normalized = body.take(1)[0] != 0;
  if (n_bins == 0) throw DataError(name + ": dataset has zero bins");

  LabeledDataset ds;
  ds.samples.reserve(n_samples);
  for (std::uint32_t i = 0; i < n_samples; ++i) {
    std::uint32_t label_idx = body.u32();
    if (label_idx >= kNumLabels) {
      throw DataError(name + ": sample " + std::to_string(i) + " has invalid label index " +
                      std::to_string(label_idx));
    }
    std::uint8_t split_code = body.take(1)[0];
    if (split_code > 2) {
      throw DataError(name + ": sample " + std::to_string(i) + " has invalid split code");
    }
    Provenance prov;
    prov.rng_seed = body.u64();
    std::uint8_t op_code = body.take(1)[0];
    if (op_code > static_cast<std::uint8_t>(AugmentOp::TimeStretch)) {
      throw DataError(name + ": sample " + std::to_string(i) + " has invalid augmentation code");
    }
    prov.augmentation_op = static_cast<AugmentOp>(op_code);
    std::uint16_t id_len = body.u16();
    const std::uint8_t* id_bytes = body.take(id_len);
    prov.origin_signal_id.assign(reinterpret_cast<const char*>(id_bytes), id_len);

    std::vector<double> mags(n_bins);
    for (std::uint32_t b = 0; b < n_bins; ++b) mags[b] = body.f64();

    try {
      ds.samples.push_back(LabeledSample{Spectrum(std::move(mags), df, f_start, normalized),
                                         static_cast<FaultLabel>(label_idx), prov});
    } catch (const std::invalid_argument& e) {
      throw DataError(name + ": sample " + std::to_string(i) + ": " + e.what());
    }
    ds.split.push_back(static_cast<Split>(split_code));
  }
  if (body.remaining() != 0) throw DataError(name + ": trailing bytes after samples");
  return ds;
}

}  // namespace faultdx::harness
