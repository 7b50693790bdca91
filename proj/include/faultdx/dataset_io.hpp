#pragma once

#include <filesystem>

#include "faultdx/core.hpp"

namespace faultdx::harness {

/// Binary dataset container (magic "FDD1"). All samples must share one bin
/// grid; spectra, labels, split assignments, and provenance round-trip
/// losslessly. An FNV-1a checksum over the payload guards against truncation
/// and corruption.
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path);

LabeledDataset load_dataset(const std::filesystem::path& path);

}  // namespace faultdx::harness
