#pragma once

#include <filesystem>

#include "faultdx/core.hpp"

namespace faultdx::harness {

/// Text signal format: the first significant line is `fs <positive float>`,
/// every following significant line is one sample. Blank lines and lines whose
/// first non-space character is `#` are ignored. Parse errors carry the file
/// name and line number.
TimeSeries load_signal(const std::filesystem::path& path);

void save_signal(const TimeSeries& signal, const std::filesystem::path& path);

}  // namespace faultdx::harness
