#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "faultdx/experiment.hpp"
#include "faultdx/explain.hpp"

namespace faultdx::harness {

/// Writes `report.txt` (human-readable summary) and `report.csv` (per-run
/// accuracies, flattened confusion matrices, aggregates) into `dir`.
/// Output bytes depend only on the report contents, never on wall-clock
/// timings, so identical experiments produce identical files.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

/// Writes `<stem>.txt` and `<stem>.csv` sweep tables into `dir`.
void write_sweep(const std::vector<SweepRow>& rows, const std::string& parameter_name,
                 const std::string& stem, const std::filesystem::path& dir);

/// CSV with one row per spectrum bin: frequency_hz,magnitude,relevance.
void export_heatmap(const Spectrum& spectrum, const explain::Heatmap& heatmap,
                    const std::filesystem::path& path);

/// Stand-alone SVG: relevance as a shaded band behind the magnitude trace.
void export_heatmap_svg(const Spectrum& spectrum, const explain::Heatmap& heatmap,
                        const std::filesystem::path& path);

}  // namespace faultdx::harness
