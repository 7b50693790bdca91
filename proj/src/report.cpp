#include "faultdx/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace faultdx::harness {
namespace {

std::string num(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    auto path = dir / "report.txt";
    auto out = open_out(path);
    out << "fault diagnosis evaluation\n";
    out << "runs: " << report.per_run_accuracy.size() << "\n";
    out << "test samples per run: " << report.test_total << "\n\n";
    out << "run  accuracy\n";
    for (std::size_t r = 0; r < report.per_run_accuracy.size(); ++r) {
      char line[64];
      std::snprintf(line, sizeof(line), "%3zu  %.4f\n", r + 1, report.per_run_accuracy[r]);
      out << line;
    }
    out << "\nmean accuracy: " << num(report.mean_accuracy, "%.4f") << "\n";
    out << "std accuracy (population): " << num(report.std_accuracy, "%.4f") << "\n\n";
    out << "confusion matrix, mean(std) over runs, rows true / columns predicted\n";
    out << "          ";
    for (int j = 0; j < kNumLabels; ++j) {
      char cell[32];
      std::snprintf(cell, sizeof(cell), " %12s", label_name(label_from_index(j)));
      out << cell;
    }
    out << "\n";
    for (int i = 0; i < kNumLabels; ++i) {
      char head[32];
      std::snprintf(head, sizeof(head), "%-10s", label_name(label_from_index(i)));
      out << head;
      for (int j = 0; j < kNumLabels; ++j) {
        char cell[48];
        std::snprintf(cell, sizeof(cell), " %6.2f(%4.2f)", report.confusion_mean[i][j],
                      report.confusion_std[i][j]);
        out << cell;
      }
      out << "\n";
    }
    finish(out, path);
  }

  {
    auto path = dir / "report.csv";
    auto out = open_out(path);
    out << "record,run,true_label,pred_label,value\n";
    for (std::size_t r = 0; r < report.per_run_accuracy.size(); ++r) {
      out << "accuracy," << (r + 1) << ",,," << num(report.per_run_accuracy[r]) << "\n";
    }
    for (std::size_t r = 0; r < report.confusions.size(); ++r) {
      for (int i = 0; i < kNumLabels; ++i) {
        for (int j = 0; j < kNumLabels; ++j) {
          out << "confusion," << (r + 1) << "," << label_name(label_from_index(i)) << ","
              << label_name(label_from_index(j)) << "," << report.confusions[r][i][j] << "\n";
        }
      }
    }
    out << "accuracy_mean,,,," << num(report.mean_accuracy) << "\n";
    out << "accuracy_std,,,," << num(report.std_accuracy) << "\n";
    for (int i = 0; i < kNumLabels; ++i) {
      for (int j = 0; j < kNumLabels; ++j) {
        out << "confusion_mean,," << label_name(label_from_index(i)) << ","
            << label_name(label_from_index(j)) << "," << num(report.confusion_mean[i][j]) << "\n";
      }
    }
    for (int i = 0; i < kNumLabels; ++i) {
      for (int j = 0; j < kNumLabels; ++j) {
        out << "confusion_std,," << label_name(label_from_index(i)) << ","
            << label_name(label_from_index(j)) << "," << num(report.confusion_std[i][j]) << "\n";
      }
    }
    out << "test_total,,,," << report.test_total << "\n";
    finish(out, path);
  }
}

void write_sweep(const std::vector<SweepRow>& rows, const std::string& parameter_name,
                 const std::string& stem, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto path = dir / (stem + ".csv");
    auto out = open_out(path);
    out << parameter_name << ",mean_accuracy,std_accuracy\n";
    for (const SweepRow& r : rows) {
      out << num(r.parameter) << "," << num(r.mean_accuracy) << "," << num(r.std_accuracy)
          << "\n";
    }
    finish(out, path);
  }
  {
    auto path = dir / (stem + ".txt");
    auto out = open_out(path);
    char head[96];
    std::snprintf(head, sizeof(head), "%16s  mean_acc  std_acc\n", parameter_name.c_str());
    out << head;
    for (const SweepRow& r : rows) {
      char line[96];
      std::snprintf(line, sizeof(line), "%16g  %8.4f  %7.4f\n", r.parameter, r.mean_accuracy,
                    r.std_accuracy);
      out << line;
    }
    finish(out, path);
  }
}

void export_heatmap(const Spectrum& spectrum, const explain::Heatmap& heatmap,
                    const std::filesystem::path& path) {
  if (heatmap.relevance.size() != spectrum.size()) {
    throw std::invalid_argument("heatmap length does not match the spectrum");
  }
  auto out = open_out(path);
  out << "frequency_hz,magnitude,relevance\n";
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    out << num(spectrum.frequency_at(i)) << "," << num(spectrum.magnitudes()[i]) << ","
        << num(heatmap.relevance[i]) << "\n";
  }
  finish(out, path);
}

void export_heatmap_svg(const Spectrum& spectrum, const explain::Heatmap& heatmap,
                        const std::filesystem::path& path) {
  if (heatmap.relevance.size() != spectrum.size()) {
    throw std::invalid_argument("heatmap length does not match the spectrum");
  }
  const std::size_t n = spectrum.size();
  const double width = 960.0;
  const double height = 320.0;
  const double pad = 40.0;
  const double plot_w = width - 2 * pad;
  const double plot_h = height - 2 * pad;

  double mag_min = spectrum.magnitudes()[0];
  double mag_max = mag_min;
  for (double m : spectrum.magnitudes()) {
    mag_min = std::min(mag_min, m);
    mag_max = std::max(mag_max, m);
  }
  if (mag_max <= mag_min) mag_max = mag_min + 1.0;

  auto x_at = [&](std::size_t i) {
    double frac = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    return pad + frac * plot_w;
  };
  auto y_at = [&](double m) { return pad + (1.0 - (m - mag_min) / (mag_max - mag_min)) * plot_h; };

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  double band_w = n > 1 ? plot_w / static_cast<double>(n - 1) : plot_w;
  for (std::size_t i = 0; i < n; ++i) {
    double rel = std::clamp(heatmap.relevance[i], 0.0, 1.0);
    if (rel <= 0.0) continue;
    out << "<rect x=\"" << num(x_at(i) - 0.5 * band_w, "%.2f") << "\" y=\"" << num(pad, "%.2f")
        << "\" width=\"" << num(band_w, "%.3f") << "\" height=\"" << num(plot_h, "%.2f")
        << "\" fill=\"#d62728\" fill-opacity=\"" << num(0.75 * rel, "%.3f") << "\"/>\n";
  }

  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < n; ++i) {
    out << num(x_at(i), "%.2f") << "," << num(y_at(spectrum.magnitudes()[i]), "%.2f");
    if (i + 1 < n) out << " ";
  }
  out << "\"/>\n";

  out << "<text x=\"" << pad << "\" y=\"" << (height - 10)
      << "\" font-family=\"monospace\" font-size=\"12\">" << num(spectrum.frequency_at(0), "%g")
      << " Hz</text>\n";
  out << "<text x=\"" << (width - pad - 80) << "\" y=\"" << (height - 10)
      << "\" font-family=\"monospace\" font-size=\"12\">" << num(spectrum.frequency_at(n - 1), "%g")
      << " Hz</text>\n";
  out << "</svg>\n";
  finish(out, path);
}

}  // namespace faultdx::harness
