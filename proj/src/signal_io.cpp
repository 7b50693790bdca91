#include "faultdx/signal_io.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

namespace faultdx::harness {
namespace {

bool significant(const std::string& line) {
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c)) != 0) continue;
    return c != '#';
  }
  return false;
}

double parse_double(const std::string& text, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  double x = std::strtod(text.c_str(), &end);
  while (end != nullptr && *end != '\0' && std::isspace(static_cast<unsigned char>(*end)) != 0) {
    ++end;
  }
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw DataError(where + ": expected a number, got '" + text + "'");
  }
  return x;
}

}  // namespace

TimeSeries load_signal(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open signal file: " + path.string());

  std::string line;
  int line_no = 0;
  bool have_fs = false;
  double fs = 0.0;
  std::vector<double> samples;

  while (std::getline(in, line)) {
    ++line_no;
    if (!significant(line)) continue;
    std::string where = path.string() + ":" + std::to_string(line_no);
    std::size_t start = 0;
    while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start])) != 0) {
      ++start;
    }
    std::size_t stop = line.size();
    while (stop > start && std::isspace(static_cast<unsigned char>(line[stop - 1])) != 0) --stop;
    std::string body = line.substr(start, stop - start);

    if (!have_fs) {
      if (body.rfind("fs", 0) != 0 || body.size() < 3 ||
          std::isspace(static_cast<unsigned char>(body[2])) == 0) {
        throw DataError(where + ": expected header 'fs <sample-rate>' before samples");
      }
      fs = parse_double(body.substr(3), where);
      if (!(fs > 0.0)) throw DataError(where + ": sample rate must be positive");
      have_fs = true;
      continue;
    }
    samples.push_back(parse_double(body, where));
  }

  if (!have_fs) throw DataError(path.string() + ": missing 'fs' header line");
  if (samples.size() < 2) {
    throw DataError(path.string() + ": need at least 2 samples, got " +
                    std::to_string(samples.size()));
  }
  try {
    return TimeSeries(std::move(samples), fs);
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_signal(const TimeSeries& signal, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof(buf), "fs %.17g\n", signal.sample_rate_hz());
  out << buf;
  for (double x : signal.samples()) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", x);
    out << buf;
  }
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace faultdx::harness
