#include "dcell/csv.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dcell {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string_view config_comment, std::string_view header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out_ << "# config: " << config_comment << '\n' << header << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out_ << ',';
    out_ << format_number(v);
    first = false;
  }
  out_ << '\n';
  if (!out_) throw std::runtime_error("write to " + path_.string() + " failed");
}

void CsvWriter::raw_row(std::string_view line) {
  out_ << line << '\n';
  if (!out_) throw std::runtime_error("write to " + path_.string() + " failed");
}

}  // namespace dcell
