#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

namespace dcell {

/// Formats a double with 17 significant digits; infinities and NaN are
/// written as inf, -inf and nan.
std::string format_number(double v);

/// CSV output with LF line endings: one `# config: ...` comment line, a
/// header row, then numeric rows.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::string_view config_comment, std::string_view header);

  void row(std::initializer_list<double> values);
  void raw_row(std::string_view line);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

}  // namespace dcell
