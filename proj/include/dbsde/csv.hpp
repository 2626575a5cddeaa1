#pragma once

#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

namespace dbsde {

// Shortest round-trip decimal form (std::to_chars), so repeated runs emit
// byte-identical files.
std::string format_double(double value);

// Buffers the whole file and writes it atomically (temp file + rename) on
// commit. Comma separator, '.' decimal point, optional '#' metadata lines
// before the header.
class CsvFile {
 public:
  explicit CsvFile(std::filesystem::path path);

  void comment(std::string_view text);
  void raw_row(std::string_view row);

  template <typename Range>
  void row(const Range& cells) {
    bool first = true;
    for (const auto& cell : cells) {
      if (!first) buffer_ << ',';
      first = false;
      buffer_ << cell;
    }
    buffer_ << '\n';
  }
  void row(std::initializer_list<std::string> cells) { row<std::initializer_list<std::string>>(cells); }

  // Writes <path>.tmp then renames over the destination.
  void commit();

 private:
  std::filesystem::path path_;
  std::ostringstream buffer_;
  bool committed_ = false;
};

}  // namespace dbsde
