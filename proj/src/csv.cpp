#include "dbsde/csv.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "dbsde/errors.hpp"

namespace dbsde {

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

CsvFile::CsvFile(std::filesystem::path path) : path_(std::move(path)) {}

void CsvFile::comment(std::string_view text) { buffer_ << "# " << text << '\n'; }

void CsvFile::raw_row(std::string_view row) { buffer_ << row << '\n'; }

void CsvFile::commit() {
  if (committed_) return;
  const std::filesystem::path tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + tmp.string());
    out << buffer_.str();
    if (!out) throw io_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  if (ec) throw io_error("rename failed: " + path_.string() + " (" + ec.message() + ")");
  committed_ = true;
}

}  // namespace dbsde
