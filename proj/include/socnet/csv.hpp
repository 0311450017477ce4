#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "socnet/errors.hpp"

namespace socnet {

namespace csv {

// Shortest string that round-trips the exact double. Locale independent,
// so output bytes do not depend on the host environment.
inline std::string fmt(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string fmt(long x) { return std::to_string(x); }
inline std::string fmt(std::size_t x) { return std::to_string(x); }

}  // namespace csv

// Fixed-width table accumulated in memory and flushed with LF endings plus
// a trailing comment block carrying the seed and the config fingerprint.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header)
      : header_(std::move(header)) {
    if (header_.empty()) throw Error("csv: empty header");
  }

  void add_row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size())
      throw DimensionMismatchError("csv: row width");
    rows_.push_back(cells);
  }

  std::size_t num_rows() const { return rows_.size(); }

  void save(const std::string& path, std::uint64_t seed,
            std::uint64_t config_hash) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("csv: cannot write " + path);
    out << join(header_);
    for (const auto& row : rows_) out << join(row);
    char hash[19];
    std::snprintf(hash, sizeof(hash), "0x%016llx",
                  static_cast<unsigned long long>(config_hash));
    out << "# seed " << seed << "\n";
    out << "# config hash " << hash << "\n";
    if (!out) throw Error("csv: write failed for " + path);
  }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += cells[i];
    }
    line += '\n';
    return line;
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace socnet
