#pragma once

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace idxsel {

// RFC 4180: CRLF records; fields containing a comma, quote, CR or LF are
// quoted with inner quotes doubled.
std::string csv_escape(std::string_view field);
std::string csv_record(const std::vector<std::string>& fields);

// Shortest decimal that round-trips the double.
std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row);
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }

  std::string str() const;
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace idxsel
