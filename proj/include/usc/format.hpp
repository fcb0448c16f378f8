#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace usc {

// 12 significant digits, locale independent.
std::string format_real(double v);

// CSV table followed by a trailing "# key=value" metadata block.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> row);
  void add_meta(std::string key, std::string value);
  void write(std::ostream& out) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::pair<std::string, std::string>> meta_;
};

}  // namespace usc
