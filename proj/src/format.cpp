#include "usc/format.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace usc {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::invalid_argument("CSV row width mismatch");
  rows_.push_back(std::move(row));
}

void CsvTable::add_meta(std::string key, std::string value) { meta_.emplace_back(std::move(key), std::move(value)); }

void CsvTable::write(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  for (const auto& [k, v] : meta_) out << "# " << k << '=' << v << '\n';
}

}  // namespace usc
