#pragma once

#include <string>
#include <vector>

namespace lowrl {

// Floats printed with 17 significant digits so re-parsed values round-trip
// bit-exactly.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace lowrl
