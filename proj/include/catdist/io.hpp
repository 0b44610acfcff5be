#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace catdist {

/// 12 significant digits; keeps CSV output byte-stable across runs.
std::string format_number(double x);

/// Quotes a field when it contains the delimiter, a quote or a line break.
std::string csv_field(std::string_view s, char delimiter = ',');

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

std::string read_file(const std::string& path);

}  // namespace catdist
