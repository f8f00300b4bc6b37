#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ipid::csv {

/// Locale-independent decimal parse of the whole field; throws ErrorCode::parse.
double parse_double(std::string_view field);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

/// Rows of numeric fields. The first line is skipped when it does not parse as
/// numbers (a header). Errors carry the 1-based line number.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};
Table read_numeric(std::istream& in);

/// Observation stream "time,value" or "time,value_0,...,value_{L-1}": drops the time
/// column and returns one row per time step.
std::vector<std::vector<double>> read_observations(std::istream& in);

}  // namespace ipid::csv
