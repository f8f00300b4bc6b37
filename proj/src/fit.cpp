#include "ipid/fit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <string>

#include "ipid/csv.hpp"
#include "ipid/error.hpp"

namespace ipid {

namespace csv {

double parse_double(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  require(ec == std::errc{} && ptr == field.data() + field.size() && !field.empty(),
          ErrorCode::parse, "not a number: \"" + std::string(field) + "\"");
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Table read_numeric(std::istream& in) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    try {
      for (auto f : fields) row.push_back(parse_double(f));
    } catch (const Error&) {
      if (table.rows.empty() && table.header.empty()) {
        for (auto f : fields) table.header.emplace_back(f);
        continue;
      }
      fail(ErrorCode::parse, "malformed CSV line " + std::to_string(line_no) + ": " + line);
    }
    table.rows.push_back(std::move(row));
    table.line_numbers.push_back(line_no);
  }
  return table;
}

std::vector<std::vector<double>> read_observations(std::istream& in) {
  auto table = read_numeric(in);
  std::vector<std::vector<double>> out;
  out.reserve(table.rows.size());
  std::size_t width = table.header.empty() ? 0 : table.header.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    auto& row = table.rows[r];
    if (width == 0) width = row.size();
    require(row.size() == width && width >= 2, ErrorCode::parse,
            "malformed CSV line " + std::to_string(table.line_numbers[r]) + ": " +
                std::to_string(row.size()) + " fields, expected " +
                std::to_string(std::max<std::size_t>(width, 2)));
    out.emplace_back(row.begin() + 1, row.end());
  }
  return out;
}

}  // namespace csv

std::vector<double> resample_cycle(std::span<const double> cycle, std::size_t period) {
  require(cycle.size() >= 2, ErrorCode::invalid_argument, "resampling needs a cycle of length >= 2");
  require(period >= 2, ErrorCode::invalid_argument, "resampling needs a target period >= 2");
  if (cycle.size() == period) return {cycle.begin(), cycle.end()};
  std::vector<double> out(period);
  const double scale = static_cast<double>(cycle.size() - 1) / static_cast<double>(period - 1);
  for (std::size_t j = 0; j < period; ++j) {
    const double pos = static_cast<double>(j) * scale;
    const auto left = std::min(static_cast<std::size_t>(pos), cycle.size() - 2);
    const double frac = pos - static_cast<double>(left);
    out[j] = cycle[left] + frac * (cycle[left + 1] - cycle[left]);
  }
  out.front() = cycle.front();
  out.back() = cycle.back();
  return out;
}

std::vector<double> median_smooth(std::span<const double> series, std::size_t window) {
  require(window >= 1, ErrorCode::invalid_argument, "median window must be >= 1");
  std::vector<double> out(series.size());
  std::vector<double> buf;
  for (std::size_t n = 0; n < series.size(); ++n) {
    const std::size_t start = n + 1 >= window ? n + 1 - window : 0;
    buf.assign(series.begin() + static_cast<std::ptrdiff_t>(start),
               series.begin() + static_cast<std::ptrdiff_t>(n + 1));
    std::sort(buf.begin(), buf.end());
    const std::size_t k = buf.size();
    out[n] = k % 2 ? buf[k / 2] : 0.5 * (buf[k / 2 - 1] + buf[k / 2]);
  }
  return out;
}

std::vector<std::vector<double>> segment_cycles(std::span<const double> series,
                                                std::span<const std::size_t> boundaries) {
  require(std::is_sorted(boundaries.begin(), boundaries.end()), ErrorCode::invalid_argument,
          "cycle boundaries must be increasing");
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k + 1 < boundaries.size(); ++k) {
    const auto a = boundaries[k];
    const auto b = boundaries[k + 1];
    require(b <= series.size(), ErrorCode::invalid_argument, "cycle boundary beyond the series");
    if (b > a) out.emplace_back(series.begin() + static_cast<std::ptrdiff_t>(a),
                                series.begin() + static_cast<std::ptrdiff_t>(b));
  }
  return out;
}

std::vector<std::vector<double>> split_periods(std::span<const double> series, std::size_t period) {
  require(period >= 1, ErrorCode::invalid_argument, "period must be >= 1");
  std::vector<std::vector<double>> out;
  for (std::size_t start = 0; start + period <= series.size(); start += period) {
    out.emplace_back(series.begin() + static_cast<std::ptrdiff_t>(start),
                     series.begin() + static_cast<std::ptrdiff_t>(start + period));
  }
  return out;
}

namespace {

std::vector<std::vector<double>> aligned_cycles(const CycleSet& set) {
  require(set.target_period >= 1, ErrorCode::invalid_argument, "target period must be >= 1");
  std::vector<std::vector<double>> out;
  out.reserve(set.cycles.size());
  for (const auto& c : set.cycles) {
    require(!c.empty(), ErrorCode::invalid_argument, "empty training cycle");
    out.push_back(c.size() == set.target_period ? c : resample_cycle(c, set.target_period));
  }
  return out;
}

}  // namespace

IpidLaw fit_gaussian(const CycleSet& set) {
  require(set.cycles.size() >= 2, ErrorCode::insufficient_data,
          "Gaussian fit needs at least 2 cycles");
  const auto cycles = aligned_cycles(set);
  const auto n = static_cast<double>(cycles.size());
  std::vector<SlotDensity> slots;
  slots.reserve(set.target_period);
  for (std::size_t i = 0; i < set.target_period; ++i) {
    double mean = 0.0;
    for (const auto& c : cycles) mean += c[i];
    mean /= n;
    double ss = 0.0;
    for (const auto& c : cycles) ss += (c[i] - mean) * (c[i] - mean);
    slots.push_back(SlotDensity::fitted_gaussian(mean, ss / (n - 1.0)));
  }
  return IpidLaw(std::move(slots));
}

IpidLaw fit_poisson(const CycleSet& set) {
  require(!set.cycles.empty(), ErrorCode::insufficient_data, "Poisson fit needs at least 1 cycle");
  for (const auto& c : set.cycles) {
    require(c.size() == set.target_period, ErrorCode::invalid_argument,
            "count cycles must have exactly target_period bins");
    for (double v : c) {
      require(v >= 0.0 && std::floor(v) == v, ErrorCode::domain,
              "Poisson counts must be nonnegative integers, got " + std::to_string(v));
    }
  }
  std::vector<SlotDensity> slots;
  slots.reserve(set.target_period);
  for (std::size_t i = 0; i < set.target_period; ++i) {
    double sum = 0.0;
    for (const auto& c : set.cycles) sum += c[i];
    slots.push_back(SlotDensity::fitted_poisson(sum / static_cast<double>(set.cycles.size())));
  }
  return IpidLaw(std::move(slots));
}

ClassBank restrict_slots(const ClassBank& bank, Subset slots) {
  return ClassBank(bank.laws(), std::move(slots));
}

std::vector<double> read_long_series(std::istream& in) {
  const auto table = csv::read_numeric(in);
  std::vector<double> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    require(table.rows[r].size() == 2, ErrorCode::parse,
            "malformed CSV line " + std::to_string(table.line_numbers[r]) +
                ": long format is timestamp,value");
    out.push_back(table.rows[r][1]);
  }
  return out;
}

std::vector<std::vector<double>> read_cycle_rows(std::istream& in) {
  return csv::read_numeric(in).rows;
}

}  // namespace ipid
