#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ipid/model.hpp"

namespace ipid {

/// Training cycles of one class. Cycles may differ in length until resampled.
struct CycleSet {
  std::vector<std::vector<double>> cycles;
  std::string label;
  std::size_t target_period = 0;
};

/// Linear interpolation onto T points: output j samples the input at j (L - 1) / (T - 1).
std::vector<double> resample_cycle(std::span<const double> cycle, std::size_t period);

/// Trailing-window median over inputs max(0, n - W + 1)..n.
std::vector<double> median_smooth(std::span<const double> series, std::size_t window);

/// Cuts [b_k, b_{k+1}) segments at explicit boundary indices.
std::vector<std::vector<double>> segment_cycles(std::span<const double> series,
                                                std::span<const std::size_t> boundaries);

/// Consecutive full periods of a regularly sampled series; an incomplete tail is dropped.
std::vector<std::vector<double>> split_periods(std::span<const double> series, std::size_t period);

/// Per-slot Gaussian fit (sample mean, unbiased variance floored at 1e-8). Cycles whose
/// length differs from target_period are resampled first.
IpidLaw fit_gaussian(const CycleSet& set);

/// Per-slot Poisson fit (mean count floored at 1e-6). Counts must be nonnegative integers.
IpidLaw fit_poisson(const CycleSet& set);

/// Bank whose classification statistics only accumulate on the given slots.
ClassBank restrict_slots(const ClassBank& bank, Subset slots);

/// Long format "timestamp,value" read as a flat series.
std::vector<double> read_long_series(std::istream& in);
/// One cycle per row.
std::vector<std::vector<double>> read_cycle_rows(std::istream& in);

}  // namespace ipid
