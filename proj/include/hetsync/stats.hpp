#pragma once

#include "hetsync/records.hpp"
#include "hetsync/time.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hetsync {

/// Statistics over consecutive timestamp differences. std is the population
/// standard deviation (divisor N), from exact 128-bit sums.
struct PeriodStats {
    std::size_t count = 0;
    double mean_ns = 0.0;
    double std_ns = 0.0;
    std::int64_t min_ns = 0;
    std::int64_t max_ns = 0;
};

std::vector<std::int64_t> periods(std::span<const std::int64_t> timestamps);
PeriodStats period_stats(std::span<const std::int64_t> timestamps);
// Population std from exact sums: sqrt((N * sum_sq - sum^2) / N^2).
double population_std(std::size_t n, i128 sum, i128 sum_sq);

struct Histogram {
    std::int64_t lo_ns = 0;
    std::int64_t hi_ns = 0;
    std::int64_t bin_width_ns = 1;
    std::vector<std::int64_t> bin_left_ns;
    std::vector<std::uint64_t> counts;
    std::uint64_t below = 0;
    std::uint64_t above = 0;

    std::uint64_t out_of_range() const { return below + above; }
};

/// Bins cover [lo, hi) in steps of bin_width; the last bin is clipped at hi.
Histogram histogram(std::span<const std::int64_t> periods, std::int64_t bin_width_ns, std::int64_t lo_ns, std::int64_t hi_ns);
void write_histogram_csv(std::ostream& os, const Histogram& h);

struct SchemeRow {
    std::string scheme;
    PeriodStats stats;
    std::optional<bool> sync_available; // known for the three LiDAR schemes
};

struct SchemeTable {
    std::vector<SchemeRow> rows;
    std::vector<std::string> warnings;
};

inline constexpr const char* kSchemeArrival = "arrival";
inline constexpr const char* kSchemeInternal = "internal";
inline constexpr const char* kSchemeDisciplined = "pps_disciplined";

/// One row per scheme present (arrival, internal, pps_disciplined first, others by name).
/// Records of a scheme are ordered by seq before differencing.
SchemeTable compare_schemes(const std::vector<TimestampRecord>& records);
void write_report_text(std::ostream& os, const SchemeTable& table);
void write_report_csv(std::ostream& os, const SchemeTable& table);

/// timestamp_ns - true_ns per record; throws DataError when ground truth is missing.
std::vector<std::int64_t> absolute_error_series(const std::vector<TimestampRecord>& records);

} // namespace hetsync
