#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hetsync {

/// One reported timestamp. `values` carries optional sample payload (gyro x/y/z in rad/s).
struct TimestampRecord {
    std::string sensor_id;
    std::int64_t seq = 0;
    std::string scheme;
    std::int64_t timestamp_ns = 0;
    std::optional<std::int64_t> true_ns;
    std::vector<double> values;

    bool operator==(const TimestampRecord&) const = default;
};

// CSV schema: sensor_id,seq,scheme,timestamp_ns,true_ns[,gx,gy,gz]
// Header is mandatory; true_ns may be empty; payload columns are all-or-none per file.
inline constexpr std::string_view kRecordHeader = "sensor_id,seq,scheme,timestamp_ns,true_ns";
inline constexpr std::string_view kGyroColumns = "gx,gy,gz";

void write_records_csv(std::ostream& os, const std::vector<TimestampRecord>& records);
void write_records_csv(const std::filesystem::path& path, const std::vector<TimestampRecord>& records);
std::vector<TimestampRecord> read_records_csv(std::istream& is, std::string_view source_name = "<stream>");
std::vector<TimestampRecord> read_records_csv(const std::filesystem::path& path);

// Checks seq strictly increasing per (sensor_id, scheme).
void check_record_order(const std::vector<TimestampRecord>& records);

std::string format_double(double v);

} // namespace hetsync
