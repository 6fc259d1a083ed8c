#include "hetsync/records.hpp"

#include "hetsync/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace hetsync {

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t b = 0;
    for (;;) {
        const auto e = line.find(',', b);
        out.push_back(line.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
        if (e == std::string_view::npos) return out;
        b = e + 1;
    }
}

std::int64_t parse_i64(std::string_view s, std::string_view what, std::size_t line, std::string_view src) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw DataError(std::string(src) + ":" + std::to_string(line) + ": bad " + std::string(what) + " '" + std::string(s) + "'");
    return v;
}

double parse_f64(std::string_view s, std::size_t line, std::string_view src) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw DataError(std::string(src) + ":" + std::to_string(line) + ": bad value '" + std::string(s) + "'");
    return v;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

void write_records_csv(std::ostream& os, const std::vector<TimestampRecord>& records) {
    std::size_t payload = 0;
    for (const auto& r : records) payload = std::max(payload, r.values.size());
    if (payload != 0 && payload != 3) throw DataError("record payload must have 0 or 3 values");
    os << kRecordHeader;
    if (payload) os << ',' << kGyroColumns;
    os << '\n';
    for (const auto& r : records) {
        if (r.sensor_id.find(',') != std::string::npos || r.scheme.find(',') != std::string::npos)
            throw DataError("sensor_id/scheme must not contain commas");
        os << r.sensor_id << ',' << r.seq << ',' << r.scheme << ',' << r.timestamp_ns << ',';
        if (r.true_ns) os << *r.true_ns;
        if (payload) {
            if (r.values.size() != payload) throw DataError("all records in a file must carry the same payload width");
            for (double v : r.values) os << ',' << format_double(v);
        }
        os << '\n';
    }
}

void write_records_csv(const std::filesystem::path& path, const std::vector<TimestampRecord>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    write_records_csv(os, records);
    if (!os) throw DataError("write failed: " + path.string());
}

std::vector<TimestampRecord> read_records_csv(std::istream& is, std::string_view src) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) throw DataError(std::string(src) + ": empty file, header required");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t payload = 0;
    if (line == kRecordHeader) {
        payload = 0;
    } else if (line == std::string(kRecordHeader) + "," + std::string(kGyroColumns)) {
        payload = 3;
    } else {
        throw DataError(std::string(src) + ": bad header '" + line + "', expected '" + std::string(kRecordHeader) + "'");
    }
    std::vector<TimestampRecord> out;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 5 + payload)
            throw DataError(std::string(src) + ":" + std::to_string(line_no) + ": expected " + std::to_string(5 + payload) +
                            " columns, got " + std::to_string(f.size()));
        TimestampRecord r;
        r.sensor_id = std::string(f[0]);
        r.seq = parse_i64(f[1], "seq", line_no, src);
        r.scheme = std::string(f[2]);
        r.timestamp_ns = parse_i64(f[3], "timestamp_ns", line_no, src);
        if (!f[4].empty()) r.true_ns = parse_i64(f[4], "true_ns", line_no, src);
        for (std::size_t k = 0; k < payload; ++k) r.values.push_back(parse_f64(f[5 + k], line_no, src));
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<TimestampRecord> read_records_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());
    return read_records_csv(is, path.string());
}

void check_record_order(const std::vector<TimestampRecord>& records) {
    std::map<std::pair<std::string, std::string>, std::int64_t> last;
    for (const auto& r : records) {
        auto key = std::make_pair(r.sensor_id, r.scheme);
        auto it = last.find(key);
        if (it != last.end() && r.seq <= it->second)
            throw DataError("seq not strictly increasing for " + r.sensor_id + "/" + r.scheme + " at seq " + std::to_string(r.seq));
        last[key] = r.seq;
    }
}

} // namespace hetsync
