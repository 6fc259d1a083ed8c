#include "hetsync/nmea.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

namespace hetsync {

namespace {

[[noreturn]] void field_error(const std::string& what) { throw NmeaError(NmeaErrorKind::FieldError, what); }

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s, const char* field) {
    if (!all_digits(s)) field_error(std::string(field) + ": expected digits, got '" + std::string(s) + "'");
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

// Parses "123.4567" into units of 10^-scale, rounding half up on the first dropped digit.
std::int64_t to_fixed(std::string_view s, int scale, const char* field) {
    const auto dot = s.find('.');
    std::string_view ip = s.substr(0, dot);
    std::string_view fp = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (!all_digits(ip) || (dot != std::string_view::npos && !all_digits(fp)) || ip.size() > 12)
        field_error(std::string(field) + ": malformed decimal '" + std::string(s) + "'");
    std::int64_t v = 0;
    for (char c : ip) v = v * 10 + (c - '0');
    for (int i = 0; i < scale; ++i) v = v * 10 + (i < static_cast<int>(fp.size()) ? fp[i] - '0' : 0);
    if (static_cast<int>(fp.size()) > scale && fp[scale] >= '5') ++v;
    return v;
}

Coordinate parse_coord(std::string_view value, std::string_view hemi, int deg_digits, const char* field) {
    const auto dot = value.find('.');
    const std::size_t ip_len = dot == std::string_view::npos ? value.size() : dot;
    if (ip_len != static_cast<std::size_t>(deg_digits + 2))
        field_error(std::string(field) + ": expected " + std::to_string(deg_digits) + " degree digits + 2 minute digits");
    Coordinate c;
    c.degrees = to_int(value.substr(0, deg_digits), field);
    const std::int64_t mm = to_fixed(value.substr(deg_digits), 3, field);
    if (mm >= 60'000) field_error(std::string(field) + ": minutes out of range");
    c.milli_minutes = static_cast<int>(mm);
    if (hemi.size() != 1) field_error(std::string(field) + ": missing hemisphere");
    c.hemisphere = hemi[0];
    return c;
}

void check_coord(const Coordinate& c, int max_deg, char pos, char neg, const char* field) {
    if (c.degrees < 0 || c.degrees > max_deg || c.milli_minutes < 0 || c.milli_minutes >= 60'000 ||
        (c.degrees == max_deg && c.milli_minutes != 0))
        field_error(std::string(field) + ": value out of range");
    if (c.hemisphere != pos && c.hemisphere != neg) field_error(std::string(field) + ": bad hemisphere");
}

std::string fmt_tenths(int v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03d.%d", v / 10, v % 10);
    return buf;
}

std::string fmt_coord(const Coordinate& c, int deg_digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*d%02d.%03d", deg_digits, c.degrees, c.milli_minutes / 1000, c.milli_minutes % 1000);
    return buf;
}

std::vector<std::string_view> split_fields(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t b = 0;
    for (;;) {
        const auto e = s.find(',', b);
        out.push_back(s.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
        if (e == std::string_view::npos) break;
        b = e + 1;
    }
    return out;
}

} // namespace

std::string_view to_string(NmeaErrorKind k) {
    switch (k) {
    case NmeaErrorKind::Framing: return "Framing";
    case NmeaErrorKind::ForbiddenByte: return "ForbiddenByte";
    case NmeaErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case NmeaErrorKind::UnsupportedSentence: return "UnsupportedSentence";
    case NmeaErrorKind::FieldError: return "FieldError";
    }
    return "Unknown";
}

std::string checksum(std::string_view body) {
    unsigned char x = 0;
    for (char c : body) {
        if (c == '$' || c == '*') throw NmeaError(NmeaErrorKind::ForbiddenByte, "checksum body contains '$' or '*'");
        x ^= static_cast<unsigned char>(c);
    }
    static constexpr char kHex[] = "0123456789ABCDEF";
    return {kHex[x >> 4], kHex[x & 0xF]};
}

std::int64_t SecondLabelEpoch::to_label(const UtcDate& date, const UtcTime& time) const {
    using namespace std::chrono;
    const int full_year = date.yy < 80 ? 2000 + date.yy : 1900 + date.yy;
    const year_month_day ymd{year{full_year}, month{static_cast<unsigned>(date.month)}, day{static_cast<unsigned>(date.day)}};
    if (!ymd.ok()) field_error("date: not a calendar date");
    const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
    return days * 86'400 + time.hour * 3600 + time.minute * 60 + time.second - start_unix_s;
}

void SecondLabelEpoch::from_label(std::int64_t label, UtcDate& date, UtcTime& time) const {
    using namespace std::chrono;
    const std::int64_t unix_s = checked_add(start_unix_s, label);
    const std::int64_t days = static_cast<std::int64_t>(floor_div(unix_s, 86'400));
    const std::int64_t sod = unix_s - days * 86'400;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    const int y = static_cast<int>(ymd.year());
    if (y < 1980 || y > 2079) field_error("date: year outside the two-digit window 1980-2079");
    date = UtcDate{static_cast<int>(static_cast<unsigned>(ymd.day())), static_cast<int>(static_cast<unsigned>(ymd.month())), y % 100};
    time = UtcTime{static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60), std::nullopt};
}

void validate(const GprmcSentence& s) {
    const auto& t = s.time;
    if (t.hour < 0 || t.hour > 23 || t.minute < 0 || t.minute > 59 || t.second < 0 || t.second > 60)
        field_error("time: out of range");
    if (t.millis && (*t.millis < 0 || *t.millis > 999)) field_error("time: fraction out of range");
    if (s.status != 'A' && s.status != 'V') field_error("status: expected A or V");
    if (s.latitude) check_coord(*s.latitude, 90, 'N', 'S', "latitude");
    if (s.longitude) check_coord(*s.longitude, 180, 'E', 'W', "longitude");
    if (s.speed_tenths_knots && (*s.speed_tenths_knots < 0 || *s.speed_tenths_knots > 9999)) field_error("speed: out of range");
    if (s.course_tenths_deg && (*s.course_tenths_deg < 0 || *s.course_tenths_deg >= 3600)) field_error("course: out of range");
    using namespace std::chrono;
    const year_month_day ymd{year{2000 + s.date.yy}, month{static_cast<unsigned>(s.date.month)}, day{static_cast<unsigned>(s.date.day)}};
    if (s.date.yy < 0 || s.date.yy > 99 || s.date.month < 1 || s.date.month > 12 || s.date.day < 1 || !ymd.ok())
        field_error("date: out of range");
    if (s.magvar) {
        if (s.magvar->tenths_deg < 0 || s.magvar->tenths_deg > 1800) field_error("magvar: out of range");
        if (s.magvar->hemisphere != 'E' && s.magvar->hemisphere != 'W') field_error("magvar: bad hemisphere");
    }
}

std::string serialize(const GprmcSentence& s) {
    validate(s);
    std::string body = "GPRMC,";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d%02d%02d", s.time.hour, s.time.minute, s.time.second);
    body += buf;
    if (s.time.millis) {
        std::snprintf(buf, sizeof buf, ".%03d", *s.time.millis);
        body += buf;
    }
    body += ',';
    body += s.status;
    body += ',';
    if (s.latitude) body += fmt_coord(*s.latitude, 2) + ',' + s.latitude->hemisphere;
    else body += ',';
    body += ',';
    if (s.longitude) body += fmt_coord(*s.longitude, 3) + ',' + s.longitude->hemisphere;
    else body += ',';
    body += ',';
    if (s.speed_tenths_knots) body += fmt_tenths(*s.speed_tenths_knots);
    body += ',';
    if (s.course_tenths_deg) body += fmt_tenths(*s.course_tenths_deg);
    body += ',';
    std::snprintf(buf, sizeof buf, "%02d%02d%02d", s.date.day, s.date.month, s.date.yy);
    body += buf;
    body += ',';
    if (s.magvar) body += fmt_tenths(s.magvar->tenths_deg) + ',' + s.magvar->hemisphere;
    else body += ',';
    return '$' + body + '*' + checksum(body) + "\r\n";
}

GprmcSentence make_gprmc(std::int64_t second_label, const Fix& fix, const SecondLabelEpoch& epoch) {
    GprmcSentence s;
    epoch.from_label(second_label, s.date, s.time);
    s.status = 'A';
    s.latitude = fix.latitude;
    s.longitude = fix.longitude;
    s.speed_tenths_knots = fix.speed_tenths_knots;
    s.course_tenths_deg = fix.course_tenths_deg;
    s.magvar = fix.magvar;
    validate(s);
    return s;
}

std::string generate_gprmc(std::int64_t second_label, const Fix& fix, const SecondLabelEpoch& epoch) {
    return serialize(make_gprmc(second_label, fix, epoch));
}

GprmcSentence parse_gprmc(std::string_view bytes) {
    std::string_view s = bytes;
    if (s.size() >= 2 && s.substr(s.size() - 2) == "\r\n") s.remove_suffix(2);
    else if (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);

    if (s.empty() || s.front() != '$') throw NmeaError(NmeaErrorKind::Framing, "sentence must start with '$'");
    for (char c : s)
        if (static_cast<unsigned char>(c) > 0x7E || static_cast<unsigned char>(c) < 0x20)
            throw NmeaError(NmeaErrorKind::Framing, "non-printable or non-ASCII byte in sentence");
    const auto star = s.rfind('*');
    if (star == std::string_view::npos || star + 3 != s.size())
        throw NmeaError(NmeaErrorKind::Framing, "sentence must end with '*HH'");
    const std::string_view body = s.substr(1, star - 1);
    if (body.find_first_of("$*") != std::string_view::npos)
        throw NmeaError(NmeaErrorKind::Framing, "stray '$' or '*' inside sentence body");
    const std::string_view given = s.substr(star + 1);
    for (char c : given)
        if (!((c >= '0' && c <= '9') || (c >= 'A' && c <= 'F') || (c >= 'a' && c <= 'f')))
            throw NmeaError(NmeaErrorKind::Framing, "checksum must be two hex digits");
    const std::string want = checksum(body);
    auto upper = [](char c) { return (c >= 'a' && c <= 'f') ? static_cast<char>(c - 32) : c; };
    if (upper(given[0]) != want[0] || upper(given[1]) != want[1])
        throw NmeaError(NmeaErrorKind::ChecksumMismatch,
                        "checksum mismatch: sentence says " + std::string(given) + ", computed " + want);

    const auto f = split_fields(body);
    if (f[0] != "GPRMC") throw NmeaError(NmeaErrorKind::UnsupportedSentence, "unsupported sentence '" + std::string(f[0]) + "'");
    if (f.size() != 12) field_error("expected 11 data fields, got " + std::to_string(f.size() - 1));

    GprmcSentence out;
    // time
    {
        std::string_view t = f[1];
        const auto dot = t.find('.');
        std::string_view hms = t.substr(0, dot);
        if (hms.size() != 6) field_error("time: expected hhmmss");
        out.time.hour = to_int(hms.substr(0, 2), "time");
        out.time.minute = to_int(hms.substr(2, 2), "time");
        out.time.second = to_int(hms.substr(4, 2), "time");
        if (dot != std::string_view::npos) {
            std::string_view frac = t.substr(dot + 1);
            if (frac.empty() || frac.size() > 3) field_error("time: fraction must have 1-3 digits");
            int ms = to_int(frac, "time");
            for (std::size_t i = frac.size(); i < 3; ++i) ms *= 10;
            out.time.millis = ms;
        }
    }
    if (f[2].size() != 1) field_error("status: expected one character");
    out.status = f[2][0];
    if (!f[3].empty() || !f[4].empty()) out.latitude = parse_coord(f[3], f[4], 2, "latitude");
    if (!f[5].empty() || !f[6].empty()) out.longitude = parse_coord(f[5], f[6], 3, "longitude");
    if (!f[7].empty()) out.speed_tenths_knots = static_cast<int>(std::min<std::int64_t>(to_fixed(f[7], 1, "speed"), 1'000'000));
    if (!f[8].empty()) out.course_tenths_deg = static_cast<int>(std::min<std::int64_t>(to_fixed(f[8], 1, "course"), 1'000'000));
    if (f[9].size() != 6) field_error("date: expected ddmmyy");
    out.date.day = to_int(f[9].substr(0, 2), "date");
    out.date.month = to_int(f[9].substr(2, 2), "date");
    out.date.yy = to_int(f[9].substr(4, 2), "date");
    if (!f[10].empty() || !f[11].empty()) {
        if (f[11].size() != 1) field_error("magvar: missing hemisphere");
        out.magvar = MagVariation{static_cast<int>(std::min<std::int64_t>(to_fixed(f[10], 1, "magvar"), 1'000'000)), f[11][0]};
    }
    validate(out);
    return out;
}

void PairingWindow::validate(std::int64_t pps_period_ns) const {
    if (!(0 < min_after_pps_ns && min_after_pps_ns < max_after_pps_ns && max_after_pps_ns < pps_period_ns))
        throw std::invalid_argument("pairing window must satisfy 0 < min < max < PPS period");
}

Associations pair_ngm_to_pps(const std::vector<TrueTime>& pps_times, const std::vector<TrueTime>& ngm_arrivals,
                             const PairingWindow& window) {
    if (!std::is_sorted(pps_times.begin(), pps_times.end()) || !std::is_sorted(ngm_arrivals.begin(), ngm_arrivals.end()))
        throw std::invalid_argument("pair_ngm_to_pps: inputs must be sorted");
    if (!(0 < window.min_after_pps_ns && window.min_after_pps_ns < window.max_after_pps_ns))
        throw std::invalid_argument("pairing window must satisfy 0 < min < max");

    Associations a;
    std::vector<bool> taken(pps_times.size(), false);
    for (std::size_t j = 0; j < ngm_arrivals.size(); ++j) {
        const TrueTime arr = ngm_arrivals[j];
        auto it = std::upper_bound(pps_times.begin(), pps_times.end(), arr);
        if (it == pps_times.begin()) {
            a.unpaired_ngm.push_back(j);
            continue;
        }
        const std::size_t i = static_cast<std::size_t>(std::distance(pps_times.begin(), it)) - 1;
        const std::int64_t dt = arr - pps_times[i];
        if (dt < window.min_after_pps_ns || dt > window.max_after_pps_ns) {
            a.unpaired_ngm.push_back(j);
        } else if (taken[i]) {
            a.duplicate_ngm.push_back(j);
        } else {
            taken[i] = true;
            a.pairs.push_back({i, j});
        }
    }
    for (std::size_t i = 0; i < pps_times.size(); ++i)
        if (!taken[i]) a.unpaired_pps.push_back(i);
    return a;
}

std::vector<LineDiagnostic> check_sentences(std::string_view text) {
    std::vector<LineDiagnostic> out;
    std::size_t line_no = 0;
    std::size_t b = 0;
    while (b < text.size()) {
        auto e = text.find('\n', b);
        std::string_view line = text.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b);
        ++line_no;
        b = e == std::string_view::npos ? text.size() : e + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        try {
            (void)parse_gprmc(line);
        } catch (const NmeaError& err) {
            out.push_back({line_no, err.kind(), err.what()});
        }
    }
    return out;
}

} // namespace hetsync
