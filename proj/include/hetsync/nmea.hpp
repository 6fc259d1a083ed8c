#pragma once

// NMEA 0183 GPRMC codec and the PPS <-> sentence pairing rule.
//
// Generated sentences have a fixed shape:
//   $GPRMC,hhmmss,A,ddmm.mmm,N,dddmm.mmm,E,sss.s,ccc.c,ddmmyy,vvv.v,W*HH\r\n
// Positions keep 1/1000 minute, speed/course/variation keep 1/10 units.
// The parser accepts any number of decimals (rounded to those units), an
// optional .sss fraction on the time field, and a missing \r\n terminator.

#include "hetsync/time.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hetsync {

enum class NmeaErrorKind {
    Framing,
    ForbiddenByte,
    ChecksumMismatch,
    UnsupportedSentence,
    FieldError,
};

std::string_view to_string(NmeaErrorKind k);

class NmeaError : public std::runtime_error {
public:
    NmeaError(NmeaErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    NmeaErrorKind kind() const { return kind_; }

private:
    NmeaErrorKind kind_;
};

struct UtcTime {
    int hour = 0;
    int minute = 0;
    int second = 0;
    std::optional<int> millis;
    bool operator==(const UtcTime&) const = default;
};

struct UtcDate {
    int day = 1;
    int month = 1;
    int yy = 0; // two-digit year
    bool operator==(const UtcDate&) const = default;
};

struct Coordinate {
    int degrees = 0;
    int milli_minutes = 0; // 0 .. 59999
    char hemisphere = 'N';
    bool operator==(const Coordinate&) const = default;
};

struct MagVariation {
    int tenths_deg = 0;
    char hemisphere = 'E';
    bool operator==(const MagVariation&) const = default;
};

struct GprmcSentence {
    UtcTime time;
    char status = 'A';
    std::optional<Coordinate> latitude;
    std::optional<Coordinate> longitude;
    std::optional<int> speed_tenths_knots;
    std::optional<int> course_tenths_deg;
    UtcDate date;
    std::optional<MagVariation> magvar;

    bool operator==(const GprmcSentence&) const = default;
};

/// Position/velocity content carried by generated sentences.
struct Fix {
    Coordinate latitude{0, 0, 'N'};
    Coordinate longitude{0, 0, 'E'};
    int speed_tenths_knots = 0;
    int course_tenths_deg = 0;
    std::optional<MagVariation> magvar;
};

/// Maps integer second labels to UTC: label 0 is `start` (seconds since 1970-01-01, UTC, no leap seconds).
struct SecondLabelEpoch {
    std::int64_t start_unix_s = 1'622'505'600; // 2021-06-01T00:00:00Z

    std::int64_t to_label(const UtcDate& date, const UtcTime& time) const;
    void from_label(std::int64_t label, UtcDate& date, UtcTime& time) const;
};

std::string checksum(std::string_view body);

void validate(const GprmcSentence& s);
std::string serialize(const GprmcSentence& s);
GprmcSentence make_gprmc(std::int64_t second_label, const Fix& fix, const SecondLabelEpoch& epoch = {});
std::string generate_gprmc(std::int64_t second_label, const Fix& fix, const SecondLabelEpoch& epoch = {});
GprmcSentence parse_gprmc(std::string_view bytes);

struct PairingWindow {
    std::int64_t min_after_pps_ns = 50 * kNsPerMs;
    std::int64_t max_after_pps_ns = 900 * kNsPerMs;

    void validate(std::int64_t pps_period_ns = kNsPerSec) const;
};

struct PpsNgmPair {
    std::size_t pps_index = 0;
    std::size_t ngm_index = 0;
    bool operator==(const PpsNgmPair&) const = default;
};

struct Associations {
    std::vector<PpsNgmPair> pairs;
    std::vector<std::size_t> unpaired_pps;
    std::vector<std::size_t> unpaired_ngm;  // outside every window
    std::vector<std::size_t> duplicate_ngm; // second NGM inside an already-paired window
};

/// Pairs each NGM with the most recent PPS whose window contains it (bounds inclusive).
Associations pair_ngm_to_pps(const std::vector<TrueTime>& pps_times, const std::vector<TrueTime>& ngm_arrivals,
                             const PairingWindow& window = {});

struct LineDiagnostic {
    std::size_t line = 0; // 1-based
    NmeaErrorKind kind = NmeaErrorKind::Framing;
    std::string message;
};

/// Validates a sentence-per-line text; blank lines are skipped.
std::vector<LineDiagnostic> check_sentences(std::string_view text);

} // namespace hetsync
