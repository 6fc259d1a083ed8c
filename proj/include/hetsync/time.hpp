#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hetsync {

inline constexpr std::int64_t kNsPerSec = 1'000'000'000;
inline constexpr std::int64_t kNsPerMs = 1'000'000;
inline constexpr std::int64_t kNsPerUs = 1'000;

__extension__ typedef __int128 i128;

class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_sub(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);
std::int64_t narrow_i128(i128 v);

// floor/ceil/nearest division for signed 128-bit values, denominator > 0.
i128 floor_div(i128 num, i128 den);
i128 ceil_div(i128 num, i128 den);
i128 round_div(i128 num, i128 den); // ties away from zero

// Euclidean modulo, result in [0, m).
std::int64_t mod_floor(std::int64_t a, std::int64_t m);

/// Ground-truth instant of the simulation, nanoseconds since the simulation epoch.
struct TrueTime {
    std::int64_t ns = 0;

    static constexpr TrueTime from_ns(std::int64_t v) { return TrueTime{v}; }
    static TrueTime from_seconds(double s);

    double seconds() const { return static_cast<double>(ns) / 1e9; }

    auto operator<=>(const TrueTime&) const = default;

    TrueTime operator+(std::int64_t d) const { return TrueTime{checked_add(ns, d)}; }
    TrueTime operator-(std::int64_t d) const { return TrueTime{checked_sub(ns, d)}; }
    std::int64_t operator-(TrueTime o) const { return checked_sub(ns, o.ns); }
    TrueTime& operator+=(std::int64_t d) {
        ns = checked_add(ns, d);
        return *this;
    }
};

/// Exact positive rational, used for tick rates such as 76 800 000 / 1 Hz.
struct Rational {
    std::int64_t num = 1;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d);

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};

std::string format_ns(std::int64_t ns);

} // namespace hetsync
