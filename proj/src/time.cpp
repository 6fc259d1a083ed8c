#include "hetsync/time.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace hetsync {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("time arithmetic overflow (add)");
    return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("time arithmetic overflow (sub)");
    return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("time arithmetic overflow (mul)");
    return r;
}

std::int64_t narrow_i128(i128 v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw OverflowError("128-bit intermediate does not fit in 64 bits");
    return static_cast<std::int64_t>(v);
}

i128 floor_div(i128 num, i128 den) {
    i128 q = num / den;
    if ((num % den != 0) && (num < 0)) --q;
    return q;
}

i128 ceil_div(i128 num, i128 den) {
    i128 q = num / den;
    if ((num % den != 0) && (num > 0)) ++q;
    return q;
}

i128 round_div(i128 num, i128 den) {
    if (num >= 0) return (num + den / 2) / den;
    return -((-num + den / 2) / den);
}

std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
    if (m <= 0) throw std::invalid_argument("mod_floor: modulus must be positive");
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

TrueTime TrueTime::from_seconds(double s) {
    const double v = std::round(s * 1e9);
    if (!(std::fabs(v) < 9.2e18)) throw OverflowError("seconds value out of range");
    return TrueTime{static_cast<std::int64_t>(v)};
}

Rational::Rational(std::int64_t n, std::int64_t d) {
    if (n <= 0 || d <= 0) throw std::invalid_argument("Rational: numerator and denominator must be positive");
    const std::int64_t g = std::gcd(n, d);
    num = n / g;
    den = d / g;
}

std::string format_ns(std::int64_t ns) {
    char buf[64];
    const bool neg = ns < 0;
    const std::uint64_t a = neg ? static_cast<std::uint64_t>(-(ns + 1)) + 1 : static_cast<std::uint64_t>(ns);
    std::snprintf(buf, sizeof buf, "%s%llu.%09llu", neg ? "-" : "", static_cast<unsigned long long>(a / 1'000'000'000ULL),
                  static_cast<unsigned long long>(a % 1'000'000'000ULL));
    return buf;
}

} // namespace hetsync
