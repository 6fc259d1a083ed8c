#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference; wider ISA
// variants are chosen at runtime and must produce bit-identical results, so
// the scalar versions fix the reduction order (four interleaved lanes, then
// (l0 + l1) + (l2 + l3), then the tail in index order).

#include "hetsync/time.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace hetsync::kernels {

using hetsync::i128;

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

struct SumMinMax {
    i128 sum = 0;
    std::int64_t min = 0;
    std::int64_t max = 0;
    bool operator==(const SumMinMax&) const = default;
};

struct KernelTable {
    double (*dot_f64)(const double* a, const double* b, std::size_t n);
    // out[i] = in[i + 1] - in[i], i < n - 1
    void (*diff_i64)(const std::int64_t* in, std::size_t n, std::int64_t* out);
    // n >= 1; lane sums are 64-bit, so callers keep n * max|value| below 2^62
    SumMinMax (*sum_min_max_i64)(const std::int64_t* v, std::size_t n);
};

bool supported(Isa isa);
const KernelTable& table(Isa isa);

// Best supported ISA, unless HETSYNC_FORCE_SCALAR is set in the environment.
Isa active_isa();
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot_f64(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

namespace scalar {
double dot_f64(const double* a, const double* b, std::size_t n);
void diff_i64(const std::int64_t* in, std::size_t n, std::int64_t* out);
SumMinMax sum_min_max_i64(const std::int64_t* v, std::size_t n);
} // namespace scalar

#if defined(HETSYNC_HAVE_AVX2)
namespace avx2 {
double dot_f64(const double* a, const double* b, std::size_t n);
void diff_i64(const std::int64_t* in, std::size_t n, std::int64_t* out);
SumMinMax sum_min_max_i64(const std::int64_t* v, std::size_t n);
} // namespace avx2
#endif

} // namespace hetsync::kernels
