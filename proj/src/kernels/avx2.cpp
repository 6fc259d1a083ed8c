#include "hetsync/kernels/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

namespace hetsync::kernels::avx2 {

double dot_f64(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // mul then add, never fused, to match the scalar lane order bit for bit
        const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, p);
    }
    alignas(32) double l[4];
    _mm256_store_pd(l, acc);
    double s = (l[0] + l[1]) + (l[2] + l[3]);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void diff_i64(const std::int64_t* in, std::size_t n, std::int64_t* out) {
    if (n < 2) return;
    const std::size_t m = n - 1;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const __m256i lo = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(in + i));
        const __m256i hi = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(in + i + 1));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), _mm256_sub_epi64(hi, lo));
    }
    for (; i < m; ++i) out[i] = in[i + 1] - in[i];
}

SumMinMax sum_min_max_i64(const std::int64_t* v, std::size_t n) {
    __m256i sum = _mm256_setzero_si256();
    __m256i lo = _mm256_set1_epi64x(v[0]);
    __m256i hi = lo;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + i));
        sum = _mm256_add_epi64(sum, x);
        lo = _mm256_blendv_epi8(lo, x, _mm256_cmpgt_epi64(lo, x));
        hi = _mm256_blendv_epi8(hi, x, _mm256_cmpgt_epi64(x, hi));
    }
    alignas(32) std::int64_t s[4], a[4], b[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(s), sum);
    _mm256_store_si256(reinterpret_cast<__m256i*>(a), lo);
    _mm256_store_si256(reinterpret_cast<__m256i*>(b), hi);
    SumMinMax r;
    r.sum = (static_cast<i128>(s[0]) + s[1]) + (static_cast<i128>(s[2]) + s[3]);
    r.min = std::min({a[0], a[1], a[2], a[3]});
    r.max = std::max({b[0], b[1], b[2], b[3]});
    for (; i < n; ++i) {
        r.sum += v[i];
        r.min = std::min(r.min, v[i]);
        r.max = std::max(r.max, v[i]);
    }
    return r;
}

} // namespace hetsync::kernels::avx2
