#include "hetsync/kernels/kernels.hpp"

#include <algorithm>

namespace hetsync::kernels::scalar {

double dot_f64(const double* a, const double* b, std::size_t n) {
    double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        l0 += a[i] * b[i];
        l1 += a[i + 1] * b[i + 1];
        l2 += a[i + 2] * b[i + 2];
        l3 += a[i + 3] * b[i + 3];
    }
    double s = (l0 + l1) + (l2 + l3);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void diff_i64(const std::int64_t* in, std::size_t n, std::int64_t* out) {
    for (std::size_t i = 0; i + 1 < n; ++i) out[i] = in[i + 1] - in[i];
}

SumMinMax sum_min_max_i64(const std::int64_t* v, std::size_t n) {
    std::int64_t l[4] = {0, 0, 0, 0};
    std::int64_t lo = v[0], hi = v[0];
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (int k = 0; k < 4; ++k) {
            l[k] += v[i + k];
            lo = std::min(lo, v[i + k]);
            hi = std::max(hi, v[i + k]);
        }
    }
    SumMinMax r;
    r.sum = (static_cast<i128>(l[0]) + l[1]) + (static_cast<i128>(l[2]) + l[3]);
    for (; i < n; ++i) {
        r.sum += v[i];
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
    }
    r.min = lo;
    r.max = hi;
    return r;
}

} // namespace hetsync::kernels::scalar
