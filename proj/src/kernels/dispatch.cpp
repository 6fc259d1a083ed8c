#include "hetsync/kernels/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace hetsync::kernels {

namespace {

constexpr KernelTable kScalar{&scalar::dot_f64, &scalar::diff_i64, &scalar::sum_min_max_i64};
#if defined(HETSYNC_HAVE_AVX2)
constexpr KernelTable kAvx2{&avx2::dot_f64, &avx2::diff_i64, &avx2::sum_min_max_i64};
#endif

Isa detect() {
    if (const char* env = std::getenv("HETSYNC_FORCE_SCALAR"); env && *env && *env != '0') return Isa::Scalar;
    if (supported(Isa::Avx2)) return Isa::Avx2;
    return Isa::Scalar;
}

} // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool supported(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(HETSYNC_HAVE_AVX2)
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!supported(isa)) throw std::runtime_error("kernel ISA not supported on this CPU: " + std::string(to_string(isa)));
#if defined(HETSYNC_HAVE_AVX2)
    if (isa == Isa::Avx2) return kAvx2;
#endif
    return kScalar;
}

Isa active_isa() {
    static const Isa isa = detect();
    return isa;
}

const KernelTable& active() {
    static const KernelTable& t = table(active_isa());
    return t;
}

} // namespace hetsync::kernels
