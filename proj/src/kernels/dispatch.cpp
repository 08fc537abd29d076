#include "tubepose/error.hpp"
#include "tubepose/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <string>

namespace tubepose::kernels {

namespace {

using ResidualFn = double (*)(const double*, const double*, const double*, std::size_t, const double*, double,
                              ResidualMode);
using NearestFn = NearestHit (*)(const double*, const double*, const double*, std::size_t, const double*);

struct Table {
    ResidualFn residual;
    NearestFn nearest;
};

Table table_for(Isa isa) noexcept {
    switch (isa) {
#if defined(TUBEPOSE_HAVE_AVX2)
        case Isa::Avx2: return {avx2::radial_residual_sum, avx2::nearest_in_block};
#endif
#if defined(TUBEPOSE_HAVE_NEON)
        case Isa::Neon: return {neon::radial_residual_sum, neon::nearest_in_block};
#endif
        default: return {scalar::radial_residual_sum, scalar::nearest_in_block};
    }
}

bool cpu_supports(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if defined(TUBEPOSE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(TUBEPOSE_HAVE_NEON)
            return true;  // Advanced SIMD is mandatory on AArch64.
#else
            return false;
#endif
    }
    return false;
}

Isa detect() noexcept {
    if (cpu_supports(Isa::Avx2)) return Isa::Avx2;
    if (cpu_supports(Isa::Neon)) return Isa::Neon;
    return Isa::Scalar;
}

std::atomic<Isa>& active() noexcept {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
        if (cpu_supports(isa)) out.push_back(isa);
    }
    return out;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!cpu_supports(isa)) {
        throw Error(ErrorCode::InvalidParameter, "instruction set not available: " + std::string(isa_name(isa)));
    }
    active().store(isa, std::memory_order_relaxed);
}

SoaPoints::SoaPoints(const PointCloud& cloud, const Point3& offset) {
    x.reserve(cloud.size());
    y.reserve(cloud.size());
    z.reserve(cloud.size());
    for (const auto& p : cloud) {
        x.push_back(p.x() - offset.x());
        y.push_back(p.y() - offset.y());
        z.push_back(p.z() - offset.z());
    }
}

double radial_residual_sum(const SoaPoints& q, const Point3& d, double r, ResidualMode mode) {
    const double dir[3] = {d.x(), d.y(), d.z()};
    return table_for(active_isa()).residual(q.x.data(), q.y.data(), q.z.data(), q.size(), dir, r, mode);
}

NearestHit nearest_in_block(const double* x, const double* y, const double* z, std::size_t n, const Point3& query) {
    const double q[3] = {query.x(), query.y(), query.z()};
    return table_for(active_isa()).nearest(x, y, z, n, q);
}

}  // namespace tubepose::kernels
