#include "tubepose/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace tubepose::kernels::neon {

namespace {

template <ResidualMode Mode>
double residual_sum(const double* x, const double* y, const double* z, std::size_t n, const double* d, double r) {
    const float64x2_t dx = vdupq_n_f64(d[0]);
    const float64x2_t dy = vdupq_n_f64(d[1]);
    const float64x2_t dz = vdupq_n_f64(d[2]);
    const float64x2_t rv = vdupq_n_f64(r);
    float64x2_t acc = vdupq_n_f64(0.0);

    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t px = vld1q_f64(x + i);
        const float64x2_t py = vld1q_f64(y + i);
        const float64x2_t pz = vld1q_f64(z + i);
        const float64x2_t cx = vsubq_f64(vmulq_f64(py, dz), vmulq_f64(pz, dy));
        const float64x2_t cy = vsubq_f64(vmulq_f64(pz, dx), vmulq_f64(px, dz));
        const float64x2_t cz = vsubq_f64(vmulq_f64(px, dy), vmulq_f64(py, dx));
        const float64x2_t n2 = vaddq_f64(vaddq_f64(vmulq_f64(cx, cx), vmulq_f64(cy, cy)), vmulq_f64(cz, cz));
        const float64x2_t e = vsubq_f64(vsqrtq_f64(n2), rv);
        if constexpr (Mode == ResidualMode::L1) {
            acc = vaddq_f64(acc, vabsq_f64(e));
        } else {
            acc = vaddq_f64(acc, vmulq_f64(e, e));
        }
    }
    double sum = vaddvq_f64(acc);
    if (i < n) sum += scalar::radial_residual_sum(x + i, y + i, z + i, n - i, d, r, Mode);
    return sum;
}

}  // namespace

double radial_residual_sum(const double* x, const double* y, const double* z, std::size_t n, const double* d,
                           double r, ResidualMode mode) {
    return mode == ResidualMode::L1 ? residual_sum<ResidualMode::L1>(x, y, z, n, d, r)
                                    : residual_sum<ResidualMode::L2>(x, y, z, n, d, r);
}

NearestHit nearest_in_block(const double* x, const double* y, const double* z, std::size_t n, const double* q) {
    if (n < 2) return scalar::nearest_in_block(x, y, z, n, q);

    const float64x2_t qx = vdupq_n_f64(q[0]);
    const float64x2_t qy = vdupq_n_f64(q[1]);
    const float64x2_t qz = vdupq_n_f64(q[2]);
    const float64x2_t step = vdupq_n_f64(2.0);
    const double idx0[2] = {0.0, 1.0};
    float64x2_t idx = vld1q_f64(idx0);
    float64x2_t best_d = vdupq_n_f64(INFINITY);
    float64x2_t best_i = vdupq_n_f64(0.0);

    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t ex = vsubq_f64(vld1q_f64(x + i), qx);
        const float64x2_t ey = vsubq_f64(vld1q_f64(y + i), qy);
        const float64x2_t ez = vsubq_f64(vld1q_f64(z + i), qz);
        const float64x2_t d2 = vaddq_f64(vaddq_f64(vmulq_f64(ex, ex), vmulq_f64(ey, ey)), vmulq_f64(ez, ez));
        const uint64x2_t lt = vcltq_f64(d2, best_d);
        best_d = vbslq_f64(lt, d2, best_d);
        best_i = vbslq_f64(lt, idx, best_i);
        idx = vaddq_f64(idx, step);
    }

    double dl[2], il[2];
    vst1q_f64(dl, best_d);
    vst1q_f64(il, best_i);
    NearestHit best{static_cast<std::size_t>(il[0]), dl[0]};
    const auto l1 = static_cast<std::size_t>(il[1]);
    if (dl[1] < best.squared_distance || (dl[1] == best.squared_distance && l1 < best.index)) best = {l1, dl[1]};
    if (i < n) {
        const NearestHit tail = scalar::nearest_in_block(x + i, y + i, z + i, n - i, q);
        if (tail.squared_distance < best.squared_distance) best = {tail.index + i, tail.squared_distance};
    }
    return best;
}

}  // namespace tubepose::kernels::neon
