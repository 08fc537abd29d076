#include "tubepose/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace tubepose::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

template <ResidualMode Mode>
double residual_sum(const double* x, const double* y, const double* z, std::size_t n, const double* d, double r) {
    const __m256d dx = _mm256_set1_pd(d[0]);
    const __m256d dy = _mm256_set1_pd(d[1]);
    const __m256d dz = _mm256_set1_pd(d[2]);
    const __m256d rv = _mm256_set1_pd(r);
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();

    auto lane = [&](std::size_t i) {
        const __m256d px = _mm256_loadu_pd(x + i);
        const __m256d py = _mm256_loadu_pd(y + i);
        const __m256d pz = _mm256_loadu_pd(z + i);
        const __m256d cx = _mm256_sub_pd(_mm256_mul_pd(py, dz), _mm256_mul_pd(pz, dy));
        const __m256d cy = _mm256_sub_pd(_mm256_mul_pd(pz, dx), _mm256_mul_pd(px, dz));
        const __m256d cz = _mm256_sub_pd(_mm256_mul_pd(px, dy), _mm256_mul_pd(py, dx));
        const __m256d n2 = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(cx, cx), _mm256_mul_pd(cy, cy)),
                                         _mm256_mul_pd(cz, cz));
        const __m256d e = _mm256_sub_pd(_mm256_sqrt_pd(n2), rv);
        if constexpr (Mode == ResidualMode::L1) {
            return _mm256_andnot_pd(sign, e);
        } else {
            return _mm256_mul_pd(e, e);
        }
    };

    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, lane(i));
        acc1 = _mm256_add_pd(acc1, lane(i + 4));
    }
    if (i + 4 <= n) {
        acc0 = _mm256_add_pd(acc0, lane(i));
        i += 4;
    }
    double sum = hsum(_mm256_add_pd(acc0, acc1));
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
    if (n < 4) return scalar::nearest_in_block(x, y, z, n, q);

    const __m256d qx = _mm256_set1_pd(q[0]);
    const __m256d qy = _mm256_set1_pd(q[1]);
    const __m256d qz = _mm256_set1_pd(q[2]);
    const __m256d step = _mm256_set1_pd(4.0);
    __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    __m256d best_d = _mm256_set1_pd(INFINITY);
    __m256d best_i = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ex = _mm256_sub_pd(_mm256_loadu_pd(x + i), qx);
        const __m256d ey = _mm256_sub_pd(_mm256_loadu_pd(y + i), qy);
        const __m256d ez = _mm256_sub_pd(_mm256_loadu_pd(z + i), qz);
        const __m256d d2 = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(ex, ex), _mm256_mul_pd(ey, ey)),
                                         _mm256_mul_pd(ez, ez));
        const __m256d lt = _mm256_cmp_pd(d2, best_d, _CMP_LT_OQ);
        best_d = _mm256_blendv_pd(best_d, d2, lt);
        best_i = _mm256_blendv_pd(best_i, idx, lt);
        idx = _mm256_add_pd(idx, step);
    }

    alignas(32) double dl[4];
    alignas(32) double il[4];
    _mm256_store_pd(dl, best_d);
    _mm256_store_pd(il, best_i);
    NearestHit best{static_cast<std::size_t>(il[0]), dl[0]};
    for (int l = 1; l < 4; ++l) {
        const auto li = static_cast<std::size_t>(il[l]);
        if (dl[l] < best.squared_distance || (dl[l] == best.squared_distance && li < best.index)) best = {li, dl[l]};
    }
    if (i < n) {
        const NearestHit tail = scalar::nearest_in_block(x + i, y + i, z + i, n - i, q);
        if (tail.squared_distance < best.squared_distance) best = {tail.index + i, tail.squared_distance};
    }
    return best;
}

}  // namespace tubepose::kernels::avx2
