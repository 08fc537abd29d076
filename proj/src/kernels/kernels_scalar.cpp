#include "tubepose/kernels.hpp"

#include <cmath>

namespace tubepose::kernels::scalar {

double radial_residual_sum(const double* x, const double* y, const double* z, std::size_t n, const double* d,
                           double r, ResidualMode mode) {
    const double dx = d[0], dy = d[1], dz = d[2];
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double cx = y[i] * dz - z[i] * dy;
        const double cy = z[i] * dx - x[i] * dz;
        const double cz = x[i] * dy - y[i] * dx;
        const double e = std::sqrt(cx * cx + cy * cy + cz * cz) - r;
        sum += mode == ResidualMode::L1 ? std::abs(e) : e * e;
    }
    return sum;
}

NearestHit nearest_in_block(const double* x, const double* y, const double* z, std::size_t n, const double* q) {
    NearestHit best{0, INFINITY};
    for (std::size_t i = 0; i < n; ++i) {
        const double ex = x[i] - q[0], ey = y[i] - q[1], ez = z[i] - q[2];
        const double d2 = ex * ex + ey * ey + ez * ez;
        if (d2 < best.squared_distance) best = {i, d2};
    }
    return best;
}

}  // namespace tubepose::kernels::scalar
