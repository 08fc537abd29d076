#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference implementation
// and optional AVX2 / NEON variants chosen at runtime; the variants are tested
// for equivalence against the scalar path.

#include "tubepose/geometry.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace tubepose::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

/// Instruction sets compiled in and supported by the running CPU. Always
/// contains Scalar.
std::vector<Isa> available_isas();

/// The variant used by the dispatching entry points below.
Isa active_isa() noexcept;

/// Forces a variant (must be in available_isas()). Test hook; not thread-safe
/// against concurrent kernel calls.
void set_active_isa(Isa isa);

/// Structure-of-arrays copy of a cloud, usually translated so the tube origin
/// sits at zero.
struct SoaPoints {
    std::vector<double> x, y, z;

    SoaPoints() = default;
    explicit SoaPoints(const PointCloud& cloud, const Point3& offset = Point3::Zero());

    std::size_t size() const noexcept { return x.size(); }
};

enum class ResidualMode { L1, L2 };

/// Sum over points q of |‖q × d‖ − r| (L1) or (‖q × d‖ − r)² (L2). d must be unit.
double radial_residual_sum(const SoaPoints& q, const Point3& d, double r, ResidualMode mode);

struct NearestHit {
    std::size_t index = 0;
    double squared_distance = 0.0;
};

/// Nearest of n points stored as separate coordinate arrays; ties resolve to the
/// lowest index. n must be > 0.
NearestHit nearest_in_block(const double* x, const double* y, const double* z, std::size_t n, const Point3& query);

// Per-ISA entry points, exposed for equivalence tests and benchmarks.
namespace scalar {
double radial_residual_sum(const double* x, const double* y, const double* z, std::size_t n, const double* d,
                           double r, ResidualMode mode);
NearestHit nearest_in_block(const double* x, const double* y, const double* z, std::size_t n, const double* q);
}  // namespace scalar

namespace avx2 {
double radial_residual_sum(const double* x, const double* y, const double* z, std::size_t n, const double* d,
                           double r, ResidualMode mode);
NearestHit nearest_in_block(const double* x, const double* y, const double* z, std::size_t n, const double* q);
}  // namespace avx2

namespace neon {
double radial_residual_sum(const double* x, const double* y, const double* z, std::size_t n, const double* d,
                           double r, ResidualMode mode);
NearestHit nearest_in_block(const double* x, const double* y, const double* z, std::size_t n, const double* q);
}  // namespace neon

}  // namespace tubepose::kernels
