#pragma once

#include "tubepose/geometry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tubepose {

enum class PlyEncoding { Ascii, BinaryLittleEndian };
enum class PlyScalar { Float32, Float64 };

struct PlyWriteOptions {
    PlyEncoding encoding = PlyEncoding::BinaryLittleEndian;
    PlyScalar scalar = PlyScalar::Float64;
};

using Rgb = std::array<std::uint8_t, 3>;

/// Reads the x/y/z properties of the vertex element. Other properties and
/// elements are skipped. ParseError messages carry the header line or the
/// byte offset; big-endian files raise UnsupportedFormat.
PointCloud read_ply(std::istream& in);
PointCloud read_ply(const std::filesystem::path& path);

/// Optional per-vertex colors (same length as the cloud) add red/green/blue
/// uchar properties.
void write_ply(std::ostream& out, const PointCloud& cloud, const PlyWriteOptions& options = {},
               const std::vector<Rgb>* colors = nullptr);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud, const PlyWriteOptions& options = {},
               const std::vector<Rgb>* colors = nullptr);

}  // namespace tubepose
