#pragma once

#include "tubepose/geometry.hpp"
#include "tubepose/planar.hpp"

#include <cstddef>
#include <vector>

namespace tubepose {

/// Physical rack dimensions, meters. Slots are 2L (x) by 2W (y) by H deep,
/// laid out rows (y) by cols (x) and centered on the rack-frame origin.
/// The rack frame has z up with the base at z = 0 and the top surface at
/// z = top_height. A solid label band of width label_margin on the +x end
/// breaks the rack's 180-degree symmetry.
struct RackDimensions {
    double half_length = 0.011;  // L
    double half_width = 0.011;   // W
    double slot_depth = 0.020;   // H
    int rows = 4;
    int cols = 6;
    double pitch_x = 0.025;
    double pitch_y = 0.025;
    double top_height = 0.020;
    double border = 0.008;
    double label_margin = 0.020;
    double template_spacing = 0.001;
};

class RackModel {
public:
    /// Validates dimensions (throws InvalidParameter) and builds slot centers
    /// and the analytic top-surface template.
    explicit RackModel(const RackDimensions& dims);

    const RackDimensions& dimensions() const noexcept { return dims_; }
    double half_length() const noexcept { return dims_.half_length; }
    double half_width() const noexcept { return dims_.half_width; }
    double slot_depth() const noexcept { return dims_.slot_depth; }
    double top_height() const noexcept { return dims_.top_height; }
    std::size_t slot_count() const noexcept { return slot_centers_.size(); }

    /// Index = row * cols + col.
    const std::vector<Point2>& slot_centers() const noexcept { return slot_centers_; }
    AxisRect slot_rect(std::size_t slot) const;

    /// Outer outline of the top surface in the rack frame.
    AxisRect top_rect() const noexcept { return top_rect_; }

    /// Slot whose hole contains p strictly, if any.
    bool in_hole(const Point2& p) const noexcept;

    /// Top surface minus holes on a regular grid at template_spacing, z = top_height.
    const PointCloud& template_cloud() const noexcept { return template_; }

private:
    RackDimensions dims_;
    std::vector<Point2> slot_centers_;
    AxisRect top_rect_;
    PointCloud template_;
};

}  // namespace tubepose
