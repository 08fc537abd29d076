#include "tubepose/rack.hpp"

#include "tubepose/error.hpp"

#include <cmath>
#include <string>

namespace tubepose {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidParameter, std::string("rack ") + name + " must be positive");
    }
}

}  // namespace

RackModel::RackModel(const RackDimensions& dims) : dims_(dims) {
    require_positive(dims.half_length, "half_length");
    require_positive(dims.half_width, "half_width");
    require_positive(dims.slot_depth, "slot_depth");
    require_positive(dims.pitch_x, "pitch_x");
    require_positive(dims.pitch_y, "pitch_y");
    require_positive(dims.top_height, "top_height");
    require_positive(dims.template_spacing, "template_spacing");
    if (dims.rows < 1 || dims.cols < 1) throw Error(ErrorCode::InvalidParameter, "rack needs at least one slot");
    if (dims.border < 0.0 || dims.label_margin < 0.0) {
        throw Error(ErrorCode::InvalidParameter, "rack border and label margin must be non-negative");
    }
    if (2.0 * dims.half_length >= dims.pitch_x || 2.0 * dims.half_width >= dims.pitch_y) {
        throw Error(ErrorCode::InvalidParameter, "slot holes overlap: pitch must exceed slot size");
    }
    if (dims.slot_depth > dims.top_height) {
        throw Error(ErrorCode::InvalidParameter, "slot depth exceeds rack height");
    }

    const double x0 = -0.5 * (dims.cols - 1) * dims.pitch_x;
    const double y0 = -0.5 * (dims.rows - 1) * dims.pitch_y;
    slot_centers_.reserve(static_cast<std::size_t>(dims.rows * dims.cols));
    for (int row = 0; row < dims.rows; ++row) {
        for (int col = 0; col < dims.cols; ++col) {
            slot_centers_.emplace_back(x0 + col * dims.pitch_x, y0 + row * dims.pitch_y);
        }
    }

    top_rect_.min = {x0 - dims.half_length - dims.border, y0 - dims.half_width - dims.border};
    top_rect_.max = {-x0 + dims.half_length + dims.border + dims.label_margin,
                     -y0 + dims.half_width + dims.border};

    const double s = dims.template_spacing;
    const Point2 extent = top_rect_.max - top_rect_.min;
    const auto nx = static_cast<long>(std::floor(extent.x() / s));
    const auto ny = static_cast<long>(std::floor(extent.y() / s));
    const double ox = top_rect_.min.x() + 0.5 * (extent.x() - (nx - 1) * s);
    const double oy = top_rect_.min.y() + 0.5 * (extent.y() - (ny - 1) * s);
    for (long j = 0; j < ny; ++j) {
        for (long i = 0; i < nx; ++i) {
            const Point2 p(ox + i * s, oy + j * s);
            if (!in_hole(p)) template_.points.emplace_back(p.x(), p.y(), dims.top_height);
        }
    }
    if (template_.empty()) throw Error(ErrorCode::InvalidParameter, "rack template is empty");
}

AxisRect RackModel::slot_rect(std::size_t slot) const {
    if (slot >= slot_centers_.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "slot index " + std::to_string(slot) + " out of range");
    }
    return AxisRect::centered(slot_centers_[slot], {dims_.half_length, dims_.half_width});
}

bool RackModel::in_hole(const Point2& p) const noexcept {
    const double x0 = -0.5 * (dims_.cols - 1) * dims_.pitch_x;
    const double y0 = -0.5 * (dims_.rows - 1) * dims_.pitch_y;
    const long col = std::lround((p.x() - x0) / dims_.pitch_x);
    const long row = std::lround((p.y() - y0) / dims_.pitch_y);
    if (col < 0 || col >= dims_.cols || row < 0 || row >= dims_.rows) return false;
    const double dx = p.x() - (x0 + col * dims_.pitch_x);
    const double dy = p.y() - (y0 + row * dims_.pitch_y);
    return std::abs(dx) < dims_.half_length && std::abs(dy) < dims_.half_width;
}

}  // namespace tubepose
