#pragma once

#include "tubepose/geometry.hpp"

#include <span>
#include <vector>

namespace tubepose {

/// Convex polygon, counter-clockwise, no repeated closing vertex.
struct Polygon2 {
    std::vector<Point2> vertices;

    bool empty() const noexcept { return vertices.empty(); }
    std::size_t size() const noexcept { return vertices.size(); }
};

struct AxisRect {
    Point2 min;
    Point2 max;

    static AxisRect centered(const Point2& center, const Point2& half_extents) {
        return {center - half_extents, center + half_extents};
    }
    double area() const noexcept { return (max - min).prod(); }
};

/// Rectangle with edges along (cos yaw, sin yaw) and its perpendicular.
/// yaw lies in [0, pi/2); half_extents.x() is measured along the yaw direction.
struct OrientedRect {
    Point2 center = Point2::Zero();
    Point2 half_extents = Point2::Zero();
    double yaw = 0.0;

    double area() const noexcept { return 4.0 * half_extents.prod(); }
    bool contains(const Point2& p, double tol = 1e-12) const noexcept;
};

/// Shoelace area; positive for counter-clockwise order.
double signed_area(const Polygon2& polygon) noexcept;
double area(const Polygon2& polygon) noexcept;
Point2 polygon_centroid(const Polygon2& polygon) noexcept;

/// Minimal convex polygon around points (Andrew's monotone chain). Collinear
/// boundary points are dropped. Throws DegenerateInput if the points span no area.
Polygon2 convex_hull_2d(std::span<const Point2> points);

/// Intersection of a convex CCW polygon with an axis-aligned rectangle
/// (Sutherland-Hodgman). Empty when they share no area.
Polygon2 polygon_clip(const Polygon2& subject, const AxisRect& rect);

/// True if p lies inside or on the boundary of a convex CCW polygon.
bool contains(const Polygon2& convex, const Point2& p, double tol = 1e-12) noexcept;

/// Minimum-area enclosing rectangle via rotating calipers over hull edges.
OrientedRect min_area_rect_2d(std::span<const Point2> points);

}  // namespace tubepose
