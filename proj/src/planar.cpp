#include "tubepose/planar.hpp"

#include "tubepose/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tubepose {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) noexcept {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

bool OrientedRect::contains(const Point2& p, double tol) const noexcept {
    const Point2 u(std::cos(yaw), std::sin(yaw));
    const Point2 v(-u.y(), u.x());
    const Point2 d = p - center;
    return std::abs(d.dot(u)) <= half_extents.x() + tol && std::abs(d.dot(v)) <= half_extents.y() + tol;
}

double signed_area(const Polygon2& polygon) noexcept {
    const auto& v = polygon.vertices;
    double twice = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const Point2& a = v[i];
        const Point2& b = v[(i + 1) % n];
        twice += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * twice;
}

double area(const Polygon2& polygon) noexcept { return std::abs(signed_area(polygon)); }

Point2 polygon_centroid(const Polygon2& polygon) noexcept {
    const auto& v = polygon.vertices;
    if (v.empty()) return Point2::Zero();
    // Shift to the first vertex to keep the products small.
    const Point2 ref = v.front();
    double a2 = 0.0;
    Point2 acc = Point2::Zero();
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const Point2 p = v[i] - ref;
        const Point2 q = v[(i + 1) % n] - ref;
        const double c = p.x() * q.y() - q.x() * p.y();
        a2 += c;
        acc += (p + q) * c;
    }
    if (a2 == 0.0) {
        Point2 mean = Point2::Zero();
        for (const auto& p : v) mean += p;
        return mean / static_cast<double>(v.size());
    }
    return ref + acc / (3.0 * a2);
}

Polygon2 convex_hull_2d(std::span<const Point2> points) {
    std::vector<Point2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) throw Error(ErrorCode::DegenerateInput, "convex hull needs at least 3 distinct points");

    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);

    Polygon2 result{std::move(hull)};
    const Point2 extent = pts.back() - pts.front();
    double span = extent.norm();
    for (const auto& p : pts) span = std::max(span, (p - pts.front()).norm());
    if (result.size() < 3 || area(result) <= 1e-12 * span * span) {
        throw Error(ErrorCode::DegenerateInput, "points are collinear");
    }
    return result;
}

Polygon2 polygon_clip(const Polygon2& subject, const AxisRect& rect) {
    // Each edge keeps points with inside(p) >= 0.
    struct Edge {
        int axis;
        double bound;
        double sign;
    };
    const Edge edges[4] = {
        {0, rect.min.x(), 1.0}, {0, rect.max.x(), -1.0}, {1, rect.min.y(), 1.0}, {1, rect.max.y(), -1.0}};

    std::vector<Point2> current = subject.vertices;
    for (const Edge& e : edges) {
        if (current.empty()) break;
        std::vector<Point2> next;
        next.reserve(current.size() + 2);
        auto inside = [&](const Point2& p) { return e.sign * (p[e.axis] - e.bound); };
        for (std::size_t i = 0, n = current.size(); i < n; ++i) {
            const Point2& a = current[i];
            const Point2& b = current[(i + 1) % n];
            const double da = inside(a), db = inside(b);
            if (da >= 0.0) next.push_back(a);
            if ((da >= 0.0) != (db >= 0.0)) {
                const double t = da / (da - db);
                Point2 x = a + t * (b - a);
                x[e.axis] = e.bound;
                next.push_back(x);
            }
        }
        current = std::move(next);
    }
    Polygon2 out{std::move(current)};
    if (out.size() < 3 || area(out) <= 0.0) return {};
    return out;
}

bool contains(const Polygon2& convex, const Point2& p, double tol) noexcept {
    const auto& v = convex.vertices;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const Point2& a = v[i];
        const Point2& b = v[(i + 1) % n];
        const double len = (b - a).norm();
        if (cross(a, b, p) < -tol * std::max(len, 1.0)) return false;
    }
    return true;
}

OrientedRect min_area_rect_2d(std::span<const Point2> points) {
    const Polygon2 hull = convex_hull_2d(points);
    const auto& v = hull.vertices;

    OrientedRect best;
    double best_area = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const Point2 u = (v[(i + 1) % n] - v[i]).normalized();
        const Point2 w(-u.y(), u.x());
        double umin = std::numeric_limits<double>::infinity(), umax = -umin;
        double wmin = umin, wmax = -umin;
        for (const auto& p : v) {
            const double a = p.dot(u), b = p.dot(w);
            umin = std::min(umin, a);
            umax = std::max(umax, a);
            wmin = std::min(wmin, b);
            wmax = std::max(wmax, b);
        }
        const double a = (umax - umin) * (wmax - wmin);
        if (a < best_area) {
            best_area = a;
            best.center = u * (0.5 * (umin + umax)) + w * (0.5 * (wmin + wmax));
            best.half_extents = {0.5 * (umax - umin), 0.5 * (wmax - wmin)};
            best.yaw = std::atan2(u.y(), u.x());
        }
    }

    // Fold yaw into [0, pi/2); each quarter turn swaps the extents.
    constexpr double quarter = 0.5 * std::numbers::pi;
    double yaw = best.yaw;
    while (yaw < 0.0) {
        yaw += quarter;
        best.half_extents = {best.half_extents.y(), best.half_extents.x()};
    }
    while (yaw >= quarter) {
        yaw -= quarter;
        best.half_extents = {best.half_extents.y(), best.half_extents.x()};
    }
    best.yaw = yaw;
    return best;
}

}  // namespace tubepose
