#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace folia {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline bool finite(Vec2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

// Axis-aligned rectangle, closed.
struct Window {
    double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;

    bool contains(Vec2 p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    bool contains_strict(Vec2 p, double margin = 0.0) const {
        return p.x > xmin + margin && p.x < xmax - margin && p.y > ymin + margin &&
               p.y < ymax - margin;
    }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double diameter() const { return std::hypot(width(), height()); }
    Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    Window inset(double m) const { return {xmin + m, xmax - m, ymin + m, ymax - m}; }
    bool valid() const { return xmin < xmax && ymin < ymax; }
};

using Polyline = std::vector<Vec2>;

struct SegmentHit {
    double s;  // parameter on the first segment
    double t;  // parameter on the second segment
};

// Proper or endpoint intersection of [a,b] and [c,d]; collinear overlaps are ignored.
std::optional<SegmentHit> intersect_segments(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

// Parameters along [a,b] where the polyline changes side of the line through
// a and b. Shared polyline vertices count once.
std::vector<double> crossing_params(Vec2 a, Vec2 b, const Polyline& line);

// Number of crossings of the open segment (a,b) with a polyline.
int count_crossings(Vec2 a, Vec2 b, const Polyline& line);

// Number of points where two polylines meet.
int count_polyline_intersections(const Polyline& a, const Polyline& b);

struct PolylineProjection {
    double distance = 0.0;
    std::size_t segment = 0;  // index of the segment start
    double s = 0.0;           // parameter on that segment
    Vec2 point;
};

PolylineProjection project_to_polyline(Vec2 p, const Polyline& line);
double polyline_length(const Polyline& line);
double arclength_at(const Polyline& line, const PolylineProjection& proj);
Vec2 point_at_arclength(const Polyline& line, double s);

bool point_in_polygon(Vec2 p, const Polyline& ring);
bool polyline_self_intersects(const Polyline& ring, bool closed);

// Hash of the exact bit pattern of a point; used as an opaque leaf tag.
std::uint64_t point_tag(Vec2 p);

}  // namespace folia
