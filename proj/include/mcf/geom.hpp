#pragma once

// Small 2D geometry kit: vectors, segments, circles, rectangles, ray casts,
// and distance queries. Everything is inline and allocation-free.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mcf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

struct Segment {
    Vec2 a;
    Vec2 b;
};

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double diag() const { return std::hypot(width(), height()); }
    Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    bool contains(const Vec2& p, double margin = 0.0) const {
        return p.x >= xmin + margin && p.x <= xmax - margin && p.y >= ymin + margin &&
               p.y <= ymax - margin;
    }
    bool contains_rect(const Rect& r) const {
        return r.xmin >= xmin && r.xmax <= xmax && r.ymin >= ymin && r.ymax <= ymax;
    }
};

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    else if (a > kPi) a -= 2.0 * kPi;
    return a;
}

// Distance along unit ray (o, d) to segment, +inf if missed.
inline double ray_segment(const Vec2& o, const Vec2& d, const Segment& s) {
    const Vec2 e = s.b - s.a;
    const double denom = d.cross(e);
    if (std::abs(denom) < 1e-15) return kInf;  // parallel (collinear treated as miss)
    const Vec2 w = s.a - o;
    const double t = w.cross(e) / denom;
    const double u = w.cross(d) / denom;
    if (t < 0.0 || u < 0.0 || u > 1.0) return kInf;
    return t;
}

// Distance along unit ray (o, d) to circle boundary, +inf if missed.
// From inside the circle the exit point is returned.
inline double ray_circle(const Vec2& o, const Vec2& d, const Circle& c) {
    const Vec2 m = o - c.center;
    const double b = m.dot(d);
    const double q = m.dot(m) - c.radius * c.radius;
    const double disc = b * b - q;
    if (disc < 0.0) return kInf;
    const double sq = std::sqrt(disc);
    const double t1 = -b - sq;
    if (t1 >= 0.0) return t1;
    const double t2 = -b + sq;
    if (t2 >= 0.0) return t2;
    return kInf;
}

inline double point_segment_distance(const Vec2& p, const Segment& s) {
    const Vec2 e = s.b - s.a;
    const double len2 = e.dot(e);
    if (len2 <= 0.0) return (p - s.a).norm();
    const double t = std::clamp((p - s.a).dot(e) / len2, 0.0, 1.0);
    const Vec2 closest = s.a + e * t;
    return (p - closest).norm();
}

namespace detail {
inline int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double v = (b - a).cross(c - a);
    if (v > 1e-12) return 1;
    if (v < -1e-12) return -1;
    return 0;
}
}  // namespace detail

inline bool segments_intersect(const Segment& s1, const Segment& s2) {
    const int o1 = detail::orient(s1.a, s1.b, s2.a);
    const int o2 = detail::orient(s1.a, s1.b, s2.b);
    const int o3 = detail::orient(s2.a, s2.b, s1.a);
    const int o4 = detail::orient(s2.a, s2.b, s1.b);
    if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
    // Collinear/touching cases fall through to the distance path below.
    return false;
}

inline double segment_segment_distance(const Segment& s1, const Segment& s2) {
    if (segments_intersect(s1, s2)) return 0.0;
    double d = point_segment_distance(s1.a, s2);
    d = std::min(d, point_segment_distance(s1.b, s2));
    d = std::min(d, point_segment_distance(s2.a, s1));
    d = std::min(d, point_segment_distance(s2.b, s1));
    return d;
}

// Distance from a point to the rectangle (0 inside).
inline double rect_point_distance(const Rect& r, const Vec2& p) {
    const double dx = std::max({r.xmin - p.x, 0.0, p.x - r.xmax});
    const double dy = std::max({r.ymin - p.y, 0.0, p.y - r.ymax});
    return std::hypot(dx, dy);
}

// Distance from a rectangle to a segment (0 when they touch/overlap).
inline double rect_segment_distance(const Rect& r, const Segment& s) {
    if (r.contains(s.a) || r.contains(s.b)) return 0.0;
    const Segment edges[4] = {
        {{r.xmin, r.ymin}, {r.xmax, r.ymin}},
        {{r.xmax, r.ymin}, {r.xmax, r.ymax}},
        {{r.xmax, r.ymax}, {r.xmin, r.ymax}},
        {{r.xmin, r.ymax}, {r.xmin, r.ymin}},
    };
    double d = kInf;
    for (const auto& e : edges) d = std::min(d, segment_segment_distance(e, s));
    return d;
}

// Clearance between a rectangle and a circle's surface (negative = overlap).
inline double rect_circle_clearance(const Rect& r, const Circle& c) {
    return rect_point_distance(r, c.center) - c.radius;
}

}  // namespace mcf
