#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace meshdqn {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Twice the signed area of triangle (a, b, c); positive when CCW.
inline double cross2(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b - a).cross(c - a);
}

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * cross2(a, b, c);
}

/// > 0 when d lies strictly inside the circumcircle of CCW triangle (a, b, c).
inline double in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double ax = a.x - d.x, ay = a.y - d.y;
    const double bx = b.x - d.x, by = b.y - d.y;
    const double cx = c.x - d.x, cy = c.y - d.y;
    const double a2 = ax * ax + ay * ay;
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    return ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
}

struct BBox {
    Vec2 lo{0, 0};
    Vec2 hi{0, 0};

    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double area() const { return width() * height(); }
    double diagonal() const { return (hi - lo).norm(); }
};

inline BBox bounding_box(const std::vector<Vec2>& pts) {
    BBox b;
    if (pts.empty()) return b;
    b.lo = b.hi = pts[0];
    for (const Vec2& p : pts) {
        b.lo.x = std::min(b.lo.x, p.x);
        b.lo.y = std::min(b.lo.y, p.y);
        b.hi.x = std::max(b.hi.x, p.x);
        b.hi.y = std::max(b.hi.y, p.y);
    }
    return b;
}

/// Barycentric coordinates of p in triangle (a, b, c). Sum is exactly 1.
inline std::array<double, 3> barycentric(const Vec2& a, const Vec2& b, const Vec2& c,
                                         const Vec2& p) {
    const double area2 = cross2(a, b, c);
    const double l0 = cross2(p, b, c) / area2;
    const double l1 = cross2(a, p, c) / area2;
    return {l0, l1, 1.0 - l0 - l1};
}

/// Distance from p to segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.norm2();
    if (len2 == 0.0) return distance(p, a);
    double t = (p - a).dot(ab) / len2;
    t = std::max(0.0, std::min(1.0, t));
    return distance(p, a + ab * t);
}

inline Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.norm2();
    if (len2 == 0.0) return a;
    double t = (p - a).dot(ab) / len2;
    t = std::max(0.0, std::min(1.0, t));
    return a + ab * t;
}

/// splitmix64; used to derive independent sub-seeds from one master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace meshdqn
