#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace supervisor {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to (-pi, pi].
inline double normalize_angle(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a > kPi) {
        a -= 2.0 * kPi;
    } else if (a <= -kPi) {
        a += 2.0 * kPi;
    }
    return a;
}

struct Vec2 {
    double x{0.0};
    double y{0.0};

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }

struct Pose {
    double x{0.0};
    double y{0.0};
    double psi{0.0};

    Vec2 position() const { return {x, y}; }
};

/// Parameter t in [0,1] of the point on segment ab closest to p.
inline double closest_point_param(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0) {
        return 0.0;
    }
    return std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const double t = closest_point_param(p, a, b);
    return distance(p, a + (b - a) * t);
}

/// Convex polygon, counter-clockwise corner order.
struct ConvexPolygon {
    std::vector<Vec2> corners;

    double area() const {
        double twice = 0.0;
        const std::size_t n = corners.size();
        for (std::size_t i = 0; i < n; ++i) {
            twice += cross(corners[i], corners[(i + 1) % n]);
        }
        return 0.5 * std::abs(twice);
    }
};

/// Axis-separation test for two convex polygons. Touching counts as overlap.
inline bool polygons_overlap(const ConvexPolygon& a, const ConvexPolygon& b) {
    const ConvexPolygon* polys[2] = {&a, &b};
    for (const ConvexPolygon* poly : polys) {
        const std::size_t n = poly->corners.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 edge = poly->corners[(i + 1) % n] - poly->corners[i];
            const Vec2 axis{-edge.y, edge.x};
            double min_a = 1e300, max_a = -1e300;
            for (const Vec2& c : a.corners) {
                const double v = dot(axis, c);
                min_a = std::min(min_a, v);
                max_a = std::max(max_a, v);
            }
            double min_b = 1e300, max_b = -1e300;
            for (const Vec2& c : b.corners) {
                const double v = dot(axis, c);
                min_b = std::min(min_b, v);
                max_b = std::max(max_b, v);
            }
            if (max_a < min_b || max_b < min_a) {
                return false;
            }
        }
    }
    return true;
}

/// Oriented rectangle (length along heading, width across), corners CCW.
inline ConvexPolygon oriented_rectangle(const Pose& pose, double length, double width) {
    const double c = std::cos(pose.psi);
    const double s = std::sin(pose.psi);
    const double hl = 0.5 * length;
    const double hw = 0.5 * width;
    auto corner = [&](double lx, double ly) -> Vec2 {
        return {pose.x + lx * c - ly * s, pose.y + lx * s + ly * c};
    };
    ConvexPolygon poly;
    poly.corners = {corner(hl, hw), corner(-hl, hw), corner(-hl, -hw), corner(hl, -hw)};
    return poly;
}

}  // namespace supervisor
