#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace clogsim {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Thrown when user-supplied parameters violate a documented precondition.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a curve or region is geometrically inadmissible
/// (self-intersection, overlap, exits the unit cell, ...).
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a scalar argument lies outside its admissible interval.
struct RangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Thrown when triangulation of a domain fails (e.g. a hole touches the
/// cell boundary, which callers interpret as a clogged cell).
struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a linear solve does not reach the required residual, or a
/// field turns non-finite during time stepping.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown on malformed configuration or data files.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

/// Signed twice-area of the triangle (a, b, c); positive when CCW.
inline double orient2d(Vec2 a, Vec2 b, Vec2 c) {
    return cross(b - a, c - a);
}

/// Distance of a point to the boundary of the unit cell Y = (0,1)^2
/// (negative when outside).
inline double cell_clearance(Vec2 p) {
    return std::min(std::min(p.x, 1.0 - p.x), std::min(p.y, 1.0 - p.y));
}

}  // namespace clogsim
