#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "clogsim/core.hpp"

namespace clogsim {

// ---------------------------------------------------------------------------
// Closed-polyline primitives
// ---------------------------------------------------------------------------

/// Shoelace area of a closed polyline; positive for CCW orientation.
inline double signed_area(std::span<const Vec2> pts) {
    double twice = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = pts[i];
        const Vec2 b = pts[(i + 1) % n];
        twice += cross(a, b);
    }
    return 0.5 * twice;
}

inline double perimeter(std::span<const Vec2> pts) {
    double len = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) len += dist(pts[i], pts[(i + 1) % n]);
    return len;
}

/// Even-odd point-in-polygon test (closed polyline).
inline bool point_in_polygon(Vec2 p, std::span<const Vec2> pts) {
    bool inside = false;
    const std::size_t n = pts.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = pts[i];
        const Vec2 b = pts[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = norm2(ab);
    if (len2 == 0.0) return dist(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return dist(p, a + t * ab);
}

/// Minimum distance from p to a closed polyline.
inline double polyline_distance(Vec2 p, std::span<const Vec2> pts) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        best = std::min(best, point_segment_distance(p, pts[i], pts[(i + 1) % n]));
    return best;
}

namespace detail {

inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double d1 = orient2d(c, d, a);
    const double d2 = orient2d(c, d, b);
    const double d3 = orient2d(a, b, c);
    const double d4 = orient2d(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on = [](Vec2 p, Vec2 q, Vec2 r) {  // r collinear with pq and within its box
        return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
               std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
    };
    if (d1 == 0 && on(c, d, a)) return true;
    if (d2 == 0 && on(c, d, b)) return true;
    if (d3 == 0 && on(a, b, c)) return true;
    if (d4 == 0 && on(a, b, d)) return true;
    return false;
}

}  // namespace detail

/// True when the closed polyline has no self-intersection. Adjacent segments
/// share an endpoint and are not counted. O(n^2).
inline bool is_simple(std::span<const Vec2> pts) {
    const std::size_t n = pts.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = pts[i];
        const Vec2 b = pts[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i) continue;
            // skip segments adjacent to segment i
            if (j == (i + 1) % n || (j + 1) % n == i) continue;
            if (detail::segments_intersect(a, b, pts[j], pts[(j + 1) % n])) return false;
        }
    }
    return true;
}

/// True when all turns of the CCW polyline are left turns (within slack).
inline bool is_convex(std::span<const Vec2> pts) {
    const std::size_t n = pts.size();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e = pts[(i + 1) % n] - pts[i];
        scale = std::max(scale, norm2(e));
    }
    const double tol = -1e-12 * scale;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e0 = pts[i] - pts[(i + n - 1) % n];
        const Vec2 e1 = pts[(i + 1) % n] - pts[i];
        if (cross(e0, e1) < tol) return false;
    }
    return true;
}

/// Discrete (Menger) curvature at each vertex: inverse circumradius of the
/// triple (p_{j-1}, p_j, p_{j+1}).
inline double max_discrete_curvature(std::span<const Vec2> pts) {
    const std::size_t n = pts.size();
    double kmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = pts[(i + n - 1) % n];
        const Vec2 b = pts[i];
        const Vec2 c = pts[(i + 1) % n];
        const double la = dist(a, b), lb = dist(b, c), lc = dist(c, a);
        if (la == 0.0 || lb == 0.0 || lc == 0.0) continue;
        const double kappa = 2.0 * std::abs(orient2d(a, b, c)) / (la * lb * lc);
        kmax = std::max(kmax, kappa);
    }
    return kmax;
}

/// Outward unit normals of a CCW closed polyline from centered-difference
/// tangents.
inline std::vector<Vec2> outward_normals(std::span<const Vec2> pts) {
    const std::size_t n = pts.size();
    std::vector<Vec2> nu(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 t = pts[(i + 1) % n] - pts[(i + n - 1) % n];
        const double len = norm(t);
        if (len < 1e-300) throw GeometryError("degenerate tangent in closed polyline");
        nu[i] = Vec2{t.y, -t.x} / len;
    }
    return nu;
}

// ---------------------------------------------------------------------------
// Shapes and offset curves
// ---------------------------------------------------------------------------

enum class ShapeKind { Circle, Ellipse, Bean, Polyline };

/// Parametric description of an initial solid-core boundary inside the unit
/// cell. Circle and Bean use r_c; Ellipse uses (r_a, r_b, theta).
struct ShapeSpec {
    ShapeKind kind = ShapeKind::Circle;
    double r_c = 0.0;
    double r_a = 0.0;
    double r_b = 0.0;
    double theta = 0.0;  // radians, rotation of the ellipse long axis
    std::vector<Vec2> points;
    Vec2 center{0.5, 0.5};

    static ShapeSpec circle(double r, Vec2 c = {0.5, 0.5}) {
        ShapeSpec s;
        s.kind = ShapeKind::Circle;
        s.r_c = r;
        s.center = c;
        return s;
    }
    static ShapeSpec ellipse(double ra, double rb, double theta, Vec2 c = {0.5, 0.5}) {
        ShapeSpec s;
        s.kind = ShapeKind::Ellipse;
        s.r_a = ra;
        s.r_b = rb;
        s.theta = theta;
        s.center = c;
        return s;
    }
    static ShapeSpec bean(double r, Vec2 c = {0.5, 0.5}) {
        ShapeSpec s;
        s.kind = ShapeKind::Bean;
        s.r_c = r;
        s.center = c;
        return s;
    }
    static ShapeSpec polyline(std::vector<Vec2> pts) {
        ShapeSpec s;
        s.kind = ShapeKind::Polyline;
        s.points = std::move(pts);
        return s;
    }

    /// Long semi-axis of the base shape (used to translate axis-length fields
    /// into offset coordinates).
    double base_radius() const {
        switch (kind) {
            case ShapeKind::Circle:
            case ShapeKind::Bean: return r_c;
            case ShapeKind::Ellipse: return r_a;
            case ShapeKind::Polyline: {
                double r = 0.0;
                Vec2 c{0, 0};
                for (const Vec2& p : points) c += p;
                c = c / static_cast<double>(points.size());
                for (const Vec2& p : points) r = std::max(r, dist(p, c));
                return r;
            }
        }
        return 0.0;
    }
};

/// Sampled closed boundary curve at offset sigma from its source shape.
/// Samples are CCW; the polyline closes from the last sample back to the
/// first.
struct OffsetCurve {
    double sigma = 0.0;
    std::vector<Vec2> samples;
    ShapeSpec source;
};

/// Geometric coefficients of a perforated unit cell.
struct GeomQuantities {
    double gamma_len = 0.0;       // |Gamma(sigma)|
    double fluid_area = 1.0;      // |Y^f(sigma)| = phi
    double solid_area = 0.0;      // |Y^s(sigma)|
    double specific_surface = 0.0;  // A = |Gamma| / |Y^f|
};

namespace detail {

inline void enforce_ccw(std::vector<Vec2>& pts) {
    if (signed_area(pts) < 0.0) std::reverse(pts.begin() + 1, pts.end());
}

}  // namespace detail

/// Sample the initial (sigma = 0) boundary of a shape, uniformly in its
/// curve parameter, as a CCW closed polyline.
inline OffsetCurve eval_initial_curve(const ShapeSpec& shape, int n_samples) {
    if (n_samples < 16) throw ValidationError("n_samples must be at least 16");
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(n_samples));
    switch (shape.kind) {
        case ShapeKind::Circle: {
            if (!(shape.r_c > 0.0)) throw ValidationError("circle radius must be positive");
            for (int j = 0; j < n_samples; ++j) {
                const double s = 2.0 * kPi * j / n_samples;
                pts.push_back(shape.center + Vec2{shape.r_c * std::cos(s), shape.r_c * std::sin(s)});
            }
            break;
        }
        case ShapeKind::Ellipse: {
            if (!(shape.r_b > 0.0) || !(shape.r_a >= shape.r_b))
                throw ValidationError("ellipse axes must satisfy r_a >= r_b > 0");
            const double ct = std::cos(shape.theta), st = std::sin(shape.theta);
            for (int j = 0; j < n_samples; ++j) {
                const double s = 2.0 * kPi * j / n_samples;
                const double px = shape.r_a * std::cos(s);
                const double py = shape.r_b * std::sin(s);
                pts.push_back(shape.center + Vec2{ct * px - st * py, st * px + ct * py});
            }
            break;
        }
        case ShapeKind::Bean: {
            if (!(shape.r_c > 0.0)) throw ValidationError("bean radius must be positive");
            for (int j = 0; j < n_samples; ++j) {
                const double s = kPi * j / n_samples;
                const double c = std::cos(s), si = std::sin(s);
                const double f = c * c * c + si * si * si;
                pts.push_back(shape.center + Vec2{shape.r_c * c * f, shape.r_c * si * f});
            }
            break;
        }
        case ShapeKind::Polyline: {
            if (shape.points.size() < 3) throw ValidationError("polyline needs at least 3 points");
            // uniform resampling in normalized chord-length parameter
            const std::size_t m = shape.points.size();
            std::vector<double> cum(m + 1, 0.0);
            for (std::size_t i = 0; i < m; ++i)
                cum[i + 1] = cum[i] + dist(shape.points[i], shape.points[(i + 1) % m]);
            const double total = cum[m];
            if (!(total > 0.0)) throw ValidationError("degenerate polyline");
            std::size_t seg = 0;
            for (int j = 0; j < n_samples; ++j) {
                const double target = total * j / n_samples;
                while (seg + 1 < m && cum[seg + 1] <= target) ++seg;
                const double seg_len = cum[seg + 1] - cum[seg];
                const double t = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
                const Vec2 a = shape.points[seg];
                const Vec2 b = shape.points[(seg + 1) % m];
                pts.push_back(a + t * (b - a));
            }
            break;
        }
    }
    detail::enforce_ccw(pts);
    for (const Vec2& p : pts)
        if (!(cell_clearance(p) > 0.0))
            throw GeometryError("initial curve exits the unit cell Y = (0,1)^2");
    if (!is_simple(pts)) throw GeometryError("initial curve is self-intersecting");
    OffsetCurve c;
    c.sigma = 0.0;
    c.samples = std::move(pts);
    c.source = shape;
    return c;
}

/// Largest admissible offsets of a base curve:
///  - sigma_clog: largest sigma (bisection, 1e-6 absolute) such that every
///    offset sample keeps clearance >= epsilon to the cell boundary;
///  - sigma_smooth: inverse of the maximal discrete curvature; offsets stay
///    smooth and simple below it. Callers must respect
///    min(sigma_clog, sigma_smooth) for non-convex shapes.
struct AdmissibleOffset {
    double sigma_clog = 0.0;
    double sigma_smooth = 0.0;
};

inline AdmissibleOffset max_admissible_offset(const OffsetCurve& base, double epsilon) {
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    const std::vector<Vec2> normals = outward_normals(base.samples);
    auto min_clearance = [&](double sigma) {
        double c = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < base.samples.size(); ++i)
            c = std::min(c, cell_clearance(base.samples[i] + sigma * normals[i]));
        return c;
    };
    AdmissibleOffset out;
    const double kappa = max_discrete_curvature(base.samples);
    out.sigma_smooth = kappa > 0.0 ? 1.0 / kappa : std::numeric_limits<double>::infinity();
    if (min_clearance(0.0) < epsilon) {
        out.sigma_clog = 0.0;  // base already touching the boundary band
        return out;
    }
    double lo = 0.0, hi = 0.75;
    while (min_clearance(hi) >= epsilon) {
        hi *= 2.0;
        if (hi > 64.0) break;  // unbounded growth cannot happen inside Y
    }
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        (min_clearance(mid) >= epsilon ? lo : hi) = mid;
    }
    out.sigma_clog = lo;
    return out;
}

/// Displace a closed curve by sigma along its outward normal, the exact
/// solution of the unit-speed front motion for the sampled boundary. For a
/// centered circle of radius R this gives the circle of radius R + sigma.
inline OffsetCurve offset_curve(const OffsetCurve& base, double sigma) {
    if (base.samples.size() < 3) throw ValidationError("offset base must be a closed polyline");
    const double kappa = max_discrete_curvature(base.samples);
    const double sigma_smooth = kappa > 0.0 ? 1.0 / kappa : std::numeric_limits<double>::infinity();
    const bool convex = is_convex(base.samples);
    if (sigma < 0.0 && -sigma > sigma_smooth * (1.0 + 1e-9))
        throw RangeError("shrink offset exceeds the smoothness bound 1/max|curvature|");
    if (sigma > 0.0 && !convex && sigma > sigma_smooth * (1.0 + 1e-9))
        throw RangeError("grow offset of a non-convex curve exceeds the smoothness bound");

    const std::vector<Vec2> normals = outward_normals(base.samples);
    OffsetCurve out;
    out.sigma = base.sigma + sigma;
    out.source = base.source;
    out.samples.resize(base.samples.size());
    for (std::size_t i = 0; i < base.samples.size(); ++i)
        out.samples[i] = base.samples[i] + sigma * normals[i];
    if (sigma != 0.0 && !is_simple(out.samples))
        throw GeometryError("offset polyline self-intersects");
    return out;
}

/// Perimeters, areas, and specific surface of a family of pairwise-disjoint
/// inclusions inside the unit cell.
inline GeomQuantities geom_quantities(const std::vector<OffsetCurve>& curves) {
    GeomQuantities q;
    if (curves.empty()) return q;  // empty cell: phi = 1, A = 0
    for (const OffsetCurve& c : curves) {
        for (const Vec2& p : c.samples)
            if (!(cell_clearance(p) > 0.0))
                throw GeometryError("inclusion exits the unit cell");
        q.gamma_len += perimeter(c.samples);
        q.solid_area += signed_area(c.samples);
    }
    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (std::size_t j = i + 1; j < curves.size(); ++j) {
            const auto& a = curves[i].samples;
            const auto& b = curves[j].samples;
            if (point_in_polygon(a[0], b) || point_in_polygon(b[0], a))
                throw GeometryError("overlapping inclusions");
            for (std::size_t s = 0; s < a.size(); ++s)
                for (std::size_t t = 0; t < b.size(); ++t)
                    if (detail::segments_intersect(a[s], a[(s + 1) % a.size()], b[t],
                                                   b[(t + 1) % b.size()]))
                        throw GeometryError("overlapping inclusions");
        }
    }
    if (!(q.solid_area > 0.0) || q.solid_area >= 1.0)
        throw GeometryError("inclusion area outside (0,1)");
    q.fluid_area = 1.0 - q.solid_area;
    q.specific_surface = q.gamma_len / q.fluid_area;
    return q;
}

}  // namespace clogsim
