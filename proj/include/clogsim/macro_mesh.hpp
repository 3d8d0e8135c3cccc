#pragma once

#include <array>
#include <unordered_map>
#include <vector>

#include "clogsim/geometry.hpp"
#include "clogsim/triangulation.hpp"

namespace clogsim {

enum class MacroDomainKind { Cardioid, LShape, Polygon };

/// Macroscopic domain description. The cardioid boundary is
/// (2(1+cos s)cos s, 2(1+cos s)sin s); the L-shape is
/// [-1,1]x[-1,0] u [0,1]x[0,1].
struct MacroDomainSpec {
    MacroDomainKind kind = MacroDomainKind::LShape;
    double H = 0.05;
    int boundary_samples = 256;  // cardioid discretization
    std::vector<Vec2> polygon;   // Polygon variant, CCW

    static MacroDomainSpec cardioid(double H = 0.05, int samples = 256) {
        MacroDomainSpec s;
        s.kind = MacroDomainKind::Cardioid;
        s.H = H;
        s.boundary_samples = samples;
        return s;
    }
    static MacroDomainSpec lshape(double H = 0.03) {
        MacroDomainSpec s;
        s.kind = MacroDomainKind::LShape;
        s.H = H;
        return s;
    }
    static MacroDomainSpec from_polygon(std::vector<Vec2> pts, double H) {
        MacroDomainSpec s;
        s.kind = MacroDomainKind::Polygon;
        s.H = H;
        s.polygon = std::move(pts);
        return s;
    }
};

struct MacroMesh {
    struct BoundaryEdge {
        int a = -1, b = -1;  // oriented so the domain lies to the left
    };

    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<std::uint8_t> on_boundary;  // per-vertex flag
    double H = 0.0;

    double triangle_area(int t) const {
        const auto& tr = triangles[t];
        return 0.5 * orient2d(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
    }

    double area() const {
        double a = 0.0;
        for (int t = 0; t < static_cast<int>(triangles.size()); ++t) a += triangle_area(t);
        return a;
    }

    int nearest_vertex(Vec2 p) const {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int v = 0; v < static_cast<int>(vertices.size()); ++v) {
            const double d = norm2(vertices[v] - p);
            if (d < bd) {
                bd = d;
                best = v;
            }
        }
        return best;
    }

    double boundary_distance(Vec2 p) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& be : boundary_edges)
            best = std::min(best, point_segment_distance(p, vertices[be.a], vertices[be.b]));
        return best;
    }
};

namespace detail {

inline std::vector<Vec2> macro_boundary_polygon(const MacroDomainSpec& spec) {
    std::vector<Vec2> poly;
    switch (spec.kind) {
        case MacroDomainKind::Cardioid: {
            const int n = std::max(32, spec.boundary_samples);
            for (int j = 0; j < n; ++j) {
                const double s = 2.0 * kPi * j / n;
                const double r = 2.0 * (1.0 + std::cos(s));
                poly.push_back({r * std::cos(s), r * std::sin(s)});
            }
            break;
        }
        case MacroDomainKind::LShape:
            poly = {{-1, -1}, {1, -1}, {1, 1}, {0, 1}, {0, 0}, {-1, 0}};
            break;
        case MacroDomainKind::Polygon:
            poly = spec.polygon;
            break;
    }
    if (poly.size() < 3) throw ValidationError("macro boundary needs at least 3 points");
    if (signed_area(poly) < 0.0) std::reverse(poly.begin() + 1, poly.end());
    // collapse sampling clusters (e.g. near the cardioid cusp) so input
    // segments stay on the mesh scale
    std::vector<Vec2> out;
    for (const Vec2& p : poly)
        if (out.empty() || dist(p, out.back()) >= 0.25 * spec.H) out.push_back(p);
    if (out.size() >= 2 && dist(out.front(), out.back()) < 0.25 * spec.H) out.pop_back();
    if (out.size() < 3) throw ValidationError("macro boundary degenerates at this mesh size");
    if (!is_simple(out)) throw GeometryError("macro boundary is self-intersecting");
    return out;
}

}  // namespace detail

/// Triangulate a macroscopic domain. Quality refinement targets a 20 degree
/// minimum angle; triangles wedged into sharp boundary corners (the cardioid
/// cusp) are exempt, as is standard for small input angles.
inline MacroMesh build_macro_mesh(const MacroDomainSpec& spec) {
    if (!(spec.H > 0.0)) throw ValidationError("macro mesh size H must be positive");
    const std::vector<Vec2> poly = detail::macro_boundary_polygon(spec);
    const std::size_t n = poly.size();

    Vec2 lo = poly[0], hi = poly[0];
    for (const Vec2& p : poly) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }

    detail::Triangulator tr;
    tr.init(lo, hi);
    tr.min_angle_deg = 20.0;
    tr.max_circumradius = spec.H;
    tr.set_grid_cell(spec.H);
    tr.in_domain = [&poly](Vec2 p) { return point_in_polygon(p, poly); };

    // sharp input corners (interior angle below 60 degrees)
    std::vector<bool> sharp(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 prev = poly[(i + n - 1) % n];
        const Vec2 next = poly[(i + 1) % n];
        const Vec2 e0 = poly[i] - prev;
        const Vec2 e1 = next - poly[i];
        const double angle = std::atan2(cross(e0, e1), dot(e0, e1));
        const double interior = kPi - angle;
        if (interior < kPi / 3.0) sharp[i] = true;
    }

    std::vector<int> corner_ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        corner_ids[i] = tr.insert_vertex(poly[i]);
        if (sharp[i]) tr.mark_sharp(corner_ids[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        const int pieces = std::max(1, static_cast<int>(std::ceil(dist(a, b) / spec.H)));
        int prev = corner_ids[i];
        for (int k = 1; k < pieces; ++k) {
            const int v = tr.insert_vertex(a + (b - a) * (static_cast<double>(k) / pieces));
            tr.add_segment(prev, v, 0);
            prev = v;
        }
        tr.add_segment(prev, corner_ids[(i + 1) % n], 0);
    }

    tr.recover_segments();
    tr.refine();

    MacroMesh mesh;
    mesh.H = spec.H;
    std::vector<int> kept;
    for (int t = 0; t < static_cast<int>(tr.tris.size()); ++t)
        if (tr.tris[t].alive && tr.in_domain(tr.centroid(t))) kept.push_back(t);
    if (kept.empty()) throw MeshError("macro triangulation produced no triangles");

    std::unordered_map<int, int> remap;
    for (const int t : kept)
        for (int i = 0; i < 3; ++i) {
            const int v = tr.tris[t].v[i];
            if (remap.emplace(v, static_cast<int>(remap.size())).second)
                mesh.vertices.push_back(tr.pts[v]);
        }
    std::unordered_map<std::uint64_t, int> edge_count;
    struct OrientedEdge {
        int a, b;
    };
    std::unordered_map<std::uint64_t, OrientedEdge> edge_info;
    for (const int t : kept) {
        const auto& tt = tr.tris[t];
        mesh.triangles.push_back({remap[tt.v[0]], remap[tt.v[1]], remap[tt.v[2]]});
        if (!(mesh.triangle_area(static_cast<int>(mesh.triangles.size()) - 1) > 0.0))
            throw MeshError("non-positive triangle orientation");
        for (int i = 0; i < 3; ++i) {
            const int a = tt.v[(i + 1) % 3];
            const int b = tt.v[(i + 2) % 3];
            const auto key = detail::edge_key(a, b);
            edge_count[key] += 1;
            edge_info[key] = {a, b};
        }
    }
    mesh.on_boundary.assign(mesh.vertices.size(), 0);
    for (const auto& [key, count] : edge_count) {
        if (count == 1) {
            const auto info = edge_info[key];
            mesh.boundary_edges.push_back({remap[info.a], remap[info.b]});
            mesh.on_boundary[static_cast<std::size_t>(remap[info.a])] = 1;
            mesh.on_boundary[static_cast<std::size_t>(remap[info.b])] = 1;
        } else if (count != 2) {
            throw MeshError("non-conforming macro triangulation");
        }
    }
    return mesh;
}

}  // namespace clogsim
