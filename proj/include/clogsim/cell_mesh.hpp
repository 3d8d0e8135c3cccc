#pragma once

#include <array>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "clogsim/geometry.hpp"
#include "clogsim/triangulation.hpp"

namespace clogsim {

/// Conforming triangulation of the perforated unit cell Y^f = Y \ Y^s with
/// exact vertex pairing across opposite cell edges.
struct CellMesh {
    enum class BoundaryTag { Inner, Left, Right, Bottom, Top };

    struct BoundaryEdge {
        int a = -1, b = -1;  // oriented so the fluid region lies to the left
        int tri = -1;        // adjacent fluid triangle
        BoundaryTag tag = BoundaryTag::Inner;
        int hole = -1;  // hole index for inner edges
    };

    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<std::pair<int, int>> periodic_pairs;  // left<->right, bottom<->top
    double h = 0.0;
    std::vector<int> dropped_holes;  // holes below the degenerate-area threshold

    double triangle_area(int t) const {
        const auto& tr = triangles[t];
        return 0.5 * orient2d(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
    }

    double fluid_area() const {
        double a = 0.0;
        for (int t = 0; t < static_cast<int>(triangles.size()); ++t) a += triangle_area(t);
        return a;
    }
};

namespace detail {

/// Resample a closed polyline so that every segment is at most `spacing`
/// long. Coarser targets use uniform arc length; finer targets keep the
/// original vertices and split per edge, so the polygon is unchanged.
inline std::vector<Vec2> resample_closed(const std::vector<Vec2>& pts, double spacing) {
    const double total = perimeter(pts);
    const auto n_in = static_cast<int>(pts.size());
    const int target = std::max(16, static_cast<int>(std::ceil(total / spacing)));
    std::vector<Vec2> out;
    if (target < n_in) {
        out.reserve(static_cast<std::size_t>(target));
        std::vector<double> cum(static_cast<std::size_t>(n_in) + 1, 0.0);
        for (int i = 0; i < n_in; ++i)
            cum[i + 1] = cum[i] + dist(pts[i], pts[(i + 1) % n_in]);
        int seg = 0;
        for (int j = 0; j < target; ++j) {
            const double s = total * j / target;
            while (seg + 1 < n_in && cum[seg + 1] <= s) ++seg;
            const double len = cum[seg + 1] - cum[seg];
            const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
            out.push_back(pts[seg] + t * (pts[(seg + 1) % n_in] - pts[seg]));
        }
    } else {
        for (int i = 0; i < n_in; ++i) {
            const Vec2 a = pts[i];
            const Vec2 b = pts[(i + 1) % n_in];
            const int pieces = std::max(1, static_cast<int>(std::ceil(dist(a, b) / spacing)));
            for (int k = 0; k < pieces; ++k) out.push_back(a + (b - a) * (static_cast<double>(k) / pieces));
        }
    }
    return out;
}

}  // namespace detail

/// Triangulate the fluid region between the cell boundary and the hole
/// polylines. Holes with polygon area below 10*h^2 are dropped (recorded in
/// dropped_holes); a hole within 1e-9 of the cell boundary raises MeshError,
/// which callers interpret as a clogged cell.
inline CellMesh triangulate_perforated_cell(const std::vector<OffsetCurve>& holes, double h) {
    if (!(h > 0.0)) throw ValidationError("mesh size h must be positive");
    CellMesh mesh;
    mesh.h = h;

    std::vector<std::vector<Vec2>> polys;       // resampled hole boundaries
    std::vector<int> poly_hole;                 // original hole index per polygon
    for (int k = 0; k < static_cast<int>(holes.size()); ++k) {
        const auto& samples = holes[k].samples;
        if (samples.size() < 3) throw ValidationError("hole polyline needs at least 3 points");
        if (std::abs(signed_area(samples)) < 10.0 * h * h) {
            mesh.dropped_holes.push_back(k);
            continue;
        }
        for (const Vec2& p : samples)
            if (cell_clearance(p) <= 1e-9)
                throw MeshError("hole touches the cell boundary (clogged cell)");
        polys.push_back(detail::resample_closed(samples, h));
        poly_hole.push_back(k);
    }

    detail::Triangulator tr;
    tr.init({0.0, 0.0}, {1.0, 1.0});
    tr.min_angle_deg = 20.0;
    tr.max_circumradius = h;
    tr.set_grid_cell(h);
    tr.in_domain = [&polys](Vec2 p) {
        if (!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0)) return false;
        for (const auto& poly : polys)
            if (point_in_polygon(p, poly)) return false;
        return true;
    };

    // outer ring: identical subdivision on all four edges so opposite-edge
    // vertices mirror exactly
    const int n_edge = std::max(1, static_cast<int>(std::ceil(1.0 / h - 1e-12)));
    const int c00 = tr.insert_vertex({0.0, 0.0});
    const int c10 = tr.insert_vertex({1.0, 0.0});
    const int c11 = tr.insert_vertex({1.0, 1.0});
    const int c01 = tr.insert_vertex({0.0, 1.0});
    std::vector<int> bottom{c00}, top{c01}, left{c00}, right{c10};
    for (int i = 1; i < n_edge; ++i) {
        const double t = static_cast<double>(i) / n_edge;
        bottom.push_back(tr.insert_vertex({t, 0.0}));
        top.push_back(tr.insert_vertex({t, 1.0}));
        left.push_back(tr.insert_vertex({0.0, t}));
        right.push_back(tr.insert_vertex({1.0, t}));
    }
    bottom.push_back(c10);
    top.push_back(c11);
    left.push_back(c01);
    right.push_back(c11);
    for (std::size_t i = 0; i < bottom.size(); ++i) {
        tr.mirror_pairs.emplace_back(left[i], right[i]);
        tr.mirror_pairs.emplace_back(bottom[i], top[i]);
    }
    constexpr int kTagLeft = 0, kTagRight = 1, kTagBottom = 2, kTagTop = 3, kTagHole = 4;
    for (int i = 0; i < n_edge; ++i) {
        const int sb = tr.add_segment(bottom[i], bottom[i + 1], kTagBottom, 1);
        const int st = tr.add_segment(top[i], top[i + 1], kTagTop, 1);
        tr.link_partners(sb, st);
        const int sl = tr.add_segment(left[i], left[i + 1], kTagLeft, 0);
        const int sr = tr.add_segment(right[i], right[i + 1], kTagRight, 0);
        tr.link_partners(sl, sr);
    }

    for (std::size_t pk = 0; pk < polys.size(); ++pk) {
        std::vector<int> ids;
        ids.reserve(polys[pk].size());
        for (const Vec2& p : polys[pk]) ids.push_back(tr.insert_vertex(p));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const int a = ids[i];
            const int b = ids[(i + 1) % ids.size()];
            if (a != b) tr.add_segment(a, b, kTagHole + static_cast<int>(pk), -1);
        }
    }

    tr.recover_segments();
    tr.refine();

    // extract fluid triangles
    std::vector<int> kept;
    for (int t = 0; t < static_cast<int>(tr.tris.size()); ++t)
        if (tr.tris[t].alive && tr.in_domain(tr.centroid(t))) kept.push_back(t);
    if (kept.empty()) throw MeshError("triangulation produced no fluid triangles");

    std::unordered_map<int, int> remap;
    for (const int t : kept)
        for (int i = 0; i < 3; ++i) {
            const int v = tr.tris[t].v[i];
            if (remap.emplace(v, static_cast<int>(remap.size())).second)
                mesh.vertices.push_back(tr.pts[v]);
        }
    mesh.triangles.reserve(kept.size());
    std::unordered_map<std::uint64_t, int> edge_count;
    struct OrientedEdge { int a, b, tri; };
    std::unordered_map<std::uint64_t, OrientedEdge> edge_info;
    for (const int t : kept) {
        const auto& tt = tr.tris[t];
        const std::array<int, 3> tri{remap[tt.v[0]], remap[tt.v[1]], remap[tt.v[2]]};
        const int id = static_cast<int>(mesh.triangles.size());
        mesh.triangles.push_back(tri);
        if (!(mesh.triangle_area(id) > 0.0)) throw MeshError("non-positive triangle orientation");
        for (int i = 0; i < 3; ++i) {
            const int a = tt.v[(i + 1) % 3];
            const int b = tt.v[(i + 2) % 3];
            const auto key = detail::edge_key(a, b);
            edge_count[key] += 1;
            edge_info[key] = {a, b, id};  // oriented as traversed in this triangle
        }
    }
    for (const auto& [key, count] : edge_count) {
        if (count == 1) {
            const auto info = edge_info[key];
            CellMesh::BoundaryEdge be;
            be.a = remap[info.a];
            be.b = remap[info.b];
            be.tri = info.tri;
            const int s = tr.segment_of_edge(info.a, info.b);
            const int tag = s >= 0 ? tr.segs[s].tag : -1;
            switch (tag) {
                case kTagLeft: be.tag = CellMesh::BoundaryTag::Left; break;
                case kTagRight: be.tag = CellMesh::BoundaryTag::Right; break;
                case kTagBottom: be.tag = CellMesh::BoundaryTag::Bottom; break;
                case kTagTop: be.tag = CellMesh::BoundaryTag::Top; break;
                default:
                    if (tag < kTagHole) throw MeshError("untagged boundary edge");
                    be.tag = CellMesh::BoundaryTag::Inner;
                    be.hole = poly_hole[static_cast<std::size_t>(tag - kTagHole)];
            }
            mesh.boundary_edges.push_back(be);
        } else if (count != 2) {
            throw MeshError("non-conforming triangulation");
        }
    }
    for (const auto& [u, v] : tr.mirror_pairs) {
        const auto iu = remap.find(u);
        const auto iv = remap.find(v);
        if (iu == remap.end() || iv == remap.end())
            throw MeshError("periodic boundary vertex missing from the fluid mesh");
        mesh.periodic_pairs.emplace_back(iu->second, iv->second);
    }

    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
        const double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
        auto ang = [](double opp, double s1, double s2) {
            return std::acos(std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0));
        };
        const double amin = std::min({ang(la, lb, lc), ang(lb, lc, la), ang(lc, la, lb)}) * 180.0 / kPi;
        if (amin < 20.0 - 1e-9) throw MeshError("triangle below the 20 degree angle bound");
    }
    return mesh;
}

// ---------------------------------------------------------------------------
// Plain-text mesh export (debugging and golden tests)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_mesh(std::ostream& os, const CellMesh& mesh) {
    os << "vertices " << mesh.vertices.size() << "\n";
    for (const Vec2& p : mesh.vertices)
        os << detail::fmt_g17(p.x) << " " << detail::fmt_g17(p.y) << "\n";
    os << "triangles " << mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "pairs " << mesh.periodic_pairs.size() << "\n";
    for (const auto& [a, b] : mesh.periodic_pairs) os << a << " " << b << "\n";
}

inline CellMesh read_mesh(std::istream& is) {
    CellMesh mesh;
    std::string word;
    std::size_t n = 0;
    if (!(is >> word >> n) || word != "vertices") throw ConfigError("mesh file: expected 'vertices N'");
    mesh.vertices.resize(n);
    for (auto& p : mesh.vertices)
        if (!(is >> p.x >> p.y)) throw ConfigError("mesh file: truncated vertex list");
    if (!(is >> word >> n) || word != "triangles") throw ConfigError("mesh file: expected 'triangles M'");
    mesh.triangles.resize(n);
    for (auto& t : mesh.triangles)
        if (!(is >> t[0] >> t[1] >> t[2])) throw ConfigError("mesh file: truncated triangle list");
    if (!(is >> word >> n) || word != "pairs") throw ConfigError("mesh file: expected 'pairs P'");
    mesh.periodic_pairs.resize(n);
    for (auto& pr : mesh.periodic_pairs)
        if (!(is >> pr.first >> pr.second)) throw ConfigError("mesh file: truncated pair list");
    return mesh;
}

}  // namespace clogsim
