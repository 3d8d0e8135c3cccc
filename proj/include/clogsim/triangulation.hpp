#pragma once

// Incremental Delaunay triangulation with constrained segments, Ruppert-style
// quality/size refinement, and mirrored splitting of paired boundary segments
// (keeps the periodic vertex pairing of the unit cell exact by construction).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clogsim/core.hpp"

namespace clogsim::detail {

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

class Triangulator {
public:
    struct Tri {
        int v[3];    // CCW vertex ids
        int adj[3];  // neighbor across the edge opposite v[i], -1 on the hull
        bool alive = false;
    };

    struct Seg {
        int a = -1, b = -1;  // endpoints, consistent parameter order on paired edges
        int partner = -1;    // mirrored segment on the opposite cell edge
        int tag = -1;        // caller-defined boundary tag
        int axis = -1;       // 0: x=0 <-> x=1 mirror, 1: y=0 <-> y=1 mirror
        bool alive = false;
    };

    // configuration
    double min_angle_deg = 20.0;
    double max_circumradius = std::numeric_limits<double>::infinity();
    std::function<bool(Vec2)> in_domain;  // classification of interior points
    std::size_t max_vertices = 1500000;

    std::vector<Vec2> pts;
    std::vector<Tri> tris;
    std::vector<Seg> segs;
    std::vector<std::pair<int, int>> mirror_pairs;  // (vertex, mirrored vertex)

    void init(Vec2 lo, Vec2 hi) {
        const double w = std::max({hi.x - lo.x, hi.y - lo.y, 1.0});
        eps_dist_ = 1e-12 * w;
        const Vec2 pad{10.0 * w, 10.0 * w};
        const Vec2 a = lo - pad, c = hi + pad;
        pts = {a, {c.x, a.y}, c, {a.x, c.y}};
        vtri_ = {0, 0, 1, 1};
        shell_of_ = {-1, -1, -1, -1};
        tris.clear();
        tris.push_back({{0, 1, 2}, {-1, 1, -1}, true});
        tris.push_back({{0, 2, 3}, {-1, -1, 0}, true});
        grid_cell_ = w;
    }

    /// Bucket size of the segment grid; must be >= the longest segment.
    void set_grid_cell(double cell) { grid_cell_ = std::max(cell, 1e-9); }

    int insert_vertex(Vec2 p) {
        if (pts.size() >= max_vertices) throw MeshError("triangulation vertex budget exceeded");
        int edge = -1;
        const int t = locate(p, hint_, &edge);
        for (int k = 0; k < 3; ++k) {
            const int v = tris[t].v[k];
            if (dist(pts[v], p) < eps_dist_) return v;  // coincident
        }
        const int nv = new_vertex(p);
        if (edge >= 0)
            split_on_edge(t, edge, nv);
        else
            split_interior(t, nv);
        hint_ = vtri_[nv];
        return nv;
    }

    int add_segment(int a, int b, int tag, int axis = -1, int partner = -1) {
        const int id = static_cast<int>(segs.size());
        segs.push_back({a, b, partner, tag, axis, true});
        seg_by_edge_[edge_key(a, b)] = id;
        grid_insert(id);
        return id;
    }

    void link_partners(int s1, int s2) {
        segs[s1].partner = s2;
        segs[s2].partner = s1;
    }

    void mark_sharp(int v) { sharp_.insert(v); }

    /// Split constrained segments until each is an edge of the triangulation.
    void recover_segments() {
        bool again = true;
        int rounds = 0;
        while (again) {
            if (++rounds > 64) throw MeshError("segment recovery did not converge");
            again = false;
            for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
                if (!segs[s].alive) continue;
                if (!edge_exists(segs[s].a, segs[s].b)) {
                    split_segment(s);
                    again = true;
                }
            }
        }
    }

    /// Ruppert refinement: split encroached segments, then insert circumcenters
    /// of skinny or oversized triangles inside the domain.
    void refine() {
        for (int s = 0; s < static_cast<int>(segs.size()); ++s)
            if (segs[s].alive && seg_encroached(s)) seg_queue_.push_back(s);
        process_segment_queue();
        for (int t = 0; t < static_cast<int>(tris.size()); ++t)
            if (tris[t].alive) tri_queue_.push_back(t);
        std::size_t stall_guard = 0;
        while (!tri_queue_.empty()) {
            const int t = tri_queue_.front();
            tri_queue_.pop_front();
            if (!tris[t].alive || !is_bad(t)) continue;
            if (++stall_guard > 64 * max_vertices) throw MeshError("refinement did not terminate");
            const Vec2 c = circumcenter(t);
            const int enc = find_encroached_by_point(c);
            if (enc >= 0) {
                // reject the circumcenter, split the encroached segment instead
                force_split(enc);
                process_segment_queue();
                tri_queue_.push_back(t);
                continue;
            }
            if (!in_domain || !in_domain(c)) {
                const int near = nearest_segment(c);
                if (near >= 0 && seg_splittable(near)) {
                    force_split(near);
                    process_segment_queue();
                    tri_queue_.push_back(t);
                }
                continue;
            }
            touched_.clear();
            const int nv = insert_vertex(c);
            queue_touched();
            enqueue_encroached_around(nv);
            process_segment_queue();
        }
    }

    bool edge_constrained(int a, int b) const { return seg_by_edge_.count(edge_key(a, b)) > 0; }

    int segment_of_edge(int a, int b) const {
        const auto it = seg_by_edge_.find(edge_key(a, b));
        return it == seg_by_edge_.end() ? -1 : it->second;
    }

    double min_angle_of(int t) const {
        const Vec2 a = pts[tris[t].v[0]], b = pts[tris[t].v[1]], c = pts[tris[t].v[2]];
        const double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
        auto ang = [](double opp, double s1, double s2) {
            return std::acos(std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0));
        };
        return std::min({ang(la, lb, lc), ang(lb, lc, la), ang(lc, la, lb)}) * 180.0 / kPi;
    }

    Vec2 centroid(int t) const {
        return (pts[tris[t].v[0]] + pts[tris[t].v[1]] + pts[tris[t].v[2]]) / 3.0;
    }

private:
    std::vector<int> vtri_;      // an alive incident triangle per vertex
    std::vector<int> shell_of_;  // sharp vertex whose split shells this vertex lies on
    std::unordered_map<std::uint64_t, int> seg_by_edge_;
    std::unordered_map<std::int64_t, std::vector<int>> seg_grid_;
    std::unordered_set<int> sharp_;
    std::deque<int> seg_queue_;
    std::deque<int> tri_queue_;
    std::vector<int> touched_;
    double eps_dist_ = 1e-12;
    double grid_cell_ = 1.0;
    int hint_ = 0;

    int new_vertex(Vec2 p) {
        pts.push_back(p);
        vtri_.push_back(-1);
        shell_of_.push_back(-1);
        return static_cast<int>(pts.size()) - 1;
    }

    std::int64_t grid_key_of(double x, double y) const {
        const auto gx = static_cast<std::int64_t>(std::floor(x / grid_cell_));
        const auto gy = static_cast<std::int64_t>(std::floor(y / grid_cell_));
        return gx * 1000003 + gy;
    }

    void grid_insert(int s) {
        const Vec2 m = (pts[segs[s].a] + pts[segs[s].b]) * 0.5;
        seg_grid_[grid_key_of(m.x, m.y)].push_back(s);
    }

    template <class F>
    void for_segs_near(Vec2 p, F&& f) const {
        const auto gx = static_cast<std::int64_t>(std::floor(p.x / grid_cell_));
        const auto gy = static_cast<std::int64_t>(std::floor(p.y / grid_cell_));
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                const auto it = seg_grid_.find((gx + dx) * 1000003 + (gy + dy));
                if (it == seg_grid_.end()) continue;
                for (const int s : it->second)
                    if (segs[s].alive) f(s);
            }
    }

    static double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
        const double adx = a.x - d.x, ady = a.y - d.y;
        const double bdx = b.x - d.x, bdy = b.y - d.y;
        const double cdx = c.x - d.x, cdy = c.y - d.y;
        const double ad2 = adx * adx + ady * ady;
        const double bd2 = bdx * bdx + bdy * bdy;
        const double cd2 = cdx * cdx + cdy * cdy;
        return adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) +
               ad2 * (bdx * cdy - cdx * bdy);
    }

    int locate(Vec2 p, int start, int* edge_out) {
        int t = (start >= 0 && start < static_cast<int>(tris.size()) && tris[start].alive)
                    ? start
                    : first_alive();
        std::size_t steps = 0;
        const std::size_t cap = 4 * tris.size() + 64;
        while (true) {
            if (++steps > cap) {
                t = exhaustive_locate(p);
                break;
            }
            int worst = -1;
            double worst_d = -eps_dist_;
            for (int i = 0; i < 3; ++i) {
                const Vec2 a = pts[tris[t].v[(i + 1) % 3]];
                const Vec2 b = pts[tris[t].v[(i + 2) % 3]];
                const double len = std::max(dist(a, b), 1e-300);
                const double d = orient2d(a, b, p) / len;
                if (d < worst_d) {
                    worst_d = d;
                    worst = i;
                }
            }
            if (worst < 0) break;
            const int next = tris[t].adj[worst];
            if (next < 0) throw MeshError("point located outside the triangulation hull");
            t = next;
        }
        *edge_out = -1;
        double best = eps_dist_;
        for (int i = 0; i < 3; ++i) {
            const Vec2 a = pts[tris[t].v[(i + 1) % 3]];
            const Vec2 b = pts[tris[t].v[(i + 2) % 3]];
            const double len = std::max(dist(a, b), 1e-300);
            const double d = std::abs(orient2d(a, b, p)) / len;
            if (d < best) {
                best = d;
                *edge_out = i;
            }
        }
        return t;
    }

    int first_alive() const {
        for (int t = 0; t < static_cast<int>(tris.size()); ++t)
            if (tris[t].alive) return t;
        throw MeshError("empty triangulation");
    }

    int exhaustive_locate(Vec2 p) const {
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            if (!tris[t].alive) continue;
            bool inside = true;
            for (int i = 0; i < 3 && inside; ++i) {
                const Vec2 a = pts[tris[t].v[(i + 1) % 3]];
                const Vec2 b = pts[tris[t].v[(i + 2) % 3]];
                if (orient2d(a, b, p) < -eps_dist_ * std::max(dist(a, b), 1e-300)) inside = false;
            }
            if (inside) return t;
        }
        throw MeshError("point location failed");
    }

    int alloc_tri() {
        tris.push_back({{-1, -1, -1}, {-1, -1, -1}, true});
        return static_cast<int>(tris.size()) - 1;
    }

    void set_tri(int t, int v0, int v1, int v2, int a0, int a1, int a2) {
        tris[t] = {{v0, v1, v2}, {a0, a1, a2}, true};
        vtri_[v0] = vtri_[v1] = vtri_[v2] = t;
        touched_.push_back(t);
    }

    void repoint(int t, int from, int to) {
        if (t < 0) return;
        for (int i = 0; i < 3; ++i)
            if (tris[t].adj[i] == from) {
                tris[t].adj[i] = to;
                return;
            }
    }

    void split_interior(int t, int p) {
        const int a = tris[t].v[0], b = tris[t].v[1], c = tris[t].v[2];
        const int A = tris[t].adj[0], B = tris[t].adj[1], C = tris[t].adj[2];
        const int t2 = alloc_tri();
        const int t3 = alloc_tri();
        set_tri(t, a, b, p, t2, t3, C);
        set_tri(t2, b, c, p, t3, t, A);
        set_tri(t3, c, a, p, t, t2, B);
        repoint(A, t, t2);
        repoint(B, t, t3);
        legalize(t, 2, p);
        legalize(t2, 2, p);
        legalize(t3, 2, p);
    }

    void split_on_edge(int t, int edge, int p) {
        const int it = edge;  // vertex opposite the split edge in t
        const int x = tris[t].v[it];
        const int a = tris[t].v[(it + 1) % 3];
        const int b = tris[t].v[(it + 2) % 3];
        const int X1 = tris[t].adj[(it + 1) % 3];  // across (b, x)
        const int X2 = tris[t].adj[(it + 2) % 3];  // across (x, a)
        const int o = tris[t].adj[it];
        if (o < 0) {
            const int t2 = alloc_tri();
            set_tri(t, x, a, p, -1, t2, X2);
            set_tri(t2, x, p, b, -1, X1, t);
            repoint(X1, t, t2);
            legalize(t, 2, p);
            legalize(t2, 1, p);
            return;
        }
        int jo = -1;
        for (int i = 0; i < 3; ++i)
            if (tris[o].adj[i] == t) jo = i;
        if (jo < 0) throw MeshError("inconsistent adjacency");
        const int y = tris[o].v[jo];
        const int Y1 = tris[o].adj[(jo + 1) % 3];  // across (a, y)
        const int Y2 = tris[o].adj[(jo + 2) % 3];  // across (y, b)
        const int t2 = alloc_tri();
        const int o2 = alloc_tri();
        set_tri(t, x, a, p, o2, t2, X2);
        set_tri(t2, x, p, b, o, X1, t);
        set_tri(o, y, b, p, t2, o2, Y2);
        set_tri(o2, y, p, a, t, Y1, o);
        repoint(X1, t, t2);
        repoint(Y1, o, o2);
        legalize(t, 2, p);
        legalize(t2, 1, p);
        legalize(o, 2, p);
        legalize(o2, 1, p);
    }

    // Lawson legalization of the edge opposite index ip (vertex p) in t.
    void legalize(int t, int ip, int p) {
        const int a = tris[t].v[(ip + 1) % 3];
        const int b = tris[t].v[(ip + 2) % 3];
        const int o = tris[t].adj[ip];
        if (o < 0 || edge_constrained(a, b)) return;
        int jo = -1;
        for (int i = 0; i < 3; ++i)
            if (tris[o].adj[i] == t) jo = i;
        if (jo < 0) throw MeshError("inconsistent adjacency");
        const int d = tris[o].v[jo];
        if (incircle(pts[p], pts[a], pts[b], pts[d]) <= 0.0) return;
        if (orient2d(pts[p], pts[a], pts[d]) <= 0.0 || orient2d(pts[p], pts[d], pts[b]) <= 0.0)
            return;  // quad not strictly convex
        const int X = tris[t].adj[(ip + 1) % 3];  // across (b, p)
        const int Y = tris[t].adj[(ip + 2) % 3];  // across (p, a)
        const int W = tris[o].adj[(jo + 1) % 3];  // across (a, d)
        const int Z = tris[o].adj[(jo + 2) % 3];  // across (d, b)
        set_tri(t, p, a, d, W, o, Y);
        set_tri(o, p, d, b, Z, X, t);
        repoint(W, o, t);
        repoint(X, t, o);
        legalize(t, 0, p);
        legalize(o, 0, p);
    }

    int index_of(int t, int v) const {
        for (int i = 0; i < 3; ++i)
            if (tris[t].v[i] == v) return i;
        return -1;
    }

    int valid_incident(int v) {
        int t0 = vtri_[v];
        if (t0 >= 0 && tris[t0].alive && index_of(t0, v) >= 0) return t0;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t)
            if (tris[t].alive && index_of(t, v) >= 0) {
                vtri_[v] = t;
                return t;
            }
        return -1;
    }

    template <class F>
    void around_vertex(int v, F&& visit) {
        const int t0 = valid_incident(v);
        if (t0 < 0) return;
        int t = t0;
        std::size_t guard = 0;
        while (true) {
            visit(t);
            const int iv = index_of(t, v);
            const int next = tris[t].adj[(iv + 1) % 3];
            if (next < 0) break;
            t = next;
            if (t == t0) return;
            if (++guard > tris.size()) return;
        }
        t = t0;
        guard = 0;
        while (true) {
            const int iv = index_of(t, v);
            const int next = tris[t].adj[(iv + 2) % 3];
            if (next < 0) return;
            t = next;
            visit(t);
            if (++guard > tris.size()) return;
        }
    }

    bool edge_exists(int a, int b) {
        bool found = false;
        around_vertex(a, [&](int t) {
            if (index_of(t, b) >= 0) found = true;
        });
        return found;
    }

    bool seg_encroached(int s) {
        const int a = segs[s].a, b = segs[s].b;
        if (!edge_exists(a, b)) return true;
        const Vec2 m = (pts[a] + pts[b]) * 0.5;
        const double r2 = norm2(pts[b] - pts[a]) * 0.25;
        bool enc = false;
        around_vertex(a, [&](int t) {
            const int ib = index_of(t, b);
            if (ib < 0) return;
            const int apex = tris[t].v[3 - ib - index_of(t, a)];
            if (norm2(pts[apex] - m) < r2 * (1.0 - 1e-12)) enc = true;
        });
        return enc;
    }

    int find_encroached_by_point(Vec2 c) const {
        int found = -1;
        for_segs_near(c, [&](int s) {
            if (found >= 0) return;
            const Vec2 a = pts[segs[s].a], b = pts[segs[s].b];
            const Vec2 m = (a + b) * 0.5;
            if (norm2(c - m) < norm2(b - a) * 0.25 * (1.0 - 1e-12)) found = s;
        });
        return found;
    }

    int nearest_segment(Vec2 c) const {
        int best = -1;
        double bestd = std::numeric_limits<double>::infinity();
        for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
            if (!segs[s].alive) continue;
            const Vec2 a = pts[segs[s].a], b = pts[segs[s].b];
            const Vec2 ab = b - a;
            const double t = std::clamp(dot(c - a, ab) / std::max(norm2(ab), 1e-300), 0.0, 1.0);
            const double d = norm2(c - (a + t * ab));
            if (d < bestd) {
                bestd = d;
                best = s;
            }
        }
        return best;
    }

    bool seg_splittable(int s) const {
        return norm2(pts[segs[s].b] - pts[segs[s].a]) > 1e-20;
    }

    void force_split(int s) {
        if (segs[s].alive && seg_splittable(s)) split_segment(s);
    }

    void enqueue_encroached_around(int v) {
        for_segs_near(pts[v], [&](int s) {
            if (segs[s].a == v || segs[s].b == v) return;
            const Vec2 a = pts[segs[s].a], b = pts[segs[s].b];
            const Vec2 m = (a + b) * 0.5;
            if (norm2(pts[v] - m) < norm2(b - a) * 0.25 * (1.0 - 1e-12)) seg_queue_.push_back(s);
        });
    }

    void process_segment_queue() {
        while (!seg_queue_.empty()) {
            const int s = seg_queue_.front();
            seg_queue_.pop_front();
            if (!segs[s].alive) continue;
            if (!seg_encroached(s)) continue;
            if (!seg_splittable(s)) continue;
            split_segment(s);
        }
    }

    Vec2 split_point(const Seg& s) const {
        const Vec2 a = pts[s.a], b = pts[s.b];
        const bool a_sharp = sharp_.count(s.a) > 0 || shell_of_[s.a] >= 0;
        const bool b_sharp = sharp_.count(s.b) > 0 || shell_of_[s.b] >= 0;
        if (a_sharp == b_sharp) return (a + b) * 0.5;
        // concentric-shell split off the sharp endpoint; stops encroachment
        // ping-pong around small input angles
        const Vec2 from = a_sharp ? a : b;
        const Vec2 to = a_sharp ? b : a;
        const double len = dist(from, to);
        double d = std::exp2(std::round(std::log2(0.5 * len)));
        d = std::clamp(d, 0.25 * len, 0.75 * len);
        return from + (to - from) * (d / len);
    }

    void split_segment(int s) {
        const Seg seg = segs[s];
        const Vec2 m = split_point(seg);
        kill_segment(s);
        touched_.clear();
        const int mv = insert_vertex(m);
        queue_touched();
        const int sa = sharp_.count(seg.a) > 0 ? seg.a : shell_of_[seg.a];
        const int sb = sharp_.count(seg.b) > 0 ? seg.b : shell_of_[seg.b];
        if (sa >= 0 && sb < 0) shell_of_[mv] = sa;
        if (sb >= 0 && sa < 0) shell_of_[mv] = sb;
        const int left = add_segment(seg.a, mv, seg.tag, seg.axis);
        const int right = add_segment(mv, seg.b, seg.tag, seg.axis);
        if (seg.partner >= 0 && segs[seg.partner].alive) {
            const Seg par = segs[seg.partner];
            // mirrored coordinate: identical free coordinate, flipped fixed one
            const Vec2 pm = seg.axis == 0 ? Vec2{pts[par.a].x, m.y} : Vec2{m.x, pts[par.a].y};
            kill_segment(seg.partner);
            touched_.clear();
            const int pmv = insert_vertex(pm);
            queue_touched();
            const int pleft = add_segment(par.a, pmv, par.tag, par.axis, left);
            const int pright = add_segment(pmv, par.b, par.tag, par.axis, right);
            segs[left].partner = pleft;
            segs[right].partner = pright;
            mirror_pairs.emplace_back(mv, pmv);
            enqueue_encroached_around(pmv);
            seg_queue_.push_back(pleft);
            seg_queue_.push_back(pright);
        }
        enqueue_encroached_around(mv);
        seg_queue_.push_back(left);
        seg_queue_.push_back(right);
    }

    void kill_segment(int s) {
        segs[s].alive = false;
        seg_by_edge_.erase(edge_key(segs[s].a, segs[s].b));
        // stale grid entries are filtered by the alive flag on query
    }

    Vec2 circumcenter(int t) const {
        const Vec2 a = pts[tris[t].v[0]], b = pts[tris[t].v[1]], c = pts[tris[t].v[2]];
        const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
        if (std::abs(d) < 1e-300) return (a + b + c) / 3.0;
        const double a2 = norm2(a), b2 = norm2(b), c2 = norm2(c);
        return {(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
                (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
    }

    bool is_bad(int t) {
        if (!in_domain || !in_domain(centroid(t))) return false;
        const Vec2 a = pts[tris[t].v[0]], b = pts[tris[t].v[1]], c = pts[tris[t].v[2]];
        const double area = 0.5 * std::abs(orient2d(a, b, c));
        const double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
        const double r = la * lb * lc / std::max(4.0 * area, 1e-300);
        if (r > max_circumradius) return true;
        if (min_angle_of(t) >= min_angle_deg) return false;
        // accept "seditious" triangles whose shortest edge spans shells of one
        // sharp corner
        int e0, e1;
        if (la <= lb && la <= lc) { e0 = tris[t].v[1]; e1 = tris[t].v[2]; }
        else if (lb <= lc) { e0 = tris[t].v[2]; e1 = tris[t].v[0]; }
        else { e0 = tris[t].v[0]; e1 = tris[t].v[1]; }
        auto origin = [&](int v) { return sharp_.count(v) > 0 ? v : shell_of_[v]; };
        const int o0 = origin(e0), o1 = origin(e1);
        if (o0 >= 0 && o0 == o1) return false;
        return true;
    }

    void queue_touched() {
        for (const int t : touched_) tri_queue_.push_back(t);
        touched_.clear();
    }
};

}  // namespace clogsim::detail
