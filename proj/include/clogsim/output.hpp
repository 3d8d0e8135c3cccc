#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "clogsim/cell_mesh.hpp"
#include "clogsim/macro_mesh.hpp"
#include "clogsim/model.hpp"

namespace clogsim {

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);  // binary: byte-identical across platforms
    if (!os) throw ConfigError("cannot open output file: " + path.string());
    return os;
}

}  // namespace detail

/// Frame file name for a snapshot time, e.g. frame_t0.8500.csv.
inline std::string frame_file_name(double t) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "frame_t%.4f.csv", t);
    return buf;
}

inline void write_snapshot_csv(std::ostream& os, const MacroMesh& mesh, const MacroState& state) {
    const int N = static_cast<int>(state.u.size());
    os << "x,y";
    for (int i = 1; i <= N; ++i) os << ",u" << i;
    os << ",v,sigma,clogged,clog_time\n";
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        os << detail::fmt_g17(mesh.vertices[v].x) << ',' << detail::fmt_g17(mesh.vertices[v].y);
        for (int i = 0; i < N; ++i) os << ',' << detail::fmt_g17(state.u[static_cast<std::size_t>(i)][v]);
        os << ',' << detail::fmt_g17(state.v[v]) << ',' << detail::fmt_g17(state.sigma[v]) << ','
           << (state.clogged[v] ? 1 : 0) << ',' << detail::fmt_g17(state.clog_time[v]) << "\n";
    }
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    if (rows.empty()) return;
    const std::size_t N = rows.front().min_u.size();
    os << "t,clogged_fraction";
    for (std::size_t i = 1; i <= N; ++i) os << ",min_u" << i << ",max_u" << i;
    os << ",total_mass\n";
    for (const auto& r : rows) {
        os << detail::fmt_g17(r.t) << ',' << detail::fmt_g17(r.clogged_fraction);
        for (std::size_t i = 0; i < N; ++i)
            os << ',' << detail::fmt_g17(r.min_u[i]) << ',' << detail::fmt_g17(r.max_u[i]);
        os << ',' << detail::fmt_g17(r.total_mass) << "\n";
    }
}

/// Rasterize a P1 vertex field to an ASCII portable graymap. Pixels outside
/// the domain are black; the field range maps to [1, 255].
inline void write_pgm(std::ostream& os, const MacroMesh& mesh, const std::vector<double>& field,
                      int width = 256) {
    Vec2 lo = mesh.vertices[0], hi = mesh.vertices[0];
    for (const Vec2& p : mesh.vertices) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    const double span = std::max(hi.x - lo.x, hi.y - lo.y);
    const int height = std::max(1, static_cast<int>(std::lround(width * (hi.y - lo.y) / span)));
    const int pxw = std::max(1, static_cast<int>(std::lround(width * (hi.x - lo.x) / span)));
    double fmin = field[0], fmax = field[0];
    for (const double f : field) {
        fmin = std::min(fmin, f);
        fmax = std::max(fmax, f);
    }
    const double frange = fmax > fmin ? fmax - fmin : 1.0;
    std::vector<int> img(static_cast<std::size_t>(pxw) * static_cast<std::size_t>(height), 0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
        const double area = orient2d(a, b, c);
        const double xmin = std::min({a.x, b.x, c.x}), xmax = std::max({a.x, b.x, c.x});
        const double ymin = std::min({a.y, b.y, c.y}), ymax = std::max({a.y, b.y, c.y});
        const int i0 = std::max(0, static_cast<int>((xmin - lo.x) / span * width));
        const int i1 = std::min(pxw - 1, static_cast<int>((xmax - lo.x) / span * width) + 1);
        const int j0 = std::max(0, static_cast<int>((ymin - lo.y) / span * width));
        const int j1 = std::min(height - 1, static_cast<int>((ymax - lo.y) / span * width) + 1);
        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) {
                const Vec2 p{lo.x + (i + 0.5) * span / width, lo.y + (j + 0.5) * span / width};
                const double l0 = orient2d(p, b, c) / area;
                const double l1 = orient2d(a, p, c) / area;
                const double l2 = orient2d(a, b, p) / area;
                if (l0 < -1e-12 || l1 < -1e-12 || l2 < -1e-12) continue;
                const double f = l0 * field[tri[0]] + l1 * field[tri[1]] + l2 * field[tri[2]];
                const int g = 1 + static_cast<int>(254.0 * (f - fmin) / frange);
                img[static_cast<std::size_t>(height - 1 - j) * static_cast<std::size_t>(pxw) + i] =
                    std::clamp(g, 1, 255);
            }
        }
    }
    os << "P2\n" << pxw << " " << height << "\n255\n";
    for (int j = 0; j < height; ++j) {
        for (int i = 0; i < pxw; ++i)
            os << img[static_cast<std::size_t>(j) * static_cast<std::size_t>(pxw) + i]
               << (i + 1 == pxw ? '\n' : ' ');
    }
}

}  // namespace clogsim
