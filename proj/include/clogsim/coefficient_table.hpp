#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "clogsim/cell_solver.hpp"
#include "clogsim/geometry.hpp"

namespace clogsim {

inline constexpr char kTableCsvHeader[] = "sigma,D11,D12,D21,D22,A,phi,gamma_len";

struct CoefficientEntry {
    double sigma = 0.0;
    double d11 = 0.0, d12 = 0.0, d21 = 0.0, d22 = 0.0;  // base tensor at d = 1
    double A = 0.0;
    double phi = 1.0;
    double gamma_len = 0.0;
};

/// sigma-sampled effective coefficients for one initial shape, with clamped
/// piecewise-linear interpolation. Species diffusivities scale the stored
/// base tensor at lookup, exploiting its linearity in d_i.
struct CoefficientTable {
    ShapeSpec shape;
    double epsilon = 0.0;
    double h = 0.0;
    double d_base = 1.0;
    bool phi_prefactor = true;
    std::vector<CoefficientEntry> entries;
    bool truncated = false;       // sweep stopped at a meshing failure
    int planned_entries = 0;

    struct Lookup {
        double d11, d12, d21, d22;
        double A, phi;
        bool clogged;
    };

    double sigma_max() const {
        if (entries.empty()) throw ValidationError("lookup on an empty coefficient table");
        return entries.back().sigma;
    }

    /// Smallest tensor eigenvalue over the whole table (the coercivity
    /// constant of the sampled family).
    double coercivity() const {
        double c = std::numeric_limits<double>::infinity();
        for (const auto& e : entries) {
            EffectiveTensor t{e.d11, e.d12, e.d21, e.d22, e.phi, 1.0};
            c = std::min(c, t.min_eigenvalue());
        }
        return c;
    }

    Lookup lookup(double sigma, double d_i) const {
        if (entries.empty()) throw ValidationError("lookup on an empty coefficient table");
        const double last = entries.back().sigma;
        Lookup out{};
        out.clogged = sigma > last;
        const double s = std::clamp(sigma, entries.front().sigma, last);
        auto hi = std::upper_bound(entries.begin(), entries.end(), s,
                                   [](double v, const CoefficientEntry& e) { return v < e.sigma; });
        if (hi == entries.begin()) ++hi;
        if (hi == entries.end()) --hi;
        const CoefficientEntry& e1 = *(hi - 1);
        const CoefficientEntry& e2 = *hi;
        const double span = e2.sigma - e1.sigma;
        const double t = span > 0.0 ? std::clamp((s - e1.sigma) / span, 0.0, 1.0) : 0.0;
        // endpoint-exact: knots return the stored entries bit for bit
        auto lerp = [t](double a, double b) { return (1.0 - t) * a + t * b; };
        out.d11 = d_i * lerp(e1.d11, e2.d11);
        out.d12 = d_i * lerp(e1.d12, e2.d12);
        out.d21 = d_i * lerp(e1.d21, e2.d21);
        out.d22 = d_i * lerp(e1.d22, e2.d22);
        out.A = lerp(e1.A, e2.A);
        out.phi = lerp(e1.phi, e2.phi);
        return out;
    }
};

/// Structural invariants shared by built and reloaded tables.
inline void validate_table(const CoefficientTable& table) {
    if (table.entries.empty()) throw ConfigError("coefficient table has no entries");
    if (table.entries.front().sigma != 0.0)
        throw ConfigError("coefficient table must start at sigma = 0");
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const auto& e = table.entries[i];
        if (!(e.A >= 0.0)) throw ConfigError("coefficient table: negative specific surface");
        if (!(e.phi > 0.0 && e.phi <= 1.0)) throw ConfigError("coefficient table: porosity outside (0,1]");
        EffectiveTensor t{e.d11, e.d12, e.d21, e.d22, e.phi, 1.0};
        if (!(t.min_eigenvalue() > 0.0))
            throw ConfigError("coefficient table: tensor not positive definite");
        const double scale = std::max({std::abs(e.d11), std::abs(e.d22), 1e-30});
        if (std::abs(e.d12 - e.d21) > 1e-8 * scale)
            throw ConfigError("coefficient table: tensor not symmetric");
        if (i > 0) {
            if (!(e.sigma > table.entries[i - 1].sigma))
                throw ConfigError("coefficient table: sigma grid not strictly increasing");
            if (!(e.phi < table.entries[i - 1].phi))
                throw ConfigError("coefficient table: porosity not strictly decreasing");
        }
    }
}

struct TableBuildOptions {
    int n_samples = 512;
    int threads = 1;
    bool phi_prefactor = true;
};

namespace detail {

/// Keep the longest failure-free prefix of the sigma sweep. A failure at the
/// very first entry is fatal; later failures truncate the table.
inline void collect_entries(const std::vector<std::optional<CoefficientEntry>>& slots,
                            const std::vector<std::string>& errors, CoefficientTable& table) {
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) {
            if (i == 0) throw MeshError("coefficient table failed at sigma = 0: " + errors[i]);
            table.truncated = true;
            return;
        }
        table.entries.push_back(*slots[i]);
    }
}

}  // namespace detail

/// Sweep sigma over [0, cap] on a uniform grid of M intervals and compute the
/// effective coefficients of every offset geometry. The cap is sigma_clog for
/// convex bases and min(sigma_clog, sigma_smooth) for non-convex ones. A
/// meshing failure truncates the table at the last successful entry.
inline CoefficientTable build_table(const ShapeSpec& shape, int M, double epsilon, double h,
                                    const TableBuildOptions& opts = {}) {
    if (M < 2) throw ValidationError("table needs at least M = 2 intervals");
    const OffsetCurve base = eval_initial_curve(shape, opts.n_samples);
    const AdmissibleOffset adm = max_admissible_offset(base, epsilon);
    const double cap = is_convex(base.samples) ? adm.sigma_clog
                                               : std::min(adm.sigma_clog, adm.sigma_smooth);
    if (!(cap > 0.0)) throw GeometryError("shape admits no positive offset inside the cell");

    CoefficientTable table;
    table.shape = shape;
    table.epsilon = epsilon;
    table.h = h;
    table.phi_prefactor = opts.phi_prefactor;
    table.planned_entries = M + 1;

    std::vector<std::optional<CoefficientEntry>> slots(static_cast<std::size_t>(M) + 1);
    std::vector<std::string> errors(static_cast<std::size_t>(M) + 1);
    auto worker = [&](int first, int stride) {
        for (int i = first; i <= M; i += stride) {
            const double sigma = cap * i / M;
            try {
                const OffsetCurve curve = offset_curve(base, sigma);
                const GeomQuantities geo = geom_quantities({curve});
                const CellMesh mesh = triangulate_perforated_cell({curve}, h);
                const CellSolution sol = solve_cell_problems(mesh);
                const EffectiveTensor D = effective_tensor(mesh, sol, 1.0, opts.phi_prefactor);
                CoefficientEntry e;
                e.sigma = sigma;
                e.d11 = D.d11;
                e.d12 = D.d12;
                e.d21 = D.d21;
                e.d22 = D.d22;
                e.A = geo.specific_surface;
                e.phi = geo.fluid_area;
                e.gamma_len = geo.gamma_len;
                slots[static_cast<std::size_t>(i)] = e;
            } catch (const std::exception& ex) {
                errors[static_cast<std::size_t>(i)] = ex.what();
            }
        }
    };
    const int threads = std::max(1, opts.threads);
    if (threads == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
        for (auto& th : pool) th.join();
    }

    detail::collect_entries(slots, errors, table);
    validate_table(table);
    return table;
}

inline void write_table_csv(std::ostream& os, const CoefficientTable& table) {
    os << kTableCsvHeader << "\n";
    for (const auto& e : table.entries) {
        os << detail::fmt_g17(e.sigma) << ',' << detail::fmt_g17(e.d11) << ','
           << detail::fmt_g17(e.d12) << ',' << detail::fmt_g17(e.d21) << ','
           << detail::fmt_g17(e.d22) << ',' << detail::fmt_g17(e.A) << ','
           << detail::fmt_g17(e.phi) << ',' << detail::fmt_g17(e.gamma_len) << "\n";
    }
}

/// Reload a table from its CSV artifact. Only the numeric columns are stored
/// in the file; shape metadata stays with the scenario configuration.
inline CoefficientTable read_table_csv(std::istream& is) {
    CoefficientTable table;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("coefficient table CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTableCsvHeader)
        throw ConfigError("coefficient table CSV header mismatch: " + line);
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        CoefficientEntry e;
        char sep = ',';
        row >> e.sigma >> sep >> e.d11 >> sep >> e.d12 >> sep >> e.d21 >> sep >> e.d22 >> sep >>
            e.A >> sep >> e.phi >> sep >> e.gamma_len;
        if (row.fail()) throw ConfigError("coefficient table CSV: malformed row: " + line);
        table.entries.push_back(e);
    }
    table.planned_entries = static_cast<int>(table.entries.size());
    validate_table(table);
    return table;
}

}  // namespace clogsim
