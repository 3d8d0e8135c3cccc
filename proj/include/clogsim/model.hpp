#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "clogsim/core.hpp"

namespace clogsim {

/// Parameters of the coupled N-species reaction-diffusion-sorption model.
struct ModelParams {
    int N = 1;
    std::vector<double> d;    // species diffusivities
    std::vector<double> a;    // deposition rates
    std::vector<double> b;    // dissolution rates
    std::vector<double> u_b;  // Robin inflow values per species
    std::vector<std::vector<double>> gamma;  // symmetric coagulation kernel
    double alpha_v = 1.0;
    double b_r = 1.0;
    double t0 = std::numeric_limits<double>::infinity();  // inflow cutoff time
    double T = 1.0;
    double dt = 1e-3;
    std::vector<double> frame_times;
    double v0 = 0.0;

    // optional hooks used by manufactured-solution and reduction tests
    std::vector<std::function<double(double, double, double)>> extra_source;  // f_i(x, y, t)
    std::vector<std::function<double(double, double)>> initial_u;             // u_i(x, y, 0)

    static ModelParams uniform(int n, double dv, double av, double bv, double gv) {
        ModelParams p;
        p.N = n;
        p.d.assign(static_cast<std::size_t>(n), dv);
        p.a.assign(static_cast<std::size_t>(n), av);
        p.b.assign(static_cast<std::size_t>(n), bv);
        p.u_b.assign(static_cast<std::size_t>(n), 0.0);
        p.gamma.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), gv));
        return p;
    }

    void validate() const {
        if (N < 1) throw ValidationError("model needs at least one species");
        const auto n = static_cast<std::size_t>(N);
        if (d.size() != n || a.size() != n || b.size() != n || u_b.size() != n)
            throw ValidationError("model coefficient vectors must have length N");
        if (gamma.size() != n) throw ValidationError("gamma must be an NxN matrix");
        for (std::size_t i = 0; i < n; ++i) {
            if (gamma[i].size() != n) throw ValidationError("gamma must be an NxN matrix");
            if (d[i] < 0.0 || a[i] < 0.0 || b[i] < 0.0)
                throw ValidationError("rates and diffusivities must be nonnegative");
            for (std::size_t j = 0; j < n; ++j) {
                if (gamma[i][j] < 0.0) throw ValidationError("gamma entries must be nonnegative");
                if (gamma[i][j] != gamma[j][i])
                    throw ValidationError("gamma must be symmetric");
            }
        }
        if (!(dt > 0.0)) throw ValidationError("dt must be positive");
        if (T < 0.0) throw ValidationError("T must be nonnegative");
        if (b_r < 0.0) throw ValidationError("b_r must be nonnegative");
        if (alpha_v < 0.0) throw ValidationError("alpha_v must be nonnegative");
    }
};

/// Per-vertex fields of the macroscopic system at one time.
struct MacroState {
    double t = 0.0;
    std::vector<std::vector<double>> u;  // N x n_vertices
    std::vector<double> v;
    std::vector<double> sigma;
    std::vector<std::uint8_t> clogged;
    std::vector<double> clog_time;  // -1 when not clogged yet
};

struct SummaryRow {
    double t = 0.0;
    double clogged_fraction = 0.0;
    std::vector<double> min_u, max_u;  // per species
    double total_mass = 0.0;           // integral of sum_i i*u_i
};

struct RunResult {
    std::vector<MacroState> frames;
    std::vector<SummaryRow> summary;
    bool dt_warning = false;  // explicit-reaction stability bound violated
};

}  // namespace clogsim
