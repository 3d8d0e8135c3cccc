#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "clogsim/coefficient_table.hpp"
#include "clogsim/macro_mesh.hpp"
#include "clogsim/model.hpp"

namespace clogsim {

/// Truncated Smoluchowski coagulation rates
/// R_i = 1/2 sum_{j+l=i} gamma_jl u_j u_l - u_i sum_{j<=N-i} gamma_ij u_j.
inline void smoluchowski_rates_into(std::span<const double> u,
                                    const std::vector<std::vector<double>>& gamma,
                                    std::span<double> out) {
    const int n = static_cast<int>(u.size());
    for (int i = 1; i <= n; ++i) {
        double gain = 0.0;
        for (int j = 1; j < i; ++j) gain += gamma[j - 1][i - j - 1] * u[j - 1] * u[i - j - 1];
        double loss = 0.0;
        for (int j = 1; j <= n - i; ++j) loss += gamma[i - 1][j - 1] * u[j - 1];
        out[i - 1] = 0.5 * gain - u[i - 1] * loss;
    }
}

inline std::vector<double> smoluchowski_rates(std::span<const double> u,
                                              const std::vector<std::vector<double>>& gamma) {
    std::vector<double> r(u.size(), 0.0);
    smoluchowski_rates_into(u, gamma, r);
    return r;
}

/// Exponential-integrator update of the sorbed mass with u frozen over the
/// step: v' = sum_i a_i u_i - b v with b = sum_i b_i.
inline double v_exact_update(double v, std::span<const double> u_new, const ModelParams& p,
                             double dt) {
    if (!(dt > 0.0)) throw ValidationError("v update needs dt > 0");
    double b = 0.0, forcing = 0.0;
    for (int i = 0; i < p.N; ++i) {
        b += p.b[static_cast<std::size_t>(i)];
        forcing += p.a[static_cast<std::size_t>(i)] * u_new[static_cast<std::size_t>(i)];
    }
    const double factor = (b * dt < 1e-8) ? dt : -std::expm1(-b * dt) / b;
    return std::exp(-b * dt) * v + factor * forcing;
}

/// Initial interface-offset field.
struct SigmaFieldSpec {
    enum class Kind { Uniform, PaperBarrier };
    Kind kind = Kind::Uniform;
    double value = 0.0;                          // Uniform
    double r0 = 0.01, omega = 10.0, scale = 1.0;  // PaperBarrier

    static SigmaFieldSpec uniform(double v) {
        SigmaFieldSpec s;
        s.value = v;
        return s;
    }
    static SigmaFieldSpec paper_barrier(double r0, double omega, double scale = 1.0) {
        SigmaFieldSpec s;
        s.kind = Kind::PaperBarrier;
        s.r0 = r0;
        s.omega = omega;
        s.scale = scale;
        return s;
    }
};

/// Map the long-axis field R_a(x) = scale*max(r0, sin(omega x1 x2))/2 into
/// offset coordinates relative to the table's base radius, clamped to the
/// table range. Sets *clamped when some vertex exceeded the range.
inline std::vector<double> initial_sigma_field(const MacroMesh& mesh, const SigmaFieldSpec& spec,
                                               double r_base, double sigma_cap,
                                               bool* clamped = nullptr) {
    std::vector<double> out(mesh.vertices.size(), 0.0);
    bool warn = false;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        double s0 = 0.0;
        if (spec.kind == SigmaFieldSpec::Kind::Uniform) {
            s0 = spec.value;
        } else {
            const Vec2 p = mesh.vertices[v];
            const double ra = spec.scale * std::max(spec.r0, std::sin(spec.omega * p.x * p.y)) / 2.0;
            s0 = ra - r_base;
        }
        if (s0 < 0.0) s0 = 0.0;
        if (s0 > sigma_cap) {
            s0 = sigma_cap;
            warn = true;
        }
        out[v] = s0;
    }
    if (clamped) *clamped = warn;
    return out;
}

/// One-step integrator for the coupled macroscopic system: the pointwise
/// reaction/exchange/offset subsystem advances with a classical 4th-order
/// rule inside the step, then diffusion with the Robin inflow is taken
/// implicitly (P1 FEM, direct sparse factorization).
class MacroSolver {
public:
    MacroSolver(const MacroMesh& mesh, const ModelParams& params, const CoefficientTable& table)
        : mesh_(mesh), p_(params), table_(table) {
        p_.validate();
        const int nv = static_cast<int>(mesh_.vertices.size());
        elems_.reserve(mesh_.triangles.size());
        for (const auto& tri : mesh_.triangles) {
            Element e;
            const Vec2 p0 = mesh_.vertices[tri[0]];
            const Vec2 p1 = mesh_.vertices[tri[1]];
            const Vec2 p2 = mesh_.vertices[tri[2]];
            e.v = tri;
            e.area = 0.5 * orient2d(p0, p1, p2);
            e.g[0] = perp(p2 - p1) / (2.0 * e.area);
            e.g[1] = perp(p0 - p2) / (2.0 * e.area);
            e.g[2] = perp(p1 - p0) / (2.0 * e.area);
            elems_.push_back(e);
        }
        // lumped mass keeps the implicit diffusion step positivity-preserving
        // on Delaunay meshes
        std::vector<Eigen::Triplet<double>> mt;
        mt.reserve(elems_.size() * 3);
        for (const auto& e : elems_)
            for (int i = 0; i < 3; ++i) mt.emplace_back(e.v[i], e.v[i], e.area / 3.0);
        mass_.resize(nv, nv);
        mass_.setFromTriplets(mt.begin(), mt.end());
        mass_.makeCompressed();
        mass_weights_ = mass_ * Eigen::VectorXd::Ones(nv);
        robin_load_ = Eigen::VectorXd::Zero(nv);
        for (const auto& be : mesh_.boundary_edges) {
            const double len = dist(mesh_.vertices[be.a], mesh_.vertices[be.b]);
            robin_load_[be.a] += 0.5 * len;
            robin_load_[be.b] += 0.5 * len;
        }
        sigma_cap_ = table_.sigma_max();
        pattern_ready_ = false;
    }

    double sigma_cap() const { return sigma_cap_; }
    const CoefficientTable& table() const { return table_; }

    MacroState initial_state(const std::vector<double>& sigma0) const {
        const std::size_t nv = mesh_.vertices.size();
        if (sigma0.size() != nv) throw ValidationError("sigma0 field size mismatch");
        MacroState s;
        s.t = 0.0;
        s.u.assign(static_cast<std::size_t>(p_.N), std::vector<double>(nv, 0.0));
        for (int i = 0; i < p_.N; ++i) {
            if (static_cast<std::size_t>(i) < p_.initial_u.size() && p_.initial_u[static_cast<std::size_t>(i)])
                for (std::size_t v = 0; v < nv; ++v)
                    s.u[static_cast<std::size_t>(i)][v] =
                        p_.initial_u[static_cast<std::size_t>(i)](mesh_.vertices[v].x, mesh_.vertices[v].y);
        }
        s.v.assign(nv, p_.v0);
        s.sigma = sigma0;
        s.clogged.assign(nv, 0);
        s.clog_time.assign(nv, -1.0);
        for (std::size_t v = 0; v < nv; ++v) {
            if (sigma0[v] >= sigma_cap_) {
                s.sigma[v] = sigma_cap_;
                s.clogged[v] = 1;
                s.clog_time[v] = 0.0;
            }
        }
        return s;
    }

    /// Advance the state by one time step dt.
    void step(MacroState& state) {
        const std::size_t nv = mesh_.vertices.size();
        const int N = p_.N;
        const double dt = p_.dt;
        const double t_start = state.t;
        const bool inflow_on = t_start <= p_.t0;

        // stability indicator for the pointwise explicit reactions
        if (!dt_checked_) {
            double worst = 0.0;
            for (std::size_t v = 0; v < nv; ++v) {
                const double A = table_.lookup(state.sigma[v], 1.0).A;
                for (int i = 0; i < N; ++i) {
                    double gsum = 0.0;
                    for (int j = 0; j < N - i - 1; ++j)
                        gsum += p_.gamma[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                                state.u[static_cast<std::size_t>(j)][v];
                    worst = std::max(worst, A * p_.a[static_cast<std::size_t>(i)] + gsum);
                }
            }
            if (dt * worst >= 1.0) dt_warning_ = true;
            dt_checked_ = true;
        }

        // (1) pointwise reaction / exchange / offset subsystem, RK4 in-step
        std::vector<double> u0(static_cast<std::size_t>(N)), pu(static_cast<std::size_t>(N));
        std::vector<double> ku(static_cast<std::size_t>(N)), acc_u(static_cast<std::size_t>(N));
        std::vector<double> rates(static_cast<std::size_t>(N));
        for (std::size_t vx = 0; vx < nv; ++vx) {
            for (int i = 0; i < N; ++i) u0[static_cast<std::size_t>(i)] = state.u[static_cast<std::size_t>(i)][vx];
            const double v0 = state.v[vx];
            const double s0 = state.sigma[vx];
            double acc_v = 0.0, acc_s = 0.0;
            std::fill(acc_u.begin(), acc_u.end(), 0.0);
            double kv = 0.0, ks = 0.0;
            static constexpr double stage_c[4] = {0.0, 0.5, 0.5, 1.0};
            static constexpr double stage_w[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
            pu = u0;
            double pv = v0, ps = s0;
            for (int stage = 0; stage < 4; ++stage) {
                if (stage > 0) {
                    for (int i = 0; i < N; ++i)
                        pu[static_cast<std::size_t>(i)] =
                            u0[static_cast<std::size_t>(i)] + stage_c[stage] * dt * ku[static_cast<std::size_t>(i)];
                    pv = v0 + stage_c[stage] * dt * kv;
                    ps = s0 + stage_c[stage] * dt * ks;
                }
                const double ts = t_start + stage_c[stage] * dt;
                rhs_point(vx, pu, pv, ps, ts, rates, ku, kv, ks);
                for (int i = 0; i < N; ++i)
                    acc_u[static_cast<std::size_t>(i)] += stage_w[stage] * ku[static_cast<std::size_t>(i)];
                acc_v += stage_w[stage] * kv;
                acc_s += stage_w[stage] * ks;
            }
            for (int i = 0; i < N; ++i)
                state.u[static_cast<std::size_t>(i)][vx] = u0[static_cast<std::size_t>(i)] + dt * acc_u[static_cast<std::size_t>(i)];
            state.v[vx] = v0 + dt * acc_v;
            double snew = s0 + dt * acc_s;
            if (state.clogged[vx]) {
                snew = sigma_cap_;  // clogging is absorbing
            } else if (snew >= sigma_cap_) {
                snew = sigma_cap_;
                state.clogged[vx] = 1;
                state.clog_time[vx] = t_start + dt;
            } else if (snew < 0.0) {
                snew = 0.0;
            }
            state.sigma[vx] = snew;
            if (!std::isfinite(state.v[vx]) || !std::isfinite(snew))
                throw SolverError("non-finite sorption state during time stepping");
        }

        // (2) implicit diffusion + Robin inflow per species
        assemble_spatial(state.sigma);
        for (int i = 0; i < N; ++i) {
            const double di = p_.d[static_cast<std::size_t>(i)];
            auto& ui = state.u[static_cast<std::size_t>(i)];
            if (di == 0.0) continue;  // no spatial terms for this species
            Eigen::Map<const Eigen::VectorXd> uvec(ui.data(), static_cast<Eigen::Index>(nv));
            Eigen::VectorXd rhs = mass_ * uvec;
            if (inflow_on && p_.u_b[static_cast<std::size_t>(i)] != 0.0)
                rhs += dt * di * p_.u_b[static_cast<std::size_t>(i)] * robin_load_;
            const Eigen::SparseMatrix<double> system = mass_ + (dt * di) * spatial_;
            if (!pattern_ready_) {
                ldlt_.analyzePattern(system);
                pattern_ready_ = true;
            }
            ldlt_.factorize(system);
            if (ldlt_.info() != Eigen::Success)
                throw SolverError("diffusion factorization failed");
            const Eigen::VectorXd unew = ldlt_.solve(rhs);
            for (std::size_t v = 0; v < nv; ++v) {
                ui[v] = unew[static_cast<Eigen::Index>(v)];
                if (!std::isfinite(ui[v]))
                    throw SolverError("non-finite concentration during time stepping");
            }
        }
        state.t = t_start + dt;
    }

    SummaryRow summary_row(const MacroState& state) const {
        SummaryRow row;
        row.t = state.t;
        const std::size_t nv = mesh_.vertices.size();
        std::size_t nclog = 0;
        for (std::size_t v = 0; v < nv; ++v) nclog += state.clogged[v] ? 1 : 0;
        row.clogged_fraction = static_cast<double>(nclog) / static_cast<double>(nv);
        row.min_u.resize(static_cast<std::size_t>(p_.N));
        row.max_u.resize(static_cast<std::size_t>(p_.N));
        double mass = 0.0;
        for (int i = 0; i < p_.N; ++i) {
            const auto& ui = state.u[static_cast<std::size_t>(i)];
            double lo = ui[0], hi = ui[0], integ = 0.0;
            for (std::size_t v = 0; v < nv; ++v) {
                lo = std::min(lo, ui[v]);
                hi = std::max(hi, ui[v]);
                integ += mass_weights_[static_cast<Eigen::Index>(v)] * ui[v];
            }
            row.min_u[static_cast<std::size_t>(i)] = lo;
            row.max_u[static_cast<std::size_t>(i)] = hi;
            mass += (i + 1) * integ;
        }
        row.total_mass = mass;
        return row;
    }

    /// Advance from t = 0 to T, emitting snapshots at the frame times
    /// (nearest-step matching) and one summary row per step.
    RunResult run(const MacroState& initial) {
        RunResult out;
        MacroState state = initial;
        const long nsteps = p_.T > 0.0 ? std::lround(p_.T / p_.dt) : 0;
        std::vector<long> frame_steps;
        for (const double tf : p_.frame_times)
            frame_steps.push_back(std::clamp(std::lround(tf / p_.dt), 0L, nsteps));
        std::sort(frame_steps.begin(), frame_steps.end());
        out.summary.push_back(summary_row(state));
        auto emit = [&](long idx) {
            for (const long f : frame_steps)
                if (f == idx) {
                    out.frames.push_back(state);
                    return;
                }
        };
        if (nsteps == 0) {
            out.frames.push_back(state);
            out.dt_warning = dt_warning_;
            return out;
        }
        emit(0);
        for (long i = 1; i <= nsteps; ++i) {
            step(state);
            out.summary.push_back(summary_row(state));
            emit(i);
        }
        out.dt_warning = dt_warning_;
        return out;
    }

    bool dt_warning() const { return dt_warning_; }

private:
    struct Element {
        std::array<int, 3> v;
        double area;
        Vec2 g[3];
    };

    static Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

    /// Pointwise right-hand side of the non-diffusive subsystem at vertex vx.
    void rhs_point(std::size_t vx, const std::vector<double>& u, double v, double sigma, double t,
                   std::vector<double>& rates, std::vector<double>& du, double& dv,
                   double& ds) const {
        const int N = p_.N;
        const double A = table_.lookup(sigma, 1.0).A;
        smoluchowski_rates_into(std::span<const double>(u.data(), u.size()), p_.gamma, rates);
        double exch_sum = 0.0;
        for (int i = 0; i < N; ++i) {
            const std::size_t si = static_cast<std::size_t>(i);
            const double exch = p_.a[si] * u[si] - p_.b[si] * v;
            exch_sum += exch;
            double f = 0.0;
            if (si < p_.extra_source.size() && p_.extra_source[si])
                f = p_.extra_source[si](mesh_.vertices[vx].x, mesh_.vertices[vx].y, t);
            du[si] = rates[si] - A * exch + f;
        }
        dv = exch_sum;
        ds = p_.alpha_v * dv;
    }

    /// Stiffness with the sigma-dependent tensor interpolated at vertices,
    /// plus the Robin boundary mass, both at unit species diffusivity.
    void assemble_spatial(const std::vector<double>& sigma) {
        const int nv = static_cast<int>(mesh_.vertices.size());
        std::vector<CoefficientTable::Lookup> coef(static_cast<std::size_t>(nv));
        for (int v = 0; v < nv; ++v) coef[static_cast<std::size_t>(v)] = table_.lookup(sigma[static_cast<std::size_t>(v)], 1.0);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(elems_.size() * 9 + mesh_.boundary_edges.size() * 4);
        for (const auto& e : elems_) {
            double D11 = 0.0, D12 = 0.0, D21 = 0.0, D22 = 0.0;
            for (int k = 0; k < 3; ++k) {
                const auto& c = coef[static_cast<std::size_t>(e.v[static_cast<std::size_t>(k)])];
                D11 += c.d11 / 3.0;
                D12 += c.d12 / 3.0;
                D21 += c.d21 / 3.0;
                D22 += c.d22 / 3.0;
            }
            for (int i = 0; i < 3; ++i) {
                const Vec2 gi = e.g[i];
                for (int j = 0; j < 3; ++j) {
                    const Vec2 gj = e.g[j];
                    const double kij = e.area * (gi.x * (D11 * gj.x + D12 * gj.y) +
                                                 gi.y * (D21 * gj.x + D22 * gj.y));
                    trip.emplace_back(e.v[static_cast<std::size_t>(i)], e.v[static_cast<std::size_t>(j)], kij);
                }
            }
        }
        if (p_.b_r != 0.0) {
            // lumped boundary mass, matching the load quadrature
            for (const auto& be : mesh_.boundary_edges) {
                const double len = dist(mesh_.vertices[be.a], mesh_.vertices[be.b]);
                trip.emplace_back(be.a, be.a, p_.b_r * len / 2.0);
                trip.emplace_back(be.b, be.b, p_.b_r * len / 2.0);
            }
        }
        spatial_.resize(nv, nv);
        spatial_.setFromTriplets(trip.begin(), trip.end());
        spatial_.makeCompressed();
    }

    const MacroMesh& mesh_;
    ModelParams p_;
    const CoefficientTable& table_;
    std::vector<Element> elems_;
    Eigen::SparseMatrix<double> mass_;
    Eigen::SparseMatrix<double> spatial_;
    Eigen::VectorXd mass_weights_;
    Eigen::VectorXd robin_load_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    double sigma_cap_ = 0.0;
    bool pattern_ready_ = false;
    bool dt_checked_ = false;
    bool dt_warning_ = false;
};

}  // namespace clogsim
