#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <array>
#include <vector>

#include "clogsim/cell_mesh.hpp"

namespace clogsim {

/// Cell functions w_1, w_2 on the mesh vertices. Periodic pairs share one
/// degree of freedom, so paired values are equal exactly; the zero mean is
/// enforced through a scalar Lagrange multiplier.
struct CellSolution {
    std::vector<double> w1, w2;
    double residual_norm = 0.0;      // worst relative saddle residual
    std::array<double, 2> mean{0.0, 0.0};  // fluid integrals of w_1, w_2
};

struct EffectiveTensor {
    double d11 = 0.0, d12 = 0.0, d21 = 0.0, d22 = 0.0;
    double phi = 1.0;     // fluid area as integrated on the mesh
    double d_base = 1.0;  // species diffusivity used for the scaling

    double min_eigenvalue() const {
        const double mean = 0.5 * (d11 + d22);
        const double off = 0.5 * (d12 + d21);
        const double rad = std::sqrt(0.25 * (d11 - d22) * (d11 - d22) + off * off);
        return mean - rad;
    }
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

/// Reduced periodic P1 system shared by both cell problems.
struct CellSystem {
    std::vector<int> dof;  // vertex -> reduced index
    int n = 0;
    Eigen::SparseMatrix<double> saddle;  // [K c; c^T 0]
    std::vector<double> lumped;          // reduced c vector

    explicit CellSystem(const CellMesh& mesh) {
        const int nv = static_cast<int>(mesh.vertices.size());
        UnionFind uf(nv);
        for (const auto& [a, b] : mesh.periodic_pairs) uf.unite(a, b);
        dof.assign(static_cast<std::size_t>(nv), -1);
        for (int v = 0; v < nv; ++v) {
            const int root = uf.find(v);
            if (dof[root] < 0) dof[root] = n++;
            dof[v] = dof[root];
        }
        lumped.assign(static_cast<std::size_t>(n), 0.0);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(mesh.triangles.size() * 9 + 2 * static_cast<std::size_t>(n));
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            const auto& tri = mesh.triangles[t];
            const Vec2 p0 = mesh.vertices[tri[0]];
            const Vec2 p1 = mesh.vertices[tri[1]];
            const Vec2 p2 = mesh.vertices[tri[2]];
            const double area = 0.5 * orient2d(p0, p1, p2);
            const Vec2 g[3] = {perp(p2 - p1) / (2.0 * area), perp(p0 - p2) / (2.0 * area),
                               perp(p1 - p0) / (2.0 * area)};
            for (int i = 0; i < 3; ++i) {
                lumped[static_cast<std::size_t>(dof[tri[i]])] += area / 3.0;
                for (int j = 0; j < 3; ++j)
                    trip.emplace_back(dof[tri[i]], dof[tri[j]], area * dot(g[i], g[j]));
            }
        }
        for (int r = 0; r < n; ++r) {
            trip.emplace_back(r, n, lumped[static_cast<std::size_t>(r)]);
            trip.emplace_back(n, r, lumped[static_cast<std::size_t>(r)]);
        }
        saddle.resize(n + 1, n + 1);
        saddle.setFromTriplets(trip.begin(), trip.end());
        saddle.makeCompressed();
    }

    static Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

    /// Boundary load of the cell problem for unit direction e_k: integral of
    /// the P1 trace times e_k . n over the inner boundary, with n the outward
    /// normal of the solid inclusion (pointing into the fluid).
    Eigen::VectorXd rhs(const CellMesh& mesh, int axis) const {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(n + 1);
        for (const auto& be : mesh.boundary_edges) {
            if (be.tag != CellMesh::BoundaryTag::Inner) continue;
            const Vec2 d = mesh.vertices[be.b] - mesh.vertices[be.a];
            const double len = norm(d);
            const Vec2 n_solid = perp(d) / len;  // fluid lies left of a->b
            const double comp = axis == 0 ? n_solid.x : n_solid.y;
            f[dof[be.a]] += 0.5 * len * comp;
            f[dof[be.b]] += 0.5 * len * comp;
        }
        return f;
    }
};

}  // namespace detail

/// Solve both periodic cell problems on the mesh. The linear system must
/// reach a relative residual of 1e-10, otherwise SolverError is thrown.
inline CellSolution solve_cell_problems(const CellMesh& mesh) {
    const detail::CellSystem sys(mesh);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(sys.saddle);
    lu.factorize(sys.saddle);
    if (lu.info() != Eigen::Success) throw SolverError("cell problem factorization failed");

    CellSolution sol;
    const int nv = static_cast<int>(mesh.vertices.size());
    sol.w1.resize(static_cast<std::size_t>(nv));
    sol.w2.resize(static_cast<std::size_t>(nv));
    for (int axis = 0; axis < 2; ++axis) {
        const Eigen::VectorXd f = sys.rhs(mesh, axis);
        const Eigen::VectorXd x = lu.solve(f);
        const double fnorm = f.norm();
        const double resid = (sys.saddle * x - f).norm() / std::max(fnorm, 1e-300);
        const double rel = fnorm > 0.0 ? resid : (sys.saddle * x - f).norm();
        if (!(rel <= 1e-10))
            throw SolverError("cell problem residual " + std::to_string(rel) + " exceeds 1e-10");
        sol.residual_norm = std::max(sol.residual_norm, rel);
        auto& w = axis == 0 ? sol.w1 : sol.w2;
        double mean = 0.0;
        for (int v = 0; v < nv; ++v) w[static_cast<std::size_t>(v)] = x[sys.dof[v]];
        for (int r = 0; r < sys.n; ++r) mean += sys.lumped[static_cast<std::size_t>(r)] * x[r];
        sol.mean[static_cast<std::size_t>(axis)] = mean;
    }
    return sol;
}

/// Single-axis convenience wrapper.
inline std::vector<double> solve_cell_problem(const CellMesh& mesh, int axis) {
    if (axis != 0 && axis != 1) throw ValidationError("axis must be 0 or 1");
    const CellSolution sol = solve_cell_problems(mesh);
    return axis == 0 ? sol.w1 : sol.w2;
}

/// Effective diffusion tensor D_jk = d * phi * sum_T area * (grad w_k + e_k) . e_j
/// with phi the mesh fluid area. The phi prefactor can be disabled to obtain
/// the standard homogenized tensor.
inline EffectiveTensor effective_tensor(const CellMesh& mesh, const CellSolution& sol, double d,
                                        bool phi_prefactor = true) {
    double integral[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    double phi = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 p0 = mesh.vertices[tri[0]];
        const Vec2 p1 = mesh.vertices[tri[1]];
        const Vec2 p2 = mesh.vertices[tri[2]];
        const double area = 0.5 * orient2d(p0, p1, p2);
        const Vec2 g[3] = {detail::CellSystem::perp(p2 - p1) / (2.0 * area),
                           detail::CellSystem::perp(p0 - p2) / (2.0 * area),
                           detail::CellSystem::perp(p1 - p0) / (2.0 * area)};
        Vec2 grad_w[2] = {{0.0, 0.0}, {0.0, 0.0}};
        for (int i = 0; i < 3; ++i) {
            grad_w[0] += sol.w1[static_cast<std::size_t>(tri[i])] * g[i];
            grad_w[1] += sol.w2[static_cast<std::size_t>(tri[i])] * g[i];
        }
        phi += area;
        integral[0][0] += area * (grad_w[0].x + 1.0);
        integral[1][0] += area * grad_w[0].y;
        integral[0][1] += area * grad_w[1].x;
        integral[1][1] += area * (grad_w[1].y + 1.0);
    }
    const double scale = d * (phi_prefactor ? phi : 1.0);
    EffectiveTensor D;
    D.d11 = scale * integral[0][0];
    D.d12 = scale * integral[0][1];
    D.d21 = scale * integral[1][0];
    D.d22 = scale * integral[1][1];
    D.phi = phi;
    D.d_base = d;
    return D;
}

}  // namespace clogsim
