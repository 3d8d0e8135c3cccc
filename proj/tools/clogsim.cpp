// Command-line front end: coefficient-table builds, scenario runs, and
// single-cell studies. See README.md for the config grammar and file formats.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "clogsim/cell_solver.hpp"
#include "clogsim/coefficient_table.hpp"
#include "clogsim/config.hpp"
#include "clogsim/macro_solver.hpp"
#include "clogsim/output.hpp"

namespace fs = std::filesystem;
using namespace clogsim;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset_name;
    std::string out_dir;
    std::string phi_prefactor;  // "", "on", "off"
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "scenario configuration file");
    cmd->add_option("--preset", o.preset_name, "named preset scenario");
    cmd->add_option("--out", o.out_dir, "output directory (overrides the config)");
    cmd->add_option("--threads", o.threads, "worker threads for table builds");
    cmd->add_option("--tensor-phi-prefactor", o.phi_prefactor,
                    "on|off: porosity prefactor in the effective tensor")
        ->check(CLI::IsMember({"on", "off"}));
}

SimConfig resolve_config(const CommonOpts& o) {
    if (!o.config_path.empty() && !o.preset_name.empty())
        throw ConfigError("give either --config or --preset, not both");
    SimConfig cfg;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw ConfigError("cannot open config file: " + o.config_path);
        cfg = parse_config(in);
    } else if (!o.preset_name.empty()) {
        cfg = preset(o.preset_name);
    } else {
        throw ConfigError("a scenario is required: --config <path> or --preset <name>");
    }
    // environment defaults, overridden by explicit flags
    if (const char* env = std::getenv("CLOGSIM_OUT"); env && *env && o.out_dir.empty())
        cfg.out_dir = env;
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (o.phi_prefactor == "on") cfg.phi_prefactor = true;
    if (o.phi_prefactor == "off") cfg.phi_prefactor = false;
    return cfg;
}

int resolve_threads(const CommonOpts& o) {
    if (o.threads > 0) return o.threads;
    if (const char* env = std::getenv("CLOGSIM_THREADS"); env && *env) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

CoefficientTable tabulate(const SimConfig& cfg, int threads) {
    TableBuildOptions opts;
    opts.n_samples = cfg.n_samples;
    opts.threads = threads;
    opts.phi_prefactor = cfg.phi_prefactor;
    return build_table(cfg.to_shape(), cfg.table_M, cfg.table_epsilon, cfg.table_h, opts);
}

void write_table_file(const CoefficientTable& table, const fs::path& path) {
    fs::create_directories(path.parent_path());
    auto os = detail::open_out(path);
    write_table_csv(os, table);
}

int cmd_tabulate(const CommonOpts& o) {
    const SimConfig cfg = resolve_config(o);
    const CoefficientTable table = tabulate(cfg, resolve_threads(o));
    const fs::path path = fs::path(cfg.out_dir) / cfg.table_file;
    write_table_file(table, path);
    std::cout << "wrote " << path.string() << ": " << table.entries.size()
              << " entries, sigma in [0, " << table.sigma_max() << "]\n";
    if (table.truncated)
        std::cout << "warning: sweep truncated after " << table.entries.size() << " of "
                  << table.planned_entries << " entries (meshing failure near clogging)\n";
    return 0;
}

int cmd_simulate(const CommonOpts& o, bool tabulate_first, bool pgm) {
    const SimConfig cfg = resolve_config(o);
    const fs::path out(cfg.out_dir);
    const fs::path table_path = out / cfg.table_file;
    CoefficientTable table;
    if (fs::exists(table_path)) {
        std::ifstream in(table_path);
        table = read_table_csv(in);
    } else if (tabulate_first) {
        table = tabulate(cfg, resolve_threads(o));
        write_table_file(table, table_path);
        std::cout << "tabulated " << table.entries.size() << " entries to " << table_path.string()
                  << "\n";
    } else {
        throw ConfigError("coefficient table not found: " + table_path.string() +
                          " (run the tabulate command, or pass --tabulate-first)");
    }

    const MacroMesh mesh = build_macro_mesh(cfg.to_domain());
    const ModelParams params = cfg.to_model();
    MacroSolver solver(mesh, params, table);
    bool clamped = false;
    const std::vector<double> sigma0 = initial_sigma_field(
        mesh, cfg.to_sigma_field(), cfg.to_shape().base_radius(), solver.sigma_cap(), &clamped);
    if (clamped)
        std::cout << "warning: initial sigma field clamped to the table range at some vertices\n";
    const RunResult result = solver.run(solver.initial_state(sigma0));
    if (result.dt_warning)
        std::cout << "warning: dt exceeds the explicit-reaction stability bound\n";

    fs::create_directories(out);
    for (const MacroState& frame : result.frames) {
        const std::string name = frame_file_name(frame.t);
        auto os = detail::open_out(out / name);
        write_snapshot_csv(os, mesh, frame);
        if (pgm) {
            auto ps = detail::open_out(out / (name.substr(0, name.size() - 4) + "_sigma.pgm"));
            write_pgm(ps, mesh, frame.sigma);
            auto pu = detail::open_out(out / (name.substr(0, name.size() - 4) + "_u1.pgm"));
            write_pgm(pu, mesh, frame.u[0]);
        }
    }
    {
        auto os = detail::open_out(out / "summary.csv");
        write_summary_csv(os, result.summary);
    }
    const SummaryRow& last = result.summary.back();
    std::cout << "simulated " << cfg.name << ": " << mesh.vertices.size() << " vertices, "
              << result.summary.size() - 1 << " steps, " << result.frames.size() << " frames\n";
    std::cout << "final t = " << last.t << ", clogged fraction = " << last.clogged_fraction
              << ", max u1 = " << last.max_u[0] << "\n";
    return 0;
}

struct CellOpts {
    std::string shape = "circle";
    double R = 0.2, Ra = 0.1, Rb = 0.01, theta_deg = 0.0;
    double sigma = 0.0;
    double h = 0.02;
    int n_samples = 512;
    std::string out_dir = "out";
    std::string phi_prefactor;
};

int cmd_cellsolve(const CellOpts& o) {
    ShapeSpec shape;
    if (o.shape == "circle") shape = ShapeSpec::circle(o.R);
    else if (o.shape == "bean") shape = ShapeSpec::bean(o.R);
    else if (o.shape == "ellipse")
        shape = ShapeSpec::ellipse(o.Ra, o.Rb, o.theta_deg * kPi / 180.0);
    else throw ConfigError("unknown shape: " + o.shape);

    const OffsetCurve base = eval_initial_curve(shape, o.n_samples);
    const OffsetCurve curve = o.sigma != 0.0 ? offset_curve(base, o.sigma) : base;
    const CellMesh mesh = triangulate_perforated_cell({curve}, o.h);
    const CellSolution sol = solve_cell_problems(mesh);
    const bool prefactor = o.phi_prefactor != "off";
    const EffectiveTensor D = effective_tensor(mesh, sol, 1.0, prefactor);

    const fs::path out(o.out_dir);
    fs::create_directories(out);
    {
        auto os = detail::open_out(out / "cell_mesh.txt");
        write_mesh(os, mesh);
    }
    {
        auto os = detail::open_out(out / "cell_w.csv");
        os << "x,y,w1,w2\n";
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
            os << detail::fmt_g17(mesh.vertices[v].x) << ',' << detail::fmt_g17(mesh.vertices[v].y)
               << ',' << detail::fmt_g17(sol.w1[v]) << ',' << detail::fmt_g17(sol.w2[v]) << "\n";
    }
    std::cout << "mesh: " << mesh.vertices.size() << " vertices, " << mesh.triangles.size()
              << " triangles, phi = " << D.phi << "\n";
    std::cout << "D = [ " << D.d11 << "  " << D.d12 << " ]\n    [ " << D.d21 << "  " << D.d22
              << " ]\n";
    std::cout << "residual = " << sol.residual_norm << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-scale colloid transport and clogging simulator"};
    app.require_subcommand(1);

    CommonOpts tab_opts;
    CLI::App* tab = app.add_subcommand("tabulate", "precompute a coefficient table");
    add_common(tab, tab_opts);

    CommonOpts sim_opts;
    bool tabulate_first = false, pgm = false;
    CLI::App* sim = app.add_subcommand("simulate", "run a macroscopic scenario");
    add_common(sim, sim_opts);
    sim->add_flag("--tabulate-first", tabulate_first, "build the table if the file is missing");
    sim->add_flag("--pgm", pgm, "also rasterize sigma and u1 frames to PGM images");

    CellOpts cell_opts;
    CLI::App* cell = app.add_subcommand("cellsolve", "solve one periodic cell problem");
    cell->add_option("--shape", cell_opts.shape, "circle | ellipse | bean")
        ->check(CLI::IsMember({"circle", "ellipse", "bean"}));
    cell->add_option("--R", cell_opts.R, "circle/bean radius");
    cell->add_option("--Ra", cell_opts.Ra, "ellipse long semi-axis");
    cell->add_option("--Rb", cell_opts.Rb, "ellipse short semi-axis");
    cell->add_option("--theta-deg", cell_opts.theta_deg, "ellipse rotation in degrees");
    cell->add_option("--sigma", cell_opts.sigma, "offset applied to the initial curve");
    cell->add_option("--mesh-h", cell_opts.h, "target mesh size");
    cell->add_option("--n-samples", cell_opts.n_samples, "boundary samples");
    cell->add_option("--out", cell_opts.out_dir, "output directory");
    cell->add_option("--tensor-phi-prefactor", cell_opts.phi_prefactor, "on|off")
        ->check(CLI::IsMember({"on", "off"}));

    CLI::App* pre = app.add_subcommand("presets", "list the shipped scenario presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (tab->parsed()) return cmd_tabulate(tab_opts);
        if (sim->parsed()) return cmd_simulate(sim_opts, tabulate_first, pgm);
        if (cell->parsed()) return cmd_cellsolve(cell_opts);
        if (pre->parsed()) {
            for (const auto& name : preset_names()) {
                const SimConfig c = preset(name);
                std::cout << name << ": domain=" << c.domain << " shape=" << c.shape
                          << " N=" << c.N << " T=" << c.T << "\n";
            }
            return 0;
        }
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
