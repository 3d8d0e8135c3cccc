#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "clogsim/geometry.hpp"
#include "clogsim/macro_mesh.hpp"
#include "clogsim/macro_solver.hpp"
#include "clogsim/model.hpp"

namespace clogsim {

/// Full scenario description, mirroring the sectioned key-value config file
/// (see the README for the grammar). Values are stored as written; the
/// to_*() helpers build the solver inputs.
struct SimConfig {
    std::string name = "custom";

    // [macro]
    std::string domain = "lshape";  // cardioid | lshape | polygon
    double H = 0.03;
    int boundary_samples = 256;
    std::vector<double> polygon;  // x y pairs for domain = polygon

    // [micro]
    std::string shape = "circle";  // circle | ellipse | bean
    double R_c = 0.2;
    double R_a = 0.0, R_b = 0.0, theta_deg = 0.0;
    double center_x = 0.5, center_y = 0.5;
    int n_samples = 512;

    // [table]
    int table_M = 60;
    double table_epsilon = 1e-3;
    double table_h = 0.02;
    std::string table_file = "table.csv";
    bool phi_prefactor = true;

    // [model]
    int N = 1;
    std::vector<double> d{1.0}, a{0.9}, b{1.0}, u_b{1.0};
    std::vector<double> gamma{10.0};  // scalar or N*N row-major
    double alpha_v = 1.0;
    double b_r = 1.0;
    double t0 = 1.0;
    double T = 1.0;
    double dt = 1e-3;
    std::vector<double> frame_times;

    // [initial]
    std::string sigma_field = "uniform 0";

    // [output]
    std::string out_dir = "out";

    MacroDomainSpec to_domain() const {
        if (domain == "cardioid") return MacroDomainSpec::cardioid(H, boundary_samples);
        if (domain == "lshape") return MacroDomainSpec::lshape(H);
        if (domain == "polygon") {
            if (polygon.size() < 6 || polygon.size() % 2 != 0)
                throw ConfigError("polygon needs at least 3 x y pairs");
            std::vector<Vec2> pts;
            for (std::size_t i = 0; i + 1 < polygon.size(); i += 2)
                pts.push_back({polygon[i], polygon[i + 1]});
            return MacroDomainSpec::from_polygon(std::move(pts), H);
        }
        throw ConfigError("unknown macro domain: " + domain);
    }

    ShapeSpec to_shape() const {
        const Vec2 c{center_x, center_y};
        if (shape == "circle") return ShapeSpec::circle(R_c, c);
        if (shape == "bean") return ShapeSpec::bean(R_c, c);
        if (shape == "ellipse") return ShapeSpec::ellipse(R_a, R_b, theta_deg * kPi / 180.0, c);
        throw ConfigError("unknown micro shape: " + shape);
    }

    ModelParams to_model() const {
        ModelParams p;
        p.N = N;
        p.d = d;
        p.a = a;
        p.b = b;
        p.u_b = u_b;
        const auto n = static_cast<std::size_t>(N);
        p.gamma.assign(n, std::vector<double>(n, 0.0));
        if (gamma.size() == 1) {
            for (auto& row : p.gamma) row.assign(n, gamma[0]);
        } else if (gamma.size() == n * n) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) p.gamma[i][j] = gamma[i * n + j];
        } else {
            throw ConfigError("gamma needs 1 or N*N entries");
        }
        p.alpha_v = alpha_v;
        p.b_r = b_r;
        p.t0 = t0;
        p.T = T;
        p.dt = dt;
        p.frame_times = frame_times;
        p.validate();
        return p;
    }

    SigmaFieldSpec to_sigma_field() const {
        std::istringstream in(sigma_field);
        std::string kind;
        in >> kind;
        if (kind == "uniform") {
            double v = 0.0;
            if (!(in >> v)) throw ConfigError("sigma_field: uniform needs a value");
            return SigmaFieldSpec::uniform(v);
        }
        if (kind == "barrier") {
            double r0 = 0.0, omega = 0.0, scale = 1.0;
            if (!(in >> r0 >> omega)) throw ConfigError("sigma_field: barrier needs R0 and omega");
            in >> scale;  // optional
            return SigmaFieldSpec::paper_barrier(r0, omega, scale);
        }
        throw ConfigError("unknown sigma_field kind: " + kind);
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_doubles(const std::string& s, const std::string& key) {
    std::istringstream in(s);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    std::string rest;
    if (in.fail() && !in.eof() && (in.clear(), in >> rest))
        throw ConfigError("config key '" + key + "': expected numbers, got '" + s + "'");
    return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
    const auto v = parse_doubles(s, key);
    if (v.size() != 1) throw ConfigError("config key '" + key + "' expects a single number");
    return v[0];
}

inline int parse_int(const std::string& s, const std::string& key) {
    const double v = parse_double(s, key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw ConfigError("config key '" + key + "' expects an integer");
    return i;
}

inline bool parse_switch(const std::string& s, const std::string& key) {
    if (s == "on" || s == "true" || s == "1") return true;
    if (s == "off" || s == "false" || s == "0") return false;
    throw ConfigError("config key '" + key + "' expects on|off");
}

inline std::string fmt_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += fmt_g17(v[i]);
    }
    return out;
}

}  // namespace detail

/// Parse the sectioned key-value configuration format. Unknown sections or
/// keys are rejected.
inline SimConfig parse_config(std::istream& is) {
    SimConfig c;
    c.frame_times.clear();
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = t.substr(1, t.size() - 2);
            if (section != "scenario" && section != "macro" && section != "micro" &&
                section != "table" && section != "model" && section != "initial" &&
                section != "output")
                throw ConfigError("unknown config section [" + section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string val = detail::trim(t.substr(eq + 1));
        const std::string qual = section + "." + key;
        if (qual == "scenario.name") c.name = val;
        else if (qual == "macro.domain") c.domain = val;
        else if (qual == "macro.H") c.H = detail::parse_double(val, qual);
        else if (qual == "macro.boundary_samples") c.boundary_samples = detail::parse_int(val, qual);
        else if (qual == "macro.polygon") c.polygon = detail::parse_doubles(val, qual);
        else if (qual == "micro.shape") c.shape = val;
        else if (qual == "micro.R_c") c.R_c = detail::parse_double(val, qual);
        else if (qual == "micro.R_a") c.R_a = detail::parse_double(val, qual);
        else if (qual == "micro.R_b") c.R_b = detail::parse_double(val, qual);
        else if (qual == "micro.theta_deg") c.theta_deg = detail::parse_double(val, qual);
        else if (qual == "micro.center") {
            const auto xy = detail::parse_doubles(val, qual);
            if (xy.size() != 2) throw ConfigError("micro.center expects two numbers");
            c.center_x = xy[0];
            c.center_y = xy[1];
        }
        else if (qual == "micro.n_samples") c.n_samples = detail::parse_int(val, qual);
        else if (qual == "table.M") c.table_M = detail::parse_int(val, qual);
        else if (qual == "table.epsilon") c.table_epsilon = detail::parse_double(val, qual);
        else if (qual == "table.h") c.table_h = detail::parse_double(val, qual);
        else if (qual == "table.file") c.table_file = val;
        else if (qual == "table.phi_prefactor") c.phi_prefactor = detail::parse_switch(val, qual);
        else if (qual == "model.N") c.N = detail::parse_int(val, qual);
        else if (qual == "model.d") c.d = detail::parse_doubles(val, qual);
        else if (qual == "model.a") c.a = detail::parse_doubles(val, qual);
        else if (qual == "model.b") c.b = detail::parse_doubles(val, qual);
        else if (qual == "model.u_b") c.u_b = detail::parse_doubles(val, qual);
        else if (qual == "model.gamma") c.gamma = detail::parse_doubles(val, qual);
        else if (qual == "model.alpha_v") c.alpha_v = detail::parse_double(val, qual);
        else if (qual == "model.b_r") c.b_r = detail::parse_double(val, qual);
        else if (qual == "model.t0") c.t0 = detail::parse_double(val, qual);
        else if (qual == "model.T") c.T = detail::parse_double(val, qual);
        else if (qual == "model.dt") c.dt = detail::parse_double(val, qual);
        else if (qual == "model.frame_times") c.frame_times = detail::parse_doubles(val, qual);
        else if (qual == "initial.sigma_field") c.sigma_field = val;
        else if (qual == "output.dir") c.out_dir = val;
        else throw ConfigError("unknown config key '" + key + "' in section [" + section + "]");
    }
    return c;
}

inline std::string serialize_config(const SimConfig& c) {
    std::ostringstream os;
    os << "[scenario]\nname = " << c.name << "\n\n";
    os << "[macro]\ndomain = " << c.domain << "\nH = " << detail::fmt_g17(c.H)
       << "\nboundary_samples = " << c.boundary_samples << "\n";
    if (!c.polygon.empty()) os << "polygon = " << detail::fmt_doubles(c.polygon) << "\n";
    os << "\n[micro]\nshape = " << c.shape << "\n";
    if (c.shape == "ellipse")
        os << "R_a = " << detail::fmt_g17(c.R_a) << "\nR_b = " << detail::fmt_g17(c.R_b)
           << "\ntheta_deg = " << detail::fmt_g17(c.theta_deg) << "\n";
    else
        os << "R_c = " << detail::fmt_g17(c.R_c) << "\n";
    os << "center = " << detail::fmt_g17(c.center_x) << " " << detail::fmt_g17(c.center_y)
       << "\nn_samples = " << c.n_samples << "\n";
    os << "\n[table]\nM = " << c.table_M << "\nepsilon = " << detail::fmt_g17(c.table_epsilon)
       << "\nh = " << detail::fmt_g17(c.table_h) << "\nfile = " << c.table_file
       << "\nphi_prefactor = " << (c.phi_prefactor ? "on" : "off") << "\n";
    os << "\n[model]\nN = " << c.N << "\nd = " << detail::fmt_doubles(c.d)
       << "\na = " << detail::fmt_doubles(c.a) << "\nb = " << detail::fmt_doubles(c.b)
       << "\nu_b = " << detail::fmt_doubles(c.u_b) << "\ngamma = " << detail::fmt_doubles(c.gamma)
       << "\nalpha_v = " << detail::fmt_g17(c.alpha_v) << "\nb_r = " << detail::fmt_g17(c.b_r)
       << "\nt0 = " << detail::fmt_g17(c.t0) << "\nT = " << detail::fmt_g17(c.T)
       << "\ndt = " << detail::fmt_g17(c.dt);
    os << "\nframe_times =";
    if (!c.frame_times.empty()) os << " " << detail::fmt_doubles(c.frame_times);
    os << "\n";
    os << "\n[initial]\nsigma_field = " << c.sigma_field << "\n";
    os << "\n[output]\ndir = " << c.out_dir << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Shipped scenario presets
// ---------------------------------------------------------------------------

inline std::vector<std::string> preset_names() {
    return {"cardioid", "lshape", "lshape-nonuniform", "circle"};
}

/// Named scenarios. The three clogging scenarios share the species and rate
/// constants (d = (1, 0.5, 0.9), a = 0.9, b = 1, gamma = 10, b_r = 1, inflow
/// of the monomer only); alpha_v is a calibrated value since no reference
/// value exists for it.
inline SimConfig preset(const std::string& name) {
    SimConfig c;
    c.name = name;
    if (name == "circle") {
        c.domain = "polygon";
        c.polygon = {0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0};
        c.H = 0.1;
        c.shape = "circle";
        c.R_c = 0.2;
        c.N = 1;
        c.d = {1.0};
        c.a = {0.9};
        c.b = {1.0};
        c.u_b = {1.0};
        c.gamma = {10.0};
        c.alpha_v = 1.0;
        c.T = 1.0;
        c.t0 = 1.0;
        c.dt = 1e-3;
        c.frame_times = {0.5, 1.0};
        c.table_file = "circle_table.csv";
        return c;
    }
    // shared core of the paper scenarios
    c.shape = "ellipse";
    c.R_a = 0.01;
    c.R_b = 0.001;
    c.theta_deg = 45.0;
    c.N = 3;
    c.d = {1.0, 0.5, 0.9};
    c.a = {0.9, 0.9, 0.9};
    c.b = {1.0, 1.0, 1.0};
    c.u_b = {1.0, 0.0, 0.0};
    c.gamma = {10.0};
    c.b_r = 1.0;
    c.alpha_v = 8.0;
    if (name == "cardioid") {
        c.domain = "cardioid";
        c.H = 0.05;
        c.boundary_samples = 256;
        c.T = 3.0;
        c.t0 = 3.0;
        c.dt = 1e-3;
        c.frame_times = {0.1, 0.85, 1.6, 2.35};
        c.table_file = "ellipse45_table.csv";
        return c;
    }
    if (name == "lshape") {
        c.domain = "lshape";
        c.H = 0.03;
        c.T = 1.2;
        c.t0 = 1.2;
        c.dt = 4e-4;
        c.frame_times = {0.1, 0.4, 0.7, 1.0};
        c.table_file = "ellipse45_table.csv";
        return c;
    }
    if (name == "lshape-nonuniform") {
        c.domain = "lshape";
        c.H = 0.03;
        c.R_a = 0.005;
        c.R_b = 0.0005;
        c.T = 1.2;
        c.t0 = 1.2;
        c.dt = 4e-4;
        c.frame_times = {0.1, 0.4, 0.7, 1.0};
        c.sigma_field = "barrier 0.01 10 1";
        c.table_file = "ellipse45_small_table.csv";
        return c;
    }
    throw ConfigError("unknown preset: " + name);
}

}  // namespace clogsim
