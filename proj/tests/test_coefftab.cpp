#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "clogsim/coefficient_table.hpp"
#include "oracle.hpp"

using namespace clogsim;
using Catch::Approx;

TEST_CASE("circle table: grid, endpoints, self-consistency") {
    const auto shape = ShapeSpec::circle(0.2);
    const CoefficientTable table = build_table(shape, 6, 1e-3, 0.05);
    REQUIRE(table.entries.size() == 7);
    CHECK(table.entries.front().sigma == 0.0);
    CHECK(table.sigma_max() == Approx(0.299).margin(2e-6));
    CHECK_FALSE(table.truncated);
    CHECK(table.coercivity() > 0.0);

    // entry 0 matches the standalone pipeline bit-for-bit
    const auto base = eval_initial_curve(shape, 512);
    const CellMesh mesh = triangulate_perforated_cell({base}, 0.05);
    const EffectiveTensor D = effective_tensor(mesh, solve_cell_problems(mesh), 1.0);
    CHECK(table.entries[0].d11 == D.d11);
    CHECK(table.entries[0].d22 == D.d22);
    CHECK(table.entries[0].phi == geom_quantities({base}).fluid_area);
}

TEST_CASE("table monotonicity invariants") {
    for (const auto& shape : {ShapeSpec::circle(0.2), ShapeSpec::ellipse(0.2, 0.1, kPi / 4.0)}) {
        const CoefficientTable table = build_table(shape, 5, 1e-3, 0.05);
        for (std::size_t i = 1; i < table.entries.size(); ++i) {
            CHECK(table.entries[i].sigma > table.entries[i - 1].sigma);
            CHECK(table.entries[i].phi < table.entries[i - 1].phi);
            CHECK(table.entries[i].d11 <= table.entries[i - 1].d11 + 1e-12);
            CHECK(table.entries[i].d22 <= table.entries[i - 1].d22 + 1e-12);
            CHECK(table.entries[i].A > 0.0);
        }
    }
}

TEST_CASE("bean table is capped by the curvature bound") {
    const auto shape = ShapeSpec::bean(0.001);
    const auto base = eval_initial_curve(shape, 512);
    const auto adm = max_admissible_offset(base, 1e-3);
    const CoefficientTable table = build_table(shape, 4, 1e-3, 0.05);
    CHECK(table.sigma_max() == Approx(adm.sigma_smooth).epsilon(1e-12));
    CHECK(table.sigma_max() < adm.sigma_clog);
    // inclusion stays degenerate at this scale: identity tensor throughout
    for (const auto& e : table.entries) CHECK(e.d11 == Approx(1.0).margin(1e-12));
}

TEST_CASE("lookup: knots, midpoints, clamps, species scaling") {
    const CoefficientTable table = build_table(ShapeSpec::circle(0.2), 4, 1e-3, 0.08);
    const auto& e = table.entries;
    for (const auto& entry : e) {
        const auto at = table.lookup(entry.sigma, 1.0);
        CHECK(at.d11 == entry.d11);
        CHECK(at.A == entry.A);
        CHECK(at.phi == entry.phi);
        CHECK_FALSE(at.clogged);
    }
    const double mid = 0.5 * (e[1].sigma + e[2].sigma);
    const auto atmid = table.lookup(mid, 1.0);
    CHECK(atmid.d11 == Approx(0.5 * (e[1].d11 + e[2].d11)).margin(1e-15));
    CHECK(atmid.A == Approx(0.5 * (e[1].A + e[2].A)).margin(1e-13));

    const auto beyond = table.lookup(table.sigma_max() + 0.1, 1.0);
    CHECK(beyond.clogged);
    CHECK(beyond.d11 == e.back().d11);
    const auto below = table.lookup(-0.5, 1.0);
    CHECK_FALSE(below.clogged);
    CHECK(below.d11 == e.front().d11);

    const auto scaled = table.lookup(mid, 0.5);
    CHECK(scaled.d11 == Approx(0.5 * atmid.d11).margin(1e-15));
    CHECK(scaled.A == atmid.A);

    CoefficientTable empty;
    CHECK_THROWS_AS(empty.lookup(0.1, 1.0), ValidationError);
}

TEST_CASE("lookup is continuous across knots") {
    const CoefficientTable table = build_table(ShapeSpec::circle(0.15), 5, 1e-3, 0.08);
    const double smax = table.sigma_max();
    double prev = table.lookup(0.0, 1.0).d11;
    for (int i = 1; i <= 2000; ++i) {
        const double s = smax * i / 2000.0;
        const double cur = table.lookup(s, 1.0).d11;
        CHECK(std::abs(cur - prev) < 2e-3);  // no jumps at knots
        prev = cur;
    }
}

TEST_CASE("specific-surface slopes stay stable under grid refinement") {
    auto max_slope = [](const CoefficientTable& t) {
        double worst = 0.0;
        for (std::size_t i = 1; i < t.entries.size(); ++i)
            worst = std::max(worst, std::abs(t.entries[i].A - t.entries[i - 1].A) /
                                        (t.entries[i].sigma - t.entries[i - 1].sigma));
        return worst;
    };
    const double coarse = max_slope(build_table(ShapeSpec::circle(0.2), 8, 1e-3, 0.08));
    const double fine = max_slope(build_table(ShapeSpec::circle(0.2), 16, 1e-3, 0.08));
    CHECK(coarse < 300.0);
    CHECK(fine < 300.0);
    CHECK(fine == Approx(coarse).epsilon(0.35));  // Lipschitz surrogate, not diverging
}

TEST_CASE("minimal table interpolates linearly by construction") {
    const CoefficientTable table = build_table(ShapeSpec::circle(0.2), 2, 1e-3, 0.08);
    REQUIRE(table.entries.size() == 3);
    const auto& e = table.entries;
    const double q = 0.25 * e[0].sigma + 0.75 * e[1].sigma;
    const auto at = table.lookup(q, 1.0);
    CHECK(at.phi == Approx(0.25 * e[0].phi + 0.75 * e[1].phi).margin(1e-14));
}

TEST_CASE("a mid-sweep meshing failure truncates the table") {
    std::vector<std::optional<CoefficientEntry>> slots(5);
    std::vector<std::string> errors(5);
    for (int i = 0; i < 5; ++i) {
        CoefficientEntry e;
        e.sigma = 0.1 * i;
        e.d11 = e.d22 = 1.0 - 0.1 * i;
        e.phi = 1.0 - 0.05 * i;
        e.A = 1.0;
        slots[static_cast<std::size_t>(i)] = e;
    }
    slots[3].reset();
    errors[3] = "hole touches the cell boundary (clogged cell)";
    CoefficientTable table;
    detail::collect_entries(slots, errors, table);
    CHECK(table.truncated);
    CHECK(table.entries.size() == 3);
    validate_table(table);

    // a failure at sigma = 0 is fatal
    slots[0].reset();
    errors[0] = "boom";
    CoefficientTable none;
    CHECK_THROWS_AS(detail::collect_entries(slots, errors, none), MeshError);
}

TEST_CASE("CSV round-trip is byte-identical and validated") {
    const CoefficientTable table = build_table(ShapeSpec::ellipse(0.2, 0.12, 0.3), 4, 1e-3, 0.08);
    std::ostringstream first;
    write_table_csv(first, table);
    CHECK(first.str().rfind("sigma,D11,D12,D21,D22,A,phi,gamma_len\n", 0) == 0);
    std::istringstream in(first.str());
    const CoefficientTable back = read_table_csv(in);
    std::ostringstream second;
    write_table_csv(second, back);
    CHECK(first.str() == second.str());

    std::istringstream bad("sigma,D11\n0,1\n");
    CHECK_THROWS_AS(read_table_csv(bad), ConfigError);
}

TEST_CASE("threaded build matches the serial build exactly") {
    TableBuildOptions serial;
    TableBuildOptions threaded;
    threaded.threads = 2;
    const CoefficientTable a = build_table(ShapeSpec::circle(0.2), 6, 1e-3, 0.06, serial);
    const CoefficientTable b = build_table(ShapeSpec::circle(0.2), 6, 1e-3, 0.06, threaded);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].d11 == b.entries[i].d11);
        CHECK(a.entries[i].A == b.entries[i].A);
    }
}
