#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "clogsim/config.hpp"

using namespace clogsim;
using Catch::Approx;

TEST_CASE("config round-trip: load, serialize, load is identity") {
    for (const auto& name : preset_names()) {
        const SimConfig c = preset(name);
        const std::string once = serialize_config(c);
        std::istringstream in(once);
        const SimConfig back = parse_config(in);
        const std::string twice = serialize_config(back);
        CHECK(once == twice);
    }
}

TEST_CASE("unknown keys and sections are rejected") {
    std::istringstream bad1("[macro]\nwhatever = 3\n");
    CHECK_THROWS_AS(parse_config(bad1), ConfigError);
    std::istringstream bad2("[nosuch]\nx = 1\n");
    CHECK_THROWS_AS(parse_config(bad2), ConfigError);
    std::istringstream bad3("[model]\njust words\n");
    CHECK_THROWS_AS(parse_config(bad3), ConfigError);
    std::istringstream bad4("[model]\nN = 1.5\n");
    CHECK_THROWS_AS(parse_config(bad4), ConfigError);
}

TEST_CASE("comments and blank lines are ignored") {
    std::istringstream in(
        "# scenario file\n\n[scenario]\nname = demo\n\n[model]\n# three species\nN = 3\n"
        "d = 1 0.5 0.9\na = 0.9 0.9 0.9\nb = 1 1 1\nu_b = 1 0 0\ngamma = 10\nT = 2\nt0 = 2\n");
    const SimConfig c = parse_config(in);
    CHECK(c.name == "demo");
    CHECK(c.N == 3);
    CHECK(c.d == std::vector<double>{1.0, 0.5, 0.9});
    CHECK(c.T == 2.0);
}

TEST_CASE("gamma accepts a scalar or a full matrix") {
    SimConfig c = preset("cardioid");
    ModelParams p = c.to_model();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(p.gamma[i][j] == 10.0);
    c.gamma = {1, 2, 3, 2, 5, 6, 3, 6, 9};
    p = c.to_model();
    CHECK(p.gamma[0][1] == 2.0);
    CHECK(p.gamma[2][0] == 3.0);
    c.gamma = {1, 2};
    CHECK_THROWS_AS(c.to_model(), ConfigError);
    // asymmetric kernels are rejected at validation
    c.gamma = {1, 2, 3, 9, 5, 6, 3, 6, 9};
    CHECK_THROWS_AS(c.to_model(), ValidationError);
}

TEST_CASE("sigma field expressions parse") {
    SimConfig c;
    c.sigma_field = "uniform 0.25";
    const SigmaFieldSpec u = c.to_sigma_field();
    CHECK(u.kind == SigmaFieldSpec::Kind::Uniform);
    CHECK(u.value == 0.25);
    c.sigma_field = "barrier 0.01 10 1";
    const SigmaFieldSpec b = c.to_sigma_field();
    CHECK(b.kind == SigmaFieldSpec::Kind::PaperBarrier);
    CHECK(b.r0 == 0.01);
    CHECK(b.omega == 10.0);
    c.sigma_field = "gradient 1 2";
    CHECK_THROWS_AS(c.to_sigma_field(), ConfigError);
}

TEST_CASE("presets produce valid solver inputs") {
    for (const auto& name : preset_names()) {
        const SimConfig c = preset(name);
        CHECK_NOTHROW(c.to_model());
        CHECK_NOTHROW(c.to_shape());
        CHECK_NOTHROW(c.to_domain());
        CHECK_NOTHROW(c.to_sigma_field());
        CHECK(c.table_M == 60);
    }
    const SimConfig card = preset("cardioid");
    CHECK(card.frame_times == std::vector<double>{0.1, 0.85, 1.6, 2.35});
    CHECK(card.T == 3.0);
    const SimConfig lsh = preset("lshape");
    CHECK(lsh.frame_times == std::vector<double>{0.1, 0.4, 0.7, 1.0});
    CHECK(lsh.T == 1.2);
    const SimConfig lnu = preset("lshape-nonuniform");
    CHECK(lnu.sigma_field.rfind("barrier", 0) == 0);
    CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("ellipse theta is given in degrees") {
    SimConfig c = preset("cardioid");
    CHECK(c.theta_deg == 45.0);
    const ShapeSpec s = c.to_shape();
    CHECK(s.theta == Approx(kPi / 4.0));
}
