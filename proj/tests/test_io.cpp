#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "jdisc/io.hpp"

using namespace jdisc;

TEST_CASE("grid function JSON roundtrip") {
    auto g = make_polar_grid(8, 16);
    GridFunction u = sample([](Complex w) { return w * w + std::conj(w); }, g);
    json j = to_json(u);
    CHECK(j["radial_count"] == 8);
    CHECK(j["angular_count"] == 16);
    GridFunction back = grid_function_from_json(j);
    for (int k = 0; k < g->node_count(); ++k)
        CHECK(std::abs(back.values[k] - u.values[k]) == 0.0);
}

TEST_CASE("grid function CSV layout") {
    auto g = make_polar_grid(4, 8);
    GridFunction u = sample([](Complex w) { return 2.0 * w; }, g);
    std::ostringstream os;
    write_csv(u, os);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "re_w,im_w,re_val,im_val");
    int rows = 0;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == g->node_count());
}

TEST_CASE("binomial coefficient JSON roundtrip keyed by n and seed") {
    BinomialDecompCoeffs c;
    c.n = 2;
    c.seed = 77;
    c.fit_residual = 1.5e-7;
    c.c.resize(2, 3);
    c.c << 1.0, -2.0, 3.0, 0.5, 0.25, -0.125;
    json j = to_json(c);
    CHECK(j["n"] == 2);
    CHECK(j["seed"] == 77);
    BinomialDecompCoeffs back = binomial_coeffs_from_json(j);
    CHECK(back.c == c.c);
    CHECK(back.fit_residual == c.fit_residual);
}

TEST_CASE("solver config parsing from JSON") {
    auto g = make_polar_grid(8, 16);
    json j{{"max_iterations", 33},
           {"contraction_tol", 1e-9},
           {"damping", 0.5},
           {"residual_tol", 0.05},
           {"correction_rule", "cell-average"}};
    SolverConfig cfg = solver_config_from_json(j, g);
    CHECK(cfg.max_iterations == 33);
    CHECK(cfg.contraction_tol == 1e-9);
    CHECK(cfg.damping == 0.5);
    CHECK(cfg.residual_tol == 0.05);
    CHECK(cfg.quadrature.correction_rule == KernelQuadratureConfig::CorrectionRule::cell_average);
    CHECK_THROWS_AS(solver_config_from_json(json{{"correction_rule", "bogus"}}, g), Error);
}

TEST_CASE("structure matrices roundtrip as row-major complex pairs") {
    Matrix2c m;
    m << Complex(0.1, -0.2), Complex(0.3, 0.0), Complex(0.0, 0.25), Complex(-0.4, 0.1);
    AcsMatrix a = make_acs(m);
    json j = to_json(a);
    REQUIRE(j["a"].size() == 4);
    CHECK(complex_from_json(j["a"][1]) == m(0, 1)); // row-major order
    AcsMatrix back = acs_from_json(j);
    CHECK((back.a - m).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.admissibility_margin == Catch::Approx(a.admissibility_margin));
}

TEST_CASE("area lemma result serializes with its seed") {
    AreaLemmaResult r;
    r.seed = 424242;
    r.sample_count = 10000;
    r.measured_area = 0.031;
    json j = to_json(r);
    CHECK(j["seed"] == 424242);
    CHECK(j["sample_count"] == 10000);
}
