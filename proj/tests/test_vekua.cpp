#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "jdisc/vekua.hpp"
#include "oracles.hpp"

using namespace jdisc;

TEST_CASE("vekua residual distinguishes solutions from non-solutions") {
    auto g = make_polar_grid(48, 96);
    GridFunction mu0(g);

    GridFunction holo = sample([](Complex w) { return w; }, g);
    CHECK(vekua_residual(holo, mu0) <= 2e-3);

    GridFunction anti = sample([](Complex w) { return std::conj(w); }, g);
    CHECK(vekua_residual(anti, mu0) == Catch::Approx(1.0).margin(1e-2));

    auto pair = oracles::construct_pair(g, [](Complex w) { return 0.3 * std::conj(w); }, {});
    CHECK(vekua_residual(pair.h, pair.mu) <= 2e-2);

    auto g2 = make_polar_grid(32, 64);
    CHECK_THROWS_AS(vekua_residual(holo, GridFunction(g2)), Error);
}

TEST_CASE("similarity decomposition of a plain holomorphic function") {
    auto g = make_polar_grid(48, 96);
    GridFunction h = sample([](Complex w) { return w; }, g);
    GridFunction mu(g);
    auto dec = similarity_decompose(h, mu);
    CHECK(max_abs(dec.tu) <= 1e-12);
    CHECK(dec.zero_count == 1);
    for (int k = 0; k < g->node_count(); ++k)
        CHECK(std::abs(dec.phi.values[k] - h.values[k]) <= 1e-12);
}

TEST_CASE("similarity decomposition recovers a constructed pair") {
    auto g = make_polar_grid(64, 128);
    std::mt19937_64 rng(8);
    auto pair = oracles::construct_pair(g, oracles::random_smooth_field(rng, 0.4), {});
    auto dec = similarity_decompose(pair.h, pair.mu);
    CHECK(dec.zero_count == 0);
    double rec = 0.0, phi_dev = 0.0;
    for (int k = 0; k < g->node_count(); ++k) {
        rec = std::max(rec, std::abs(dec.phi.values[k] * std::exp(dec.tu.values[k]) -
                                     pair.h.values[k]));
        phi_dev = std::max(phi_dev, std::abs(dec.phi.values[k] - Complex(1.0)));
    }
    CHECK(rec <= 3e-2);
    CHECK(phi_dev <= 3e-2);
    CHECK(dec.dbar_phi_residual <= 5e-2);
}

TEST_CASE("vanishing boundary data is refused") {
    auto g = make_polar_grid(16, 32);
    GridFunction zero(g);
    try {
        similarity_decompose(zero, zero);
        FAIL("expected boundary-zero");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::boundary_zero);
    }
}

TEST_CASE("residual threshold gates the decomposition") {
    auto g = make_polar_grid(32, 64);
    GridFunction h = sample([](Complex w) { return std::conj(w) + 2.0; }, g);
    GridFunction mu(g); // wrong mu: residual ~ 1
    try {
        similarity_decompose(h, mu);
        FAIL("expected not-generalized-analytic");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::not_generalized_analytic);
    }
}

TEST_CASE("argument-principle zero counts") {
    const int A = 256;
    auto make = [&](auto fn) { return sample_circle(fn, A); };
    CHECK(count_zeros(make([](Complex z) { return z * z * z; })).count == 3);
    CHECK(count_zeros(make([](Complex) { return Complex(5.0); })).count == 0);

    auto two = [](Complex z) { return (z - 0.3) * (z + 0.4); };
    CHECK(count_zeros(make(two)).count == 2);
    CHECK(oracles::brute_winding(two) == 2); // refined-circle oracle agrees

    CHECK_THROWS_AS(count_zeros(make([](Complex z) { return z - 1.0; })), Error);
}

TEST_CASE("normalized decomposition factors an explicit polynomial") {
    auto g = make_polar_grid(48, 96);
    GridFunction h = sample([](Complex w) { return w - 0.2; }, g);
    GridFunction mu(g);
    auto dec = normalized_decompose(h, mu, 0.05);
    REQUIRE(dec.monic_roots.size() == 1);
    CHECK(std::abs(dec.monic_roots[0] - Complex(0.2)) <= 1e-6);
    CHECK(std::abs(dec.bounds.sup_phi0 - 1.0) <= 1e-3);
    CHECK(std::abs(dec.bounds.inf_phi0 - 1.0) <= 1e-3);
}

TEST_CASE("normalized decomposition recovers a constructed two-zero pair") {
    auto g = make_polar_grid(64, 128);
    auto pair = oracles::construct_pair(
        g, [](Complex w) { return 0.25 * std::exp(-0.4 * w) * std::conj(w); },
        {Complex(0.1), Complex(-0.2)});
    auto dec = normalized_decompose(pair.h, pair.mu, 0.01);
    REQUIRE(dec.monic_roots.size() == 2);
    double e1 = 1e9, e2 = 1e9;
    for (const auto& r : dec.monic_roots) {
        e1 = std::min(e1, std::abs(r - Complex(0.1)));
        e2 = std::min(e2, std::abs(r - Complex(-0.2)));
    }
    CHECK(e1 <= 1e-3);
    CHECK(e2 <= 1e-3);
    CHECK(dec.bounds.inf_phi0 >= 0.9);
    // reconstruction h = phi0 p e^{Tu}
    double rec = 0.0;
    for (int k = 0; k < g->node_count(); ++k) {
        Complex p = 1.0;
        for (const auto& r : dec.monic_roots) p *= (g->nodes[k] - r);
        rec = std::max(rec, std::abs(dec.phi0.values[k] * p * std::exp(dec.tu.values[k]) -
                                     pair.h.values[k]));
    }
    CHECK(rec <= 3e-2);
}

TEST_CASE("a zero outside |w| < 1/2 violates the hypotheses") {
    auto g = make_polar_grid(48, 96);
    GridFunction h = sample([](Complex w) { return w - 0.7; }, g);
    GridFunction mu(g);
    try {
        normalized_decompose(h, mu, 0.05);
        FAIL("expected hypothesis-violation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::hypothesis_violation);
    }
}

TEST_CASE("zero count is stable under grid refinement") {
    for (auto [R, A] : {std::pair{32, 64}, std::pair{48, 96}, std::pair{64, 128}}) {
        auto g = make_polar_grid(R, A);
        auto pair = oracles::construct_pair(g, [](Complex w) { return 0.2 * std::conj(w); },
                                            {Complex(0.15, 0.1), Complex(-0.25, 0.05)});
        CHECK(similarity_decompose(pair.h, pair.mu).zero_count == 2);
    }
}

TEST_CASE("holder exponent estimator") {
    auto g = make_polar_grid(24, 48);
    std::vector<std::pair<Complex, GridFunction>> constant_family;
    GridFunction fixed = sample([](Complex w) { return std::exp(w); }, g);
    for (int i = 0; i < 9; ++i)
        constant_family.emplace_back(Complex(0.1 * i, 0.0), fixed);
    auto est0 = holder_exponent_estimate(constant_family, 100);
    CHECK(est0.alpha_hat == 1.0);

    std::vector<std::pair<Complex, GridFunction>> linear_family;
    for (int i = 0; i < 10; ++i) {
        const Complex z(0.05 * i, 0.0);
        linear_family.emplace_back(z, zip(fixed, fixed, [&](Complex f, Complex) { return z * f; }));
    }
    auto est1 = holder_exponent_estimate(linear_family, 100);
    CHECK(est1.alpha_hat >= 0.95);
    CHECK(est1.fit_quality >= 0.95);

    CHECK_THROWS_AS(holder_exponent_estimate({constant_family.begin(), constant_family.begin() + 4},
                                             100),
                    Error);
}

TEST_CASE("one-zero family has a positive exponent near 1/2") {
    auto g = make_polar_grid(32, 64);
    CauchyGreenOperator op(g);
    std::vector<std::pair<Complex, GridFunction>> family;
    for (int i = 0; i < 12; ++i) {
        const Complex z(-0.8 + 0.15 * i, 0.0);
        GridFunction u(g);
        for (int k = 0; k < g->node_count(); ++k) {
            const Complex h = g->nodes[k] - 0.5 * z;
            u.values[k] = std::abs(h) < 1e-12 ? Complex(0.0) : 0.3 * std::conj(h) / h;
        }
        family.emplace_back(z, op.transform_grid(u));
    }
    auto est = holder_exponent_estimate(family, 500);
    CHECK(est.alpha_hat >= 0.4);
    CHECK(est.fit_quality >= 0.8);
}

TEST_CASE("area lemma equality cases") {
    auto one = area_lemma_check({Complex(0.0)}, 0.1, 200000, 99);
    CHECK(std::abs(one.measured_area - kPi * 0.01) <= 3.0 * one.area_se + 1e-12);
    CHECK(one.area_bound == Catch::Approx(kPi * 0.01));
    // E is the disc of radius 0.1: integral = 2 pi r, and the rotation bound
    // is attained.
    CHECK(std::abs(one.measured_integral - 2.0 * kPi * 0.1) <= 3.0 * one.integral_se + 2e-3);
    CHECK(one.measured_integral <= one.integral_bound + 3.0 * one.integral_se);

    auto dbl = area_lemma_check({Complex(0.0), Complex(0.0)}, 0.04, 200000, 100);
    CHECK(std::abs(dbl.measured_area - kPi * 0.04) <= 3.0 * dbl.area_se);
    CHECK(dbl.area_bound == Catch::Approx(2.0 * kPi * 0.04));
    CHECK(dbl.measured_area <= dbl.area_bound);
}

TEST_CASE("area and rotation bounds hold for random root sets") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unif(-0.6, 0.6);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 1 + static_cast<int>(trial % 4);
        std::vector<Complex> roots;
        for (int i = 0; i < n; ++i) roots.emplace_back(unif(rng), unif(rng));
        for (double delta : {0.2, 0.05}) {
            auto res = area_lemma_check(roots, delta, 60000, 1000 + trial);
            CHECK(res.measured_area <= res.area_bound + 3.0 * res.area_se);
            CHECK(res.measured_integral <= res.integral_bound + 3.0 * res.integral_se);
        }
    }
}

TEST_CASE("area lemma input validation") {
    CHECK_THROWS_AS(area_lemma_check({Complex(0.0)}, 0.1, 100, 1), Error);
    CHECK_THROWS_AS(area_lemma_check({Complex(1.5)}, 0.1, 20000, 1), Error);
    CHECK_THROWS_AS(area_lemma_check({}, 0.1, 20000, 1), Error);
}

TEST_CASE("Holder seminorm of lambda <w>^n grows at most linearly in n") {
    auto g = make_polar_grid(48, 96);
    auto lambda = [](Complex w) { return 0.5 * w * (1.0 + 0.3 * std::conj(w)); };
    // sampled pairs, concentrated near the origin where the phase oscillates
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> pick(0, g->node_count() - 1);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < 20000; ++i) pairs.emplace_back(pick(rng), pick(rng));
    for (int i = 0; i + 1 < g->angular_count; ++i) pairs.emplace_back(i, i + 1); // inner ring
    auto seminorm = [&](int n) {
        double s = 0.0;
        for (auto [a, b] : pairs) {
            if (a == b) continue;
            const Complex wa = g->nodes[a], wb = g->nodes[b];
            Complex pa = 1.0, pb = 1.0;
            for (int i = 0; i < n; ++i) {
                pa *= std::conj(wa) / wa;
                pb *= std::conj(wb) / wb;
            }
            const double diff = std::abs(lambda(wa) * pa - lambda(wb) * pb);
            s = std::max(s, diff / std::sqrt(std::abs(wa - wb)));
        }
        return s;
    };
    const double base = seminorm(1);
    for (int n = 2; n <= 6; ++n) CHECK(seminorm(n) <= 1.6 * n * base);
}

TEST_CASE("Lipschitz constant of T(lambda <p>) is controlled by the Holder norm of lambda") {
    auto g = make_polar_grid(48, 96);
    CauchyGreenOperator op(g);
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    std::vector<double> ratios;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Complex> roots = {Complex(unif(rng), unif(rng)), Complex(unif(rng), unif(rng)),
                                      Complex(unif(rng), unif(rng))};
        auto lambda = [](Complex w) { return 0.4 * (w + 0.2); };
        GridFunction u(g);
        for (int k = 0; k < g->node_count(); ++k) {
            Complex p = 1.0;
            for (const auto& r : roots) p *= (g->nodes[k] - r);
            u.values[k] = std::abs(p) < 1e-13 ? Complex(0.0)
                                              : lambda(g->nodes[k]) * std::conj(p) / p;
        }
        const double lip = grid_lipschitz_estimate(op.transform_grid(u));
        // measured C^{1/2} norm of lambda on the disc (sup + seminorm scale)
        const double lam_norm = 0.4 * (1.2 + 1.0);
        ratios.push_back(lip / lam_norm);
    }
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    CHECK(hi <= 3.0 * lo); // the constant depends on (n, alpha), not the roots
}

TEST_CASE("normalized bounds depend on the zero count, not the locations") {
    auto g = make_polar_grid(48, 96);
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> unif(-0.3, 0.3);
    std::vector<double> sups, invs, lips;
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<Complex> roots = {Complex(unif(rng), unif(rng)),
                                      Complex(unif(rng), unif(rng))};
        auto pair = oracles::construct_pair(
            g, [](Complex w) { return 0.2 * std::conj(w) * std::exp(-0.3 * w); }, roots);
        auto dec = normalized_decompose(pair.h, pair.mu, 1e-4);
        sups.push_back(dec.bounds.sup_phi0);
        invs.push_back(1.0 / dec.bounds.inf_phi0);
        lips.push_back(dec.bounds.tu_lipschitz);
    }
    auto spread = [](const std::vector<double>& v) {
        return *std::max_element(v.begin(), v.end()) /
               std::max(1e-12, *std::min_element(v.begin(), v.end()));
    };
    CHECK(spread(sups) <= 3.0);
    CHECK(spread(invs) <= 3.0);
    CHECK(spread(lips) <= 3.0);
}
