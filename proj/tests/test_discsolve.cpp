#include <catch2/catch_amalgamated.hpp>

#include "jdisc/discsolve.hpp"

using namespace jdisc;

namespace {

StructureCoefficients zero_coeffs() {
    StructureCoefficients c;
    c.a = [](Complex, Complex) { return Complex(0.0); };
    c.b = [](Complex, Complex) { return Complex(0.0); };
    c.a0 = 0.0;
    return c;
}

StructureCoefficients half_w_coeffs() {
    StructureCoefficients c;
    c.a = [](Complex, Complex w) { return 0.5 * w; };
    c.b = [](Complex, Complex) { return Complex(0.0); };
    c.a0 = 0.55;
    c.lipschitz_w = 0.5;
    return c;
}

SolverConfig config(int R, int A, double damping = 1.0) {
    SolverConfig cfg;
    cfg.grid = make_polar_grid(R, A);
    cfg.damping = damping;
    return cfg;
}

} // namespace

TEST_CASE("solver config invariants") {
    SolverConfig cfg = config(16, 32);
    cfg.contraction_tol = 1e-12;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.contraction_tol = 1e-10;
    cfg.damping = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("index-zero problem with zero data has the zero solution") {
    SolverConfig cfg = config(16, 32);
    GridFunction u = solve_rh_index0([](Complex, Complex) { return Complex(0.0); },
                                     [](Complex, Complex) { return Complex(0.0); }, 0.0, cfg);
    CHECK(max_abs(u) == 0.0);
}

TEST_CASE("index-zero problem with constant right side satisfies the contract") {
    SolverConfig cfg = config(128, 256);
    const Complex c(0.8, -0.4);
    GridFunction u = solve_rh_index0([c](Complex, Complex) { return c; },
                                     [](Complex, Complex) { return Complex(0.0); }, 0.0, cfg);
    GridFunction rhs(cfg.grid);
    for (auto& v : rhs.values) v = c;
    CHECK(max_interior_abs_diff(dbar(u), rhs) <= 2e-2);
    // u(1) = 0 after the gauge: the boundary value at 1 is T1[c](1) minus the
    // same imaginary constant, and Re T1 vanishes on the circle.
    CauchyGreenOperator op(cfg.grid, cfg.quadrature);
    std::vector<Complex> dens(cfg.grid->node_count(), c);
    const Complex at_one = op.modified(dens, {Complex(1.0)})[0];
    CHECK(std::abs(at_one - Complex(0.0, at_one.imag())) <= 1e-12);
}

TEST_CASE("engineered ellipticity breach is detected") {
    SolverConfig cfg = config(16, 32);
    auto rhs = [](Complex, Complex) { return Complex(3.0); };
    auto a_coef = [](Complex, Complex u) { return 0.99 * u / (1.0 + std::abs(u)); };
    try {
        solve_rh_index0(rhs, a_coef, 0.3, cfg);
        FAIL("expected ellipticity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ellipticity);
    }
}

TEST_CASE("trivial coefficients give the exact disc") {
    SolverConfig cfg = config(32, 64);
    DiscSolution sol = solve_disc(zero_coeffs(), 2, 0.5, 0.0, cfg);
    CHECK(max_abs(sol.u_fn) == 0.0);
    CHECK(max_abs(sol.v_fn) == 0.0);
    for (int k = 0; k < cfg.grid->node_count(); ++k) {
        const Complex zeta = cfg.grid->nodes[k];
        CHECK(std::abs(sol.z_fn.values[k] - zeta) <= 1e-14);
        CHECK(std::abs(sol.w_fn.values[k] - 0.5 * zeta * zeta) <= 1e-14);
    }
    CHECK(sol.diagnostics.winding_w == 2);
    CHECK(sol.diagnostics.jacobian_min > 0.0);
    CHECK(sol.diagnostics.boundary_err_z <= 1e-12);
    CHECK(sol.diagnostics.boundary_err_w <= 1e-12);
}

TEST_CASE("small radius tends to the central disc (zeta, 0)") {
    SolverConfig cfg = config(32, 64);
    DiscSolution sol = solve_disc(half_w_coeffs(), 1, 0.02, 0.0, cfg);
    CHECK(max_abs(sol.w_fn) <= 0.03);
    double zdev = 0.0;
    for (int k = 0; k < cfg.grid->node_count(); ++k)
        zdev = std::max(zdev, std::abs(sol.z_fn.values[k] - cfg.grid->nodes[k]));
    CHECK(zdev <= 0.05);
}

TEST_CASE("a = w/2 with b = 0 forces w = r zeta^n exactly") {
    SolverConfig cfg = config(48, 96);
    DiscSolution sol = solve_disc(half_w_coeffs(), 3, 0.5, 0.0, cfg);
    for (int k = 0; k < cfg.grid->node_count(); ++k) {
        const Complex zeta = cfg.grid->nodes[k];
        CHECK(std::abs(sol.w_fn.values[k] - 0.5 * zeta * zeta * zeta) <= 1e-13);
    }
    CHECK(sol.diagnostics.residual_z <= 1e-2);
    CHECK(sol.diagnostics.winding_w == 3);
    CHECK(sol.diagnostics.jacobian_min > 0.0);
    // normalization z(1) = 1, w(1) = r
    CHECK(std::abs(sol.z_boundary.values[0] - Complex(1.0)) <= 1e-10);
    CHECK(std::abs(sol.w_boundary.values[0] - Complex(0.5)) <= 1e-10);
}

TEST_CASE("two different initial iterates converge to the same solution") {
    SolverConfig cfg = config(32, 64);
    cfg.contraction_tol = 1e-10;
    DiscSolution cold = solve_disc(half_w_coeffs(), 2, 0.5, 0.0, cfg);
    GridFunction u_seed(cfg.grid), v_seed(cfg.grid);
    for (auto& v : u_seed.values) v = Complex(0.05, -0.02);
    DiscSolution warm =
        solve_disc(half_w_coeffs(), 2, 0.5, 0.0, cfg, std::make_pair(u_seed, v_seed));
    double dist = 0.0;
    for (int k = 0; k < cfg.grid->node_count(); ++k)
        dist = std::max(dist, std::abs(cold.z_fn.values[k] - warm.z_fn.values[k]));
    CHECK(dist <= 10.0 * cfg.contraction_tol);
}

TEST_CASE("winding numbers of explicit traces") {
    const int A = 128;
    auto make = [&](auto fn) { return sample_circle(fn, A); };
    CHECK(winding_number(make([](Complex z) { return z * z; })).winding == 2);
    CHECK(winding_number(make([](Complex) { return Complex(2.0, 1.0); })).winding == 0);
    CHECK(winding_number(make([](Complex z) { return std::conj(z); })).winding == -1);
    CHECK_THROWS_AS(winding_number(make([](Complex z) { return z - 1.0; })), Error);
}

TEST_CASE("homotopy sweep with trivial coefficients steps by exactly dr") {
    SolverConfig cfg = config(32, 64);
    std::vector<double> radii = {0.2, 0.4, 0.6, 0.8, 1.0};
    auto sols = homotopy_sweep(zero_coeffs(), 2, 0.0, radii, cfg);
    REQUIRE(sols.size() == radii.size());
    for (std::size_t i = 1; i < sols.size(); ++i) {
        double bdist = 0.0;
        for (int k = 0; k < sols[i].w_boundary.angular_count; ++k)
            bdist = std::max(bdist, std::abs(sols[i].w_boundary.values[k] -
                                             sols[i - 1].w_boundary.values[k]));
        CHECK(std::abs(bdist - 0.2) <= 1e-10);
    }
}

TEST_CASE("sweep distances scale with the radius step for a = w/2") {
    SolverConfig cfg = config(48, 96);
    std::vector<double> radii = {0.2, 0.4, 0.6};
    auto sols = homotopy_sweep(half_w_coeffs(), 2, 0.0, radii, cfg);
    for (std::size_t i = 1; i < sols.size(); ++i) {
        double dist = 0.0;
        for (int k = 0; k < cfg.grid->node_count(); ++k) {
            dist = std::max(dist, std::abs(sols[i].z_fn.values[k] - sols[i - 1].z_fn.values[k]));
            dist = std::max(dist, std::abs(sols[i].w_fn.values[k] - sols[i - 1].w_fn.values[k]));
        }
        CHECK(dist <= 3.0 * 0.2);
    }
}

TEST_CASE("unsorted radii are rejected") {
    SolverConfig cfg = config(16, 32);
    CHECK_THROWS_AS(homotopy_sweep(zero_coeffs(), 1, 0.0, {0.5, 0.3}, cfg), Error);
    CHECK_THROWS_AS(homotopy_sweep(zero_coeffs(), 1, 0.0, {0.5, 1.5}, cfg), Error);
}

TEST_CASE("torus fill with product parametrization covers the torus") {
    SolverConfig cfg = config(16, 64);
    auto res = torus_fill_check(zero_coeffs(), 1, 0.5, 16, cfg);
    CHECK(res.coverage_fraction >= 0.95);
    auto res0 = torus_fill_check(zero_coeffs(), 0, 0.5, 16, cfg);
    CHECK(res0.coverage_fraction >= 0.95);
    CHECK_THROWS_AS(torus_fill_check(zero_coeffs(), 1, 0.5, 8, cfg), Error);
}

TEST_CASE("parameter validation of solve_disc") {
    SolverConfig cfg = config(16, 32);
    CHECK_THROWS_AS(solve_disc(zero_coeffs(), -1, 0.5, 0.0, cfg), Error);
    CHECK_THROWS_AS(solve_disc(zero_coeffs(), 1, 1.5, 0.0, cfg), Error);
    CHECK_THROWS_AS(solve_disc(zero_coeffs(), 1, 0.5, 7.0, cfg), Error);
}

TEST_CASE("structure coefficient hypotheses are spot-checked") {
    StructureCoefficients bad;
    bad.a = [](Complex, Complex) { return Complex(0.2); }; // a(z, 0) != 0
    bad.b = [](Complex, Complex) { return Complex(0.0); };
    bad.a0 = 0.5;
    CHECK_THROWS_AS(validate_structure_coefficients(bad), Error);

    StructureCoefficients breach;
    breach.a = [](Complex, Complex w) { return 0.9 * w; };
    breach.b = [](Complex, Complex) { return Complex(0.0); };
    breach.a0 = 0.2; // declared bound too small
    CHECK_THROWS_AS(validate_structure_coefficients(breach), Error);
}

TEST_CASE("manufactured coefficient reproduces its generating disc") {
    // z* = zeta e^{U*} with U* = c(conj zeta - zeta) is an exact solution for
    // an explicit coefficient a(w) once n = 1 ties zeta to w.
    const double c = 0.2, r = 0.6, t = 0.4;
    auto ustar = [c](Complex zeta) { return c * (std::conj(zeta) - zeta); };
    StructureCoefficients coeffs;
    coeffs.a = [=](Complex, Complex w) -> Complex {
        const Complex zeta = w * std::polar(1.0, -t) / r;
        const Complex u = ustar(zeta);
        const Complex zs = zeta * std::exp(u);
        return c * zs / (std::conj(std::exp(u)) * (1.0 - c * std::conj(zeta)));
    };
    coeffs.b = [](Complex, Complex) { return Complex(0.0); };
    coeffs.a0 = 0.5;
    double errs[2];
    int idx = 0;
    for (auto [R, A] : {std::pair{32, 64}, std::pair{64, 128}}) {
        SolverConfig cfg = config(R, A);
        cfg.contraction_tol = 1e-9;
        DiscSolution sol = solve_disc(coeffs, 1, r, t, cfg);
        double dev = 0.0;
        for (int k = 0; k < cfg.grid->node_count(); ++k) {
            const Complex zeta = cfg.grid->nodes[k];
            dev = std::max(dev, std::abs(sol.z_fn.values[k] - zeta * std::exp(ustar(zeta))));
        }
        errs[idx++] = dev;
    }
    CHECK(errs[0] <= 1e-3);
    CHECK(errs[0] / errs[1] >= 3.0); // second-order convergence to the exact disc
}

TEST_CASE("the disc solution satisfies the eliminated Beltrami equation") {
    SolverConfig cfg = config(48, 96);
    DiscSolution sol = solve_disc(half_w_coeffs(), 2, 0.5, 0.0, cfg);
    // Reinterpret w as a function of z through the diffeomorphism: solve the
    // 2x2 chain-rule system for (W_z, W_zbar) node by node.
    GridFunction z_dz = dz(sol.z_fn), z_db = dbar(sol.z_fn);
    GridFunction w_dz = dz(sol.w_fn), w_db = dbar(sol.w_fn);
    const auto& g = *cfg.grid;
    double worst = 0.0;
    for (int i = 1; i + 1 < g.radial_count; ++i)
        for (int j = 0; j < g.angular_count; ++j) {
            const int k = g.index(i, j);
            const Complex az = z_dz.values[k], bz = z_db.values[k];
            const Complex det = az * std::conj(az) - bz * std::conj(bz);
            const Complex wz =
                (w_dz.values[k] * std::conj(az) - w_db.values[k] * std::conj(bz)) / det;
            const Complex wzb = (w_db.values[k] * az - w_dz.values[k] * bz) / det;
            const Complex a = 0.5 * sol.w_fn.values[k];
            worst = std::max(worst, std::abs(wzb + a * wz)); // b = 0 here
        }
    CHECK(worst <= 5e-2);
}

TEST_CASE("decay envelope is finite and stable under refinement") {
    double envelopes[2];
    int idx = 0;
    for (auto [R, A] : {std::pair{32, 64}, std::pair{64, 128}}) {
        SolverConfig cfg = config(R, A);
        DiscSolution sol = solve_disc(half_w_coeffs(), 2, 0.5, 0.0, cfg);
        envelopes[idx++] = sol.diagnostics.decay_envelope_c;
    }
    CHECK(envelopes[0] > 0.0);
    CHECK(std::abs(envelopes[1] - envelopes[0]) <= 0.2 * envelopes[0]);
}
