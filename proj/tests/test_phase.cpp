#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "jdisc/phase.hpp"

using namespace jdisc;

TEST_CASE("phase function values and failure at the origin") {
    CHECK(phase(Complex(1.0)) == Complex(1.0));
    CHECK(std::abs(phase(Complex(0.0, 1.0)) - Complex(-1.0)) <= 1e-15);
    CHECK(std::abs(phase(Complex(1.0, 1.0)) - Complex(0.0, -1.0)) <= 1e-15);
    CHECK_THROWS_AS(phase(Complex(0.0)), Error);
}

TEST_CASE("phase is unimodular and multiplicative") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const Complex a(unif(rng), unif(rng)), b(unif(rng), unif(rng));
        if (std::abs(a) < 1e-3 || std::abs(b) < 1e-3) continue;
        CHECK(std::abs(std::abs(phase(a)) - 1.0) <= 1e-15);
        CHECK(std::abs(phase(a * b) - phase(a) * phase(b)) <= 1e-13);
    }
}

TEST_CASE("fitted n = 1 coefficients reproduce the exact identity") {
    auto coeffs = fit_binomial_coeffs(1, 60, 42);
    CHECK(coeffs.fit_residual <= 1e-6);
    // The proof's Taylor/partial-fraction bookkeeping gives c11 = -2, c12 = 1.
    CHECK(std::abs(coeffs.c(0, 0) + 2.0) <= 1e-6);
    CHECK(std::abs(coeffs.c(0, 1) - 1.0) <= 1e-6);
}

TEST_CASE("fitted n = 2 coefficients drive the residual down") {
    auto coeffs = fit_binomial_coeffs(2, 160, 7);
    CHECK(coeffs.fit_residual <= 1e-5);
}

TEST_CASE("degenerate sample sets are rejected") {
    std::vector<std::pair<Complex, Complex>> axis;
    for (int i = 0; i < 80; ++i)
        axis.emplace_back(Complex(1.5 + 0.001 * i, 0.0), Complex(0.5, 0.0));
    CHECK_THROWS_MATCHES(fit_binomial_coeffs_from_samples(1, axis, axis), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.kind() == ErrorKind::degenerate_fit;
                         }));
    CHECK_THROWS_AS(fit_binomial_coeffs(7, 2000, 1), Error);
    CHECK_THROWS_AS(fit_binomial_coeffs(2, 10, 1), Error);
}

TEST_CASE("positive-real collapse evaluates to 1") {
    auto coeffs = fit_binomial_coeffs(1, 80, 9);
    const Complex rhs = binomial_phase_rhs(coeffs, Complex(0.5, 0.0), Complex(1.5, 0.0));
    CHECK(std::abs(rhs - Complex(1.0)) <= 1e-6);
}

TEST_CASE("held-out validation of the identity and unimodularity of the RHS") {
    auto coeffs = fit_binomial_coeffs(1, 80, 123);
    std::mt19937_64 rng(321);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int tested = 0;
    while (tested < 60) {
        const Complex w0 = std::polar(0.1 + 0.9 * unif(rng), 2 * kPi * unif(rng));
        const Complex w(4 * unif(rng) - 2, 4 * unif(rng) - 2);
        if (std::abs(w) > 2.0 || std::abs(w) < 0.1 || std::abs(w - w0) < 0.1) continue;
        if (detail::segment_origin_distance(w, w0) < 0.05) continue;
        const Complex lhs = phase(w) * phase(w - w0);
        const Complex rhs = binomial_phase_rhs(coeffs, w0, w);
        CHECK(std::abs(lhs - rhs) <= 1e-5);
        CHECK(std::abs(std::abs(rhs) - 1.0) <= 1e-4);
        ++tested;
    }
}

TEST_CASE("two-factor phases decompose through the shifted binomial identity") {
    auto coeffs = fit_binomial_coeffs(1, 80, 5);
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> unif(-0.45, 0.45);
    int tested = 0;
    while (tested < 30) {
        const Complex w1(unif(rng), unif(rng)), w2(unif(rng), unif(rng));
        const Complex w(4 * unif(rng), 4 * unif(rng));
        const Complex v = w - w1;
        const Complex w0 = w2 - w1;
        if (std::abs(v) < 0.1 || std::abs(w0) < 0.1 || std::abs(v - w0) < 0.1) continue;
        if (detail::segment_origin_distance(v, w0) < 0.05) continue;
        const Complex lhs = phase((w - w1) * (w - w2));
        const Complex rhs = binomial_phase_rhs(coeffs, w0, v);
        CHECK(std::abs(lhs - rhs) <= 1e-4);
        ++tested;
    }
}

TEST_CASE("degenerate evaluation points are rejected") {
    auto coeffs = fit_binomial_coeffs(1, 60, 42);
    CHECK_THROWS_AS(binomial_phase_rhs(coeffs, Complex(0.0), Complex(1.0)), Error);
    CHECK_THROWS_AS(binomial_phase_rhs(coeffs, Complex(0.5), Complex(0.5)), Error);
    CHECK_THROWS_AS(binomial_phase_rhs(coeffs, Complex(0.5), Complex(0.0)), Error);
}
