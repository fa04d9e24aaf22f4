#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "jdisc/errors.hpp"
#include "jdisc/grid.hpp"
#include "jdisc/quad1d.hpp"

namespace jdisc {

/// The phase function <w> = w-bar / w, unimodular away from the origin.
inline Complex phase(Complex w) {
    require(w != Complex(0.0), ErrorKind::undefined_phase, "phase: undefined at w = 0");
    return std::conj(w) / w;
}

inline Complex phase_pow(Complex w, int n) {
    Complex p = phase(w);
    Complex r = 1.0;
    for (int i = 0; i < n; ++i) r *= p;
    return r;
}

/// Real coefficients c_{kj}, 1 <= k <= n, 1 <= j <= n+1, expressing the phase
/// of w^n (w - w0) through phases of shifted binomials:
///   <w^n (w - w0)> = <w0 w^n> + <w0^n (w - w0)>
///                  + sum_{k,j} c_{kj} <w0>^{n+1-j} int_0^1 <w - w0 t>^j (1-t)^{k-1} dt.
struct BinomialDecompCoeffs {
    int n = 0;
    Eigen::MatrixXd c;       // row k-1, column j-1
    double fit_residual = 0; // max abs identity error on held-out pairs
    std::uint64_t seed = 0;
};

namespace detail {

// int_0^1 <w - w0 t>^j (1 - t)^{k-1} dt. The integrand is unimodular; when
// the segment w - w0 t passes near the origin its argument varies fast, so
// the interval is split at the closest-approach parameter before the
// adaptive routine sees it.
inline Complex binomial_basis_integral(int j, int k, Complex w, Complex w0, double tol = 1e-9) {
    auto f = [&](double t) -> Complex {
        const Complex v = w - w0 * t;
        Complex ph = std::conj(v) / v;
        Complex r = 1.0;
        for (int i = 0; i < j; ++i) r *= ph;
        for (int i = 0; i < k - 1; ++i) r *= (1.0 - t);
        return r;
    };
    const double n0 = std::norm(w0);
    if (n0 > 0) {
        const double tstar = (w.real() * w0.real() + w.imag() * w0.imag()) / n0;
        if (tstar > 1e-12 && tstar < 1.0 - 1e-12 && std::abs(w - w0 * tstar) < 0.1)
            return integrate_adaptive(f, 0.0, tstar, 0.5 * tol) +
                   integrate_adaptive(f, tstar, 1.0, 0.5 * tol);
    }
    return integrate_adaptive(f, 0.0, 1.0, tol);
}

inline Complex binomial_lhs_minus_explicit(int n, Complex w, Complex w0) {
    return phase_pow(w, n) * phase(w - w0) - phase(w0 * std::pow(w, n)) -
           phase_pow(w0, n) * phase(w - w0);
}

// Distance from the segment {w - w0 t : t in [0,1]} to the origin.
inline double segment_origin_distance(Complex w, Complex w0) {
    const double n0 = std::norm(w0);
    double best = std::min(std::abs(w), std::abs(w - w0));
    if (n0 > 0) {
        const double tstar = (w.real() * w0.real() + w.imag() * w0.imag()) / n0;
        if (tstar > 0.0 && tstar < 1.0) best = std::min(best, std::abs(w - w0 * tstar));
    }
    return best;
}

} // namespace detail

/// Right side of the binomial phase identity with the given coefficients.
inline Complex binomial_phase_rhs(const BinomialDecompCoeffs& coeffs, Complex w0, Complex w) {
    require(w0 != Complex(0.0), ErrorKind::undefined_phase, "binomial_phase_rhs: w0 = 0");
    require(w != Complex(0.0) && w != w0, ErrorKind::undefined_phase,
            "binomial_phase_rhs: w coincides with a degenerate point");
    const int n = coeffs.n;
    Complex acc = phase(w0 * std::pow(w, n)) + phase_pow(w0, n) * phase(w - w0);
    for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= n + 1; ++j)
            acc += coeffs.c(k - 1, j - 1) * phase_pow(w0, n + 1 - j) *
                   detail::binomial_basis_integral(j, k, w, w0);
    return acc;
}

/// Max identity error |<w^n (w-w0)> - RHS| over the given validation pairs.
inline double binomial_identity_error(const BinomialDecompCoeffs& coeffs,
                                      const std::vector<std::pair<Complex, Complex>>& pairs) {
    double worst = 0.0;
    for (const auto& [w, w0] : pairs) {
        const Complex lhs = phase_pow(w, coeffs.n) * phase(w - w0);
        worst = std::max(worst, std::abs(lhs - binomial_phase_rhs(coeffs, w0, w)));
    }
    return worst;
}

/// Least-squares extraction of the c_{kj} from explicit sample pairs (w, w0).
/// The identity is exact, so a consistent fit drives the residual to
/// quadrature precision; the residual reported comes from the held-out pairs.
inline BinomialDecompCoeffs fit_binomial_coeffs_from_samples(
    int n, const std::vector<std::pair<Complex, Complex>>& train,
    const std::vector<std::pair<Complex, Complex>>& holdout, std::uint64_t seed = 0) {
    require(n >= 1 && n <= 6, ErrorKind::invalid_argument,
            "fit_binomial_coeffs: n must lie in [1, 6]");
    const int cols = n * (n + 1);
    require(static_cast<int>(train.size()) * 2 >= 2 * cols, ErrorKind::invalid_argument,
            "fit_binomial_coeffs: not enough samples");
    const int m = static_cast<int>(train.size());
    Eigen::MatrixXd design(2 * m, cols);
    Eigen::VectorXd target(2 * m);
    for (int s = 0; s < m; ++s) {
        const auto& [w, w0] = train[s];
        const Complex lhs = detail::binomial_lhs_minus_explicit(n, w, w0);
        target(2 * s) = lhs.real();
        target(2 * s + 1) = lhs.imag();
        for (int k = 1; k <= n; ++k)
            for (int j = 1; j <= n + 1; ++j) {
                const int col = (k - 1) * (n + 1) + (j - 1);
                const Complex b =
                    phase_pow(w0, n + 1 - j) * detail::binomial_basis_integral(j, k, w, w0);
                design(2 * s, col) = b.real();
                design(2 * s + 1, col) = b.imag();
            }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-8);
    if (qr.rank() < cols)
        fail(ErrorKind::degenerate_fit,
             "fit_binomial_coeffs: design matrix rank-deficient; draw more (or more varied) samples");
    Eigen::VectorXd sol = qr.solve(target);
    BinomialDecompCoeffs out;
    out.n = n;
    out.seed = seed;
    out.c.resize(n, n + 1);
    for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= n + 1; ++j) out.c(k - 1, j - 1) = sol((k - 1) * (n + 1) + (j - 1));
    out.fit_residual = binomial_identity_error(out, holdout);
    return out;
}

/// Draws admissible sample pairs and fits the coefficients; a quarter of the
/// draw (at least 50 pairs) is held out for the residual certificate.
inline BinomialDecompCoeffs fit_binomial_coeffs(int n, int sample_count, std::uint64_t seed) {
    require(n >= 1 && n <= 6, ErrorKind::invalid_argument,
            "fit_binomial_coeffs: n must lie in [1, 6]");
    require(sample_count >= 20 * n * n, ErrorKind::invalid_argument,
            "fit_binomial_coeffs: sample_count must be >= 20 n^2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw_pair = [&]() -> std::pair<Complex, Complex> {
        while (true) {
            const Complex w0 = std::polar(0.1 + 0.9 * unif(rng), 2.0 * kPi * unif(rng));
            const Complex w(4.0 * unif(rng) - 2.0, 4.0 * unif(rng) - 2.0);
            if (std::abs(w) > 2.0 || std::abs(w) < 0.05) continue;
            if (std::abs(w - w0) < 0.05) continue;
            if (detail::segment_origin_distance(w, w0) < 0.02) continue;
            return {w, w0};
        }
    };
    std::vector<std::pair<Complex, Complex>> train(sample_count);
    for (auto& p : train) p = draw_pair();
    const int holdout_count = std::max(50, sample_count / 4);
    std::vector<std::pair<Complex, Complex>> holdout(holdout_count);
    for (auto& p : holdout) p = draw_pair();
    return fit_binomial_coeffs_from_samples(n, train, holdout, seed);
}

} // namespace jdisc
