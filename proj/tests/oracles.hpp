// Test-only oracles, independent of the library implementation paths they
// check: brute-force quadrature for the Cauchy-Green transform, a refined
// argument-principle count, and forward constructions of generalized
// analytic functions.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "jdisc/grid.hpp"
#include "jdisc/singint.hpp"

namespace oracles {

using jdisc::Complex;

/// Plain midpoint-rule Cauchy-Green transform on an independent (finer) polar
/// grid, skipping cells within one cell size of the target; no subtraction,
/// no shared code with CauchyGreenOperator.
inline Complex brute_cauchy_green(const std::function<Complex(Complex)>& f, Complex target,
                                  int radial, int angular) {
    const double dr = 1.0 / radial;
    const double dth = 2.0 * jdisc::kPi / angular;
    Complex acc(0.0);
    for (int i = 0; i < radial; ++i) {
        const double r = (i + 0.5) * dr;
        const double area = r * dr * dth;
        const double cell = std::sqrt(area);
        for (int j = 0; j < angular; ++j) {
            const Complex tau = std::polar(r, j * dth);
            if (std::abs(tau - target) < cell) continue;
            acc += f(tau) * area / (tau - target);
        }
    }
    return -acc / jdisc::kPi;
}

/// Argument-principle winding of f over a refined circle, independent of the
/// CircleFunction plumbing.
inline int brute_winding(const std::function<Complex(Complex)>& f, int samples = 4096) {
    double total = 0.0;
    Complex prev = f(Complex(1.0, 0.0));
    for (int k = 1; k <= samples; ++k) {
        const Complex cur = f(std::polar(1.0, 2.0 * jdisc::kPi * k / samples));
        total += std::arg(cur / prev);
        prev = cur;
    }
    return static_cast<int>(std::lround(total / (2.0 * jdisc::kPi)));
}

/// Forward-constructed generalized analytic function h = p(w) e^{T u0} with
/// mu = u0 h / conj(h), so that h_wbar = mu conj(h) holds by construction.
struct ConstructedPair {
    jdisc::GridFunction h;
    jdisc::GridFunction mu;
    jdisc::GridFunction tu0; // the exact logarithmic difference
};

inline ConstructedPair construct_pair(const jdisc::GridPtr& grid,
                                      const std::function<Complex(Complex)>& u0_fn,
                                      const std::vector<Complex>& roots,
                                      const jdisc::CauchyGreenOperator* shared_op = nullptr) {
    jdisc::GridFunction u0 = jdisc::sample(u0_fn, grid);
    std::optional<jdisc::CauchyGreenOperator> own;
    if (!shared_op) own.emplace(grid);
    const jdisc::CauchyGreenOperator& op = shared_op ? *shared_op : *own;
    ConstructedPair out{jdisc::GridFunction(grid), jdisc::GridFunction(grid),
                        op.transform_grid(u0)};
    for (int k = 0; k < grid->node_count(); ++k) {
        Complex p = 1.0;
        for (const auto& r : roots) p *= (grid->nodes[k] - r);
        out.h.values[k] = p * std::exp(out.tu0.values[k]);
        const Complex hv = out.h.values[k];
        out.mu.values[k] =
            std::abs(hv) < 1e-12 ? Complex(0.0) : u0.values[k] * hv / std::conj(hv);
    }
    return out;
}

/// Random polynomial in (w, conj w) with bounded coefficients; the stock of
/// smooth test densities.
inline std::function<Complex(Complex)> random_smooth_field(std::mt19937_64& rng,
                                                           double amplitude = 1.0) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<Complex> c;
    for (int i = 0; i < 6; ++i) c.emplace_back(unif(rng), unif(rng));
    const double norm = amplitude / 6.0;
    return [c, norm](Complex w) {
        const Complex wb = std::conj(w);
        return norm * (c[0] + c[1] * w + c[2] * wb + c[3] * w * w + c[4] * w * wb +
                       c[5] * wb * wb);
    };
}

} // namespace oracles
