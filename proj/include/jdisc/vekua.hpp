#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "jdisc/errors.hpp"
#include "jdisc/grid.hpp"
#include "jdisc/singint.hpp"

namespace jdisc {

/// Max interior-node defect of the generalized Cauchy-Riemann equation
/// h_wbar = mu conj(h); zero (at grid resolution) means h is a generalized
/// analytic function for mu.
inline double vekua_residual(const GridFunction& h, const GridFunction& mu) {
    require_same_grid(h, mu, "vekua_residual");
    GridFunction lhs = dbar(h);
    GridFunction rhs = zip(mu, h, [](Complex m, Complex hv) { return m * std::conj(hv); });
    return max_interior_abs_diff(lhs, rhs);
}

/// Similarity decomposition h = phi e^{Tu} with phi holomorphic and
/// u = mu conj(h)/h the logarithmic-difference density.
struct VekuaDecomposition {
    GridFunction phi;
    GridFunction tu;
    GridFunction u;
    int zero_count = 0;
    double zero_count_confidence = 0.0;
    double dbar_phi_residual = 0.0;
    CircleFunction phi_trace; // boundary trace of phi, used for root location
};

struct SimilarityOptions {
    double residual_tol = 5e-2;   // gate on vekua_residual
    double zero_eps = 1e-12;      // |h| below this counts as a zero node for u
    double boundary_rel_floor = 1e-6;
};

struct ZeroCountResult {
    int count = 0;
    double confidence = 0.0; // distance of the raw argument increment from an integer
};

/// Argument-principle count of zeros enclosed by a boundary trace.
inline ZeroCountResult count_zeros(const CircleFunction& boundary_values,
                                   double min_modulus = -1.0) {
    double scale = 0.0;
    for (const auto& v : boundary_values.values) scale = std::max(scale, std::abs(v));
    if (min_modulus < 0.0) min_modulus = std::max(1e-300, 1e-8 * scale);
    const WindingResult w = winding_of_trace(boundary_values, min_modulus);
    return {w.winding, w.confidence};
}

/// Overload sharing a prebuilt transform (its moment tables are reused
/// across decompositions on the same grid).
inline VekuaDecomposition similarity_decompose_with_operator(const GridFunction& h,
                                                             const GridFunction& mu,
                                                             const CauchyGreenOperator& op,
                                                             const SimilarityOptions& opts = {}) {
    require_same_grid(h, mu, "similarity_decompose");
    require_grid_match(h, op.grid(), "similarity_decompose");
    const double residual = vekua_residual(h, mu);
    require(residual <= opts.residual_tol, ErrorKind::not_generalized_analytic,
            "similarity_decompose: vekua residual " + std::to_string(residual) +
                " exceeds threshold");

    const CircleFunction h_trace = boundary_trace(h);
    const double h_scale = max_abs(h);
    double trace_min = std::numeric_limits<double>::infinity();
    for (const auto& v : h_trace.values) trace_min = std::min(trace_min, std::abs(v));
    require(trace_min > std::max(1e-14, opts.boundary_rel_floor * h_scale),
            ErrorKind::boundary_zero, "similarity_decompose: h vanishes on the boundary circle");

    VekuaDecomposition dec;
    dec.u = zip(mu, h, [&](Complex m, Complex hv) {
        return std::abs(hv) < opts.zero_eps ? Complex(0.0) : m * std::conj(hv) / hv;
    });

    dec.tu = op.transform_grid(dec.u);
    dec.phi = zip(h, dec.tu, [](Complex hv, Complex t) { return hv * std::exp(-t); });

    // Boundary trace of phi from the h trace and T u evaluated on the circle.
    const int A = h.grid->angular_count;
    std::vector<Complex> circle(A);
    for (int k = 0; k < A; ++k) circle[k] = std::polar(1.0, 2.0 * kPi * k / A);
    const std::vector<Complex> tu_circle = op.transform(dec.u.values, circle);
    dec.phi_trace = CircleFunction(A);
    for (int k = 0; k < A; ++k) dec.phi_trace.values[k] = h_trace.values[k] * std::exp(-tu_circle[k]);

    const ZeroCountResult zc = count_zeros(dec.phi_trace);
    dec.zero_count = zc.count;
    dec.zero_count_confidence = zc.confidence;
    dec.dbar_phi_residual = max_interior_abs_diff(dbar(dec.phi), GridFunction(h.grid));
    return dec;
}

inline VekuaDecomposition similarity_decompose(const GridFunction& h, const GridFunction& mu,
                                               const KernelQuadratureConfig& cfg = {},
                                               const SimilarityOptions& opts = {}) {
    CauchyGreenOperator op(h.grid, cfg);
    return similarity_decompose_with_operator(h, mu, op, opts);
}

/// Normalized decomposition h = phi0 p e^{Tu} with p monic collecting the
/// zeros and phi0 bounded away from zero.
struct NormalizedDecomposition {
    GridFunction phi0;
    std::vector<Complex> monic_roots;
    GridFunction tu;
    struct Bounds {
        double sup_phi0 = 0.0;
        double inf_phi0 = 0.0;
        double tu_lipschitz = 0.0;
    } bounds;
};

namespace detail {

// Power sums of the enclosed zeros from the boundary trace of a holomorphic
// function: s_m = (1/2 pi i) oint zeta^m phi'/phi d zeta, with the angular
// derivative taken by fourth-order periodic differences.
inline std::vector<Complex> trace_power_sums(const CircleFunction& trace, int count) {
    const int A = trace.angular_count;
    std::vector<Complex> dtheta(A);
    const double h = 2.0 * kPi / A;
    for (int k = 0; k < A; ++k) {
        const Complex p1 = trace.values[(k + 1) % A], m1 = trace.values[(k + A - 1) % A];
        const Complex p2 = trace.values[(k + 2) % A], m2 = trace.values[(k + A - 2) % A];
        dtheta[k] = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    }
    std::vector<Complex> sums(count, Complex(0.0));
    for (int m = 1; m <= count; ++m) {
        Complex acc(0.0);
        for (int k = 0; k < A; ++k) {
            Complex zm = 1.0;
            const Complex zk = trace.point(k);
            for (int i = 0; i < m; ++i) zm *= zk;
            acc += zm * dtheta[k] / trace.values[k];
        }
        sums[m - 1] = acc * h / (2.0 * kPi * Complex(0.0, 1.0));
    }
    return sums;
}

// Monic polynomial coefficients from power sums via Newton's identities,
// then roots from the companion matrix.
inline std::vector<Complex> roots_from_power_sums(const std::vector<Complex>& s) {
    const int n = static_cast<int>(s.size());
    std::vector<Complex> e(n + 1, Complex(0.0));
    e[0] = 1.0;
    for (int m = 1; m <= n; ++m) {
        Complex acc(0.0);
        double sign = 1.0;
        for (int i = 1; i <= m; ++i) {
            acc += sign * e[m - i] * s[i - 1];
            sign = -sign;
        }
        e[m] = acc / static_cast<double>(m);
    }
    // p(w) = sum coeff[i] w^i with coeff[n] = 1, coeff[n-i] = (-1)^i e_i.
    std::vector<Complex> coeff(n + 1);
    coeff[n] = 1.0;
    for (int i = 1; i <= n; ++i) coeff[n - i] = (i % 2 ? -e[i] : e[i]);
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -coeff[i];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
    std::vector<Complex> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = es.eigenvalues()(i);
    return roots;
}

} // namespace detail

/// Max |u(x) - u(y)| / |x - y| over grid-adjacent node pairs. Pairs touching
/// a masked node are skipped (masked nodes carry extension values whose
/// grid-scale error is not part of the field's regularity).
inline double grid_lipschitz_estimate(const GridFunction& u,
                                      const std::vector<std::uint8_t>* mask = nullptr) {
    const auto& g = *u.grid;
    double lip = 0.0;
    auto masked = [&](int k) { return mask && (*mask)[k]; };
    for (int i = 0; i < g.radial_count; ++i)
        for (int j = 0; j < g.angular_count; ++j) {
            if (masked(g.index(i, j))) continue;
            const Complex x = g.node(i, j);
            const Complex ux = u.at(i, j);
            if (i + 1 < g.radial_count && !masked(g.index(i + 1, j)))
                lip = std::max(lip, std::abs(u.at(i + 1, j) - ux) / std::abs(g.node(i + 1, j) - x));
            const int jp = (j + 1) % g.angular_count;
            if (!masked(g.index(i, jp)))
                lip = std::max(lip, std::abs(u.at(i, jp) - ux) / std::abs(g.node(i, jp) - x));
        }
    return lip;
}

inline NormalizedDecomposition normalized_decompose_with_operator(
    const GridFunction& h, const GridFunction& mu, double eps, const CauchyGreenOperator& op,
    const SimilarityOptions& opts = {}) {
    require(eps > 0.0, ErrorKind::invalid_argument, "normalized_decompose: eps must be positive");
    const auto& g = *h.grid;
    for (int k = 0; k < g.node_count(); ++k)
        if (std::abs(g.nodes[k]) > 0.5 && std::abs(h.values[k]) <= eps)
            fail(ErrorKind::hypothesis_violation,
                 "normalized_decompose: |h| <= eps at a node with |w| > 1/2");

    VekuaDecomposition dec = similarity_decompose_with_operator(h, mu, op, opts);
    const int n = dec.zero_count;

    NormalizedDecomposition out;
    out.tu = dec.tu;

    std::vector<Complex> roots;
    const CircleCauchyEvaluator phi_eval(dec.phi_trace);
    if (n > 0) {
        roots = detail::roots_from_power_sums(detail::trace_power_sums(dec.phi_trace, n));
        // Newton polish on the holomorphic factor reconstructed from its trace.
        double phi_scale = 0.0;
        for (const auto& v : dec.phi_trace.values) phi_scale = std::max(phi_scale, std::abs(v));
        for (auto& root : roots) {
            Complex w = root;
            for (int it = 0; it < 12; ++it) {
                if (std::abs(w) > 0.9) break;
                const Complex fv = phi_eval(w);
                const Complex dv = phi_eval.derivative(w);
                if (std::abs(dv) < 1e-300) break;
                const Complex step = fv / dv;
                w -= step;
                if (std::abs(step) < 1e-13) break;
            }
            if (std::abs(w) < 0.95 && std::abs(phi_eval(w)) < std::abs(phi_eval(root))) root = w;
            if (std::abs(phi_eval(root)) > 1e-4 * phi_scale)
                fail(ErrorKind::root_finding,
                     "normalized_decompose: located root does not annihilate phi");
            if (std::abs(root) >= 0.5)
                fail(ErrorKind::hypothesis_violation,
                     "normalized_decompose: zero located outside |w| < 1/2");
        }
    }
    out.monic_roots = roots;

    // phi0 = phi / p. Near the roots the direct quotient is 0/0, so there it
    // is evaluated through the boundary trace of phi/p (where the zeros have
    // cancelled) by the Cauchy integral; that route is only stable away from
    // the rim, which is exactly where the roots live. Away from them the
    // direct quotient is used.
    const int A = g.angular_count;
    CircleFunction phi0_trace(A);
    for (int k = 0; k < A; ++k) {
        const Complex zeta = phi0_trace.point(k);
        Complex p = 1.0;
        for (const auto& r : roots) p *= (zeta - r);
        phi0_trace.values[k] = dec.phi_trace.values[k] / p;
    }
    out.phi0 = GridFunction(h.grid);
    const CircleCauchyEvaluator phi0_eval(phi0_trace);
    for (int k = 0; k < g.node_count(); ++k) {
        const Complex w = g.nodes[k];
        if (std::abs(w) < 0.7) {
            out.phi0.values[k] = phi0_eval(w);
        } else {
            Complex p = 1.0;
            for (const auto& r : roots) p *= (w - r);
            out.phi0.values[k] = dec.phi.values[k] / p;
        }
    }

    double sup = 0.0, inf = std::numeric_limits<double>::infinity();
    for (const auto& v : out.phi0.values) {
        sup = std::max(sup, std::abs(v));
        inf = std::min(inf, std::abs(v));
    }
    out.bounds.sup_phi0 = sup;
    out.bounds.inf_phi0 = inf;
    require(inf > 0.0, ErrorKind::root_finding, "normalized_decompose: phi0 vanishes on the grid");
    out.bounds.tu_lipschitz = grid_lipschitz_estimate(out.tu);
    return out;
}

inline NormalizedDecomposition normalized_decompose(const GridFunction& h, const GridFunction& mu,
                                                    double eps,
                                                    const KernelQuadratureConfig& cfg = {},
                                                    const SimilarityOptions& opts = {}) {
    CauchyGreenOperator op(h.grid, cfg);
    return normalized_decompose_with_operator(h, mu, eps, op, opts);
}

/// Least-squares slope of log sup-distance of the tu family against
/// log parameter distance; the Holder exponent estimate of Tu in z.
struct HolderEstimate {
    double alpha_hat = 0.0;
    double fit_quality = 0.0; // R^2 of the log-log regression
};

inline HolderEstimate holder_exponent_estimate(
    const std::vector<std::pair<Complex, GridFunction>>& family, int pair_budget) {
    require(family.size() >= 8, ErrorKind::invalid_argument,
            "holder_exponent_estimate: need at least 8 parameter samples");
    require(pair_budget > 0, ErrorKind::invalid_argument,
            "holder_exponent_estimate: pair_budget must be positive");
    double scale = 0.0;
    for (const auto& [z, f] : family) scale = std::max(scale, max_abs(f));

    std::vector<std::pair<double, double>> pts; // (log dz, log dtu)
    const std::size_t m = family.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
    std::size_t stride = std::max<std::size_t>(1, pairs.size() / pair_budget);
    for (std::size_t idx = 0; idx < pairs.size(); idx += stride) {
        const auto& [i, j] = pairs[idx];
        const double dzn = std::abs(family[i].first - family[j].first);
        if (dzn < 1e-14) continue;
        double sup = 0.0;
        const auto& a = family[i].second.values;
        const auto& b = family[j].second.values;
        for (std::size_t k = 0; k < a.size(); ++k) sup = std::max(sup, std::abs(a[k] - b[k]));
        if (sup < 1e-13 * std::max(1.0, scale)) continue;
        pts.emplace_back(std::log(dzn), std::log(sup));
    }
    if (pts.empty()) return {1.0, 1.0}; // family constant in z: slope at the cap
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double np = static_cast<double>(pts.size());
    const double varx = sxx - sx * sx / np;
    if (varx < 1e-14) return {1.0, 0.0};
    const double slope = (sxy - sx * sy / np) / varx;
    const double vary = syy - sy * sy / np;
    double r2 = 1.0;
    if (vary > 1e-14) {
        const double cov = sxy - sx * sy / np;
        r2 = (cov * cov) / (varx * vary);
    }
    HolderEstimate est;
    est.alpha_hat = std::clamp(slope, 0.0, 1.0);
    est.fit_quality = r2;
    return est;
}

/// Monte Carlo verification data for the sublevel-set area bound
/// m{|p| < delta} <= pi n delta^{2/n} and the rotation bound
/// int int_E |w|^{-1} <= 2 (pi m(E))^{1/2}.
struct AreaLemmaResult {
    double measured_area = 0.0;
    double area_bound = 0.0;
    double area_se = 0.0;
    double measured_integral = 0.0;
    double integral_bound = 0.0;
    double integral_se = 0.0;
    std::uint64_t seed = 0;
    int sample_count = 0;
};

inline AreaLemmaResult area_lemma_check(const std::vector<Complex>& roots, double delta,
                                        int sample_count, std::uint64_t seed) {
    require(!roots.empty(), ErrorKind::invalid_argument, "area_lemma_check: no roots given");
    require(delta > 0.0, ErrorKind::invalid_argument, "area_lemma_check: delta must be positive");
    require(sample_count >= 10000, ErrorKind::invalid_argument,
            "area_lemma_check: sample_count must be >= 10^4");
    const int n = static_cast<int>(roots.size());
    double max_root = 0.0;
    for (const auto& r : roots) {
        require(std::abs(r) < 1.0, ErrorKind::invalid_argument,
                "area_lemma_check: roots must lie in the unit disc");
        max_root = std::max(max_root, std::abs(r));
    }
    // |p(w)| < delta forces |w - w_j| < delta^{1/n} for some j, so E lies in
    // this bounding disc.
    const double bound_radius = max_root + std::pow(delta, 1.0 / n);
    const double bound_area = kPi * bound_radius * bound_radius;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double s1 = 0, s1sq = 0, s2 = 0, s2sq = 0;
    for (int i = 0; i < sample_count; ++i) {
        const double rad = bound_radius * std::sqrt(unif(rng));
        const Complex w = std::polar(rad, 2.0 * kPi * unif(rng));
        Complex p = 1.0;
        for (const auto& r : roots) p *= (w - r);
        const double inside = std::abs(p) < delta ? 1.0 : 0.0;
        const double f2 = inside / std::max(std::abs(w), 1e-12);
        s1 += inside;
        s1sq += inside * inside;
        s2 += f2;
        s2sq += f2 * f2;
    }
    const double nN = static_cast<double>(sample_count);
    AreaLemmaResult res;
    res.seed = seed;
    res.sample_count = sample_count;
    res.measured_area = bound_area * s1 / nN;
    res.area_se = bound_area * std::sqrt(std::max(0.0, s1sq / nN - (s1 / nN) * (s1 / nN)) / nN);
    res.measured_integral = bound_area * s2 / nN;
    res.integral_se = bound_area * std::sqrt(std::max(0.0, s2sq / nN - (s2 / nN) * (s2 / nN)) / nN);
    res.area_bound = kPi * n * std::pow(delta, 2.0 / n);
    res.integral_bound = 2.0 * std::sqrt(kPi * std::max(0.0, res.measured_area));
    return res;
}

} // namespace jdisc
