#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "jdisc/errors.hpp"
#include "jdisc/grid.hpp"
#include "jdisc/singint.hpp"

namespace jdisc {

/// Coefficient pair (a, b) of the quasi-linear disc system
///   z_zetabar = a(z, w) conj(z)_zetabar,
///   w_zetabar = b(z, w) conj(z)_zetabar,
/// with the recorded ellipticity bound |a| <= a0 < 1 and a(z,0) = b(z,0) = 0.
struct StructureCoefficients {
    std::function<Complex(Complex, Complex)> a;
    std::function<Complex(Complex, Complex)> b;
    double a0 = 0.0;
    double lipschitz_w = 0.0;
};

/// Spot-checks the declared hypotheses on a coarse (z, w) lattice.
inline void validate_structure_coefficients(const StructureCoefficients& coeffs,
                                            double w_radius = 1.0) {
    require(static_cast<bool>(coeffs.a) && static_cast<bool>(coeffs.b),
            ErrorKind::invalid_argument, "StructureCoefficients: missing evaluators");
    require(coeffs.a0 >= 0.0 && coeffs.a0 < 1.0, ErrorKind::ellipticity,
            "StructureCoefficients: a0 must satisfy 0 <= a0 < 1");
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 8; ++j) {
            const Complex z = std::polar((i + 0.5) / 6.0, 2.0 * kPi * j / 8.0);
            const Complex az0 = coeffs.a(z, Complex(0.0));
            const Complex bz0 = coeffs.b(z, Complex(0.0));
            require(std::abs(az0) <= 1e-10 && std::abs(bz0) <= 1e-10,
                    ErrorKind::hypothesis_violation,
                    "StructureCoefficients: a(z,0) = 0, b(z,0) = 0 fails on the lattice");
            for (int k = 0; k < 6; ++k)
                for (int l = 0; l < 8; ++l) {
                    const Complex w = std::polar(w_radius * (k + 0.5) / 6.0, 2.0 * kPi * l / 8.0);
                    require(std::abs(coeffs.a(z, w)) <= coeffs.a0 + 1e-9, ErrorKind::ellipticity,
                            "StructureCoefficients: |a| exceeds the declared a0 on the lattice");
                }
        }
}

struct SolverConfig {
    GridPtr grid;
    int max_iterations = 80;
    double contraction_tol = 1e-10;
    double damping = 0.7;
    double residual_tol = 2e-2; // declared tolerance for the accepted diagnostics
    KernelQuadratureConfig quadrature;

    void validate() const {
        require(grid != nullptr, ErrorKind::invalid_argument, "SolverConfig: grid not set");
        require(max_iterations >= 1, ErrorKind::invalid_argument,
                "SolverConfig: max_iterations must be >= 1");
        require(contraction_tol >= 1e-10, ErrorKind::invalid_argument,
                "SolverConfig: contraction_tol must be >= 1e-10");
        require(damping > 0.0 && damping <= 1.0, ErrorKind::invalid_argument,
                "SolverConfig: damping must lie in (0, 1]");
        quadrature.validate();
    }
};

struct DiscDiagnostics {
    double residual_z = 0.0;
    double residual_w = 0.0;
    double boundary_err_z = 0.0;
    double boundary_err_w = 0.0;
    int winding_w = 0;
    double winding_confidence = 0.0;
    double jacobian_min = 0.0;
    double decay_envelope_c = 0.0; // max |w| / (r |zeta|^n)
    int iterations = 0;
    double final_update = 0.0;
};

/// A computed pseudo-holomorphic disc through the exponential ansatz
/// z = zeta e^u, w = r e^{it} zeta^n e^v.
struct DiscSolution {
    GridFunction z_fn, w_fn, u_fn, v_fn;
    struct Params {
        int n = 0;
        double r = 1.0;
        double t = 0.0;
    } params;
    DiscDiagnostics diagnostics;
    CircleFunction z_boundary, w_boundary;
};

/// Total argument increment of a non-vanishing circle trace divided by 2 pi.
inline WindingResult winding_number(const CircleFunction& trace, double min_modulus = -1.0) {
    double scale = 0.0;
    for (const auto& v : trace.values) scale = std::max(scale, std::abs(v));
    if (min_modulus < 0.0) min_modulus = std::max(1e-300, 1e-8 * scale);
    return winding_of_trace(trace, min_modulus);
}

/// Damped Picard solution of the index-zero Riemann-Hilbert problem
///   u_zbar + a_coef(z, u) u_z = rhs(z, u),  Re u = 0 on |z| = 1,  u(1) = 0,
/// through u <- T1[rhs - a_coef u_z] with finite-difference u_z.
inline GridFunction solve_rh_index0(const std::function<Complex(Complex, Complex)>& rhs,
                                    const std::function<Complex(Complex, Complex)>& a_coef,
                                    double a0, const SolverConfig& cfg,
                                    const std::optional<GridFunction>& initial = std::nullopt) {
    cfg.validate();
    require(a0 >= 0.0 && a0 < 1.0, ErrorKind::ellipticity,
            "solve_rh_index0: declared a0 must satisfy 0 <= a0 < 1");
    const auto& g = *cfg.grid;
    const int N = g.node_count();
    CauchyGreenOperator op(cfg.grid, cfg.quadrature);

    GridFunction u = initial.value_or(GridFunction(cfg.grid));
    require_grid_match(u, cfg.grid, "solve_rh_index0 initial iterate");

    const std::vector<Complex> gauge_target = {Complex(1.0, 0.0)};

    double diff = 0.0;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        GridFunction uz = dz(u);
        std::vector<Complex> density(N);
        for (int k = 0; k < N; ++k) {
            const Complex av = a_coef(g.nodes[k], u.values[k]);
            if (std::abs(av) > a0 + 1e-9)
                fail(ErrorKind::ellipticity,
                     "solve_rh_index0: |a_coef| breached the declared bound a0 mid-iteration");
            density[k] = rhs(g.nodes[k], u.values[k]) - av * uz.values[k];
        }
        std::vector<Complex> t1 = op.modified_nodes(density, gauge_target);
        const Complex gauge(0.0, t1[N].imag());
        diff = 0.0;
        for (int k = 0; k < N; ++k) {
            const Complex next = (1.0 - cfg.damping) * u.values[k] + cfg.damping * (t1[k] - gauge);
            diff = std::max(diff, std::abs(next - u.values[k]));
            u.values[k] = next;
        }
        if (diff < cfg.contraction_tol) return u;
        if (!std::isfinite(diff) || diff > 1e8)
            fail(ErrorKind::no_convergence, "solve_rh_index0: iteration diverged");
    }
    std::ostringstream os;
    os << "solve_rh_index0: no convergence within " << cfg.max_iterations
       << " iterations (last update " << diff << ")";
    fail(ErrorKind::no_convergence, os.str());
}

namespace detail {

inline Complex int_pow(Complex z, int n) {
    Complex r = 1.0;
    for (int i = 0; i < n; ++i) r *= z;
    return r;
}

} // namespace detail

/// Solves the quasi-linear system for the disc with |z| = 1, |w| = r on the
/// boundary, winding n and phase t, normalized by z(0) = 0, z(1) = 1,
/// w(1) = r e^{it}. The coupled logarithms (u, v) of the ansatz are iterated
/// with the boundary-adapted transform T1.
inline DiscSolution solve_disc_with_operator(
    const StructureCoefficients& coeffs, int n, double r, double t, const SolverConfig& cfg,
    const CauchyGreenOperator& op,
    const std::optional<std::pair<GridFunction, GridFunction>>& warm_start = std::nullopt,
    bool validate_coeffs = true) {
    cfg.validate();
    require(n >= 0, ErrorKind::invalid_argument, "solve_disc: n must be >= 0");
    require(r > 0.0 && r <= 1.0, ErrorKind::invalid_argument, "solve_disc: r must lie in (0, 1]");
    require(t >= 0.0 && t < 2.0 * kPi, ErrorKind::invalid_argument,
            "solve_disc: t must lie in [0, 2 pi)");
    if (validate_coeffs) validate_structure_coefficients(coeffs);

    const auto& g = *cfg.grid;
    const int N = g.node_count();
    const int A = g.angular_count;
    const Complex w_lead = std::polar(r, t);

    GridFunction u(cfg.grid), v(cfg.grid);
    if (warm_start) {
        u = warm_start->first;
        v = warm_start->second;
        require_grid_match(u, cfg.grid, "solve_disc warm start");
        require_grid_match(v, cfg.grid, "solve_disc warm start");
    }

    std::vector<Complex> zeta_pow_n(N);
    for (int k = 0; k < N; ++k) zeta_pow_n[k] = detail::int_pow(g.nodes[k], n);

    const std::vector<Complex> gauge_target = {Complex(1.0, 0.0)};

    std::vector<Complex> du(N), dv(N);
    auto fill_densities = [&](const GridFunction& uu, const GridFunction& vv, double& max_dv) {
        GridFunction uz = dz(uu);
        max_dv = 0.0;
        for (int k = 0; k < N; ++k) {
            const Complex zeta = g.nodes[k];
            const Complex eu = std::exp(uu.values[k]);
            const Complex ev = std::exp(vv.values[k]);
            const Complex zk = zeta * eu;
            const Complex wk = w_lead * zeta_pow_n[k] * ev;
            const Complex av = coeffs.a(zk, wk);
            if (std::abs(av) > std::min(coeffs.a0 + 1e-9, 1.0 - 1e-12))
                fail(ErrorKind::ellipticity,
                     "solve_disc: |a(z, w)| breached the ellipticity bound mid-iteration");
            const Complex z_zeta_conj = std::conj(eu * (1.0 + zeta * uz.values[k]));
            du[k] = av * z_zeta_conj / (zeta * eu);
            dv[k] = coeffs.b(zk, wk) * z_zeta_conj / (w_lead * zeta_pow_n[k] * ev);
            max_dv = std::max(max_dv, std::abs(dv[k]));
        }
    };

    int iterations = 0;
    double diff = 0.0;
    bool converged = false;
    Complex gauge_u(0.0), gauge_v(0.0);
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        iterations = it;
        double max_dv = 0.0;
        fill_densities(u, v, max_dv);
        std::vector<Complex> tu = op.modified_nodes(du, gauge_target);
        gauge_u = Complex(0.0, tu[N].imag());
        std::vector<Complex> tv;
        if (max_dv > 0.0) {
            tv = op.modified_nodes(dv, gauge_target);
            gauge_v = Complex(0.0, tv[N].imag());
        } else {
            tv.assign(N + 1, Complex(0.0));
            gauge_v = Complex(0.0);
        }
        diff = 0.0;
        for (int k = 0; k < N; ++k) {
            const Complex un = (1.0 - cfg.damping) * u.values[k] + cfg.damping * (tu[k] - gauge_u);
            const Complex vn = (1.0 - cfg.damping) * v.values[k] + cfg.damping * (tv[k] - gauge_v);
            diff = std::max(diff, std::abs(un - u.values[k]));
            diff = std::max(diff, std::abs(vn - v.values[k]));
            u.values[k] = un;
            v.values[k] = vn;
        }
        if (diff < cfg.contraction_tol) {
            converged = true;
            break;
        }
        if (!std::isfinite(diff) || diff > 1e8)
            fail(ErrorKind::no_convergence, "solve_disc: iteration diverged");
    }
    if (!converged) {
        std::ostringstream os;
        os << "solve_disc: no convergence within " << cfg.max_iterations
           << " iterations (last update " << diff << ")";
        fail(ErrorKind::no_convergence, os.str());
    }

    DiscSolution sol;
    sol.params = {n, r, t};
    sol.u_fn = u;
    sol.v_fn = v;
    sol.z_fn = GridFunction(cfg.grid);
    sol.w_fn = GridFunction(cfg.grid);
    for (int k = 0; k < N; ++k) {
        sol.z_fn.values[k] = g.nodes[k] * std::exp(u.values[k]);
        sol.w_fn.values[k] = w_lead * zeta_pow_n[k] * std::exp(v.values[k]);
    }

    // Diagnostics: the system residual is measured on the assembled solution
    // with the grid module's finite differences, independent of the ansatz.
    GridFunction z_db = dbar(sol.z_fn);
    GridFunction z_dz = dz(sol.z_fn);
    GridFunction w_db = dbar(sol.w_fn);
    double res_z = 0.0, res_w = 0.0, jac_min = std::numeric_limits<double>::infinity();
    double decay = 0.0;
    for (int i = 1; i + 1 < g.radial_count; ++i)
        for (int j = 0; j < A; ++j) {
            const int k = g.index(i, j);
            const Complex zk = sol.z_fn.values[k];
            const Complex wk = sol.w_fn.values[k];
            const Complex czdz = std::conj(z_dz.values[k]);
            res_z = std::max(res_z, std::abs(z_db.values[k] - coeffs.a(zk, wk) * czdz));
            res_w = std::max(res_w, std::abs(w_db.values[k] - coeffs.b(zk, wk) * czdz));
            jac_min = std::min(jac_min, std::norm(z_dz.values[k]) - std::norm(z_db.values[k]));
        }
    for (int k = 0; k < N; ++k)
        decay = std::max(decay, std::abs(sol.w_fn.values[k]) / (r * std::abs(zeta_pow_n[k])));

    // Boundary traces from the converged densities evaluated on the circle.
    double max_dv_final = 0.0;
    fill_densities(u, v, max_dv_final);
    std::vector<Complex> circle(A);
    for (int k = 0; k < A; ++k) circle[k] = std::polar(1.0, 2.0 * kPi * k / A);
    std::vector<Complex> ub = op.modified(du, circle);
    std::vector<Complex> vb(A, Complex(0.0));
    if (max_dv_final > 0.0) vb = op.modified(dv, circle);
    sol.z_boundary = CircleFunction(A);
    sol.w_boundary = CircleFunction(A);
    double berr_z = 0.0, berr_w = 0.0;
    for (int k = 0; k < A; ++k) {
        const Complex zeta = circle[k];
        sol.z_boundary.values[k] = zeta * std::exp(ub[k] - gauge_u);
        sol.w_boundary.values[k] = w_lead * detail::int_pow(zeta, n) * std::exp(vb[k] - gauge_v);
        berr_z = std::max(berr_z, std::abs(std::abs(sol.z_boundary.values[k]) - 1.0));
        berr_w = std::max(berr_w, std::abs(std::abs(sol.w_boundary.values[k]) - r));
    }

    sol.diagnostics.residual_z = res_z;
    sol.diagnostics.residual_w = res_w;
    sol.diagnostics.boundary_err_z = berr_z;
    sol.diagnostics.boundary_err_w = berr_w;
    sol.diagnostics.jacobian_min = jac_min;
    sol.diagnostics.decay_envelope_c = decay;
    sol.diagnostics.iterations = iterations;
    sol.diagnostics.final_update = diff;

    const WindingResult wr = winding_number(sol.w_boundary);
    sol.diagnostics.winding_w = wr.winding;
    sol.diagnostics.winding_confidence = wr.confidence;

    if (jac_min <= 0.0)
        fail(ErrorKind::degenerate_jacobian,
             "solve_disc: z is not a diffeomorphism (jacobian_min <= 0)");
    if (wr.winding != n)
        fail(ErrorKind::no_convergence, "solve_disc: boundary winding of w differs from n");
    if (res_z > cfg.residual_tol || res_w > cfg.residual_tol) {
        std::ostringstream os;
        os << "solve_disc: system residual (" << res_z << ", " << res_w
           << ") above the declared tolerance " << cfg.residual_tol;
        fail(ErrorKind::no_convergence, os.str());
    }
    return sol;
}

inline DiscSolution solve_disc(const StructureCoefficients& coeffs, int n, double r, double t,
                               const SolverConfig& cfg,
                               const std::optional<std::pair<GridFunction, GridFunction>>&
                                   warm_start = std::nullopt,
                               bool validate_coeffs = true) {
    CauchyGreenOperator op(cfg.grid, cfg.quadrature);
    return solve_disc_with_operator(coeffs, n, r, t, cfg, op, warm_start, validate_coeffs);
}

/// Sequential radius continuation, warm-starting each solve from the last.
inline std::vector<DiscSolution> homotopy_sweep(const StructureCoefficients& coeffs, int n,
                                                double t, const std::vector<double>& radii,
                                                const SolverConfig& cfg) {
    require(!radii.empty(), ErrorKind::invalid_argument, "homotopy_sweep: empty radius list");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        require(radii[i] > 0.0 && radii[i] <= 1.0, ErrorKind::invalid_argument,
                "homotopy_sweep: radii must lie in (0, 1]");
        if (i > 0)
            require(radii[i] > radii[i - 1], ErrorKind::invalid_argument,
                    "homotopy_sweep: radii must increase strictly");
    }
    validate_structure_coefficients(coeffs);
    cfg.validate();
    CauchyGreenOperator op(cfg.grid, cfg.quadrature);
    std::vector<DiscSolution> out;
    out.reserve(radii.size());
    std::optional<std::pair<GridFunction, GridFunction>> warm;
    for (double r : radii) {
        try {
            DiscSolution s = solve_disc_with_operator(coeffs, n, r, t, cfg, op, warm, false);
            warm = std::make_pair(s.u_fn, s.v_fn);
            out.push_back(std::move(s));
        } catch (const Error& e) {
            std::ostringstream os;
            os << e.what() << " (homotopy_sweep at radius " << r << ")";
            fail(e.kind(), os.str());
        }
    }
    return out;
}

/// Solves over equispaced boundary phases and bins the boundary images on the
/// (arg z, arg w) torus; coverage close to 1 realizes the filling property.
struct TorusFillResult {
    double coverage_fraction = 0.0;
    int bins_per_axis = 0;
    int t_samples = 0;
};

inline TorusFillResult torus_fill_check(const StructureCoefficients& coeffs, int n, double r,
                                        int t_samples, const SolverConfig& cfg) {
    require(t_samples >= 16, ErrorKind::invalid_argument,
            "torus_fill_check: t_samples must be >= 16");
    validate_structure_coefficients(coeffs);
    cfg.validate();
    CauchyGreenOperator op(cfg.grid, cfg.quadrature);
    const int A = cfg.grid->angular_count;
    const int bins = std::max(4, static_cast<int>(std::floor(
                                      std::sqrt(static_cast<double>(t_samples) * A / 8.0))));
    std::vector<uint8_t> hit(static_cast<std::size_t>(bins) * bins, 0);
    std::optional<std::pair<GridFunction, GridFunction>> warm;
    for (int s = 0; s < t_samples; ++s) {
        const double t = 2.0 * kPi * s / t_samples;
        DiscSolution sol = solve_disc_with_operator(coeffs, n, r, t, cfg, op, warm, false);
        warm = std::make_pair(sol.u_fn, sol.v_fn);
        for (int k = 0; k < A; ++k) {
            const double az = std::arg(sol.z_boundary.values[k]) / (2.0 * kPi) + 0.5;
            const double aw = std::arg(sol.w_boundary.values[k]) / (2.0 * kPi) + 0.5;
            int bz = std::min(bins - 1, static_cast<int>(az * bins));
            int bw = std::min(bins - 1, static_cast<int>(aw * bins));
            hit[static_cast<std::size_t>(bz) * bins + bw] = 1;
        }
    }
    std::size_t occupied = 0;
    for (auto h : hit) occupied += h;
    TorusFillResult res;
    res.coverage_fraction = static_cast<double>(occupied) / (static_cast<double>(bins) * bins);
    res.bins_per_axis = bins;
    res.t_samples = t_samples;
    return res;
}

} // namespace jdisc
