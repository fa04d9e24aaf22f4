#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <vector>

#include "jdisc/errors.hpp"
#include "jdisc/grid.hpp"
#include "jdisc/parallel.hpp"

namespace jdisc {

/// Controls quadrature of the Cauchy kernel near the target point.
///
/// polar_desingularized (default): cells within the exclusion distance of the
///   target are dropped from the sweep; the analytic kernel integral against
///   the local density model is restored through the subtraction step of the
///   transform.
/// cell_average: each cell is replaced by the equal-area disc centered at its
///   node, over which the kernel integrates in closed form, keeping the
///   near-field mass.
struct KernelQuadratureConfig {
    enum class CorrectionRule { polar_desingularized, cell_average };

    double singularity_exclusion_radius = 1.0; // in units of local cell size sqrt(area)
    CorrectionRule correction_rule = CorrectionRule::polar_desingularized;

    void validate() const {
        require(singularity_exclusion_radius >= 0.5 && singularity_exclusion_radius <= 4.0,
                ErrorKind::invalid_argument,
                "KernelQuadratureConfig: exclusion radius must lie in [0.5, 4]");
    }
};

namespace detail {

// Closed forms of the transform applied to the local model monomials,
// valid inside and outside the closed disc:
//   T[1]        = conj(w),          1/w
//   T[tau]      = |w|^2 - 1,        0
//   T[conj tau] = conj(w)^2 / 2,    1/(2 w^2)
inline Complex t_one_exact(Complex w) {
    return std::norm(w) <= 1.0 ? std::conj(w) : 1.0 / w;
}
inline Complex t_tau_exact(Complex w) {
    return std::norm(w) <= 1.0 ? Complex(std::norm(w) - 1.0) : Complex(0.0);
}
inline Complex t_ctau_exact(Complex w) {
    return std::norm(w) <= 1.0 ? 0.5 * std::conj(w) * std::conj(w) : 0.5 / (w * w);
}

} // namespace detail

/// Discretization of the Cauchy--Green transform
///   T u(w) = (1/2 pi i) int int_D u(tau) d tau ^ d tau-bar / (tau - w)
///          = -(1/pi)  int int_D u(tau) dA(tau) / (tau - w)
/// over a fixed polar grid, evaluable at arbitrary target points (also
/// outside the closed disc, which the reflected evaluation of T1 needs).
///
/// Accuracy comes from first-order singularity subtraction: with u*, a1, a2
/// the density value and its Wirtinger derivatives at the node nearest the
/// target, the local model u* + a1 (tau - w*) + a2 conj(tau - w*) is removed
/// from the kernel sweep and restored by closed forms. The density-free
/// kernel moment sums this needs are cached for the recurring target sets
/// (the grid nodes and their circle reflections), so a repeated application
/// costs one two-accumulator sweep per target set.
class CauchyGreenOperator {
public:
    explicit CauchyGreenOperator(GridPtr grid, KernelQuadratureConfig cfg = {})
        : grid_(std::move(grid)), cfg_(cfg) {
        cfg_.validate();
        const auto& g = *grid_;
        const int n = g.node_count();
        xr_.resize(n);
        xi_.resize(n);
        coef_.resize(n);
        near2_.resize(n);
        const bool avg = cfg_.correction_rule == KernelQuadratureConfig::CorrectionRule::cell_average;
        for (int k = 0; k < n; ++k) {
            xr_[k] = g.nodes[k].real();
            xi_[k] = g.nodes[k].imag();
            const double area = g.quadrature_weights[k];
            coef_[k] = -area / kPi;
            if (avg) {
                near2_[k] = area / kPi; // equal-area disc radius^2
            } else {
                const double d = cfg_.singularity_exclusion_radius * std::sqrt(area);
                near2_[k] = d * d;
            }
        }
        near_scale_ = avg ? -1.0 : 0.0;
    }

    const GridPtr& grid() const { return grid_; }
    const KernelQuadratureConfig& config() const { return cfg_; }

    /// Node nearest to w (any w; points outside the disc clamp to the rim).
    int nearest_node(Complex w) const {
        const auto& g = *grid_;
        const double r = std::abs(w);
        int ring = static_cast<int>(std::lround(r / g.dr - 0.5));
        ring = std::max(0, std::min(g.radial_count - 1, ring));
        const double th = std::arg(w);
        int spoke = static_cast<int>(std::lround(th / g.dtheta));
        spoke %= g.angular_count;
        if (spoke < 0) spoke += g.angular_count;
        return g.index(ring, spoke);
    }

    /// T u at arbitrary targets (general path: moments swept per call).
    std::vector<Complex> transform(const std::vector<Complex>& density,
                                   const std::vector<Complex>& targets) const {
        const LocalModel model = local_model(density);
        const Corrections corr = build_corrections(targets);
        std::vector<Complex> out(targets.size());
        density_sweep(model, targets, corr, out);
        return out;
    }

    Complex transform_at(const GridFunction& u, Complex w) const {
        require_grid(u);
        return transform(u.values, {w})[0];
    }

    /// T u on the grid nodes (fast path: cached moment table).
    GridFunction transform_grid(const GridFunction& u) const {
        require_grid(u);
        const LocalModel model = local_model(u.values);
        GridFunction out(grid_);
        density_sweep(model, grid_->nodes, node_corrections(), out.values);
        return out;
    }

    /// T1 u = T u(w) - conj(T u(1/conj(w))): satisfies dbar T1 u = u in the
    /// disc and Re T1 u = 0 on |w| = 1 (on the circle the reflected point
    /// coincides with w, so the boundary condition holds identically).
    std::vector<Complex> modified(const std::vector<Complex>& density,
                                  const std::vector<Complex>& targets) const {
        const LocalModel model = local_model(density);
        const Corrections corr = build_corrections(targets);
        std::vector<Complex> out(targets.size());
        density_sweep(model, targets, corr, out);
        const std::vector<Complex> refl = reflect(targets);
        const Corrections rcorr = build_corrections(refl);
        std::vector<Complex> out_r(targets.size());
        density_sweep(model, refl, rcorr, out_r);
        for (std::size_t t = 0; t < out.size(); ++t) out[t] -= std::conj(out_r[t]);
        return out;
    }

    Complex modified_at(const GridFunction& u, Complex w) const {
        require_grid(u);
        return modified(u.values, {w})[0];
    }

    /// T1 u on the grid nodes plus any extra targets (solver hot path; the
    /// node and reflected-node moment tables are cached across calls).
    std::vector<Complex> modified_nodes(const std::vector<Complex>& density,
                                        const std::vector<Complex>& extra_targets = {}) const {
        const LocalModel model = local_model(density);
        const int n = grid_->node_count();
        std::vector<Complex> out(n + extra_targets.size());
        std::vector<Complex> buffer(n);
        density_sweep(model, grid_->nodes, node_corrections(), buffer);
        std::copy(buffer.begin(), buffer.end(), out.begin());
        density_sweep(model, reflected_nodes(), reflected_corrections(), buffer);
        for (int k = 0; k < n; ++k) out[k] -= std::conj(buffer[k]);
        if (!extra_targets.empty()) {
            std::vector<Complex> extra = modified(density, extra_targets);
            std::copy(extra.begin(), extra.end(), out.begin() + n);
        }
        return out;
    }

    GridFunction modified_grid(const GridFunction& u) const {
        require_grid(u);
        return GridFunction(grid_, modified_nodes(u.values));
    }

private:
    struct Corrections {
        std::vector<Complex> e0, e1, e2; // T[model]-exact minus moment sums
        std::vector<int> near;           // nearest source node per target
    };

    struct LocalModel {
        const std::vector<Complex>* density = nullptr;
        std::vector<Complex> d1, d2; // Wirtinger derivatives at the nodes
    };

    void require_grid(const GridFunction& u) const {
        const bool same = u.grid == grid_ ||
                          (u.grid && u.grid->radial_count == grid_->radial_count &&
                           u.grid->angular_count == grid_->angular_count);
        require(same, ErrorKind::invalid_argument, "CauchyGreenOperator: grid mismatch");
    }

    std::vector<Complex> reflect(const std::vector<Complex>& targets) const {
        std::vector<Complex> out(targets.size());
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const double m2 = std::norm(targets[t]);
            // A target at the origin reflects to infinity where T vanishes;
            // park the reflected point far away instead.
            out[t] = m2 < 1e-60 ? Complex(1e60, 0.0) : targets[t] / m2;
        }
        return out;
    }

    LocalModel local_model(const std::vector<Complex>& density) const {
        require(static_cast<int>(density.size()) == grid_->node_count(), ErrorKind::invalid_argument,
                "CauchyGreenOperator: density size does not match grid");
        LocalModel m;
        m.density = &density;
        if (grid_->radial_count >= 8) {
            GridFunction df(grid_, density);
            m.d1 = dz(df).values;
            m.d2 = dbar(df).values;
        } else {
            m.d1.assign(density.size(), Complex(0.0));
            m.d2.assign(density.size(), Complex(0.0));
        }
        return m;
    }

    // Density-independent kernel moment sums against the model monomials,
    // folded with the closed forms into per-target correction coefficients.
    Corrections build_corrections(const std::vector<Complex>& targets) const {
        Corrections corr;
        corr.e0.resize(targets.size());
        corr.e1.resize(targets.size());
        corr.e2.resize(targets.size());
        corr.near.resize(targets.size());
        const int n = grid_->node_count();
        parallel_for_chunks(targets.size(), [&](std::size_t b, std::size_t e) {
            const double* __restrict xr = xr_.data();
            const double* __restrict xi = xi_.data();
            const double* __restrict coef = coef_.data();
            const double* __restrict near2 = near2_.data();
            const double near_scale = near_scale_;
            for (std::size_t t = b; t < e; ++t) {
                const double cx = targets[t].real();
                const double cy = targets[t].imag();
                double kre = 0, kim = 0, tre = 0, tim = 0, cre = 0, cim = 0;
                for (int k = 0; k < n; ++k) {
                    const double dx = xr[k] - cx;
                    const double dy = xi[k] - cy;
                    const double dd = dx * dx + dy * dy;
                    const double scale = dd <= near2[k] ? near_scale : coef[k] / dd;
                    const double sdx = scale * dx;
                    const double sdy = scale * dy;
                    kre += sdx;
                    kim += sdy;
                    const double p1 = xr[k] * sdx, p2 = xi[k] * sdy;
                    const double p3 = xi[k] * sdx, p4 = xr[k] * sdy;
                    tre += p1 + p2;
                    tim += p3 - p4;
                    cre += p1 - p2;
                    cim -= p3 + p4;
                }
                const Complex w = targets[t];
                corr.e0[t] = detail::t_one_exact(w) - Complex(kre, -kim);
                corr.e1[t] = detail::t_tau_exact(w) - Complex(tre, tim);
                corr.e2[t] = detail::t_ctau_exact(w) - Complex(cre, cim);
                corr.near[t] = nearest_node(w);
            }
        });
        return corr;
    }

    // Sweep of the density against the kernel plus the correction assembly:
    // out = sum_k u_k K_k + c0 E0 + a1 E1 + a2 E2 with
    // c0 = u* - a1 w* - a2 conj(w*).
    void density_sweep(const LocalModel& model, const std::vector<Complex>& targets,
                       const Corrections& corr, std::vector<Complex>& out) const {
        const int n = grid_->node_count();
        const std::vector<Complex>& density = *model.density;
        std::vector<double> ur(n), ui(n);
        for (int k = 0; k < n; ++k) {
            ur[k] = density[k].real();
            ui[k] = density[k].imag();
        }
        parallel_for_chunks(targets.size(), [&](std::size_t b, std::size_t e) {
            const double* __restrict xr = xr_.data();
            const double* __restrict xi = xi_.data();
            const double* __restrict coef = coef_.data();
            const double* __restrict near2 = near2_.data();
            const double* __restrict urp = ur.data();
            const double* __restrict uip = ui.data();
            const double near_scale = near_scale_;
            constexpr std::size_t TB = 4;
            for (std::size_t t0 = b; t0 < e; t0 += TB) {
                const std::size_t tb = std::min(TB, e - t0);
                double cx[TB], cy[TB];
                double are[TB] = {0, 0, 0, 0}, aim[TB] = {0, 0, 0, 0};
                for (std::size_t s = 0; s < tb; ++s) {
                    cx[s] = targets[t0 + s].real();
                    cy[s] = targets[t0 + s].imag();
                }
                for (std::size_t s = tb; s < TB; ++s) {
                    cx[s] = cx[0];
                    cy[s] = cy[0];
                }
                for (int k = 0; k < n; ++k) {
                    const double xk = xr[k], yk = xi[k], ck = coef[k], nk = near2[k];
                    const double urk = urp[k], uik = uip[k];
#pragma GCC unroll 4
                    for (std::size_t s = 0; s < TB; ++s) {
                        const double dx = xk - cx[s];
                        const double dy = yk - cy[s];
                        const double dd = dx * dx + dy * dy;
                        const double scale = dd <= nk ? near_scale : ck / dd;
                        const double sdx = scale * dx;
                        const double sdy = scale * dy;
                        are[s] += urk * sdx + uik * sdy;
                        aim[s] += uik * sdx - urk * sdy;
                    }
                }
                for (std::size_t s = 0; s < tb; ++s) {
                    const int near = corr.near[t0 + s];
                    const Complex wstar = grid_->nodes[near];
                    const Complex a1 = model.d1[near];
                    const Complex a2 = model.d2[near];
                    const Complex c0 = density[near] - a1 * wstar - a2 * std::conj(wstar);
                    out[t0 + s] = Complex(are[s], aim[s]) + c0 * corr.e0[t0 + s] +
                                  a1 * corr.e1[t0 + s] + a2 * corr.e2[t0 + s];
                }
            }
        });
    }

    const std::vector<Complex>& reflected_nodes() const {
        std::call_once(refl_nodes_once_, [&] { refl_nodes_ = reflect(grid_->nodes); });
        return refl_nodes_;
    }

    const Corrections& node_corrections() const {
        std::call_once(node_corr_once_, [&] { node_corr_ = build_corrections(grid_->nodes); });
        return node_corr_;
    }

    const Corrections& reflected_corrections() const {
        std::call_once(refl_corr_once_,
                       [&] { refl_corr_ = build_corrections(reflected_nodes()); });
        return refl_corr_;
    }

    GridPtr grid_;
    KernelQuadratureConfig cfg_;
    std::vector<double> xr_, xi_, coef_, near2_;
    double near_scale_ = 0.0;

    mutable std::once_flag node_corr_once_, refl_corr_once_, refl_nodes_once_;
    mutable Corrections node_corr_, refl_corr_;
    mutable std::vector<Complex> refl_nodes_;
};

/// T u(w) for a single target in the closed disc.
inline Complex cauchy_green(const GridFunction& u, Complex w,
                            const KernelQuadratureConfig& cfg = {}) {
    require(std::abs(w) <= 1.0 + 1e-12, ErrorKind::out_of_domain,
            "cauchy_green: target outside the closed unit disc");
    return CauchyGreenOperator(u.grid, cfg).transform_at(u, w);
}

/// T1 u(w): dbar-inverse with vanishing boundary real part.
inline Complex modified_cauchy_green(const GridFunction& u, Complex w,
                                     const KernelQuadratureConfig& cfg = {}) {
    require(std::abs(w) <= 1.0 + 1e-12, ErrorKind::out_of_domain,
            "modified_cauchy_green: target outside the closed unit disc");
    return CauchyGreenOperator(u.grid, cfg).modified_at(u, w);
}

/// Cauchy integral over the unit circle from equispaced samples,
///   K g(w) = (1/2 pi i) oint g(zeta) d zeta / (zeta - w),  |w| < 1,
/// evaluated as the power series with the trapezoid (DFT) coefficients of g.
/// Summing the truncated series instead of the raw kernel sum keeps the
/// evaluation stable for targets near the rim; the accuracy is spectral for
/// smooth traces either way.
class CircleCauchyEvaluator {
public:
    explicit CircleCauchyEvaluator(const CircleFunction& g) : coeff_(g.angular_count) {
        const int A = g.angular_count;
        for (int m = 0; m < A; ++m) {
            Complex acc(0.0);
            for (int k = 0; k < A; ++k)
                acc += g.values[k] * std::polar(1.0, -2.0 * kPi * m * k / A);
            coeff_[m] = acc / static_cast<double>(A);
        }
    }

    Complex operator()(Complex w) const {
        require(std::abs(w) < 1.0, ErrorKind::out_of_domain,
                "CircleCauchyEvaluator: target must lie strictly inside the unit circle");
        Complex acc(0.0);
        for (int m = static_cast<int>(coeff_.size()) - 1; m >= 0; --m) acc = acc * w + coeff_[m];
        return acc;
    }

    Complex derivative(Complex w) const {
        require(std::abs(w) < 1.0, ErrorKind::out_of_domain,
                "CircleCauchyEvaluator: target must lie strictly inside the unit circle");
        Complex acc(0.0);
        for (int m = static_cast<int>(coeff_.size()) - 1; m >= 1; --m)
            acc = acc * w + static_cast<double>(m) * coeff_[m];
        return acc;
    }

private:
    std::vector<Complex> coeff_;
};

inline Complex cauchy_circle(const CircleFunction& g, Complex w) {
    return CircleCauchyEvaluator(g)(w);
}

/// d/dw of the circle Cauchy integral; used for Newton refinement of
/// holomorphic factors reconstructed from their boundary trace.
inline Complex cauchy_circle_deriv(const CircleFunction& g, Complex w) {
    return CircleCauchyEvaluator(g).derivative(w);
}

/// Closed form of T applied to the phase of a binomial:
///   T <w - w0>^n = (1/(n+1)) conj(w - w0)^{n+1} / (w - w0)^n.
/// At w = w0 the expression extends continuously by 0, which is returned.
inline Complex phase_transform_closed_form(int n, Complex w0, Complex w) {
    require(n >= 1, ErrorKind::invalid_argument, "phase_transform_closed_form: n must be >= 1");
    require(std::abs(w) <= 1.0 + 1e-12, ErrorKind::out_of_domain,
            "phase_transform_closed_form: |w| must be <= 1");
    require(std::abs(w0) < 1.0, ErrorKind::out_of_domain,
            "phase_transform_closed_form: |w0| must be < 1");
    const Complex d = w - w0;
    if (d == Complex(0.0)) return Complex(0.0);
    const Complex cd = std::conj(d);
    Complex num = cd;
    Complex den = 1.0;
    for (int k = 0; k < n; ++k) {
        num *= cd;
        den *= d;
    }
    return num / den / static_cast<double>(n + 1);
}

} // namespace jdisc
