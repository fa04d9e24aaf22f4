#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "jdisc/acs.hpp"
#include "jdisc/discsolve.hpp"
#include "jdisc/errors.hpp"
#include "jdisc/grid.hpp"
#include "jdisc/models.hpp"
#include "jdisc/singint.hpp"
#include "jdisc/vekua.hpp"

namespace jdisc {

struct PullbackOptions {
    double sigma_rel_tol = 1e-3;  // relative threshold marking Sigma-adjacent nodes
    double condition_cap = 1e8;   // cap for the pullback lead matrix
    double w_domain_radius = 1.0; // fields are sampled at w_domain_radius * node
    KernelQuadratureConfig quadrature;
};

/// Effective Sigma threshold: at least one radial cell wide, so the nodes
/// whose cells straddle {|f| = |g|} are marked even when the crossing is
/// transversal.
inline double sigma_threshold(const PullbackOptions& opts, const DiscGrid& grid) {
    return std::max(opts.sigma_rel_tol, grid.dr);
}

/// Per-slice pullback data: the PDE fields f, g, h1, h2 of the coordinate
/// reduction, the coefficient fields a, b, and the Sigma membership mask.
struct PullbackSlice {
    Complex z;
    GridFunction a, b, f, g, h1, h2;
    std::vector<std::uint8_t> sigma_mask;
};

struct PullbackRegularity {
    double alpha_hat_z = 0.0;
    double lipschitz_w_hat = 0.0;
    double fit_quality = 0.0;
};

struct PullbackResult {
    GridPtr grid;
    PullbackOptions options;
    std::vector<PullbackSlice> slices;
    std::optional<PullbackRegularity> regularity; // filled when >= 8 slices
};

/// Pointwise least-squares recovery of mu from the tilde pair
/// f_wbar = mu conj(f), g_wbar = -mu conj(g).
inline GridFunction recover_mu_tilde(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g, "recover_mu_tilde");
    GridFunction fw = dbar(f);
    GridFunction gw = dbar(g);
    GridFunction mu(f.grid);
    for (std::size_t k = 0; k < mu.values.size(); ++k) {
        const double den = std::norm(f.values[k]) + std::norm(g.values[k]);
        mu.values[k] = den < 1e-300 ? Complex(0.0)
                                    : (f.values[k] * fw.values[k] - g.values[k] * gw.values[k]) / den;
    }
    return mu;
}

/// Pointwise least-squares recovery of mu from the coupled pair
/// f_wbar = mu conj(g), g_wbar = mu conj(f).
inline GridFunction recover_mu_pair(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g, "recover_mu_pair");
    GridFunction fw = dbar(f);
    GridFunction gw = dbar(g);
    GridFunction mu(f.grid);
    for (std::size_t k = 0; k < mu.values.size(); ++k) {
        const double den = std::norm(f.values[k]) + std::norm(g.values[k]);
        mu.values[k] = den < 1e-300 ? Complex(0.0)
                                    : (g.values[k] * fw.values[k] + f.values[k] * gw.values[k]) / den;
    }
    return mu;
}

/// The coefficient field a = g/f carried across the zero set by the
/// similarity route: with ftilde = f + g and gtilde = f - g, both factor as
/// phi e^{Tu} with a common monic part, the boundary trace of the quotient
/// evaluates it inside, and the Moebius substitution is inverted at the end.
inline GridFunction vekua_extension_field(const GridFunction& f, const GridFunction& g,
                                          const KernelQuadratureConfig& quad = {},
                                          const SimilarityOptions& opts = {}) {
    require_same_grid(f, g, "vekua_extension_field");
    GridFunction ft = zip(f, g, [](Complex a, Complex b) { return a + b; });
    GridFunction gt = zip(f, g, [](Complex a, Complex b) { return a - b; });
    GridFunction mu = recover_mu_tilde(ft, gt);
    GridFunction neg_mu = apply(mu, [](Complex m) { return -m; });
    CauchyGreenOperator op(f.grid, quad);
    VekuaDecomposition dec_f = similarity_decompose_with_operator(ft, mu, op, opts);
    VekuaDecomposition dec_g = similarity_decompose_with_operator(gt, neg_mu, op, opts);

    const int A = f.grid->angular_count;
    CircleFunction ratio(A);
    for (int k = 0; k < A; ++k)
        ratio.values[k] = dec_g.phi_trace.values[k] / dec_f.phi_trace.values[k];

    GridFunction out(f.grid);
    const CircleCauchyEvaluator ratio_eval(ratio);
    for (int k = 0; k < f.grid->node_count(); ++k) {
        const Complex atilde = ratio_eval(f.grid->nodes[k]) *
                               std::exp(dec_g.tu.values[k] - dec_f.tu.values[k]);
        if (std::abs(Complex(1.0) + atilde) < 1e-12)
            fail(ErrorKind::orientation,
                 "vekua_extension_field: Moebius inversion degenerates (|a| -> infinity)");
        out.values[k] = (Complex(1.0) - atilde) / (Complex(1.0) + atilde);
    }
    return out;
}

namespace detail {

struct SliceFields {
    GridFunction f, g, h1, h2;
    double scale = 0.0; // max over nodes of max(|f|, |g|)
};

inline SliceFields evaluate_slice_fields(const CoordinateModel& model, Complex z,
                                         const GridPtr& grid, double w_radius) {
    SliceFields s{GridFunction(grid), GridFunction(grid), GridFunction(grid), GridFunction(grid)};
    for (int k = 0; k < grid->node_count(); ++k) {
        const Complex w = w_radius * grid->nodes[k];
        const JacobianBlocks b = model.jacobian_blocks(z, w);
        s.f.values[k] = b.z_prime_Z(0, 0);
        s.g.values[k] = -b.z_prime_Zbar(0, 0);
        s.h1.values[k] = -b.z_prime_Z(1, 0);
        s.h2.values[k] = -b.z_prime_Zbar(1, 0);
        s.scale = std::max(s.scale, std::max(std::abs(s.f.values[k]), std::abs(s.g.values[k])));
    }
    return s;
}

// Average of nearby non-Sigma values, searched over growing grid
// neighborhoods; realizes the continuity extension at Sigma nodes.
inline Complex neighborhood_average(const DiscGrid& g, const GridFunction& a,
                                    const std::vector<std::uint8_t>& mask, int ring, int spoke) {
    for (int d = 1; d < std::max(g.radial_count, g.angular_count); ++d) {
        Complex acc(0.0);
        int count = 0;
        for (int di = -d; di <= d; ++di) {
            const int i = ring + di;
            if (i < 0 || i >= g.radial_count) continue;
            for (int dj = -d; dj <= d; ++dj) {
                const int j = ((spoke + dj) % g.angular_count + g.angular_count) % g.angular_count;
                const int k = g.index(i, j);
                if (mask[k]) continue;
                acc += a.values[k];
                ++count;
            }
        }
        if (count >= 3) return acc / static_cast<double>(count);
    }
    fail(ErrorKind::hypothesis_violation,
         "pullback_structure: no non-singular neighbors for continuity extension");
}

inline void check_graph_form(const Matrix2c& a, double scale) {
    const double off = std::max(std::abs(a(0, 1)), std::abs(a(1, 1)));
    require(off <= 1e-8 * std::max(1.0, scale), ErrorKind::hypothesis_violation,
            "pullback: matrix is not of the graph form [[a, 0], [b, 0]]");
}

} // namespace detail

/// Pulls the target structure back along the model over the given z slices.
/// Off Sigma the coefficient a comes from the direct ratio g/f (standard
/// target) or the full transformation rule; Sigma nodes are filled by the
/// similarity route when the target is standard and by the continuity
/// extension otherwise. b = a h1 + h2 throughout.
inline PullbackResult pullback_structure(const CoordinateModel& model,
                                         const std::vector<Complex>& z_slices, const GridPtr& grid,
                                         const PullbackOptions& opts = {}) {
    require(!z_slices.empty(), ErrorKind::invalid_argument, "pullback_structure: no slices");
    require(opts.w_domain_radius > 0.0 && opts.w_domain_radius <= 1.0, ErrorKind::invalid_argument,
            "pullback_structure: w_domain_radius must lie in (0, 1]");
    for (const auto& z : z_slices)
        require(std::abs(z) < 1.0, ErrorKind::invalid_argument,
                "pullback_structure: slices must lie in the open disc");

    PullbackResult result;
    result.grid = grid;
    result.options = opts;

    for (const Complex z : z_slices) {
        detail::SliceFields sf = detail::evaluate_slice_fields(model, z, grid, opts.w_domain_radius);
        require(sf.scale > 1e-300, ErrorKind::hypothesis_violation,
                "pullback_structure: degenerate slice (f and g vanish identically)");

        PullbackSlice slice;
        slice.z = z;
        slice.f = sf.f;
        slice.g = sf.g;
        slice.h1 = sf.h1;
        slice.h2 = sf.h2;
        slice.sigma_mask.assign(grid->node_count(), 0);

        const double sigma_tol = sigma_threshold(opts, *grid);
        int sigma_count = 0;
        for (int k = 0; k < grid->node_count(); ++k) {
            const double af = std::abs(sf.f.values[k]);
            const double ag = std::abs(sf.g.values[k]);
            if (ag - af > sigma_tol * sf.scale) {
                std::ostringstream os;
                os << "pullback_structure: orientation condition |f| >= |g| fails at z = " << z
                   << ", w = " << opts.w_domain_radius * grid->nodes[k];
                fail(ErrorKind::orientation, os.str());
            }
            if (af - ag <= sigma_tol * sf.scale) {
                slice.sigma_mask[k] = 1;
                ++sigma_count;
            }
        }
        require(sigma_count < grid->node_count(), ErrorKind::hypothesis_violation,
                "pullback_structure: slice is contained in Sigma");

        slice.a = GridFunction(grid);
        for (int k = 0; k < grid->node_count(); ++k) {
            if (slice.sigma_mask[k]) continue;
            if (model.target_is_standard) {
                slice.a.values[k] = sf.g.values[k] / sf.f.values[k];
            } else {
                const Complex w = opts.w_domain_radius * grid->nodes[k];
                const auto [zp, wp] = model.h_map(z, w);
                const AcsMatrix ap = make_acs(model.target_structure(zp, wp));
                const AcsMatrix full =
                    pullback_matrix(ap, model.jacobian_blocks(z, w), opts.condition_cap);
                detail::check_graph_form(full.a, full.a.cwiseAbs().maxCoeff());
                slice.a.values[k] = full.a(0, 0);
            }
        }

        if (sigma_count > 0) {
            if (model.target_is_standard) {
                GridFunction ext = vekua_extension_field(sf.f, sf.g, opts.quadrature);
                for (int k = 0; k < grid->node_count(); ++k)
                    if (slice.sigma_mask[k]) slice.a.values[k] = ext.values[k];
            } else {
                for (int i = 0; i < grid->radial_count; ++i)
                    for (int j = 0; j < grid->angular_count; ++j) {
                        const int k = grid->index(i, j);
                        if (!slice.sigma_mask[k]) continue;
                        slice.a.values[k] =
                            detail::neighborhood_average(*grid, slice.a, slice.sigma_mask, i, j);
                    }
            }
        }

        double max_a = 0.0;
        for (const auto& v : slice.a.values) max_a = std::max(max_a, std::abs(v));
        require(max_a < 1.0, ErrorKind::orientation,
                "pullback_structure: extension violates |a| < 1");

        slice.b = GridFunction(grid);
        for (int k = 0; k < grid->node_count(); ++k)
            slice.b.values[k] =
                slice.a.values[k] * sf.h1.values[k] + sf.h2.values[k];

        result.slices.push_back(std::move(slice));
    }

    if (result.slices.size() >= 8) {
        std::vector<std::pair<Complex, GridFunction>> family;
        for (const auto& s : result.slices) family.emplace_back(s.z, s.a);
        const HolderEstimate est = holder_exponent_estimate(family, 4096);
        double lip = 0.0;
        for (const auto& s : result.slices)
            lip = std::max(lip, grid_lipschitz_estimate(s.a, &s.sigma_mask));
        result.regularity = PullbackRegularity{est.alpha_hat, lip / opts.w_domain_radius,
                                               est.fit_quality};
    }
    return result;
}

/// Appendix route for graph models with integrable target: a = -h_zbar / h_z,
/// carried across the zeros of h_z by the Cauchy integral in w over a circle
/// avoiding them. b = 0.
inline PullbackResult integrable_pullback(const CoordinateModel& model,
                                          const std::vector<Complex>& z_slices, const GridPtr& grid,
                                          const PullbackOptions& opts = {}) {
    require(model.kind == CoordinateModel::Kind::integrable_graph, ErrorKind::invalid_argument,
            "integrable_pullback: model is not of integrable-graph kind");
    require(!z_slices.empty(), ErrorKind::invalid_argument, "integrable_pullback: no slices");

    PullbackResult result;
    result.grid = grid;
    result.options = opts;

    const int A = grid->angular_count;
    for (const Complex z : z_slices) {
        detail::SliceFields sf = detail::evaluate_slice_fields(model, z, grid, opts.w_domain_radius);
        PullbackSlice slice;
        slice.z = z;
        slice.f = sf.f;
        slice.g = sf.g;
        slice.h1 = sf.h1;
        slice.h2 = sf.h2;
        slice.sigma_mask.assign(grid->node_count(), 0);
        slice.a = GridFunction(grid);
        slice.b = GridFunction(grid);

        double hz_scale = 0.0;
        for (const auto& v : sf.f.values) hz_scale = std::max(hz_scale, std::abs(v));
        require(hz_scale > 1e-13, ErrorKind::hypothesis_violation,
                "integrable_pullback: h_z vanishes identically on the slice");

        const double sigma_tol = sigma_threshold(opts, *grid);
        double masked_radius = 0.0;
        for (int k = 0; k < grid->node_count(); ++k) {
            if (std::abs(sf.f.values[k]) <= sigma_tol * hz_scale) {
                slice.sigma_mask[k] = 1;
                masked_radius = std::max(masked_radius, std::abs(grid->nodes[k]));
            } else {
                slice.a.values[k] = sf.g.values[k] / sf.f.values[k];
            }
        }

        if (masked_radius > 0.0) {
            // Pick the contour radius with the healthiest |h_z| among
            // candidates enclosing every masked node.
            double best_rho = -1.0, best_min = 0.0;
            for (double rho = 0.95; rho > masked_radius + 0.02; rho -= 0.05) {
                double m = std::numeric_limits<double>::infinity();
                for (int k = 0; k < A; ++k) {
                    const Complex w =
                        opts.w_domain_radius * std::polar(rho, 2.0 * kPi * k / A);
                    const JacobianBlocks b = model.jacobian_blocks(z, w);
                    m = std::min(m, std::abs(b.z_prime_Z(0, 0)));
                }
                if (m > best_min) {
                    best_min = m;
                    best_rho = rho;
                }
            }
            require(best_rho > 0.0 && best_min > sigma_tol * hz_scale,
                    ErrorKind::hypothesis_violation,
                    "integrable_pullback: no contour separating the zeros of h_z");
            CircleFunction a_gamma(A);
            for (int k = 0; k < A; ++k) {
                const Complex w = opts.w_domain_radius * std::polar(best_rho, 2.0 * kPi * k / A);
                const JacobianBlocks b = model.jacobian_blocks(z, w);
                a_gamma.values[k] = -b.z_prime_Zbar(0, 0) / b.z_prime_Z(0, 0);
            }
            const CircleCauchyEvaluator gamma_eval(a_gamma);
            for (int k = 0; k < grid->node_count(); ++k) {
                if (!slice.sigma_mask[k]) continue;
                const Complex target = grid->nodes[k] / best_rho;
                require(std::abs(target) < 1.0, ErrorKind::hypothesis_violation,
                        "integrable_pullback: masked node outside the extension contour");
                slice.a.values[k] = gamma_eval(target);
            }
        }

        double max_a = 0.0;
        for (const auto& v : slice.a.values) max_a = std::max(max_a, std::abs(v));
        require(max_a < 1.0, ErrorKind::orientation, "integrable_pullback: |a| reaches 1");

        result.slices.push_back(std::move(slice));
    }

    if (result.slices.size() >= 8) {
        std::vector<std::pair<Complex, GridFunction>> family;
        for (const auto& s : result.slices) family.emplace_back(s.z, s.a);
        const HolderEstimate est = holder_exponent_estimate(family, 4096);
        double lip = 0.0;
        for (const auto& s : result.slices)
            lip = std::max(lip, grid_lipschitz_estimate(s.a, &s.sigma_mask));
        result.regularity = PullbackRegularity{est.alpha_hat, lip / opts.w_domain_radius,
                                               est.fit_quality};
    }
    return result;
}

/// Connected Sigma clusters per slice, and whether every cluster sits on the
/// zero set of f (numerically, Sigma' = Sigma).
struct SingularSetReport {
    std::vector<int> per_slice_counts;
    bool sigma_prime_equals_sigma = true;
};

inline SingularSetReport singular_set_report(const PullbackResult& result) {
    SingularSetReport report;
    for (const auto& slice : result.slices) {
        const auto& g = *result.grid;
        double f_scale = 0.0;
        for (const auto& v : slice.f.values) f_scale = std::max(f_scale, std::abs(v));
        std::vector<int> label(g.node_count(), -1);
        int clusters = 0;
        for (int start = 0; start < g.node_count(); ++start) {
            if (!slice.sigma_mask[start] || label[start] >= 0) continue;
            // BFS over grid adjacency (radial neighbors, periodic angular).
            std::vector<int> stack{start};
            label[start] = clusters;
            double cluster_max_f = 0.0;
            while (!stack.empty()) {
                const int k = stack.back();
                stack.pop_back();
                cluster_max_f = std::max(cluster_max_f, std::abs(slice.f.values[k]));
                const int i = k / g.angular_count;
                const int j = k % g.angular_count;
                const int neighbors[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
                for (const auto& nb : neighbors) {
                    if (nb[0] < 0 || nb[0] >= g.radial_count) continue;
                    const int jj = (nb[1] % g.angular_count + g.angular_count) % g.angular_count;
                    const int kk = g.index(nb[0], jj);
                    if (!slice.sigma_mask[kk] || label[kk] >= 0) continue;
                    label[kk] = clusters;
                    stack.push_back(kk);
                }
            }
            if (cluster_max_f >
                2.0 * sigma_threshold(result.options, g) * std::max(f_scale, 1e-300))
                report.sigma_prime_equals_sigma = false;
            ++clusters;
        }
        report.per_slice_counts.push_back(clusters);
    }
    return report;
}

/// Pointwise coefficient closures induced by a model, with the disc solver's
/// hypotheses (vanishing at w = 0, orientation, ellipticity bound) validated
/// on a lattice with w-radius w_lat.
inline StructureCoefficients structure_from_model(const CoordinateModel& model, double w_lat) {
    require(w_lat > 0.0 && w_lat < 1.0, ErrorKind::invalid_argument,
            "structure_from_model: validation radius must lie in (0, 1)");
    auto a_fn = [model](Complex z, Complex w) -> Complex {
        const JacobianBlocks blocks = model.jacobian_blocks(z, w);
        if (model.target_is_standard) {
            const Complex f = blocks.z_prime_Z(0, 0);
            const Complex g = -blocks.z_prime_Zbar(0, 0);
            if (std::abs(f) < 1e-14 * std::max(1.0, std::abs(g))) {
                if (std::abs(g) < 1e-14) return Complex(0.0); // joint zero: continuity value
                fail(ErrorKind::singular_pullback, "structure_from_model: f vanishes, g does not");
            }
            return g / f;
        }
        try {
            const auto [zp, wp] = model.h_map(z, w);
            const AcsMatrix ap = make_acs(model.target_structure(zp, wp));
            const AcsMatrix full = pullback_matrix(ap, blocks);
            detail::check_graph_form(full.a, full.a.cwiseAbs().maxCoeff());
            return full.a(0, 0);
        } catch (const Error& e) {
            // Near the central curve the rule may degenerate while the
            // coefficient extends by a(z, 0) = 0.
            if (e.kind() == ErrorKind::singular_pullback && std::abs(w) < 1e-4)
                return Complex(0.0);
            throw;
        }
    };
    auto b_fn = [model, a_fn](Complex z, Complex w) -> Complex {
        const JacobianBlocks blocks = model.jacobian_blocks(z, w);
        const Complex h1 = -blocks.z_prime_Z(1, 0);
        const Complex h2 = -blocks.z_prime_Zbar(1, 0);
        return a_fn(z, w) * h1 + h2;
    };

    // Validation lattice: orientation, vanishing at w = 0, and the bound a0.
    double max_a = 0.0, lip_w = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 8; ++j) {
            const Complex z = std::polar((i + 0.5) / 6.0, 2.0 * kPi * j / 8.0);
            require(std::abs(a_fn(z, Complex(0.0))) <= 1e-10 &&
                        std::abs(b_fn(z, Complex(0.0))) <= 1e-10,
                    ErrorKind::hypothesis_violation,
                    "structure_from_model: a(z,0) = 0, b(z,0) = 0 fails");
            for (int k = 0; k < 8; ++k)
                for (int l = 0; l < 8; ++l) {
                    const Complex w = std::polar(w_lat * (k + 0.5) / 8.0, 2.0 * kPi * l / 8.0);
                    const JacobianBlocks blocks = model.jacobian_blocks(z, w);
                    const double af = std::abs(blocks.z_prime_Z(0, 0));
                    const double ag = std::abs(blocks.z_prime_Zbar(0, 0));
                    if (model.target_is_standard && ag > af + 1e-12)
                        fail(ErrorKind::orientation,
                             "structure_from_model: orientation |f| >= |g| fails on the lattice");
                    max_a = std::max(max_a, std::abs(a_fn(z, w)));
                    const double dw = 1e-4;
                    lip_w = std::max(lip_w,
                                     std::abs(a_fn(z, w + dw) - a_fn(z, w)) / dw);
                }
        }
    require(max_a < 1.0 - 1e-9, ErrorKind::ellipticity,
            "structure_from_model: cannot declare a0 < 1 on the validation lattice");

    StructureCoefficients coeffs;
    coeffs.a = a_fn;
    coeffs.b = b_fn;
    coeffs.a0 = std::min(0.999, max_a * 1.02 + 1e-9);
    coeffs.lipschitz_w = lip_w;
    return coeffs;
}

/// End-to-end: pull the structure back, solve the disc, push the boundary
/// through the model, and report the distance to the torus in pre-image
/// moduli.
struct AttachResult {
    std::vector<std::pair<Complex, Complex>> disc_in_target;
    double torus_distance = 0.0;
    DiscSolution solution;
};

inline AttachResult attach_disc_to_torus(const CoordinateModel& model, int n, double r, double t,
                                         const SolverConfig& cfg) {
    const double w_lat = std::min(0.9, std::max(0.3, 2.0 * r));
    StructureCoefficients coeffs = structure_from_model(model, w_lat);
    DiscSolution sol = solve_disc(coeffs, n, r, t, cfg, std::nullopt, false);

    AttachResult res;
    res.torus_distance =
        std::max(sol.diagnostics.boundary_err_z, sol.diagnostics.boundary_err_w);
    const int A = sol.z_boundary.angular_count;
    res.disc_in_target.reserve(A);
    for (int k = 0; k < A; ++k)
        res.disc_in_target.push_back(
            model.h_map(sol.z_boundary.values[k], sol.w_boundary.values[k]));
    res.solution = std::move(sol);
    return res;
}

/// Regularity measurements over the slices of a pullback: the Holder exponent
/// of a in z and the Lipschitz constant of a in w.
struct RegularityProbe {
    double alpha_hat_z = 0.0;
    double lip_hat_w = 0.0;
    double fit_quality = 0.0;
};

inline RegularityProbe regularity_probe(const PullbackResult& result, int z_pairs_budget) {
    require(result.slices.size() >= 8, ErrorKind::invalid_argument,
            "regularity_probe: need at least 8 slices");
    std::vector<std::pair<Complex, GridFunction>> family;
    for (const auto& s : result.slices) family.emplace_back(s.z, s.a);
    const HolderEstimate est = holder_exponent_estimate(family, z_pairs_budget);
    double lip = 0.0;
    for (const auto& s : result.slices)
        lip = std::max(lip, grid_lipschitz_estimate(s.a, &s.sigma_mask));
    return {est.alpha_hat, lip / result.options.w_domain_radius, est.fit_quality};
}

} // namespace jdisc
