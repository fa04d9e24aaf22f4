#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include <json.hpp>

#include "jdisc/acs.hpp"
#include "jdisc/discsolve.hpp"
#include "jdisc/errors.hpp"
#include "jdisc/gluing.hpp"
#include "jdisc/grid.hpp"
#include "jdisc/phase.hpp"
#include "jdisc/vekua.hpp"

namespace jdisc {

using json = nlohmann::json;

inline json complex_to_json(Complex v) { return json::array({v.real(), v.imag()}); }

inline Complex complex_from_json(const json& j) {
    require(j.is_array() && j.size() == 2, ErrorKind::io, "expected complex as [re, im]");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

/// CSV with columns re_w, im_w, re_val, im_val, one row per node.
inline void write_csv(const GridFunction& u, std::ostream& os) {
    os << "re_w,im_w,re_val,im_val\n";
    os << std::setprecision(17);
    const auto& g = *u.grid;
    for (int k = 0; k < g.node_count(); ++k)
        os << g.nodes[k].real() << ',' << g.nodes[k].imag() << ',' << u.values[k].real() << ','
           << u.values[k].imag() << '\n';
}

inline void write_csv(const GridFunction& u, const std::filesystem::path& path) {
    std::ofstream os(path);
    require(os.good(), ErrorKind::io, "cannot open " + path.string());
    write_csv(u, os);
}

inline void write_csv(const CircleFunction& u, std::ostream& os) {
    os << "re_w,im_w,re_val,im_val\n";
    os << std::setprecision(17);
    for (int k = 0; k < u.angular_count; ++k) {
        const Complex p = u.point(k);
        os << p.real() << ',' << p.imag() << ',' << u.values[k].real() << ','
           << u.values[k].imag() << '\n';
    }
}

inline json to_json(const GridFunction& u) {
    json j;
    j["radial_count"] = u.grid->radial_count;
    j["angular_count"] = u.grid->angular_count;
    json values = json::array();
    for (const auto& v : u.values) values.push_back(complex_to_json(v));
    j["values"] = std::move(values);
    return j;
}

inline GridFunction grid_function_from_json(const json& j) {
    const auto grid = make_polar_grid(j.at("radial_count").get<int>(),
                                      j.at("angular_count").get<int>());
    GridFunction u(grid);
    const auto& values = j.at("values");
    require(static_cast<int>(values.size()) == grid->node_count(), ErrorKind::io,
            "grid_function_from_json: value count mismatch");
    for (int k = 0; k < grid->node_count(); ++k) u.values[k] = complex_from_json(values[k]);
    return u;
}

/// 2x2 complex matrices as row-major complex pairs.
inline json to_json(const Matrix2c& m) {
    json j = json::array();
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) j.push_back(complex_to_json(m(r, c)));
    return j;
}

inline Matrix2c matrix2c_from_json(const json& j) {
    require(j.is_array() && j.size() == 4, ErrorKind::io,
            "matrix2c_from_json: expected 4 row-major complex pairs");
    Matrix2c m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = complex_from_json(j[2 * r + c]);
    return m;
}

inline json to_json(const AcsMatrix& a) {
    return json{{"a", to_json(a.a)}, {"admissibility_margin", a.admissibility_margin}};
}

inline AcsMatrix acs_from_json(const json& j) { return make_acs(matrix2c_from_json(j.at("a"))); }

inline json to_json(const DiscDiagnostics& d) {
    return json{{"residual_z", d.residual_z},
                {"residual_w", d.residual_w},
                {"boundary_err_z", d.boundary_err_z},
                {"boundary_err_w", d.boundary_err_w},
                {"winding_w", d.winding_w},
                {"winding_confidence", d.winding_confidence},
                {"jacobian_min", d.jacobian_min},
                {"decay_envelope_c", d.decay_envelope_c},
                {"iterations", d.iterations},
                {"final_update", d.final_update}};
}

/// Writes z/w/u/v fields as CSV plus the diagnostics block; returns the
/// diagnostics JSON for embedding in run summaries.
inline json write_disc_solution(const DiscSolution& sol, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_csv(sol.z_fn, dir / "z.csv");
    write_csv(sol.w_fn, dir / "w.csv");
    write_csv(sol.u_fn, dir / "u.csv");
    write_csv(sol.v_fn, dir / "v.csv");
    {
        std::ofstream os(dir / "z_boundary.csv");
        write_csv(sol.z_boundary, os);
    }
    {
        std::ofstream os(dir / "w_boundary.csv");
        write_csv(sol.w_boundary, os);
    }
    json j;
    j["params"] = {{"n", sol.params.n}, {"r", sol.params.r}, {"t", sol.params.t}};
    j["diagnostics"] = to_json(sol.diagnostics);
    std::ofstream os(dir / "diagnostics.json");
    os << j.dump(2) << '\n';
    return j;
}

inline json to_json(const BinomialDecompCoeffs& c) {
    json rows = json::array();
    for (int k = 0; k < c.c.rows(); ++k) {
        json row = json::array();
        for (int j = 0; j < c.c.cols(); ++j) row.push_back(c.c(k, j));
        rows.push_back(std::move(row));
    }
    return json{{"n", c.n}, {"seed", c.seed}, {"fit_residual", c.fit_residual}, {"c", std::move(rows)}};
}

inline BinomialDecompCoeffs binomial_coeffs_from_json(const json& j) {
    BinomialDecompCoeffs c;
    c.n = j.at("n").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.fit_residual = j.at("fit_residual").get<double>();
    const auto& rows = j.at("c");
    c.c.resize(c.n, c.n + 1);
    for (int k = 0; k < c.n; ++k)
        for (int l = 0; l <= c.n; ++l) c.c(k, l) = rows[k][l].get<double>();
    return c;
}

inline json to_json(const AreaLemmaResult& r) {
    return json{{"measured_area", r.measured_area},   {"area_bound", r.area_bound},
                {"area_se", r.area_se},               {"measured_integral", r.measured_integral},
                {"integral_bound", r.integral_bound}, {"integral_se", r.integral_se},
                {"seed", r.seed},                     {"sample_count", r.sample_count}};
}

inline json to_json(const SingularSetReport& r) {
    return json{{"per_slice_counts", r.per_slice_counts},
                {"sigma_prime_equals_sigma", r.sigma_prime_equals_sigma}};
}

/// Per-slice CSV fields plus a JSON summary of a pullback run.
inline json write_pullback_result(const PullbackResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json slices = json::array();
    for (std::size_t s = 0; s < result.slices.size(); ++s) {
        const auto& slice = result.slices[s];
        const std::string tag = "slice" + std::to_string(s);
        write_csv(slice.a, dir / (tag + "_a.csv"));
        write_csv(slice.b, dir / (tag + "_b.csv"));
        write_csv(slice.f, dir / (tag + "_f.csv"));
        write_csv(slice.g, dir / (tag + "_g.csv"));
        int sigma_nodes = 0;
        for (auto m : slice.sigma_mask) sigma_nodes += m;
        double max_a = 0.0;
        for (const auto& v : slice.a.values) max_a = std::max(max_a, std::abs(v));
        slices.push_back(json{{"z", complex_to_json(slice.z)},
                              {"sigma_nodes", sigma_nodes},
                              {"max_abs_a", max_a}});
    }
    json j;
    j["slices"] = std::move(slices);
    j["w_domain_radius"] = result.options.w_domain_radius;
    if (result.regularity) {
        j["regularity"] = {{"alpha_hat_z", result.regularity->alpha_hat_z},
                           {"lipschitz_w_hat", result.regularity->lipschitz_w_hat},
                           {"fit_quality", result.regularity->fit_quality}};
    }
    j["singular_set"] = to_json(singular_set_report(result));
    std::ofstream os(dir / "pullback_summary.json");
    os << j.dump(2) << '\n';
    return j;
}

inline SolverConfig solver_config_from_json(const json& j, GridPtr grid) {
    SolverConfig cfg;
    cfg.grid = std::move(grid);
    if (j.contains("max_iterations")) cfg.max_iterations = j["max_iterations"].get<int>();
    if (j.contains("contraction_tol")) cfg.contraction_tol = j["contraction_tol"].get<double>();
    if (j.contains("damping")) cfg.damping = j["damping"].get<double>();
    if (j.contains("residual_tol")) cfg.residual_tol = j["residual_tol"].get<double>();
    if (j.contains("exclusion_radius"))
        cfg.quadrature.singularity_exclusion_radius = j["exclusion_radius"].get<double>();
    if (j.contains("correction_rule")) {
        const std::string rule = j["correction_rule"].get<std::string>();
        if (rule == "cell-average")
            cfg.quadrature.correction_rule = KernelQuadratureConfig::CorrectionRule::cell_average;
        else if (rule == "polar-desingularized")
            cfg.quadrature.correction_rule =
                KernelQuadratureConfig::CorrectionRule::polar_desingularized;
        else
            fail(ErrorKind::io, "unknown correction_rule: " + rule);
    }
    return cfg;
}

} // namespace jdisc
