// Command-line front end: model selection, batch runs, and CSV/JSON emission
// for external plotting. Exit codes: 0 success, 1 usage or numerical error,
// 2 mathematical hypothesis failure (orientation / hypothesis-violation),
// 3 non-convergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "jdisc/discsolve.hpp"
#include "jdisc/gluing.hpp"
#include "jdisc/grid.hpp"
#include "jdisc/io.hpp"
#include "jdisc/models.hpp"
#include "jdisc/phase.hpp"
#include "jdisc/singint.hpp"
#include "jdisc/vekua.hpp"

namespace fs = std::filesystem;
using jdisc::Complex;
using json = nlohmann::json;

namespace {

int exit_code_for(jdisc::ErrorKind kind) {
    switch (kind) {
        case jdisc::ErrorKind::hypothesis_violation:
        case jdisc::ErrorKind::orientation:
            return 2;
        case jdisc::ErrorKind::no_convergence:
            return 3;
        default:
            return 1;
    }
}

jdisc::GridPtr grid_from_manifest(const json& m) {
    int radial = 64, angular = 128;
    if (m.contains("grid")) {
        radial = m["grid"].value("radial_count", radial);
        angular = m["grid"].value("angular_count", angular);
    }
    return jdisc::make_polar_grid(radial, angular);
}

jdisc::StructureCoefficients coefficient_model(const std::string& name) {
    jdisc::StructureCoefficients c;
    if (name == "zero") {
        c.a = [](Complex, Complex) { return Complex(0.0); };
        c.b = [](Complex, Complex) { return Complex(0.0); };
        c.a0 = 0.0;
        c.lipschitz_w = 0.0;
        return c;
    }
    if (name == "w-half") {
        c.a = [](Complex, Complex w) { return 0.5 * w; };
        c.b = [](Complex, Complex) { return Complex(0.0); };
        c.a0 = 0.55;
        c.lipschitz_w = 0.5;
        return c;
    }
    jdisc::fail(jdisc::ErrorKind::invalid_argument,
                "unknown coefficient model '" + name + "' (expected: zero, w-half)");
}

jdisc::CoordinateModel coordinate_model(const json& model_spec) {
    std::string name;
    double eps = 0.3;
    if (model_spec.is_string()) {
        name = model_spec.get<std::string>();
    } else {
        name = model_spec.value("name", std::string());
        eps = model_spec.value("epsilon", eps);
    }
    if (name == "identity") return jdisc::make_identity_model();
    if (name == "shear-2zbar-w") return jdisc::make_shear_model();
    if (name == "blowup") return jdisc::make_blowup_model();
    if (name == "integrable-graph") {
        if (model_spec.is_object() && model_spec.contains("terms")) {
            std::vector<jdisc::GraphTerm> terms;
            for (const auto& t : model_spec["terms"]) {
                jdisc::GraphTerm gt;
                gt.z_pow = t.value("z_pow", 0);
                gt.zbar_pow = t.value("zbar_pow", 0);
                gt.w_pow = t.value("w_pow", 0);
                gt.coeff = jdisc::complex_from_json(t.at("coeff"));
                terms.push_back(gt);
            }
            return jdisc::make_integrable_graph_model(terms);
        }
        return jdisc::make_integrable_eps_model(eps);
    }
    jdisc::fail(jdisc::ErrorKind::invalid_argument,
                "unknown coordinate model '" + name +
                    "' (expected: identity, shear-2zbar-w, blowup, integrable-graph)");
}

std::vector<Complex> slices_from_manifest(const json& params) {
    std::vector<Complex> slices;
    if (params.contains("z_slices")) {
        for (const auto& s : params["z_slices"]) slices.push_back(jdisc::complex_from_json(s));
        return slices;
    }
    const int count = params.value("slice_count", 8);
    const double radius = params.value("slice_radius", 0.5);
    for (int i = 0; i < count; ++i)
        slices.push_back(std::polar(radius, 2.0 * jdisc::kPi * i / count));
    return slices;
}

struct RunContext {
    json manifest;
    fs::path out_dir;
    json outputs; // filled by the command
};

void command_solve(RunContext& ctx) {
    const json& m = ctx.manifest;
    const json params = m.value("params", json::object());
    auto grid = grid_from_manifest(m);
    jdisc::SolverConfig cfg =
        jdisc::solver_config_from_json(m.value("solver", json::object()), grid);
    auto coeffs = coefficient_model(m.value("model", json("zero")).is_string()
                                        ? m["model"].get<std::string>()
                                        : m["model"].value("name", std::string("zero")));
    const int n = params.value("n", 1);
    const double r = params.value("r", 0.5);
    const double t = params.value("t", 0.0);
    jdisc::DiscSolution sol = jdisc::solve_disc(coeffs, n, r, t, cfg);
    ctx.outputs["disc"] = jdisc::write_disc_solution(sol, ctx.out_dir / "disc");
}

void command_sweep(RunContext& ctx) {
    const json& m = ctx.manifest;
    const json params = m.value("params", json::object());
    auto grid = grid_from_manifest(m);
    jdisc::SolverConfig cfg =
        jdisc::solver_config_from_json(m.value("solver", json::object()), grid);
    auto coeffs = coefficient_model(m.value("model", json("zero")).is_string()
                                        ? m["model"].get<std::string>()
                                        : m["model"].value("name", std::string("zero")));
    std::vector<double> radii;
    if (params.contains("radii"))
        for (const auto& r : params["radii"]) radii.push_back(r.get<double>());
    if (radii.empty())
        for (int i = 1; i <= 10; ++i) radii.push_back(0.1 * i);
    const int n = params.value("n", 1);
    const double t = params.value("t", 0.0);
    auto sols = jdisc::homotopy_sweep(coeffs, n, t, radii, cfg);
    json sweep = json::array();
    for (std::size_t i = 0; i < sols.size(); ++i) {
        json entry;
        entry["r"] = radii[i];
        entry["diagnostics"] = jdisc::to_json(sols[i].diagnostics);
        if (i > 0) {
            double dist = 0.0;
            for (int k = 0; k < grid->node_count(); ++k) {
                dist = std::max(dist,
                                std::abs(sols[i].z_fn.values[k] - sols[i - 1].z_fn.values[k]));
                dist = std::max(dist,
                                std::abs(sols[i].w_fn.values[k] - sols[i - 1].w_fn.values[k]));
            }
            entry["sup_distance_to_previous"] = dist;
        }
        sweep.push_back(std::move(entry));
        jdisc::write_disc_solution(sols[i], ctx.out_dir / ("disc_r" + std::to_string(i)));
    }
    ctx.outputs["sweep"] = std::move(sweep);
}

void command_attach(RunContext& ctx) {
    const json& m = ctx.manifest;
    const json params = m.value("params", json::object());
    auto grid = grid_from_manifest(m);
    jdisc::SolverConfig cfg =
        jdisc::solver_config_from_json(m.value("solver", json::object()), grid);
    auto model = coordinate_model(m.value("model", json("identity")));
    const int n = params.value("n", 1);
    const double r = params.value("r", 0.5);
    const double t = params.value("t", 0.0);
    jdisc::AttachResult res = jdisc::attach_disc_to_torus(model, n, r, t, cfg);
    {
        std::ofstream os(ctx.out_dir / "boundary_target.csv");
        os << "re_z,im_z,re_w,im_w\n" << std::setprecision(17);
        for (const auto& [zp, wp] : res.disc_in_target)
            os << zp.real() << ',' << zp.imag() << ',' << wp.real() << ',' << wp.imag() << '\n';
    }
    ctx.outputs["disc"] = jdisc::write_disc_solution(res.solution, ctx.out_dir / "disc");
    ctx.outputs["torus_distance"] = res.torus_distance;
}

void command_pullback(RunContext& ctx) {
    const json& m = ctx.manifest;
    const json params = m.value("params", json::object());
    auto grid = grid_from_manifest(m);
    auto model = coordinate_model(m.value("model", json("identity")));
    jdisc::PullbackOptions opts;
    opts.w_domain_radius = params.value("w_radius", 1.0);
    auto result = jdisc::pullback_structure(model, slices_from_manifest(params), grid, opts);
    ctx.outputs["pullback"] = jdisc::write_pullback_result(result, ctx.out_dir);
}

void command_vekua(RunContext& ctx) {
    const json& m = ctx.manifest;
    const json params = m.value("params", json::object());
    auto grid = grid_from_manifest(m);
    const std::uint64_t seed = params.value("seed", 1234u);
    std::vector<Complex> roots;
    if (params.contains("roots"))
        for (const auto& r : params["roots"]) roots.push_back(jdisc::complex_from_json(r));

    // Forward construction: h = p(w) e^{T u0} with a seeded smooth density,
    // mu = u0 h / conj(h); then the decomposition must recover the pieces.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const Complex c1(unif(rng), unif(rng)), c2(unif(rng), unif(rng));
    jdisc::GridFunction u0 = jdisc::sample(
        [&](Complex w) { return 0.25 * (c1 * std::conj(w) + c2 * w * std::conj(w)); }, grid);
    jdisc::CauchyGreenOperator op(grid);
    jdisc::GridFunction tu0 = op.transform_grid(u0);
    jdisc::GridFunction h(grid);
    for (int k = 0; k < grid->node_count(); ++k) {
        Complex p = 1.0;
        for (const auto& r : roots) p *= (grid->nodes[k] - r);
        h.values[k] = p * std::exp(tu0.values[k]);
    }
    jdisc::GridFunction mu(grid);
    for (int k = 0; k < grid->node_count(); ++k) {
        const Complex hv = h.values[k];
        mu.values[k] = std::abs(hv) < 1e-12 ? Complex(0.0)
                                            : u0.values[k] * hv / std::conj(hv);
    }
    auto dec = jdisc::similarity_decompose(h, mu);
    double reconstruction = 0.0;
    for (int k = 0; k < grid->node_count(); ++k)
        reconstruction = std::max(reconstruction,
                                  std::abs(dec.phi.values[k] * std::exp(dec.tu.values[k]) -
                                           h.values[k]));
    jdisc::write_csv(dec.phi, ctx.out_dir / "phi.csv");
    jdisc::write_csv(dec.tu, ctx.out_dir / "tu.csv");
    ctx.outputs["vekua"] = {{"seed", seed},
                            {"zero_count", dec.zero_count},
                            {"expected_zero_count", roots.size()},
                            {"zero_count_confidence", dec.zero_count_confidence},
                            {"reconstruction_error", reconstruction},
                            {"dbar_phi_residual", dec.dbar_phi_residual},
                            {"vekua_residual", jdisc::vekua_residual(h, mu)}};
}

void command_phasefit(RunContext& ctx) {
    const json& m = ctx.manifest;
    const json params = m.value("params", json::object());
    const int n = params.value("n", 1);
    const std::uint64_t seed = params.value("seed", 1234u);
    const int samples = params.value("sample_count", std::max(200, 40 * n * n));
    auto coeffs = jdisc::fit_binomial_coeffs(n, samples, seed);
    std::ofstream os(ctx.out_dir / "phase_coeffs.json");
    os << jdisc::to_json(coeffs).dump(2) << '\n';
    ctx.outputs["phasefit"] = {{"n", n},
                               {"seed", seed},
                               {"sample_count", samples},
                               {"fit_residual", coeffs.fit_residual}};
}

void command_verify(RunContext& ctx) {
    const json& m = ctx.manifest;
    const json params = m.value("params", json::object());
    auto grid = grid_from_manifest(m);
    auto model = coordinate_model(m.value("model", json("identity")));
    jdisc::PullbackOptions opts;

    json checks = json::object();
    std::vector<Complex> slices = slices_from_manifest(params);

    if (model.name == "shear-2zbar-w") opts.w_domain_radius = params.value("w_radius", 0.45);

    auto result = jdisc::pullback_structure(model, slices, grid, opts);
    const auto report = jdisc::singular_set_report(result);
    checks["singular_set"] = jdisc::to_json(report);

    // Reference coefficient fields for the built-in models.
    double worst = 0.0;
    for (const auto& slice : result.slices) {
        for (int k = 0; k < grid->node_count(); ++k) {
            if (slice.sigma_mask[k]) continue;
            const Complex w = opts.w_domain_radius * grid->nodes[k];
            Complex want(0.0);
            if (model.name == "identity") want = Complex(0.0);
            else if (model.name == "shear-2zbar-w") want = 2.0 * w;
            else if (model.name == "blowup") want = std::conj(w) * std::conj(w) / w;
            else if (model.name == "integrable-graph") continue; // handled below
            worst = std::max(worst, std::abs(slice.a.values[k] - want));
        }
    }
    if (model.name != "integrable-graph") checks["reference_agreement"] = worst;

    if (model.kind == jdisc::CoordinateModel::Kind::integrable_graph) {
        auto appendix = jdisc::integrable_pullback(model, slices, grid, opts);
        double diff = 0.0;
        for (std::size_t s = 0; s < result.slices.size(); ++s)
            for (int k = 0; k < grid->node_count(); ++k)
                diff = std::max(diff, std::abs(result.slices[s].a.values[k] -
                                               appendix.slices[s].a.values[k]));
        checks["appendix_vs_general"] = diff;
        checks["appendix_vs_general_pass"] = diff <= 1e-2;
    }
    ctx.outputs["verify"] = std::move(checks);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-holomorphic disc toolkit"};
    app.require_subcommand(0, 1);

    std::string manifest_path, output_dir, grid_spec, model_name;
    std::uint64_t seed = 0;
    bool seed_set = false, model_set = false;

    app.add_option("--manifest", manifest_path, "run manifest (JSON)");
    app.add_option("--output", output_dir, "output directory");
    app.add_option("--seed", seed, "64-bit seed")->each([&](std::string) { seed_set = true; });
    app.add_option("--grid", grid_spec, "grid as <radial>x<angular>, e.g. 128x256");

    double opt_r = -1.0, opt_t = -1.0, opt_wr = -1.0;
    int opt_n = -1, opt_samples = -1, opt_slice_count = -1;
    std::vector<std::string> command_names = {"solve", "sweep", "attach", "pullback",
                                              "vekua", "phasefit", "verify"};
    for (const auto& name : command_names) {
        auto* sub = app.add_subcommand(name);
        sub->fallthrough(); // global flags may follow the subcommand
        sub->add_option("--model", model_name)->each([&](std::string) { model_set = true; });
        sub->add_option("--n", opt_n);
        sub->add_option("--r", opt_r);
        sub->add_option("--t", opt_t);
        sub->add_option("--w-radius", opt_wr);
        sub->add_option("--samples", opt_samples);
        sub->add_option("--slice-count", opt_slice_count);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage errors exit with 1
    }

    json manifest;
    try {
        if (!manifest_path.empty()) {
            std::ifstream is(manifest_path);
            if (!is.good()) {
                std::cerr << "error: cannot open manifest " << manifest_path << "\n";
                return 1;
            }
            is >> manifest;
        }
        if (!app.get_subcommands().empty())
            manifest["command"] = app.get_subcommands().front()->get_name();
        if (model_set) manifest["model"] = model_name;
        if (!grid_spec.empty()) {
            const auto xpos = grid_spec.find('x');
            if (xpos == std::string::npos) {
                std::cerr << "error: --grid expects <radial>x<angular>\n";
                return 1;
            }
            manifest["grid"] = {{"radial_count", std::stoi(grid_spec.substr(0, xpos))},
                                {"angular_count", std::stoi(grid_spec.substr(xpos + 1))}};
        }
        json& params = manifest["params"];
        if (!params.is_object()) params = json::object();
        if (seed_set) params["seed"] = seed;
        if (opt_n >= 0) params["n"] = opt_n;
        if (opt_r >= 0) params["r"] = opt_r;
        if (opt_t >= 0) params["t"] = opt_t;
        if (opt_wr >= 0) params["w_radius"] = opt_wr;
        if (opt_samples >= 0) params["sample_count"] = opt_samples;
        if (opt_slice_count >= 0) params["slice_count"] = opt_slice_count;
        if (!output_dir.empty()) manifest["output_dir"] = output_dir;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (!manifest.contains("command")) {
        std::cerr << "error: no command given (subcommand or manifest \"command\")\n";
        return 1;
    }

    RunContext ctx;
    ctx.manifest = manifest;
    std::string out = manifest.value("output_dir", std::string());
    if (out.empty()) {
        const char* root = std::getenv("JDISC_OUTPUT_ROOT");
        out = (fs::path(root ? root : ".") / "jdisc_run").string();
    }
    ctx.out_dir = out;

    const auto started = std::chrono::steady_clock::now();
    try {
        fs::create_directories(ctx.out_dir);
        const std::string command = manifest["command"].get<std::string>();
        if (command == "solve") command_solve(ctx);
        else if (command == "sweep") command_sweep(ctx);
        else if (command == "attach") command_attach(ctx);
        else if (command == "pullback") command_pullback(ctx);
        else if (command == "vekua") command_vekua(ctx);
        else if (command == "phasefit") command_phasefit(ctx);
        else if (command == "verify") command_verify(ctx);
        else {
            std::cerr << "error: unknown command '" << command << "'\n";
            return 1;
        }
    } catch (const jdisc::Error& e) {
        const int code = exit_code_for(e.kind());
        json err{{"kind", jdisc::to_string(e.kind())}, {"message", e.what()}, {"exit_code", code}};
        std::ofstream os(ctx.out_dir / "error.json");
        os << err.dump(2) << '\n';
        std::cerr << "error: " << e.what() << "\n";
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    json summary;
    summary["manifest"] = ctx.manifest;
    summary["outputs"] = ctx.outputs;
    {
        std::ofstream os(ctx.out_dir / "run_summary.json");
        os << summary.dump(2) << '\n';
    }
    {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::ofstream os(ctx.out_dir / "timing.json");
        os << json{{"wall_seconds", wall}}.dump(2) << '\n';
    }
    std::cout << (ctx.out_dir / "run_summary.json").string() << "\n";
    return 0;
}
