#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "jdisc/acs.hpp"
#include "jdisc/errors.hpp"
#include "jdisc/grid.hpp"

namespace jdisc {

/// A coordinate model for the pullback pipeline: the map H, its forward
/// Jacobian blocks (analytic, supplied with the model), and the complex
/// matrix field of the target structure. Models are supplied in coordinates
/// where the slice maps w -> H(z, w) are holomorphic curves of the target
/// structure; the normal-coordinate construction is not part of the library.
struct CoordinateModel {
    enum class Kind { integrable_graph, general };

    std::string name;
    Kind kind = Kind::general;
    std::function<std::pair<Complex, Complex>(Complex, Complex)> h_map;
    std::function<JacobianBlocks(Complex, Complex)> jacobian_blocks;
    std::function<Matrix2c(Complex, Complex)> target_structure; // A'(z', w')
    bool target_is_standard = false; // A' identically zero
};

inline CoordinateModel make_identity_model() {
    CoordinateModel m;
    m.name = "identity";
    m.kind = CoordinateModel::Kind::integrable_graph;
    m.target_is_standard = true;
    m.h_map = [](Complex z, Complex w) { return std::pair{z, w}; };
    m.jacobian_blocks = [](Complex, Complex) {
        JacobianBlocks b;
        b.z_prime_Z = Matrix2c::Identity();
        return b;
    };
    m.target_structure = [](Complex, Complex) { return Matrix2c::Zero(); };
    return m;
}

/// H(z, w) = (z - 2 zbar w, w) with the standard target structure; the
/// orientation condition fails across |w| = 1/2.
inline CoordinateModel make_shear_model() {
    CoordinateModel m;
    m.name = "shear-2zbar-w";
    m.kind = CoordinateModel::Kind::general;
    m.target_is_standard = true;
    m.h_map = [](Complex z, Complex w) { return std::pair{z - 2.0 * std::conj(z) * w, w}; };
    m.jacobian_blocks = [](Complex z, Complex w) {
        JacobianBlocks b;
        b.z_prime_Z << Complex(1.0), -2.0 * std::conj(z), Complex(0.0), Complex(1.0);
        b.z_prime_Zbar << -2.0 * w, Complex(0.0), Complex(0.0), Complex(0.0);
        return b;
    };
    m.target_structure = [](Complex, Complex) { return Matrix2c::Zero(); };
    return m;
}

/// Blow-up H(z, w) = (z w, w) against the target structure
/// A' = [[conj(w'), -conj(z')], [0, 0]]; the pullback is w-bar^2 / w.
inline CoordinateModel make_blowup_model() {
    CoordinateModel m;
    m.name = "blowup";
    m.kind = CoordinateModel::Kind::general;
    m.target_is_standard = false;
    m.h_map = [](Complex z, Complex w) { return std::pair{z * w, w}; };
    m.jacobian_blocks = [](Complex z, Complex w) {
        JacobianBlocks b;
        b.z_prime_Z << w, z, Complex(0.0), Complex(1.0);
        b.z_prime_Zbar = Matrix2c::Zero();
        return b;
    };
    m.target_structure = [](Complex zp, Complex wp) {
        Matrix2c a;
        a << std::conj(wp), -std::conj(zp), Complex(0.0), Complex(0.0);
        return a;
    };
    return m;
}

/// One monomial c z^p zbar^q w^s of an integrable-graph coefficient table.
struct GraphTerm {
    int z_pow = 0;
    int zbar_pow = 0;
    int w_pow = 0;
    Complex coeff;
};

namespace detail {

inline Complex ipow(Complex z, int n) {
    Complex r = 1.0;
    for (int i = 0; i < n; ++i) r *= z;
    return r;
}

} // namespace detail

/// Graph model H(z, w) = (h(z, w), w) with h a polynomial in (z, zbar, w),
/// holomorphic in w by construction, against the standard target structure.
inline CoordinateModel make_integrable_graph_model(std::vector<GraphTerm> terms,
                                                   std::string name = "integrable-graph") {
    require(!terms.empty(), ErrorKind::invalid_argument,
            "make_integrable_graph_model: empty coefficient table");
    for (const auto& t : terms)
        require(t.z_pow >= 0 && t.zbar_pow >= 0 && t.w_pow >= 0, ErrorKind::invalid_argument,
                "make_integrable_graph_model: negative exponent");
    CoordinateModel m;
    m.name = std::move(name);
    m.kind = CoordinateModel::Kind::integrable_graph;
    m.target_is_standard = true;
    auto h = [terms](Complex z, Complex w) {
        Complex acc(0.0);
        for (const auto& t : terms)
            acc += t.coeff * detail::ipow(z, t.z_pow) * detail::ipow(std::conj(z), t.zbar_pow) *
                   detail::ipow(w, t.w_pow);
        return acc;
    };
    m.h_map = [h](Complex z, Complex w) { return std::pair{h(z, w), w}; };
    m.jacobian_blocks = [terms](Complex z, Complex w) {
        Complex hz(0.0), hzb(0.0), hw(0.0);
        for (const auto& t : terms) {
            const Complex zp = detail::ipow(z, t.z_pow);
            const Complex zbp = detail::ipow(std::conj(z), t.zbar_pow);
            const Complex wp = detail::ipow(w, t.w_pow);
            if (t.z_pow > 0)
                hz += t.coeff * static_cast<double>(t.z_pow) * detail::ipow(z, t.z_pow - 1) * zbp * wp;
            if (t.zbar_pow > 0)
                hzb += t.coeff * static_cast<double>(t.zbar_pow) * zp *
                       detail::ipow(std::conj(z), t.zbar_pow - 1) * wp;
            if (t.w_pow > 0)
                hw += t.coeff * static_cast<double>(t.w_pow) * zp * zbp * detail::ipow(w, t.w_pow - 1);
        }
        JacobianBlocks b;
        b.z_prime_Z << hz, hw, Complex(0.0), Complex(1.0);
        b.z_prime_Zbar << hzb, Complex(0.0), Complex(0.0), Complex(0.0);
        return b;
    };
    m.target_structure = [](Complex, Complex) { return Matrix2c::Zero(); };
    return m;
}

/// h(z, w) = z + eps zbar w, the linear-shear graph; a = -eps w.
inline CoordinateModel make_integrable_eps_model(double eps) {
    return make_integrable_graph_model(
        {GraphTerm{1, 0, 0, Complex(1.0)}, GraphTerm{0, 1, 1, Complex(eps)}},
        "integrable-graph");
}

} // namespace jdisc
