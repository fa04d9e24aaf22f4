#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <vector>

#include "jdisc/errors.hpp"

namespace jdisc {

using Complex = std::complex<double>;

constexpr double kPi = std::numbers::pi;

/// Tensor-product polar discretization of the closed unit disc.
///
/// Radial nodes sit at cell midpoints r_i = (i + 1/2)/R, so no node lies at
/// the origin or on |w| = 1; angular nodes are equispaced. quadrature weights
/// are the exact polar cell areas r_i * dr * dtheta and sum to pi exactly.
/// Node index layout: k = ring * angular_count + spoke.
struct DiscGrid {
    int radial_count = 0;
    int angular_count = 0;
    double dr = 0.0;
    double dtheta = 0.0;
    std::vector<double> radii;           // per ring
    std::vector<double> angles;          // per spoke
    std::vector<Complex> nodes;          // size radial_count * angular_count
    std::vector<double> quadrature_weights;

    int node_count() const { return radial_count * angular_count; }
    int index(int ring, int spoke) const { return ring * angular_count + spoke; }
    Complex node(int ring, int spoke) const { return nodes[index(ring, spoke)]; }
};

using GridPtr = std::shared_ptr<const DiscGrid>;

inline GridPtr make_polar_grid(int radial_count, int angular_count) {
    require(radial_count >= 4, ErrorKind::invalid_argument,
            "make_polar_grid: radial_count must be >= 4");
    require(angular_count >= 8, ErrorKind::invalid_argument,
            "make_polar_grid: angular_count must be >= 8");
    auto g = std::make_shared<DiscGrid>();
    g->radial_count = radial_count;
    g->angular_count = angular_count;
    g->dr = 1.0 / radial_count;
    g->dtheta = 2.0 * kPi / angular_count;
    g->radii.resize(radial_count);
    for (int i = 0; i < radial_count; ++i) g->radii[i] = (i + 0.5) * g->dr;
    g->angles.resize(angular_count);
    for (int j = 0; j < angular_count; ++j) g->angles[j] = j * g->dtheta;
    g->nodes.resize(g->node_count());
    g->quadrature_weights.resize(g->node_count());
    for (int i = 0; i < radial_count; ++i) {
        const double r = g->radii[i];
        const double area = r * g->dr * g->dtheta; // exact cell area
        for (int j = 0; j < angular_count; ++j) {
            g->nodes[g->index(i, j)] = std::polar(r, g->angles[j]);
            g->quadrature_weights[g->index(i, j)] = area;
        }
    }
    return g;
}

/// Complex samples of a function on a DiscGrid, one value per node.
struct GridFunction {
    GridPtr grid;
    std::vector<Complex> values;

    GridFunction() = default;
    explicit GridFunction(GridPtr g) : grid(std::move(g)), values(grid->node_count(), Complex(0.0)) {}
    GridFunction(GridPtr g, std::vector<Complex> v) : grid(std::move(g)), values(std::move(v)) {
        require(static_cast<int>(values.size()) == grid->node_count(), ErrorKind::invalid_argument,
                "GridFunction: value count does not match grid");
    }

    Complex& at(int ring, int spoke) { return values[grid->index(ring, spoke)]; }
    const Complex& at(int ring, int spoke) const { return values[grid->index(ring, spoke)]; }
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b, const char* where) {
    const bool same = a.grid == b.grid ||
                      (a.grid && b.grid && a.grid->radial_count == b.grid->radial_count &&
                       a.grid->angular_count == b.grid->angular_count);
    require(same, ErrorKind::invalid_argument, std::string(where) + ": grid mismatch");
}

inline void require_grid_match(const GridFunction& f, const GridPtr& g, const char* where) {
    const bool same = f.grid == g || (f.grid && g && f.grid->radial_count == g->radial_count &&
                                      f.grid->angular_count == g->angular_count);
    require(same, ErrorKind::invalid_argument, std::string(where) + ": grid mismatch");
}

/// Complex values at the equispaced points e^{i 2 pi k / angular_count} of the
/// unit circle. Boundary traces live here rather than on a grid ring.
struct CircleFunction {
    int angular_count = 0;
    std::vector<Complex> values;

    CircleFunction() = default;
    explicit CircleFunction(int count) : angular_count(count), values(count, Complex(0.0)) {
        require(count >= 4, ErrorKind::invalid_argument, "CircleFunction: angular_count too small");
    }

    double angle(int k) const { return 2.0 * kPi * k / angular_count; }
    Complex point(int k) const { return std::polar(1.0, angle(k)); }
};

inline CircleFunction sample_circle(const std::function<Complex(Complex)>& f, int angular_count) {
    CircleFunction g(angular_count);
    for (int k = 0; k < angular_count; ++k) {
        g.values[k] = f(g.point(k));
        if (!std::isfinite(g.values[k].real()) || !std::isfinite(g.values[k].imag())) {
            std::ostringstream os;
            os << "sample_circle: non-finite value at node " << g.point(k);
            fail(ErrorKind::evaluation, os.str());
        }
    }
    return g;
}

inline GridFunction sample(const std::function<Complex(Complex)>& f, const GridPtr& grid) {
    GridFunction u(grid);
    for (int k = 0; k < grid->node_count(); ++k) {
        const Complex v = f(grid->nodes[k]);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            std::ostringstream os;
            os << "sample: non-finite value at node " << grid->nodes[k];
            fail(ErrorKind::evaluation, os.str());
        }
        u.values[k] = v;
    }
    return u;
}

namespace detail {

// Periodic central difference in the angular index.
inline Complex dtheta_central(const GridFunction& u, int i, int j) {
    const auto& g = *u.grid;
    const int jp = (j + 1) % g.angular_count;
    const int jm = (j + g.angular_count - 1) % g.angular_count;
    return (u.at(i, jp) - u.at(i, jm)) / (2.0 * g.dtheta);
}

// Radial difference: central in the interior, second-order one-sided at the
// first and last rings.
inline Complex dr_fd(const GridFunction& u, int i, int j) {
    const auto& g = *u.grid;
    const int R = g.radial_count;
    if (i == 0) return (-3.0 * u.at(0, j) + 4.0 * u.at(1, j) - u.at(2, j)) / (2.0 * g.dr);
    if (i == R - 1)
        return (3.0 * u.at(R - 1, j) - 4.0 * u.at(R - 2, j) + u.at(R - 3, j)) / (2.0 * g.dr);
    return (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * g.dr);
}

} // namespace detail

/// Finite-difference Wirtinger derivative d/dw-bar assembled from polar
/// differences: dbar = (e^{i theta}/2)(d_r + (i/r) d_theta).
inline GridFunction dbar(const GridFunction& u) {
    require(u.grid != nullptr, ErrorKind::invalid_argument, "dbar: empty grid function");
    require(u.grid->radial_count >= 8, ErrorKind::invalid_argument,
            "dbar: grid too coarse (radial_count < 8)");
    const auto& g = *u.grid;
    GridFunction out(u.grid);
    for (int i = 0; i < g.radial_count; ++i) {
        const double r = g.radii[i];
        for (int j = 0; j < g.angular_count; ++j) {
            const Complex phase = std::polar(0.5, g.angles[j]);
            out.at(i, j) = phase * (detail::dr_fd(u, i, j) +
                                    Complex(0.0, 1.0) / r * detail::dtheta_central(u, i, j));
        }
    }
    return out;
}

/// Finite-difference d/dw: dz = (e^{-i theta}/2)(d_r - (i/r) d_theta).
inline GridFunction dz(const GridFunction& u) {
    require(u.grid != nullptr, ErrorKind::invalid_argument, "dz: empty grid function");
    require(u.grid->radial_count >= 8, ErrorKind::invalid_argument,
            "dz: grid too coarse (radial_count < 8)");
    const auto& g = *u.grid;
    GridFunction out(u.grid);
    for (int i = 0; i < g.radial_count; ++i) {
        const double r = g.radii[i];
        for (int j = 0; j < g.angular_count; ++j) {
            const Complex phase = std::polar(0.5, -g.angles[j]);
            out.at(i, j) = phase * (detail::dr_fd(u, i, j) -
                                    Complex(0.0, 1.0) / r * detail::dtheta_central(u, i, j));
        }
    }
    return out;
}

/// Max |u - v| over the rings where dbar/dz use centered stencils
/// (the two one-sided rings are excluded).
inline double max_interior_abs_diff(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a, b, "max_interior_abs_diff");
    const auto& g = *a.grid;
    double m = 0.0;
    for (int i = 1; i + 1 < g.radial_count; ++i)
        for (int j = 0; j < g.angular_count; ++j)
            m = std::max(m, std::abs(a.at(i, j) - b.at(i, j)));
    return m;
}

inline double max_abs(const GridFunction& u) {
    double m = 0.0;
    for (const auto& v : u.values) m = std::max(m, std::abs(v));
    return m;
}

/// Boundary trace on |w| = 1 by quadratic radial extrapolation from the
/// three outermost rings, per angular index.
inline CircleFunction boundary_trace(const GridFunction& u) {
    const auto& g = *u.grid;
    require(g.radial_count >= 3, ErrorKind::invalid_argument, "boundary_trace: too few rings");
    CircleFunction trace(g.angular_count);
    const int R = g.radial_count;
    const double r0 = g.radii[R - 3], r1 = g.radii[R - 2], r2 = g.radii[R - 1];
    // Lagrange weights for extrapolation to r = 1.
    const double l0 = (1 - r1) * (1 - r2) / ((r0 - r1) * (r0 - r2));
    const double l1 = (1 - r0) * (1 - r2) / ((r1 - r0) * (r1 - r2));
    const double l2 = (1 - r0) * (1 - r1) / ((r2 - r0) * (r2 - r1));
    for (int j = 0; j < g.angular_count; ++j)
        trace.values[j] = l0 * u.at(R - 3, j) + l1 * u.at(R - 2, j) + l2 * u.at(R - 1, j);
    return trace;
}

/// Total argument increment of a non-vanishing circle trace, divided by 2 pi,
/// plus the distance of the raw increment from the nearest integer.
struct WindingResult {
    int winding = 0;
    double confidence = 0.0; // |raw/2pi - winding|
};

inline WindingResult winding_of_trace(const CircleFunction& trace, double min_modulus) {
    double total = 0.0;
    const int n = trace.angular_count;
    for (int k = 0; k < n; ++k) {
        const Complex a = trace.values[k];
        const Complex b = trace.values[(k + 1) % n];
        if (std::abs(a) < min_modulus || std::abs(b) < min_modulus)
            fail(ErrorKind::boundary_zero, "winding: trace value below magnitude threshold");
        total += std::arg(b / a);
    }
    const double raw = total / (2.0 * kPi);
    WindingResult res;
    res.winding = static_cast<int>(std::lround(raw));
    res.confidence = std::abs(raw - res.winding);
    return res;
}

/// Pointwise helpers ------------------------------------------------------

template <typename Fn>
GridFunction apply(const GridFunction& u, Fn&& fn) {
    GridFunction out(u.grid);
    for (std::size_t k = 0; k < u.values.size(); ++k) out.values[k] = fn(u.values[k]);
    return out;
}

template <typename Fn>
GridFunction zip(const GridFunction& u, const GridFunction& v, Fn&& fn) {
    require_same_grid(u, v, "zip");
    GridFunction out(u.grid);
    for (std::size_t k = 0; k < u.values.size(); ++k) out.values[k] = fn(u.values[k], v.values[k]);
    return out;
}

} // namespace jdisc
