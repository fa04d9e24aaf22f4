#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>

namespace jdisc {

namespace detail {

// 7-15 Gauss-Kronrod pair on [-1, 1] (QUADPACK constants).
inline constexpr std::array<double, 8> kGK15Nodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr std::array<double, 8> kGK15Weights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> kG7Weights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <typename Fn>
void gk15(const Fn& f, double a, double b, std::complex<double>& kronrod,
          std::complex<double>& gauss) {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    kronrod = kGK15Weights[7] * f(c);
    gauss = kG7Weights[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double x = h * kGK15Nodes[i];
        const std::complex<double> pair_sum = f(c - x) + f(c + x);
        kronrod += kGK15Weights[i] * pair_sum;
        if (i % 2 == 1) gauss += kG7Weights[i / 2] * pair_sum;
    }
    kronrod *= h;
    gauss *= h;
}

template <typename Fn>
std::complex<double> gk_adaptive(const Fn& f, double a, double b, double tol, int depth) {
    std::complex<double> k, g;
    gk15(f, a, b, k, g);
    if (std::abs(k - g) <= tol || depth >= 40) return k;
    const double c = 0.5 * (a + b);
    return gk_adaptive(f, a, c, 0.5 * tol, depth + 1) +
           gk_adaptive(f, c, b, 0.5 * tol, depth + 1);
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration of a complex-valued integrand over
/// [a, b] with absolute tolerance tol.
template <typename Fn>
std::complex<double> integrate_adaptive(const Fn& f, double a, double b, double tol = 1e-9) {
    return detail::gk_adaptive(f, a, b, tol, 0);
}

} // namespace jdisc
