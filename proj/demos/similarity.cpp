// Splits a generalized analytic function into its holomorphic factor and
// logarithmic difference, then reads off the zero count.
#include <cstdio>

#include "jdisc/singint.hpp"
#include "jdisc/vekua.hpp"

int main() {
    auto grid = jdisc::make_polar_grid(48, 96);
    jdisc::CauchyGreenOperator op(grid);

    // h = (w - 0.1)(w + 0.2) e^{T u0}, mu = u0 h / conj(h)
    jdisc::GridFunction u0 = jdisc::sample(
        [](jdisc::Complex w) { return 0.25 * std::conj(w); }, grid);
    jdisc::GridFunction tu0 = op.transform_grid(u0);
    jdisc::GridFunction h(grid), mu(grid);
    for (int k = 0; k < grid->node_count(); ++k) {
        const jdisc::Complex w = grid->nodes[k];
        h.values[k] = (w - 0.1) * (w + 0.2) * std::exp(tu0.values[k]);
        mu.values[k] = u0.values[k] * h.values[k] / std::conj(h.values[k]);
    }
    auto dec = jdisc::normalized_decompose(h, mu, 1e-3);
    std::printf("zero count %zu, roots:", dec.monic_roots.size());
    for (const auto& r : dec.monic_roots) std::printf(" (%.4f, %.4f)", r.real(), r.imag());
    std::printf("\n|phi0| in [%.4f, %.4f], Lip(Tu) = %.4f\n", dec.bounds.inf_phi0,
                dec.bounds.sup_phi0, dec.bounds.tu_lipschitz);
    return 0;
}
