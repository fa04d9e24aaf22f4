#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "jdisc/errors.hpp"
#include "jdisc/grid.hpp"

namespace jdisc {

using Matrix2c = Eigen::Matrix2cd;

/// An R-linear operator on C^2 in the split form v -> P v + Q v-bar.
/// The standard structure is P = iI, Q = 0; a complex anti-linear map has
/// P = 0. Composition and inversion stay inside this representation.
struct RLinearMap {
    Matrix2c p = Matrix2c::Zero();
    Matrix2c q = Matrix2c::Zero();

    Eigen::Vector2cd operator()(const Eigen::Vector2cd& v) const { return p * v + q * v.conjugate(); }

    RLinearMap compose(const RLinearMap& other) const {
        // (this ∘ other) v = P1 (P2 v + Q2 vb) + Q1 conj(P2 v + Q2 vb)
        RLinearMap r;
        r.p = p * other.p + q * other.q.conjugate();
        r.q = p * other.q + q * other.p.conjugate();
        return r;
    }

    RLinearMap operator+(const RLinearMap& other) const { return {p + other.p, q + other.q}; }
    RLinearMap operator-(const RLinearMap& other) const { return {p - other.p, q - other.q}; }

    /// Determinant of the doubled complex form [[P, Q], [conj(Q), conj(P)]],
    /// which equals the determinant of the 4x4 real realization.
    double real_determinant() const {
        Eigen::Matrix4cd m;
        m.block<2, 2>(0, 0) = p;
        m.block<2, 2>(0, 2) = q;
        m.block<2, 2>(2, 0) = q.conjugate();
        m.block<2, 2>(2, 2) = p.conjugate();
        return m.determinant().real();
    }

    /// Inverse as an R-linear map, via the doubled 4x4 system.
    RLinearMap inverse() const {
        Eigen::Matrix4cd m;
        m.block<2, 2>(0, 0) = p;
        m.block<2, 2>(0, 2) = q;
        m.block<2, 2>(2, 0) = q.conjugate();
        m.block<2, 2>(2, 2) = p.conjugate();
        Eigen::FullPivLU<Eigen::Matrix4cd> lu(m);
        require(lu.isInvertible(), ErrorKind::non_generic_position,
                "RLinearMap::inverse: singular operator");
        Eigen::Matrix4cd inv = lu.inverse();
        return {inv.block<2, 2>(0, 0), inv.block<2, 2>(0, 2)};
    }

    double norm() const { return std::max(p.cwiseAbs().maxCoeff(), q.cwiseAbs().maxCoeff()); }

    static RLinearMap standard() { return {Complex(0.0, 1.0) * Matrix2c::Identity(), Matrix2c::Zero()}; }
    static RLinearMap identity_map() { return {Matrix2c::Identity(), Matrix2c::Zero()}; }
};

/// Max-abs deviation of J from a genuine structure, ||J^2 + I||.
inline double structure_defect(const RLinearMap& j) {
    RLinearMap jj = j.compose(j);
    jj.p += Matrix2c::Identity();
    return jj.norm();
}

/// The complex matrix A of an almost complex structure, admissible when
/// det(I - A conj(A)) is nonzero. The admissibility margin |det(I - A Abar)|
/// is recorded on construction.
struct AcsMatrix {
    Matrix2c a = Matrix2c::Zero();
    double admissibility_margin = 1.0;
};

inline AcsMatrix make_acs(const Matrix2c& a) {
    AcsMatrix m;
    m.a = a;
    const Matrix2c lead = Matrix2c::Identity() - a * a.conjugate();
    m.admissibility_margin = std::abs(lead.determinant());
    require(m.admissibility_margin > 1e-14, ErrorKind::inadmissible,
            "make_acs: det(I - A Abar) vanishes");
    return m;
}

/// Jacobian blocks of a coordinate map Z -> Z': dZ'/dZ and dZ'/dZbar.
struct JacobianBlocks {
    Matrix2c z_prime_Z = Matrix2c::Zero();
    Matrix2c z_prime_Zbar = Matrix2c::Zero();
};

/// J -> A through Q = (Jst + J)^{-1}(Jst - J); the anti-linear part of Q is
/// the matrix A acting by A v = Q v-bar.
inline AcsMatrix j_to_a(const RLinearMap& j, double structure_tol = 1e-10) {
    const double defect = structure_defect(j);
    require(defect <= structure_tol, ErrorKind::not_a_structure,
            "j_to_a: J^2 differs from -I beyond tolerance");
    const RLinearMap jst = RLinearMap::standard();
    const RLinearMap sum = jst + j;
    require(std::abs(sum.real_determinant()) > 1e-14, ErrorKind::non_generic_position,
            "j_to_a: det(Jst + J) vanishes");
    const RLinearMap qmap = sum.inverse().compose(jst - j);
    // For a structure, Q is complex anti-linear; the residual linear part is
    // numerical noise.
    require(qmap.p.cwiseAbs().maxCoeff() <= 1e2 * structure_tol * std::max(1.0, qmap.norm()),
            ErrorKind::not_a_structure, "j_to_a: Q has a complex-linear part");
    return make_acs(qmap.q);
}

/// A -> J by the closed formula J v = i (I - A Abar)^{-1} [(I + A Abar) v - 2 A v-bar].
inline RLinearMap a_to_j(const AcsMatrix& a) {
    const Matrix2c prod = a.a * a.a.conjugate();
    const Matrix2c lead = Matrix2c::Identity() - prod;
    require(std::abs(lead.determinant()) > 1e-14, ErrorKind::inadmissible,
            "a_to_j: inadmissible matrix");
    const Matrix2c inv = lead.inverse();
    RLinearMap j;
    j.p = Complex(0.0, 1.0) * inv * (Matrix2c::Identity() + prod);
    j.q = Complex(0.0, -2.0) * inv * a.a;
    return j;
}

/// Transformation rule for the complex matrix under a coordinate map with the
/// given forward Jacobian blocks:
///   A = (Z'_Z - A' conj(Z'_Zbar))^{-1} (A' conj(Z'_Z) - Z'_Zbar).
/// For a holomorphic map (Z'_Zbar = 0) this reduces to (Z'_Z)^{-1} A' conj(Z'_Z).
inline AcsMatrix pullback_matrix(const AcsMatrix& a_prime, const JacobianBlocks& blocks,
                                 double condition_cap = 1e8) {
    const Matrix2c lead = blocks.z_prime_Z - a_prime.a * blocks.z_prime_Zbar.conjugate();
    Eigen::JacobiSVD<Matrix2c> svd(lead);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(1);
    if (!(smin > 0.0) || smax / smin > condition_cap)
        fail(ErrorKind::singular_pullback,
             "pullback_matrix: leading matrix singular or ill-conditioned (cond > cap)");
    const Matrix2c rhs = a_prime.a * blocks.z_prime_Z.conjugate() - blocks.z_prime_Zbar;
    return make_acs(lead.inverse() * rhs);
}

} // namespace jdisc
