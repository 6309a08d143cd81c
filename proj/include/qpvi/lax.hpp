#pragma once

#include <Eigen/Eigenvalues>

#include <array>
#include <vector>

#include "qpvi/types.hpp"

namespace qpvi {

/// A(z) = A0 + A1 z + A2 z^2, valid at time t.
template <typename Real>
struct LaxMatrix {
    Mat2<Real> A0 = Mat2<Real>::Zero(), A1 = Mat2<Real>::Zero(), A2 = Mat2<Real>::Zero();
    Complex<Real> t{1};

    Mat2<Real> operator()(const Complex<Real>& z) const { return A0 + z * (A1 + z * A2); }

    /// diag(1,d) A diag(1,1/d): the gauge freedom of the linear system.
    LaxMatrix gauged(const Complex<Real>& d) const {
        const Mat2<Real> G = diag2<Real>(Complex<Real>(1), d), Gi = diag2<Real>(Complex<Real>(1), Complex<Real>(1) / d);
        return {G * A0 * Gi, G * A1 * Gi, G * A2 * Gi, t};
    }
};

/// Coordinates (f, g, w) of a coefficient matrix.
template <typename Real>
struct LaxPoint {
    Complex<Real> f, g, w;
};

/// Auxiliary quantities of the parametrisation in (f, g, w).
template <typename Real>
struct LaxQuantities {
    Complex<Real> g1, g2, alpha, beta, gamma, delta;
};

template <typename Real>
LaxQuantities<Real> lax_quantities(const Complex<Real>& f, const Complex<Real>& g, const ParameterSet<Real>& p,
                                   const Complex<Real>& t) {
    if (!is_finite(f) || f == Complex<Real>(0)) throw DomainError("build_A: f must be finite and nonzero");
    if (!is_finite(g) || g == Complex<Real>(0)) throw DomainError("build_A: g must be finite and nonzero");
    const Complex<Real> q = p.q.value(), one(1), ki = p.kappaInf, ki2 = ki * ki;
    if (std::abs(one - ki2) < Real(1e-14)) throw DomainError("build_A: kinf^2 = 1");
    auto ring = [](const Complex<Real>& k) { return k + Complex<Real>(1) / k; };
    LaxQuantities<Real> r;
    r.g1 = (f - p.kappaT * t) * (f - t / p.kappaT) / (q * ki * g);
    r.g2 = q * ki * (f - p.kappa1) * (f - one / p.kappa1) * g;
    const Complex<Real> lin = ring(p.kappaT) * t + ring(p.kappa1);
    const Complex<Real> common = ki2 * r.g1 - ki * ring(p.kappa0) * t + r.g2;
    r.alpha = (common + lin * f - Real(2) * f * f) / ((one - ki2) * f);
    r.beta = (common + ki2 * lin * f - Real(2) * ki2 * f * f) / ((ki2 - one) * f);
    r.gamma = r.g1 + r.g2 + f * f + Real(2) * (r.alpha + r.beta) * f + r.alpha * r.beta -
              (t * t + ring(p.kappaT) * ring(p.kappa1) * t + one);
    r.delta = (t * t - (r.g1 + r.alpha * f) * (r.g2 + r.beta * f)) / f;
    return r;
}

/// Relative defects of the structural invariants: det A(z) against prod (z - x_k) at fixed points,
/// and the eigenvalues of A0 against {k0 t, t/k0}.
template <typename Real>
Real lax_invariant_defect(const LaxMatrix<Real>& A, const ParameterSet<Real>& p) {
    const auto x = p.roots(A.t);
    const Real rad = Real(1.3) * std::sqrt(std::max(Real(1), std::abs(A.t)));
    Real worst = 0;
    for (int k = 0; k < 6; ++k) {
        const Complex<Real> z = std::polar(rad, Real(0.3) + Real(1.05) * k);
        const Mat2<Real> M = A(z);
        const Complex<Real> det = M.determinant();
        const Complex<Real> expect = (z - x[0]) * (z - x[1]) * (z - x[2]) * (z - x[3]);
        const Real sc = std::abs(M(0, 0) * M(1, 1)) + std::abs(M(0, 1) * M(1, 0)) + std::abs(expect);
        worst = std::max(worst, std::abs(det - expect) / sc);
    }
    const Complex<Real> tr = A.A0.trace(), det0 = A.A0.determinant();
    const Complex<Real> l1 = p.kappa0 * A.t, l2 = A.t / p.kappa0;
    const Real sc0 = std::abs(l1) + std::abs(l2);
    worst = std::max(worst, std::abs(tr - (l1 + l2)) / sc0);
    worst = std::max(worst, std::abs(det0 - l1 * l2) / (sc0 * sc0));
    return worst;
}

/// Coefficient matrix assembled from (f, g, w) at time t.
template <typename Real>
LaxMatrix<Real> build_A(const Complex<Real>& f, const Complex<Real>& g, const Complex<Real>& w,
                        const ParameterSet<Real>& p, const Complex<Real>& t, Real check_tol = Real(1e-10)) {
    if (!is_finite(w) || w == Complex<Real>(0)) throw DomainError("build_A: w must be finite and nonzero");
    const auto Q = lax_quantities(f, g, p, t);
    const Complex<Real> ki = p.kappaInf, one(1);
    LaxMatrix<Real> A;
    A.t = t;
    A.A2 = diag2<Real>(ki, one / ki);
    A.A1 << -ki * (f + Q.alpha), w / ki, ki / w * Q.gamma, -(f + Q.beta) / ki;
    A.A0 << ki * (f * Q.alpha + Q.g1), -w / ki * f, ki / w * Q.delta, (f * Q.beta + Q.g2) / ki;
    const Real d = lax_invariant_defect(A, p);
    if (!(d <= check_tol)) throw ConsistencyFailure("build_A: invariant defect " + std::to_string(double(d)));
    return A;
}

/// (f, g, w) read off a coefficient matrix; g is projective since it is infinite when f = k1^{+-1}.
template <typename Real>
struct LaxCoords {
    Complex<Real> f;
    ProjectivePoint<Real> g;
    Complex<Real> w;
};

/// f is the root of A12(z), w = kinf times its slope, g = A22(f) / (q (f - k1)(f - 1/k1)).
template <typename Real>
LaxCoords<Real> coords_from_A(const LaxMatrix<Real>& A, const ParameterSet<Real>& p) {
    const Complex<Real> c1 = A.A1(0, 1), c0 = A.A0(0, 1);
    if (!(std::abs(c1) > Real(1e-14) * std::abs(c0)) || c1 == Complex<Real>(0))
        throw ReducibleLax("A12 has no root: reducible coefficient matrix");
    const Complex<Real> f = -c0 / c1;
    const Complex<Real> a22 = A(f)(1, 1);
    const Complex<Real> den = p.q.value() * (f - p.kappa1) * (f - Complex<Real>(1) / p.kappa1);
    return {f, ProjectivePoint<Real>(a22, den), p.kappaInf * c1};
}

/// B(z) = (z^2 I + z B0) / ((z - q kt t)(z - q t/kt)).
template <typename Real>
struct DeformB {
    Mat2<Real> B0 = Mat2<Real>::Zero();
    Complex<Real> t{1};
    Complex<Real> pole1{0}, pole2{0};

    Complex<Real> denominator(const Complex<Real>& z) const { return (z - pole1) * (z - pole2); }
    Mat2<Real> operator()(const Complex<Real>& z) const {
        return (z * z * Mat2<Real>::Identity() + z * B0) / denominator(z);
    }
};

/// Deformation matrix of the step (f, g, w) at t -> (fb, gb, wb) at qt.
template <typename Real>
DeformB<Real> build_B0(const LaxPoint<Real>& s, const LaxPoint<Real>& sb, const ParameterSet<Real>& p,
                       const Complex<Real>& t) {
    const Complex<Real> q = p.q.value(), one(1), ki2 = p.kappaInf * p.kappaInf;
    if (std::abs(q * ki2 - one) < Real(1e-14) || std::abs(ki2 - q) < Real(1e-14))
        throw ParameterDegeneracy("build_B0: kinf^2 in {q, 1/q}");
    const auto L = lax_quantities(s.f, s.g, p, t);
    const auto Lb = lax_quantities(sb.f, sb.g, p, q * t);
    DeformB<Real> B;
    B.t = t;
    B.pole1 = q * p.kappaT * t;
    B.pole2 = q * t / p.kappaT;
    B.B0 << q / (one - q) * (sb.f + Lb.beta - s.f - L.beta), -q * (sb.w - s.w) / (q * ki2 - one),
        q * ki2 / (ki2 - q) * (Lb.gamma / sb.w - L.gamma / s.w), q / (one - q) * (sb.f + Lb.alpha - s.f - L.alpha);
    return B;
}

/// Eight points on |z| = sqrt(|t|), rotated by phase; avoids the poles of B generically.
template <typename Real>
std::vector<Complex<Real>> sample_circle(const Complex<Real>& t, Real phase, int n = 8) {
    std::vector<Complex<Real>> zs;
    const Real r = std::sqrt(std::abs(t));
    const Real two_pi = Real(2) * Real(3.14159265358979323846264338327950288L);
    for (int k = 0; k < n; ++k) zs.push_back(std::polar(r, phase + two_pi * k / n));
    return zs;
}

/// max over samples of |A(z,qt) B(z) - B(qz) A(z,t)| / |A(z,qt) B(z)|.
template <typename Real>
Real compatibility_residual(const LaxMatrix<Real>& At, const LaxMatrix<Real>& Aqt, const DeformB<Real>& B,
                            const std::vector<Complex<Real>>& samples, const QBase<Real>& q) {
    Real worst = 0;
    const Real sc = std::abs(B.pole1) + std::abs(B.pole2);
    for (const auto& z : samples) {
        if (std::abs(B.denominator(z)) < Real(1e-12) * sc * sc ||
            std::abs(B.denominator(q.value() * z)) < Real(1e-12) * sc * sc)
            throw InvalidArgument("compatibility_residual: sample at a pole of B");
        const Mat2<Real> L = Aqt(z) * B(z);
        const Mat2<Real> R = B(q.value() * z) * At(z);
        worst = std::max(worst, sup_norm(L - R) / sup_norm(L));
    }
    return worst;
}

/// Data entering the evolution of the diagonalising matrix of A0.
template <typename Real>
struct HEvolutionData {
    Complex<Real> f, gb, g1, alpha, w, t;
};

/// Max relative residual of the four closed-form ratios hb11/h11, hb12/h12, h21/h11, h22/h12.
template <typename Real>
Real h_evolution_residual(const Mat2<Real>& H, const Mat2<Real>& Hb, const HEvolutionData<Real>& d,
                          const ParameterSet<Real>& p) {
    const Complex<Real> q = p.q.value(), k0 = p.kappa0, ki = p.kappaInf, t = d.t;
    for (const auto& v : {H(0, 0), H(0, 1), d.f, d.w, d.gb - ki, k0})
        if (std::abs(v) == Real(0)) throw DomainError("h_evolution_residual: vanishing denominator");
    auto rel = [](const Complex<Real>& a, const Complex<Real>& b) {
        return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
    };
    const Complex<Real> base = ki * d.g1 + ki * d.f * d.alpha;
    const Complex<Real> e[4][2] = {
        {Hb(0, 0) / H(0, 0), -(q * t / d.f) * ki * (d.gb - k0 * t) / (k0 * (d.gb - ki))},
        {Hb(0, 1) / H(0, 1), -(q * t / d.f) * k0 * ki * (d.gb - t / k0) / (d.gb - ki)},
        {H(1, 0) / H(0, 0), ki * (base - t * k0) / (d.f * d.w)},
        {H(1, 1) / H(0, 1), ki * (base - t / k0) / (d.f * d.w)}};
    Real worst = 0;
    for (const auto& pr : e) worst = std::max(worst, rel(pr[0], pr[1]));
    return worst;
}

/// Eigenvector matrix of A0 with columns for k0 t then t/k0, each scaled so its largest entry is 1.
template <typename Real>
Mat2<Real> diag_A0(const Mat2<Real>& A0, const ParameterSet<Real>& p, const Complex<Real>& t) {
    Eigen::ComplexEigenSolver<Mat2<Real>> es(A0, false);
    Complex<Real> l[2] = {es.eigenvalues()(0), es.eigenvalues()(1)};
    if (std::abs(l[0] - l[1]) < Real(1e-12) * std::max(std::abs(l[0]), std::abs(l[1])))
        throw DomainError("diag_A0: eigenvalue collision");
    const Complex<Real> target = p.kappa0 * t;
    if (std::abs(l[1] - target) < std::abs(l[0] - target)) std::swap(l[0], l[1]);
    Mat2<Real> H;
    for (int j = 0; j < 2; ++j) {
        // Null vector of A0 - l: either row gives one; take the better conditioned.
        Vec2<Real> a(A0(0, 1), l[j] - A0(0, 0)), b(l[j] - A0(1, 1), A0(1, 0));
        Vec2<Real> v = a.cwiseAbs().maxCoeff() >= b.cwiseAbs().maxCoeff() ? a : b;
        const int i = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
        H.col(j) = v / v(i);
    }
    return H;
}

}  // namespace qpvi
