#pragma once

#include <Eigen/LU>
#include <Eigen/SVD>

#include <array>
#include <vector>

#include "qpvi/connection.hpp"
#include "qpvi/dynamics.hpp"
#include "qpvi/qspecial.hpp"

namespace qpvi {

/// Index pairs in the fixed order 12, 13, 14, 23, 24, 34 used by every six-vector below.
inline constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Coefficients T_ij of the surface polynomial T, and the same with k0 = 1.
template <typename Real>
struct SurfaceCoefficients {
    std::array<Complex<Real>, 6> T, Tp;
};

namespace detail {

template <typename Real>
std::array<Complex<Real>, 6> t_coeffs_at(const Complex<Real>& k0, const ParameterSet<Real>& p) {
    const QBase<Real>& q = p.q;
    const Complex<Real> kt = p.kappaT, k1 = p.kappa1, ki = p.kappaInf, t0 = p.t0;
    auto th = [&](std::initializer_list<Complex<Real>> zs) { return theta_prod<Real>(zs, q); };
    const Complex<Real> T12 = th({kt * kt, k1 * k1}) * th({k0 * t0 / ki, t0 / (k0 * ki)}) * ki * ki;
    const Complex<Real> T34 = th({kt * kt, k1 * k1}) * th({k0 * ki * t0, ki * t0 / k0});
    const Complex<Real> T13 = -th({kt * t0 / k1, k1 * t0 / kt}) * th({kt * k1 / (k0 * ki), k0 * kt * k1 / ki}) * ki * ki;
    const Complex<Real> T24 = -th({kt * t0 / k1, k1 * t0 / kt}) * th({k0 * kt * k1 * ki, kt * k1 * ki / k0});
    const Complex<Real> T23 = th({kt * k1 * t0, t0 / (kt * k1)}) * th({kt * ki / (k0 * k1), k0 * kt * ki / k1}) * k1 * k1;
    const Complex<Real> T14 = th({kt * k1 * t0, t0 / (kt * k1)}) * th({k1 * ki / (k0 * kt), k0 * k1 * ki / kt}) * kt * kt;
    return {T12, T13, T14, T23, T24, T34};
}

/// Degree-four monomials rho_i^x rho_j^x rho_k^y rho_l^y, {k,l} the complement of {i,j}.
template <typename Real>
std::array<Complex<Real>, 6> monomials(const RhoPoint<Real>& r) {
    std::array<Complex<Real>, 6> m;
    for (int a = 0; a < 6; ++a) {
        Complex<Real> v(1);
        for (int k = 0; k < 4; ++k) v *= (k == kPairs[a][0] || k == kPairs[a][1]) ? r[k].x() : r[k].y();
        m[a] = v;
    }
    return m;
}

}  // namespace detail

template <typename Real>
SurfaceCoefficients<Real> t_coeffs(const ParameterSet<Real>& p) {
    return {detail::t_coeffs_at(p.kappa0, p), detail::t_coeffs_at(Complex<Real>(1), p)};
}

template <typename Real>
struct TValue {
    Complex<Real> value;
    Real normalized_residual;
};

/// T on homogeneous pairs; the residual is |T| over the largest of its six terms.
template <typename Real>
TValue<Real> t_eval(const RhoPoint<Real>& rho, const std::array<Complex<Real>, 6>& T) {
    const auto m = detail::monomials(rho);
    Complex<Real> s(0);
    Real big = 0;
    for (int a = 0; a < 6; ++a) {
        s += T[a] * m[a];
        big = std::max(big, std::abs(T[a] * m[a]));
    }
    return {s, big > 0 ? std::abs(s) / big : Real(0)};
}

template <typename Real>
TValue<Real> t_eval(const RhoPoint<Real>& rho, const SurfaceCoefficients<Real>& c) {
    return t_eval(rho, c.T);
}

/// Symmetric 4x4 matrix with zero diagonal and entries T_ij: the Hessian of T.
template <typename Real>
Eigen::Matrix<Complex<Real>, 4, 4> hessian_matrix(const SurfaceCoefficients<Real>& c) {
    Eigen::Matrix<Complex<Real>, 4, 4> H = Eigen::Matrix<Complex<Real>, 4, 4>::Zero();
    for (int a = 0; a < 6; ++a) {
        H(kPairs[a][0], kPairs[a][1]) = c.T[a];
        H(kPairs[a][1], kPairs[a][0]) = c.T[a];
    }
    return H;
}

/// k0^-2 kt^2 k1^2 kinf^2 theta(k0^2, kt^2, k1^2, kinf^2)^2 theta(kt k1 t0, kt t0/k1, k1 t0/kt, t0/(kt k1))^2.
template <typename Real>
Complex<Real> hessian_closed_form(const ParameterSet<Real>& p) {
    const Complex<Real> k0 = p.kappa0, kt = p.kappaT, k1 = p.kappa1, ki = p.kappaInf, t0 = p.t0;
    const Complex<Real> a = theta_prod<Real>({k0 * k0, kt * kt, k1 * k1, ki * ki}, p.q);
    const Complex<Real> b = theta_prod<Real>({kt * k1 * t0, kt * t0 / k1, k1 * t0 / kt, t0 / (kt * k1)}, p.q);
    return kt * kt * k1 * k1 * ki * ki / (k0 * k0) * a * a * b * b;
}

template <typename Real>
struct HessianCheck {
    Complex<Real> numeric_det, closed_form;
    Real rel_err;
};

template <typename Real>
HessianCheck<Real> hessian_check(const SurfaceCoefficients<Real>& c, const ParameterSet<Real>& p) {
    const Complex<Real> d = hessian_matrix(c).partialPivLu().determinant();
    const Complex<Real> f = hessian_closed_form(p);
    return {d, f, std::abs(d - f) / std::max(std::abs(d), std::abs(f))};
}

/// eta_ij = rho_i rho_j / T'(rho) in the order 12, 13, 14, 23, 24, 34.
template <typename Real>
struct EtaPoint {
    std::array<Complex<Real>, 6> eta;
    const Complex<Real>& operator[](int a) const { return eta[a]; }
};

template <typename Real>
EtaPoint<Real> eta_from_rho(const RhoPoint<Real>& rho, const SurfaceCoefficients<Real>& c, Real floor = Real(1e-12)) {
    const auto m = detail::monomials(rho);
    const auto tp = t_eval(rho, c.Tp);
    Real big = 0;
    for (int a = 0; a < 6; ++a) big = std::max(big, std::abs(c.Tp[a] * m[a]));
    if (!(std::abs(tp.value) > floor * big)) throw OnCurveX("eta_from_rho: T'(rho) vanishes");
    EtaPoint<Real> e;
    for (int a = 0; a < 6; ++a) e.eta[a] = m[a] / tp.value;
    return e;
}

/// Relative residuals of: sum T eta = 0, sum T' eta = 1, eta12 eta34 = eta13 eta24, eta13 eta24 = eta14 eta23.
template <typename Real>
std::array<Real, 4> eta_residuals(const EtaPoint<Real>& e, const SurfaceCoefficients<Real>& c) {
    Complex<Real> sa(0), sb(0);
    Real ba = 0, bb = 1;
    for (int a = 0; a < 6; ++a) {
        sa += c.T[a] * e[a];
        sb += c.Tp[a] * e[a];
        ba = std::max(ba, std::abs(c.T[a] * e[a]));
        bb = std::max(bb, std::abs(c.Tp[a] * e[a]));
    }
    auto rel = [](const Complex<Real>& x, const Complex<Real>& y) {
        const Real s = std::max(std::abs(x), std::abs(y));
        return s > 0 ? std::abs(x - y) / s : Real(0);
    };
    return {ba > 0 ? std::abs(sa) / ba : Real(0), std::abs(sb - Complex<Real>(1)) / bb, rel(e[0] * e[5], e[1] * e[4]),
            rel(e[1] * e[4], e[2] * e[3])};
}

/// Coefficients of the two quadrics in eta12, eta13, eta14, eta23 left after eliminating eta24, eta34.
/// First: u0 e12^2 + u1 e12 e13 + u2 e12 e14 + u3 e12 e23 + u4 e14 e23 + u5 e12.
/// Second: v0 e13^2 + v1 e12 e13 + v2 e13 e14 + v3 e13 e23 + v4 e14 e23 + v5 e13.
template <typename Real>
struct QuadricCoefficients {
    std::array<Complex<Real>, 6> u, v;
};

template <typename Real>
QuadricCoefficients<Real> quadric_coeffs(const ParameterSet<Real>& p, long window = 64) {
    const Complex<Real> k0 = p.kappa0, kt = p.kappaT, k1 = p.kappa1, ki = p.kappaInf, t0 = p.t0;
    if (lattice_index(t0 * kt * k1 * ki * ki, Complex<Real>(1), p.q, window))
        throw EliminationDegenerate("quadric_coeffs: t0 kt k1 kinf^2 in q^Z");
    auto th = [&](std::initializer_list<Complex<Real>> zs) { return theta_prod<Real>(zs, p.q); };
    auto t1 = [&](const Complex<Real>& z) { return theta(z, p.q); };
    const Complex<Real> tk0 = t1(k0);
    QuadricCoefficients<Real> Q;
    Q.u = {ki * ki * th({kt * kt, k1 * k1, t0 * kt * k1, t0 / (kt * k1 * ki * ki)}),
           th({kt * kt * k1 * k1, ki * ki, t0 * k1 / kt, t0 * kt / k1}),
           -th({kt * kt, k1 * k1 * ki * ki, t0 / (kt * k1), t0 * kt * k1}),
           -th({kt * kt * ki * ki, k1 * k1, t0 / (kt * k1), t0 * kt * k1}),
           th({kt * kt, k1 * k1, t0 / (kt * k1), t0 * kt * k1 * ki * ki}),
           k0 * t1(k0 * kt * k1 * ki) * t1(kt * k1 * ki / k0) / (kt * k1 * ki * tk0 * tk0)};
    Q.v = {th({t0 * kt * k1, t0 * ki * ki / (kt * k1), t0 * kt / k1, t0 * k1 / kt}),
           -(t0 / (kt * k1)) * th({t0 * t0, kt * kt, k1 * k1, ki * ki}),
           -th({t0 * kt / k1, t0 * k1 * ki * ki / kt, t0 * kt * k1, t0 / (kt * k1)}),
           -th({t0 * k1 / kt, t0 * kt * ki * ki / k1, t0 * kt * k1, t0 / (kt * k1)}),
           th({t0 / (kt * k1), t0 * kt * k1 * ki * ki, t0 * kt / k1, t0 * k1 / kt}),
           (k0 / (kt * k1 * ki)) * t1(t0 * k0 * ki) * t1(t0 * ki / k0) / (tk0 * tk0)};
    return Q;
}

template <typename Real>
std::array<Complex<Real>, 6> quadric_monomials_u(const EtaPoint<Real>& e) {
    return {e[0] * e[0], e[0] * e[1], e[0] * e[2], e[0] * e[3], e[2] * e[3], e[0]};
}

template <typename Real>
std::array<Complex<Real>, 6> quadric_monomials_v(const EtaPoint<Real>& e) {
    return {e[1] * e[1], e[0] * e[1], e[1] * e[2], e[1] * e[3], e[2] * e[3], e[1]};
}

/// Relative residuals of both quadrics at eta.
template <typename Real>
std::array<Real, 2> quadric_residuals(const EtaPoint<Real>& e, const QuadricCoefficients<Real>& Q) {
    auto res = [](const std::array<Complex<Real>, 6>& c, const std::array<Complex<Real>, 6>& m) {
        Complex<Real> s(0);
        Real big = 0;
        for (int a = 0; a < 6; ++a) {
            s += c[a] * m[a];
            big = std::max(big, std::abs(c[a] * m[a]));
        }
        return big > 0 ? std::abs(s) / big : Real(0);
    };
    return {res(Q.u, quadric_monomials_u(e)), res(Q.v, quadric_monomials_v(e))};
}

/// Quadric coefficients by direct elimination: solve the two linear eta relations for eta24, eta34
/// and substitute into eta12 eta34 - eta14 eta23 and eta13 eta24 - eta14 eta23.
template <typename Real>
QuadricCoefficients<Real> quadric_elimination_oracle(const SurfaceCoefficients<Real>& c) {
    Eigen::Matrix<Complex<Real>, 2, 2> M;
    M << c.T[4], c.T[5], c.Tp[4], c.Tp[5];
    const Eigen::Matrix<Complex<Real>, 2, 2> Mi = M.inverse();
    // eta_x = sum_k a_x[k] eta_k + b_x over k in {12, 13, 14, 23}.
    std::array<Complex<Real>, 4> a24, a34;
    for (int k = 0; k < 4; ++k) {
        a24[k] = -(Mi(0, 0) * c.T[k] + Mi(0, 1) * c.Tp[k]);
        a34[k] = -(Mi(1, 0) * c.T[k] + Mi(1, 1) * c.Tp[k]);
    }
    QuadricCoefficients<Real> Q;
    Q.u = {a34[0], a34[1], a34[2], a34[3], Complex<Real>(-1), Mi(1, 1)};
    Q.v = {a24[1], a24[0], a24[2], a24[3], Complex<Real>(-1), Mi(0, 1)};
    return Q;
}

/// T24 T'34 - T34 T'24 in closed form:
/// (kt k1 kinf / k0) theta(k0)^2 theta(kt^2, k1^2, t0 kt/k1, t0 k1/kt, t0/(kt k1), t0 kt k1 kinf^2).
template <typename Real>
Complex<Real> elimination_determinant_closed(const ParameterSet<Real>& p) {
    const Complex<Real> k0 = p.kappa0, kt = p.kappaT, k1 = p.kappa1, ki = p.kappaInf, t0 = p.t0;
    const Complex<Real> tk0 = theta(k0, p.q);
    return (kt * k1 * ki / k0) * tk0 * tk0 *
           theta_prod<Real>({kt * kt, k1 * k1, t0 * kt / k1, t0 * k1 / kt, t0 / (kt * k1), t0 * kt * k1 * ki * ki}, p.q);
}

/// Point of the curve X: rho_k = [theta(tau x_k kinf) : theta(tau x_k / kinf)], x_k at t0.
template <typename Real>
RhoPoint<Real> curve_x_point(const Complex<Real>& tau, const ParameterSet<Real>& p) {
    if (tau == Complex<Real>(0)) throw InvalidArgument("curve_x_point: tau = 0");
    const auto x = p.roots(p.t0);
    RhoPoint<Real> r;
    for (int k = 0; k < 4; ++k)
        r.rho[k] = ProjectivePoint<Real>(theta(tau * x[k] * p.kappaInf, p.q), theta(tau * x[k] / p.kappaInf, p.q));
    return r;
}

/// Zero/infinity pattern classes. SingularTheta holds the six points with two zeros and two
/// infinities, which are the classes of diagonal and anti-diagonal connection matrices.
enum class RhoClass { Irreducible, ReducibleUpper, ReducibleLower, SingularTheta };

inline const char* to_string(RhoClass c) {
    switch (c) {
        case RhoClass::Irreducible: return "Irreducible";
        case RhoClass::ReducibleUpper: return "ReducibleUpper";
        case RhoClass::ReducibleLower: return "ReducibleLower";
        case RhoClass::SingularTheta: return "SingularTheta";
    }
    return "?";
}

template <typename Real>
RhoClass classify_rho(const RhoPoint<Real>& rho, Real tol = Real(1e-12)) {
    int zeros = 0, infs = 0;
    for (const auto& r : rho.rho) {
        if (r.is_zero(tol)) ++zeros;
        else if (r.is_infinite(tol)) ++infs;
    }
    if (zeros == 2 && infs == 2) return RhoClass::SingularTheta;
    if (zeros + infs >= 3) throw OnCurveX("classify_rho: three or more coordinates at 0 or infinity");
    if (zeros == 2) return RhoClass::ReducibleUpper;
    if (infs == 2) return RhoClass::ReducibleLower;
    return RhoClass::Irreducible;
}

/// coef * theta(z/a) theta(z/b).
template <typename Real>
struct ThetaPairTerm {
    Complex<Real> coef, a, b;
};

/// Connection matrix whose entries are sums of theta pairs; row-major entries 11, 12, 21, 22.
template <typename Real>
struct ExplicitConnection {
    std::array<std::vector<ThetaPairTerm<Real>>, 4> entries;
    QBase<Real> q;
    std::array<Complex<Real>, 8> alpha{};  ///< a11_1, a11_2, a12_1, a12_2, a21_1, a21_2, a22_1, a22_2
    Complex<Real> det_constant{0};         ///< c in det C = c theta(kt z/t0, z/(kt t0), k1 z, z/k1)

    Mat2<Real> operator()(const Complex<Real>& z) const {
        Mat2<Real> C;
        for (int e = 0; e < 4; ++e) {
            Complex<Real> s(0);
            for (const auto& term : entries[e])
                if (term.coef != Complex<Real>(0)) s += term.coef * theta(z / term.a, q) * theta(z / term.b, q);
            C(e / 2, e % 2) = s;
        }
        return C;
    }
};

template <typename Real>
Complex<Real> det_theta_factor(const Complex<Real>& z, const ParameterSet<Real>& p) {
    return theta_prod<Real>({p.kappaT * z / p.t0, z / (p.kappaT * p.t0), p.kappa1 * z, z / p.kappa1}, p.q);
}

/// Fits c in det C(z) = c theta(...) at five points; returns c and the relative spread.
template <typename Real>
std::pair<Complex<Real>, Real> fit_det_constant(const ExplicitConnection<Real>& C, const ParameterSet<Real>& p) {
    std::vector<Complex<Real>> cs;
    Real scale = 0;
    for (int k = 0; k < 5; ++k) {
        const Complex<Real> z = std::polar(Real(0.83) + Real(0.11) * k, Real(0.4) + Real(1.3) * k);
        const Mat2<Real> M = C(z);
        cs.push_back(M.determinant() / det_theta_factor(z, p));
        scale = std::max(scale, (std::abs(M(0, 0) * M(1, 1)) + std::abs(M(0, 1) * M(1, 0))) / std::abs(det_theta_factor(z, p)));
    }
    Complex<Real> mean(0);
    for (const auto& c : cs) mean += c;
    mean /= Real(cs.size());
    Real spread = 0;
    for (const auto& c : cs) spread = std::max(spread, std::abs(c - mean));
    return {mean, spread / std::max(std::abs(mean), Real(1e-300) + Real(1e-10) * scale)};
}

/// Rebuild a connection matrix at t0 from rho via the two homogeneous 4x4 systems for the rows.
template <typename Real>
ExplicitConnection<Real> construct_connection_from_rho(const RhoPoint<Real>& rho, const ParameterSet<Real>& p) {
    const SurfaceCoefficients<Real> coeffs = t_coeffs(p);
    if (!(t_eval(rho, coeffs).normalized_residual <= Real(1e-6)))
        throw InvalidArgument("construct_connection_from_rho: rho is not on the surface");
    {
        const auto tp = t_eval(rho, coeffs.Tp);
        const auto m = detail::monomials(rho);
        Real big = 0;
        for (int a = 0; a < 6; ++a) big = std::max(big, std::abs(coeffs.Tp[a] * m[a]));
        if (std::abs(tp.value) <= Real(1e-10) * big) throw OnCurveX("construct_connection_from_rho: rho on curve X");
    }
    const Complex<Real> one(1);
    const auto x = p.roots(p.t0);
    const Complex<Real> sigma[2] = {p.kappa0 * p.t0, p.t0 / p.kappa0};
    const Complex<Real> mu[2] = {p.kappaInf, one / p.kappaInf};
    // Basis of entry (i, j): theta(z/x_a) theta(z x_a mu_j / sigma_i), x_a in {x1, x2} for j = 1, {x3, x4} for j = 2.
    auto basis = [&](int i, int j, int l) {
        const Complex<Real> xa = x[2 * j + l];
        return ThetaPairTerm<Real>{one, xa, sigma[i] / (xa * mu[j])};
    };
    auto eval_term = [&](const ThetaPairTerm<Real>& b, const Complex<Real>& z) {
        return theta(z / b.a, p.q) * theta(z / b.b, p.q);
    };
    ExplicitConnection<Real> C;
    C.q = p.q;
    for (int i = 0; i < 2; ++i) {
        Eigen::Matrix<Complex<Real>, 4, 4> M;
        for (int k = 0; k < 4; ++k) {
            for (int l = 0; l < 2; ++l) {
                M(k, l) = rho[k].y() * eval_term(basis(i, 0, l), x[k]);
                M(k, 2 + l) = -rho[k].x() * eval_term(basis(i, 1, l), x[k]);
            }
            const Real rn = M.row(k).cwiseAbs().maxCoeff();
            if (rn > 0) M.row(k) /= rn;
        }
        Eigen::Matrix<Real, 4, 1> cn;
        for (int c = 0; c < 4; ++c) {
            cn(c) = M.col(c).cwiseAbs().maxCoeff();
            if (cn(c) > 0) M.col(c) /= cn(c);
            else cn(c) = 1;
        }
        Eigen::JacobiSVD<Eigen::Matrix<Complex<Real>, 4, 4>> svd(M, Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        if (!(s(2) >= Real(1e6) * s(3))) throw AmbiguousNullSpace("construct_connection_from_rho: null space not simple");
        Eigen::Matrix<Complex<Real>, 4, 1> a = svd.matrixV().col(3);
        for (int c = 0; c < 4; ++c) a(c) /= cn(c);
        const int big = [&] {
            int b = 0;
            for (int c = 1; c < 4; ++c)
                if (std::abs(a(c)) > std::abs(a(b))) b = c;
            return b;
        }();
        a /= a(big);
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l) {
                auto term = basis(i, j, l);
                term.coef = a(2 * j + l);
                C.entries[2 * i + j].push_back(term);
                C.alpha[4 * i + 2 * j + l] = term.coef;
            }
    }
    const auto [c, spread] = fit_det_constant(C, p);
    if (std::abs(c) == Real(0) || spread > Real(1e-6)) {
        if (spread > Real(1e-6)) throw ConsistencyFailure("construct_connection_from_rho: det C not a multiple of theta");
        throw OnCurveX("construct_connection_from_rho: det C vanishes identically");
    }
    C.det_constant = c;
    return C;
}

enum class TriangularFamily { KappaChain, KappaInfT0 };

/// Upper-triangular connection matrices of the two reducible families (k0 = kt k1 kinf, k0 = kinf t0).
template <typename Real>
ExplicitConnection<Real> build_triangular_connection(const Complex<Real>& c, const Complex<Real>& nu,
                                                     const ParameterSet<Real>& p, TriangularFamily family) {
    if (nu == Complex<Real>(0)) throw InvalidArgument("build_triangular_connection: nu = 0");
    const Complex<Real> one(1), k0 = p.kappa0, kt = p.kappaT, k1 = p.kappa1, ki = p.kappaInf, t0 = p.t0;
    ExplicitConnection<Real> C;
    C.q = p.q;
    if (family == TriangularFamily::KappaChain) {
        if (std::abs(k0 - kt * k1 * ki) > Real(1e-9) * std::abs(k0))
            throw ConstraintError("build_triangular_connection: requires k0 = kt k1 kinf");
        C.entries[0] = {{one, kt * t0, k1}};
        C.entries[1] = {{c, nu * t0, k0 * ki / nu}};
        C.entries[3] = {{one, t0 / kt, one / k1}};
    } else {
        if (std::abs(k0 - ki * t0) > Real(1e-9) * std::abs(k0))
            throw ConstraintError("build_triangular_connection: requires k0 = kinf t0");
        C.entries[0] = {{one, kt * t0, t0 / kt}};
        C.entries[1] = {{c, k0 / nu, k0 * nu}};
        C.entries[3] = {{one, k1, one / k1}};
    }
    C.det_constant = fit_det_constant(C, p).first;
    return C;
}

/// rho_k = pi(C(x_k)) at t0 for an explicit connection matrix.
template <typename Real>
RhoPoint<Real> rho_of_connection(const ExplicitConnection<Real>& C, const ParameterSet<Real>& p, Real tol = Real(1e-7)) {
    const auto x = p.roots(p.t0);
    RhoPoint<Real> r;
    for (int k = 0; k < 4; ++k) r.rho[k] = pi_of_singular(C(x[k]), tol);
    return r;
}

}  // namespace qpvi
