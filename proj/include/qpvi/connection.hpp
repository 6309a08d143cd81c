#pragma once

#include <Eigen/SVD>

#include <array>
#include <vector>

#include "qpvi/lax.hpp"
#include "qpvi/qspecial.hpp"

namespace qpvi {

enum class SeriesKind { AtZero, AtInfinity };

/// Truncated series of Psi_0 (sum M_n z^n) or Psi_inf (sum N_n z^-n) together with the data
/// needed to continue it through the q-difference equation.
template <typename Real>
struct SeriesSolution {
    SeriesKind kind = SeriesKind::AtZero;
    std::vector<Mat2<Real>> coeffs;
    LaxMatrix<Real> A;
    ParameterSet<Real> p;
    Real radius = 0;  ///< r0 = min|x_k|/2 at zero, R0 = 2 max|x_k| at infinity

    int order() const { return static_cast<int>(coeffs.size()) - 1; }
    const Mat2<Real>& H() const { return coeffs.front(); }
};

template <typename Real>
Real min_root_modulus(const ParameterSet<Real>& p, const Complex<Real>& t) {
    Real r = std::numeric_limits<Real>::infinity();
    for (const auto& x : p.roots(t)) r = std::min(r, std::abs(x));
    return r;
}

template <typename Real>
Real max_root_modulus(const ParameterSet<Real>& p, const Complex<Real>& t) {
    Real r = 0;
    for (const auto& x : p.roots(t)) r = std::max(r, std::abs(x));
    return r;
}

/// Psi_0 = H + sum M_n z^n from t q^n M_n k0^s3 - A0 M_n = A1 M_{n-1} + A2 M_{n-2}, solved entrywise
/// in the eigenbasis of A0.
template <typename Real>
SeriesSolution<Real> psi0_series(const LaxMatrix<Real>& A, int K, const ParameterSet<Real>& p) {
    if (K < 1) throw InvalidArgument("psi0_series: K must be positive");
    const Complex<Real> t = A.t, one(1);
    const Mat2<Real> H = diag_A0(A.A0, p, t);
    const Mat2<Real> Hi = H.inverse();
    const Complex<Real> kap[2] = {p.kappa0, one / p.kappa0};
    SeriesSolution<Real> S{SeriesKind::AtZero, {H}, A, p, Real(0.5) * min_root_modulus(p, t)};
    Complex<Real> qn(1);
    for (int n = 1; n <= K; ++n) {
        qn *= p.q.value();
        Mat2<Real> R = A.A1 * S.coeffs[n - 1];
        if (n >= 2) R += A.A2 * S.coeffs[n - 2];
        const Mat2<Real> Rt = Hi * R;
        Mat2<Real> Mt;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const Complex<Real> d = qn * kap[j] - kap[i];
                if (std::abs(d) < Real(1e-10)) throw ResonanceError("psi0_series: resonant divisor");
                Mt(i, j) = Rt(i, j) / (t * d);
            }
        S.coeffs.push_back(H * Mt);
    }
    return S;
}

/// Psi_inf = I + sum N_n z^-n from q^-n N_n kinf^s3 - A2 N_n = A1 N_{n-1} + A0 N_{n-2}.
template <typename Real>
SeriesSolution<Real> psi_inf_series(const LaxMatrix<Real>& A, int K, const ParameterSet<Real>& p) {
    if (K < 1) throw InvalidArgument("psi_inf_series: K must be positive");
    const Complex<Real> kap[2] = {A.A2(0, 0), A.A2(1, 1)};
    SeriesSolution<Real> S{SeriesKind::AtInfinity, {Mat2<Real>::Identity()}, A, p, Real(2) * max_root_modulus(p, A.t)};
    Complex<Real> qn(1);
    const Complex<Real> qi = Complex<Real>(1) / p.q.value();
    for (int n = 1; n <= K; ++n) {
        qn *= qi;
        Mat2<Real> R = A.A1 * S.coeffs[n - 1];
        if (n >= 2) R += A.A0 * S.coeffs[n - 2];
        Mat2<Real> N;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const Complex<Real> d = qn * kap[j] - kap[i];
                if (std::abs(d) < Real(1e-10)) throw ResonanceError("psi_inf_series: resonant divisor");
                N(i, j) = R(i, j) / d;
            }
        S.coeffs.push_back(N);
    }
    return S;
}

namespace detail {

template <typename Real>
Mat2<Real> horner(const std::vector<Mat2<Real>>& c, const Complex<Real>& x) {
    Mat2<Real> s = c.back();
    for (int n = static_cast<int>(c.size()) - 2; n >= 0; --n) s = (s * x + c[n]).eval();
    return s;
}

}  // namespace detail

/// Partial sum of the series at z without continuation.
template <typename Real>
Mat2<Real> series_sum(const SeriesSolution<Real>& S, const Complex<Real>& z) {
    return S.kind == SeriesKind::AtZero ? detail::horner(S.coeffs, z) : detail::horner(S.coeffs, Complex<Real>(1) / z);
}

/// Psi_0(z): series inside |z| <= r0, else Psi_0(z) = t A(z)^-1 Psi_0(qz) k0^s3 applied outward;
/// singular at the roots x_k and their q^-N multiples.
template <typename Real>
Mat2<Real> eval_psi0(const SeriesSolution<Real>& S, Complex<Real> z) {
    if (S.kind != SeriesKind::AtZero) throw InvalidArgument("eval_psi0: series at infinity");
    const Complex<Real> q = S.p.q.value();
    int j = 0;
    while (std::abs(z) > S.radius) {
        z *= q;
        ++j;
    }
    Mat2<Real> P = detail::horner(S.coeffs, z);
    const Mat2<Real> K = diag2<Real>(S.p.kappa0, Complex<Real>(1) / S.p.kappa0);
    for (int i = 0; i < j; ++i) {
        z /= q;
        P = (S.A.t * S.A(z).inverse() * P * K).eval();
    }
    return P;
}

/// Psi_0(z)^-1 by the adjugate-free recursion Psi_0^-1(z) = t^-1 k0^-s3 Psi_0^-1(qz) A(z) read outward;
/// entire in z, so it stays finite at the roots x_k.
template <typename Real>
Mat2<Real> eval_psi0_inv(const SeriesSolution<Real>& S, Complex<Real> z) {
    if (S.kind != SeriesKind::AtZero) throw InvalidArgument("eval_psi0_inv: series at infinity");
    const Complex<Real> q = S.p.q.value();
    int j = 0;
    while (std::abs(z) > S.radius) {
        z *= q;
        ++j;
    }
    Mat2<Real> Pi = detail::horner(S.coeffs, z).inverse();
    const Mat2<Real> Kinv = diag2<Real>(Complex<Real>(1) / S.p.kappa0, S.p.kappa0);
    for (int i = 0; i < j; ++i) {
        z /= q;
        Pi = (Kinv * Pi * S.A(z) / S.A.t).eval();
    }
    return Pi;
}

/// Psi_inf(z): series for |w| >= R0, then Psi_inf(qw) = w^-2 A(w) Psi_inf(w) kinf^-s3 stepped inward.
template <typename Real>
Mat2<Real> eval_psi_inf(const SeriesSolution<Real>& S, const Complex<Real>& z) {
    if (S.kind != SeriesKind::AtInfinity) throw InvalidArgument("eval_psi_inf: series at zero");
    if (z == Complex<Real>(0)) throw InvalidArgument("eval_psi_inf: z = 0");
    const Complex<Real> q = S.p.q.value();
    Complex<Real> w = z;
    int j = 0;
    while (std::abs(w) < S.radius) {
        w /= q;
        ++j;
    }
    Mat2<Real> P = detail::horner(S.coeffs, Complex<Real>(1) / w);
    const Mat2<Real> Kinv = diag2<Real>(Complex<Real>(1) / S.A.A2(0, 0), Complex<Real>(1) / S.A.A2(1, 1));
    for (int i = 0; i < j; ++i) {
        P = (S.A(w) * P * Kinv / (w * w)).eval();
        w *= q;
    }
    return P;
}

/// det Psi_0(z)^-1 in closed form: |H|^-1 (kt z/t, z/(kt t), k1 z, z/k1; q).
template <typename Real>
Complex<Real> det_psi0_inv_closed(const SeriesSolution<Real>& S, const Complex<Real>& z) {
    const auto& p = S.p;
    const Complex<Real> t = S.A.t;
    return qpoch_prod<Real>({p.kappaT * z / t, z / (p.kappaT * t), p.kappa1 * z, z / p.kappa1}, p.q) /
           S.H().determinant();
}

/// det Psi_inf(z) in closed form: (q kt t/z, q t/(kt z), q k1/z, q/(k1 z); q).
template <typename Real>
Complex<Real> det_psi_inf_closed(const SeriesSolution<Real>& S, const Complex<Real>& z) {
    const auto& p = S.p;
    const Complex<Real> t = S.A.t, q = p.q.value();
    return qpoch_prod<Real>({q * p.kappaT * t / z, q * t / (p.kappaT * z), q * p.kappa1 / z, q / (p.kappa1 * z)}, p.q);
}

template <typename Real>
struct ConnectionSample {
    Complex<Real> z;
    Mat2<Real> C;
};

/// C(z) = Psi_0(z)^-1 Psi_inf(z); finite at the roots x_k since Psi_0^-1 is continued directly.
template <typename Real>
ConnectionSample<Real> connection_at(const Complex<Real>& z, const SeriesSolution<Real>& S0,
                                     const SeriesSolution<Real>& Sinf) {
    return {z, eval_psi0_inv(S0, z) * eval_psi_inf(Sinf, z)};
}

/// Residual of C(qz) = (t/z^2) k0^s3 C(z) kinf^-s3 relative to |C(qz)|.
template <typename Real>
Real connection_functional_residual(const Mat2<Real>& Cz, const Mat2<Real>& Cqz, const Complex<Real>& z,
                                    const Complex<Real>& t, const ParameterSet<Real>& p) {
    const Complex<Real> one(1);
    const Mat2<Real> rhs = (t / (z * z)) * diag2<Real>(p.kappa0, one / p.kappa0) * Cz *
                           diag2<Real>(one / p.kappaInf, p.kappaInf);
    return sup_norm(Cqz - rhs) / sup_norm(Cqz);
}

template <typename Real>
std::array<Real, 2> singular_values(const Mat2<Real>& R) {
    Eigen::JacobiSVD<Mat2<Real>> svd(R);
    return {svd.singularValues()(0), svd.singularValues()(1)};
}

/// pi(R) for rank-one R: the ratio of column 1 to column 2, read from the largest row.
template <typename Real>
ProjectivePoint<Real> pi_of_singular(const Mat2<Real>& R, Real tol = Real(1e-7)) {
    const auto s = singular_values(R);
    if (!(s[0] > 0)) throw ZeroMatrix("pi_of_singular: zero matrix");
    if (s[1] > tol * s[0]) throw NotSingular("pi_of_singular: matrix is numerically invertible");
    const int i = R.row(0).cwiseAbs().sum() >= R.row(1).cwiseAbs().sum() ? 0 : 1;
    return ProjectivePoint<Real>(R(i, 0), R(i, 1));
}

template <typename Real>
struct RhoPoint {
    std::array<ProjectivePoint<Real>, 4> rho;
    const ProjectivePoint<Real>& operator[](int k) const { return rho[k]; }
};

/// Distance between two points of (P^1)^4 / C*: for every pair i<j compares rho_i/rho_j
/// homogeneously, so a common scalar drops out; 0 iff equivalent.
template <typename Real>
Real rho_projective_error(const RhoPoint<Real>& a, const RhoPoint<Real>& b) {
    auto nrm = [](const ProjectivePoint<Real>& v) { return std::sqrt(std::norm(v.x()) + std::norm(v.y())); };
    Real worst = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const Complex<Real> d = a[i].x() * a[j].y() * b[i].y() * b[j].x() - a[i].y() * a[j].x() * b[i].x() * b[j].y();
            worst = std::max(worst, std::abs(d) / (nrm(a[i]) * nrm(a[j]) * nrm(b[i]) * nrm(b[j])));
        }
    return worst;
}

/// rho with its per-root conditioning: ratio[k] = smallest / largest singular value of C(x_k).
template <typename Real>
struct RhoResult {
    RhoPoint<Real> rho;
    std::array<Real, 4> rank_ratio{};
    std::array<Mat2<Real>, 4> C_at_roots;
};

/// Monodromy coordinates rho_k = pi(C(x_k)) of a coefficient matrix.
template <typename Real>
RhoResult<Real> rho_coords(const LaxMatrix<Real>& A, const ParameterSet<Real>& p, int K = 60,
                           Real rank_tol = Real(1e-7)) {
    const auto S0 = psi0_series(A, K, p);
    const auto Si = psi_inf_series(A, K, p);
    const auto x = p.roots(A.t);
    RhoResult<Real> r;
    for (int k = 0; k < 4; ++k) {
        const Mat2<Real> C = connection_at(x[k], S0, Si).C;
        const auto s = singular_values(C);
        r.rank_ratio[k] = s[1] / s[0];
        r.C_at_roots[k] = C;
        if (!(r.rank_ratio[k] <= rank_tol))
            throw ConsistencyFailure("rho_coords: C(x_k) is not rank one (ratio " + std::to_string(double(r.rank_ratio[k])) + ")");
        r.rho.rho[k] = pi_of_singular(C, rank_tol);
    }
    return r;
}

template <typename Real>
struct FgFromPsi {
    Complex<Real> w, f;
    ProjectivePoint<Real> g;
    Complex<Real> g1;
    bool lax_singular = false;
};

/// (w, f, g, g1) from H = Psi_0(0) and U, the z^-1 coefficient of Psi_inf.
template <typename Real>
FgFromPsi<Real> fg_from_psi(const Mat2<Real>& H, const Mat2<Real>& U, const ParameterSet<Real>& p,
                            const Complex<Real>& t) {
    const Complex<Real> q = p.q.value(), one(1), ki = p.kappaInf, k0 = p.kappa0;
    const Complex<Real> detH = H.determinant();
    if (std::abs(detH) == Real(0)) throw DomainError("fg_from_psi: singular H");
    FgFromPsi<Real> r;
    r.w = (one / q - ki * ki) * U(0, 1);
    if (std::abs(U(0, 1)) <= Real(1e-14) * sup_norm(U)) {
        r.lax_singular = true;
        r.f = {std::numeric_limits<Real>::infinity(), 0};
        r.g = ProjectivePoint<Real>::finite(ki);
        return r;
    }
    r.f = t * ki * (k0 - one / k0) * H(0, 0) * H(0, 1) / (r.w * detH);
    r.g1 = r.f * r.f + r.f * ((one / q - one) * U(0, 0) + H(1, 0) * r.w / (H(0, 0) * ki * ki)) + k0 * t / ki;
    r.g = ProjectivePoint<Real>((r.f - p.kappaT * t) * (r.f - t / p.kappaT), q * ki * r.g1);
    return r;
}

}  // namespace qpvi
