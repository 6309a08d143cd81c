#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "qpvi/errors.hpp"

namespace qpvi {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using Mat2 = Eigen::Matrix<std::complex<Real>, 2, 2>;

template <typename Real>
using Vec2 = Eigen::Matrix<std::complex<Real>, 2, 1>;

template <typename Real>
bool is_finite(const Complex<Real>& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Entrywise sup norm, used for every matrix residual.
template <typename Derived>
auto sup_norm(const Eigen::MatrixBase<Derived>& m) {
    return m.cwiseAbs().maxCoeff();
}

template <typename Real>
Mat2<Real> adjugate(const Mat2<Real>& m) {
    Mat2<Real> a;
    a << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return a;
}

template <typename Real>
Mat2<Real> diag2(const Complex<Real>& a, const Complex<Real>& b) {
    Mat2<Real> d = Mat2<Real>::Zero();
    d(0, 0) = a;
    d(1, 1) = b;
    return d;
}

/// Exponentiation by squaring; negative exponents invert the base.
template <typename Real>
Complex<Real> ipow(Complex<Real> z, long n) {
    if (n < 0) {
        z = Complex<Real>(1) / z;
        n = -n;
    }
    Complex<Real> r(1);
    while (n) {
        if (n & 1) r *= z;
        z *= z;
        n >>= 1;
    }
    return r;
}

/// Deformation base with 0 < |q| < 1.
template <typename Real>
class QBase {
public:
    QBase() = default;
    explicit QBase(Complex<Real> q) : q_(q) {
        const Real a = std::abs(q);
        if (!is_finite(q) || !(a > 0) || !(a < 1))
            throw InvalidArgument("q must satisfy 0 < |q| < 1");
    }
    const Complex<Real>& value() const noexcept { return q_; }
    Real modulus() const { return std::abs(q_); }
    Complex<Real> pow(long n) const { return ipow(q_, n); }
    operator const Complex<Real>&() const noexcept { return q_; }

private:
    Complex<Real> q_{Real(0.5)};
};

/// Point of P^1 as a homogeneous pair, kept with max(|x|,|y|) = 1.
template <typename Real>
class ProjectivePoint {
public:
    ProjectivePoint() : x_(0), y_(1) {}
    ProjectivePoint(Complex<Real> x, Complex<Real> y) : x_(x), y_(y) { normalise(); }
    /// Finite value v, encoded as [v : 1].
    static ProjectivePoint finite(Complex<Real> v) { return ProjectivePoint(v, Complex<Real>(1)); }
    static ProjectivePoint infinity() { return ProjectivePoint(Complex<Real>(1), Complex<Real>(0)); }

    const Complex<Real>& x() const noexcept { return x_; }
    const Complex<Real>& y() const noexcept { return y_; }

    bool is_infinite(Real tol = Real(0)) const { return std::abs(y_) <= tol; }
    bool is_zero(Real tol = Real(0)) const { return std::abs(x_) <= tol; }
    /// x/y; infinite points return an infinite complex.
    Complex<Real> value() const {
        if (y_ == Complex<Real>(0)) return {std::numeric_limits<Real>::infinity(), 0};
        return x_ / y_;
    }

    ProjectivePoint scaled(Complex<Real> s) const { return ProjectivePoint(x_ * s, y_ * s); }

private:
    void normalise() {
        if (!is_finite(x_) || !is_finite(y_)) throw InvalidArgument("non-finite projective pair");
        const Real s = std::max(std::abs(x_), std::abs(y_));
        if (!(s > 0)) throw InvalidArgument("projective pair (0,0)");
        x_ /= s;
        y_ /= s;
    }
    Complex<Real> x_, y_;
};

/// Chordal distance on P^1: |x1 y2 - x2 y1| / (|p1| |p2|), bounded by 1.
template <typename Real>
Real chordal(const ProjectivePoint<Real>& a, const ProjectivePoint<Real>& b) {
    const Real na = std::sqrt(std::norm(a.x()) + std::norm(a.y()));
    const Real nb = std::sqrt(std::norm(b.x()) + std::norm(b.y()));
    return std::abs(a.x() * b.y() - a.y() * b.x()) / (na * nb);
}

template <typename Real>
Real chordal(const ProjectivePoint<Real>& a, const Complex<Real>& v) {
    return chordal(a, ProjectivePoint<Real>::finite(v));
}

/// The global parameters (q, k0, kt, k1, kinf, t0); time t = q^m t0.
template <typename Real>
struct ParameterSet {
    QBase<Real> q;
    Complex<Real> kappa0{1}, kappaT{1}, kappa1{1}, kappaInf{1}, t0{1};

    ParameterSet() = default;
    ParameterSet(QBase<Real> q_, Complex<Real> k0, Complex<Real> kt, Complex<Real> k1, Complex<Real> ki,
                 Complex<Real> t0_)
        : q(q_), kappa0(k0), kappaT(kt), kappa1(k1), kappaInf(ki), t0(t0_) {
        for (const auto& v : {k0, kt, k1, ki, t0_})
            if (!is_finite(v) || v == Complex<Real>(0))
                throw InvalidArgument("parameters must be finite and nonzero");
    }

    Complex<Real> time(long m) const { return t0 * q.pow(m); }

    /// Roots x1..x4 of det A(z,t): kt t, t/kt, k1, 1/k1.
    std::array<Complex<Real>, 4> roots(const Complex<Real>& t) const {
        return {kappaT * t, t / kappaT, kappa1, Complex<Real>(1) / kappa1};
    }

    /// Same parameters with kinf replaced by q^n kinf.
    ParameterSet shifted_inf(long n) const {
        ParameterSet p = *this;
        p.kappaInf = kappaInf * q.pow(n);
        return p;
    }
};

/// Machine epsilon of Real as a plain value.
template <typename Real>
constexpr Real eps() {
    return std::numeric_limits<Real>::epsilon();
}

}  // namespace qpvi
