#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "qpvi/types.hpp"

namespace qpvi {

/// (z;q)_inf truncated once the neglected tail |q^K z| < tol (1 - |q|).
template <typename Real>
Complex<Real> qpoch(const Complex<Real>& z, const QBase<Real>& q, Real tol = eps<Real>()) {
    if (!is_finite(z)) throw InvalidArgument("qpoch: non-finite argument");
    if (!(tol > 0)) throw InvalidArgument("qpoch: tol must be positive");
    const Real stop = tol * (Real(1) - q.modulus());
    Complex<Real> r(1), term = z;
    while (std::abs(term) >= stop) {
        r *= Complex<Real>(1) - term;
        term *= q.value();
    }
    return r;
}

/// Product of qpoch over a list.
template <typename Real>
Complex<Real> qpoch_prod(std::initializer_list<Complex<Real>> zs, const QBase<Real>& q) {
    Complex<Real> r(1);
    for (const auto& z : zs) r *= qpoch(z, q);
    return r;
}

/// theta_q(z) = (z;q)(q/z;q). z = q^n zh with |q| < |zh| <= 1, and
/// theta(q^n zh) = (-1)^n q^{-n(n-1)/2} zh^{-n} theta(zh).
template <typename Real>
Complex<Real> theta(const Complex<Real>& z, const QBase<Real>& q) {
    if (!is_finite(z)) throw InvalidArgument("theta: non-finite argument");
    if (z == Complex<Real>(0)) throw InvalidArgument("theta: zero argument");
    const Real lq = std::log(q.modulus());
    long n = static_cast<long>(std::floor(std::log(std::abs(z)) / lq));
    Complex<Real> zh = z / q.pow(n);
    // Rounding can leave zh just outside the annulus.
    if (std::abs(zh) > Real(1)) {
        zh *= q.value();
        --n;
    } else if (std::abs(zh) <= q.modulus()) {
        zh /= q.value();
        ++n;
    }
    Complex<Real> pre = q.pow(-(n * (n - 1)) / 2) * ipow(zh, -n);
    if (n % 2 != 0) pre = -pre;
    return pre * qpoch(zh, q) * qpoch(q.value() / zh, q);
}

/// Product of theta over zs; the empty product is 1.
template <typename Real, typename Range>
Complex<Real> theta_prod(const Range& zs, const QBase<Real>& q) {
    Complex<Real> r(1);
    for (const auto& z : zs) r *= theta(Complex<Real>(z), q);
    return r;
}

template <typename Real>
Complex<Real> theta_prod(std::initializer_list<Complex<Real>> zs, const QBase<Real>& q) {
    Complex<Real> r(1);
    for (const auto& z : zs) r *= theta(z, q);
    return r;
}

/// A theta value counts as zero when it is tiny against nearby values on the radial line.
template <typename Real>
bool theta_is_zero(const Complex<Real>& z, const QBase<Real>& q, Real rel = Real(1e-10)) {
    const Real h = Real(1e-3);
    const Real scale = std::max(std::abs(theta(z * std::exp(Complex<Real>(h)), q)),
                                std::abs(theta(z * std::exp(Complex<Real>(-h)), q)));
    return std::abs(theta(z, q)) < rel * scale;
}

/// Index n with v = s q^n (|n| <= window, relative tolerance rel), if any.
template <typename Real>
std::optional<long> lattice_index(const Complex<Real>& v, const Complex<Real>& s, const QBase<Real>& q,
                                  long window = 64, Real rel = Real(1e-9)) {
    if (v == Complex<Real>(0) || s == Complex<Real>(0)) return std::nullopt;
    const Complex<Real> r = v / s;
    const long c = std::lround(std::log(std::abs(r)) / std::log(q.modulus()));
    for (long n = c - 1; n <= c + 1; ++n) {
        if (n < -window || n > window) continue;
        const Complex<Real> qn = q.pow(n);
        if (std::abs(r - qn) <= rel * std::abs(qn)) return n;
    }
    return std::nullopt;
}

/// Data of a theta function of degree n: c z^s theta_q(z/a_1, ..., z/a_n),
/// with quasi-period theta(qz) = alpha z^{-n} theta(z).
template <typename Real>
struct ThetaClassSpec {
    int n = 0;
    Complex<Real> alpha{1};
    std::vector<Complex<Real>> zeros;
    int s = 0;
    Complex<Real> c{1};
};

/// Closure evaluating c z^s prod theta(z/a_i); rejects specs whose alpha disagrees with
/// (-1)^n q^s prod a_i.
template <typename Real>
std::function<Complex<Real>(Complex<Real>)> build_theta_class(const ThetaClassSpec<Real>& spec,
                                                              const QBase<Real>& q, Real rel = Real(1e-10)) {
    if (spec.n < 0 || static_cast<std::size_t>(spec.n) != spec.zeros.size())
        throw InvalidArgument("theta class: zero count differs from degree");
    if (spec.c == Complex<Real>(0)) throw InvalidArgument("theta class: c must be nonzero");
    Complex<Real> expect = q.pow(spec.s);
    for (const auto& a : spec.zeros) {
        if (a == Complex<Real>(0)) throw InvalidArgument("theta class: zero a_i");
        expect *= a;
    }
    if (spec.n % 2) expect = -expect;
    if (std::abs(expect - spec.alpha) > rel * std::abs(expect))
        throw ConsistencyFailure("theta class: alpha != (-1)^n q^s prod a_i");
    return [spec, q](Complex<Real> z) {
        Complex<Real> r = spec.c * ipow(z, spec.s);
        for (const auto& a : spec.zeros) r *= theta(z / a, q);
        return r;
    };
}

}  // namespace qpvi
