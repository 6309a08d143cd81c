#pragma once

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qpvi/connection.hpp"
#include "qpvi/lax.hpp"
#include "qpvi/qspecial.hpp"

namespace qpvi {

/// Chain: k0 = kt k1 kinf, weight c theta(z/(nu t), z nu/(k0 kinf)) / ((z/(kt t), z/k1)(q t/(kt z), q/(k1 z))).
/// T0: k0 = kinf t0, weight c theta(z nu/k0, z/(k0 nu)) / ((z/(kt t), kt z/t)(q k1/z, q/(k1 z))).
enum class WeightFamily { Chain, T0 };

template <typename Real>
struct WeightSpec {
    WeightFamily family = WeightFamily::Chain;
    Complex<Real> c{1}, nu{1};
    ParameterSet<Real> p;

    void validate() const {
        if (nu == Complex<Real>(0)) throw InvalidArgument("weight: nu = 0");
        const Complex<Real> target = family == WeightFamily::Chain ? p.kappaT * p.kappa1 * p.kappaInf : p.kappaInf * p.t0;
        if (std::abs(p.kappa0 - target) > Real(1e-9) * std::abs(p.kappa0))
            throw ConstraintError(family == WeightFamily::Chain ? "weight: requires k0 = kt k1 kinf"
                                                                : "weight: requires k0 = kinf t0");
    }
};

template <typename Real>
Complex<Real> weight_eval(const WeightSpec<Real>& s, const Complex<Real>& z, const Complex<Real>& t) {
    if (z == Complex<Real>(0)) throw InvalidArgument("weight_eval: z = 0");
    if (s.c == Complex<Real>(0)) return Complex<Real>(0);
    const auto& p = s.p;
    const Complex<Real> q = p.q.value();
    Complex<Real> num, d[4];
    if (s.family == WeightFamily::Chain) {
        num = theta(z / (s.nu * t), p.q) * theta(z * s.nu / (p.kappa0 * p.kappaInf), p.q);
        d[0] = qpoch(z / (p.kappaT * t), p.q);
        d[1] = qpoch(z / p.kappa1, p.q);
        d[2] = qpoch(q * t / (p.kappaT * z), p.q);
        d[3] = qpoch(q / (p.kappa1 * z), p.q);
    } else {
        num = theta(z * s.nu / p.kappa0, p.q) * theta(z / (p.kappa0 * s.nu), p.q);
        d[0] = qpoch(z / (p.kappaT * t), p.q);
        d[1] = qpoch(p.kappaT * z / t, p.q);
        d[2] = qpoch(q * p.kappa1 / z, p.q);
        d[3] = qpoch(q / (p.kappa1 * z), p.q);
    }
    for (const auto& v : d)
        if (std::abs(v) < Real(1e-10)) throw NearPole("weight_eval: too close to a pole");
    return s.c * num / (d[0] * d[1] * d[2] * d[3]);
}

/// Moduli bounding the pole-free annulus of the weight at time t.
template <typename Real>
struct Annulus {
    Real inner, outer;
};

template <typename Real>
Annulus<Real> pole_annulus(const WeightSpec<Real>& s, const Complex<Real>& t) {
    const auto& p = s.p;
    const Real aq = p.q.modulus();
    Annulus<Real> a;
    if (s.family == WeightFamily::Chain) {
        a.inner = aq * std::max(std::abs(t / p.kappaT), std::abs(Complex<Real>(1) / p.kappa1));
        a.outer = std::min(std::abs(p.kappaT * t), std::abs(p.kappa1));
    } else {
        a.inner = aq * std::max(std::abs(p.kappa1), std::abs(Complex<Real>(1) / p.kappa1));
        a.outer = std::min(std::abs(p.kappaT * t), std::abs(t / p.kappaT));
    }
    if (!(a.inner < a.outer)) throw NoAdmissibleContour("no circle separates the pole sets");
    return a;
}

enum class RadiusRule { GeometricMean, MinCancellation };

namespace detail {

template <typename Real>
constexpr Real two_pi() {
    return Real(2) * Real(3.14159265358979323846264338327950288L);
}

template <typename Real>
struct Nodes {
    std::vector<Complex<Real>> x, w;  ///< nodes on the circle and weight values there
};

template <typename Real>
Nodes<Real> circle_nodes(const WeightSpec<Real>& s, const Complex<Real>& t, Real r, int N) {
    Nodes<Real> nd;
    nd.x.resize(N);
    nd.w.resize(N);
    for (int j = 0; j < N; ++j) {
        nd.x[j] = std::polar(r, two_pi<Real>() * j / N);
        nd.w[j] = weight_eval(s, nd.x[j], t);
    }
    return nd;
}

/// Largest ratio max|x^{k+1} w| / |mu_k| over k < K: the cancellation the trapezoid sum suffers.
template <typename Real>
Real cancellation(const Nodes<Real>& nd, int K) {
    const int N = static_cast<int>(nd.x.size());
    Real worst = 0;
    std::vector<Complex<Real>> pw(nd.w);
    for (int k = 0; k < K; ++k) {
        Complex<Real> s(0);
        Real big = 0;
        for (int j = 0; j < N; ++j) {
            pw[j] *= nd.x[j];
            s += pw[j];
            big = std::max(big, std::abs(pw[j]));
        }
        const Real m = std::abs(s) / N;
        worst = std::max(worst, m > 0 ? big / m : std::numeric_limits<Real>::infinity());
    }
    return worst;
}

}  // namespace detail

/// Radius of the integration circle. MinCancellation scans radii between the pole sets and keeps the
/// one where the low moments lose the fewest digits to cancellation.
template <typename Real>
Real contour_radius(const WeightSpec<Real>& s, const Complex<Real>& t, RadiusRule rule = RadiusRule::MinCancellation) {
    const Annulus<Real> a = pole_annulus(s, t);
    const Real geo = std::sqrt(a.inner * a.outer);
    if (rule == RadiusRule::GeometricMean || s.c == Complex<Real>(0)) return geo;
    Real best_r = geo, best = std::numeric_limits<Real>::infinity();
    const int G = 22;
    for (int i = 0; i < G; ++i) {
        const Real e = Real(0.08) + (Real(0.92) - Real(0.08)) * i / (G - 1);
        const Real r = a.inner * std::pow(a.outer / a.inner, e);
        const Real c = detail::cancellation(detail::circle_nodes(s, t, r, 512), 8);
        if (c < best) {
            best = c;
            best_r = r;
        }
    }
    return best_r;
}

/// mu_k = (1/2 pi i) oint z^k w(z, t) dz over the counterclockwise circle |z| = radius.
template <typename Real>
struct MomentTable {
    Complex<Real> t_m;
    Real radius = 0;
    int k_min = 0;
    std::vector<Complex<Real>> mu;
    int quadrature_points = 0;

    int k_max() const { return k_min + static_cast<int>(mu.size()) - 1; }
    const Complex<Real>& operator()(int k) const {
        if (k < k_min || k > k_max()) throw InvalidArgument("moment index outside table");
        return mu[k - k_min];
    }
};

namespace detail {

template <typename Real>
std::pair<std::vector<Complex<Real>>, std::vector<Real>> trapezoid_moments(const Nodes<Real>& nd, int k_min, int k_max) {
    const int N = static_cast<int>(nd.x.size());
    std::vector<Complex<Real>> mu(k_max - k_min + 1, Complex<Real>(0));
    std::vector<Real> scale(mu.size(), Real(0));
    for (int j = 0; j < N; ++j) {
        Complex<Real> v = nd.w[j] * ipow(nd.x[j], k_min + 1);
        for (std::size_t k = 0; k < mu.size(); ++k) {
            mu[k] += v;
            scale[k] += std::abs(v);
            v *= nd.x[j];
        }
    }
    for (std::size_t k = 0; k < mu.size(); ++k) {
        mu[k] /= Real(N);
        scale[k] /= Real(N);
    }
    return {mu, scale};
}

}  // namespace detail

/// Trapezoid moments, doubling N from N0 until every mu_k moves by at most rel_tol of its size
/// (sizes below 1e-3 of the mean integrand modulus are measured against that floor).
template <typename Real>
MomentTable<Real> moments(const WeightSpec<Real>& s, const Complex<Real>& t, int k_min, int k_max, int N0 = 64,
                          Real radius = Real(0), Real rel_tol = Real(1e-11)) {
    if (k_max < k_min) throw InvalidArgument("moments: empty index range");
    const Real r = radius > 0 ? radius : contour_radius(s, t);
    MomentTable<Real> tab{t, r, k_min, {}, 0};
    auto [prev, scale] = detail::trapezoid_moments(detail::circle_nodes(s, t, r, N0), k_min, k_max);
    for (int N = 2 * N0; N <= (1 << 16); N *= 2) {
        auto [cur, sc] = detail::trapezoid_moments(detail::circle_nodes(s, t, r, N), k_min, k_max);
        bool ok = true;
        for (std::size_t k = 0; k < cur.size(); ++k) {
            const Real ref = std::max(std::abs(cur[k]), Real(1e-3) * sc[k]);
            if (std::abs(cur[k] - prev[k]) > rel_tol * ref) ok = false;
        }
        if (ok) {
            tab.mu = cur;
            tab.quadrature_points = N;
            return tab;
        }
        prev = cur;
    }
    throw QuadratureFailure("moments: no convergence by N = 65536");
}

/// Moment of the Chain weight by the two Jackson sums of the residue computation, oriented like
/// moments() (the residue sums carry the clockwise sign, so the result is negated).
template <typename Real>
Complex<Real> moments_jackson(const WeightSpec<Real>& s, const Complex<Real>& t, int k) {
    if (s.family != WeightFamily::Chain) throw InvalidArgument("moments_jackson: Chain family only");
    const auto& p = s.p;
    const Complex<Real> q = p.q.value(), one(1), k0 = p.kappa0;
    if (!(std::abs(k0) < Real(1) / std::sqrt(p.q.modulus())))
        throw DomainError("moments_jackson: requires |k0| < |q|^(-1/2)");
    if (s.c == Complex<Real>(0)) return Complex<Real>(0);
    const Complex<Real> a1 = one / p.kappaT, a2 = p.kappaT, a3 = one / p.kappa1, a4 = p.kappa1;
    const Complex<Real> kk = k0 * p.kappaInf;
    const Complex<Real> qq = qpoch(q, p.q);
    const Complex<Real> pre = s.c / ((one - q) * qq * qq);
    const Complex<Real> al1 = pre * theta(a1 / s.nu, p.q) * theta(a1 * t * s.nu / kk, p.q) / theta(a1 * t / a3, p.q);
    const Complex<Real> al2 = pre * theta(a3 / (s.nu * t), p.q) * theta(a3 * s.nu / kk, p.q) / theta(a3 / (a1 * t), p.q);
    const Complex<Real> k02 = k0 * k0;
    Complex<Real> total(0);
    const std::pair<Complex<Real>, Complex<Real>> sums[2] = {{al1, q * a1 * t}, {al2, q * a3}};
    for (const auto& [al, A] : sums) {
        Complex<Real> acc(0), z = A, zs = k02;  // zs = (z / base)^sigma = k0^{2(j+1)}
        for (int j = 0; j < 4000; ++j) {
            const Complex<Real> W = zs * qpoch(z / (a1 * t), p.q) * qpoch(z / a3, p.q) /
                                    (qpoch(z / (a2 * t), p.q) * qpoch(z / a4, p.q));
            const Complex<Real> term = z * ipow(z, k) * W;
            acc += term;
            if (j > 4 && std::abs(term) < Real(1e-17) * std::abs(acc)) break;
            z *= q;
            zs *= k02;
        }
        total += al * (one - q) * acc;
    }
    return -total;
}

/// Determinant by fraction-free (Bareiss) elimination with partial pivoting.
template <typename Real>
Complex<Real> bareiss_det(Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic> M) {
    const int n = static_cast<int>(M.rows());
    if (n == 0) return Complex<Real>(1);
    Complex<Real> prev(1);
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(M(i, k)) > std::abs(M(piv, k))) piv = i;
        if (M(piv, k) == Complex<Real>(0)) return Complex<Real>(0);
        if (piv != k) {
            M.row(k).swap(M.row(piv));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) M(i, j) = (M(i, j) * M(k, k) - M(i, k) * M(k, j)) / prev;
        prev = M(k, k);
    }
    return Real(sign) * M(n - 1, n - 1);
}

template <typename Real>
Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic> hankel_matrix(const MomentTable<Real>& tab, int rows, int cols,
                                                                           int shift = 0) {
    Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic> M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = tab(i + j + shift);
    return M;
}

/// Delta_0 = 1, Delta_n = det(mu_{i+j})_{i,j<n}.
template <typename Real>
struct HankelLadder {
    std::vector<Complex<Real>> Delta;
    /// Row-norm product of the n x n Hankel matrix: the scale a determinant is measured against.
    std::vector<Real> scale;
};

template <typename Real>
HankelLadder<Real> hankel(const MomentTable<Real>& tab, int n_max) {
    HankelLadder<Real> h;
    for (int n = 0; n <= n_max; ++n) {
        const auto M = hankel_matrix(tab, n, n);
        h.Delta.push_back(bareiss_det<Real>(M));
        Real sc = 1;
        for (int i = 0; i < n; ++i) sc *= M.row(i).norm();
        h.scale.push_back(sc);
    }
    return h;
}

/// p_n as the bordered Hankel determinant, coefficients ascending; p_0 = 1.
template <typename Real>
std::vector<Complex<Real>> orth_poly(const MomentTable<Real>& tab, int n) {
    if (n < 0) throw InvalidArgument("orth_poly: negative degree");
    if (n == 0) return {Complex<Real>(1)};
    const auto M = hankel_matrix(tab, n, n + 1);
    std::vector<Complex<Real>> c(n + 1);
    for (int j = 0; j <= n; ++j) {
        Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic> minor(n, n);
        for (int col = 0, dst = 0; col <= n; ++col)
            if (col != j) minor.col(dst++) = M.col(col);
        c[j] = Real(((n + j) % 2) ? -1 : 1) * bareiss_det<Real>(minor);
    }
    return c;
}

/// Delta_n times the monic orthogonal polynomial, via one linear solve of the Hankel system.
template <typename Real>
std::vector<Complex<Real>> orth_poly_linear(const MomentTable<Real>& tab, int n) {
    if (n == 0) return {Complex<Real>(1)};
    const auto M = hankel_matrix(tab, n, n);
    Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1> rhs(n);
    for (int i = 0; i < n; ++i) rhs(i) = -tab(i + n);
    const Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1> a = M.partialPivLu().solve(rhs);
    const Complex<Real> D = bareiss_det<Real>(M);
    std::vector<Complex<Real>> c(n + 1);
    for (int i = 0; i < n; ++i) c[i] = D * a(i);
    c[n] = D;
    return c;
}

template <typename Real>
Complex<Real> poly_eval(const std::vector<Complex<Real>>& c, const Complex<Real>& z) {
    Complex<Real> s(0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * z + *it;
    return s;
}

/// (1/2 pi i) oint a(z) b(z) w(z) dz from the moment table.
template <typename Real>
Complex<Real> moment_pairing(const MomentTable<Real>& tab, const std::vector<Complex<Real>>& a,
                             const std::vector<Complex<Real>>& b) {
    Complex<Real> s(0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) s += a[i] * b[j] * tab(static_cast<int>(i + j));
    return s;
}

/// Solution of the orthogonal-polynomial Riemann-Hilbert problem of degree n:
/// Y = Delta_n^-1 [[p_n, -C[p_n w]], [p_{n-1}, -C[p_{n-1} w]]], and [[1, -C[w]], [0, 1]] for n = 0.
/// Jump Y_out = Y_in [[1, w], [0, 1]] across the counterclockwise circle.
template <typename Real>
class YSolution {
public:
    YSolution(const WeightSpec<Real>& s, const Complex<Real>& t, int n, int N0 = 256) : spec_(s), t_(t), n_(n) {
        if (n < 0) throw NotSolvable("negative degree", n);
        tab_ = moments(s, t, 0, 2 * n + 1, N0);
        r_ = tab_.radius;
        nodes_ = detail::circle_nodes(s, t, r_, std::max(tab_.quadrature_points, 512));
        ladder_ = hankel(tab_, n + 1);
        if (n > 0) {
            const Real sc = ladder_.scale[n];
            if (!(sc > 0) || !(std::abs(ladder_.Delta[n]) >= Real(1e-12) * sc))
                throw NotSolvable("Hankel determinant vanishes at degree " + std::to_string(n), n);
        }
        pn_ = orth_poly(tab_, n);
        if (n > 0) pm_ = orth_poly(tab_, n - 1);
    }

    int degree() const { return n_; }
    Real radius() const { return r_; }
    const MomentTable<Real>& table() const { return tab_; }
    const HankelLadder<Real>& ladder() const { return ladder_; }
    const std::vector<Complex<Real>>& pn() const { return pn_; }
    const std::vector<Complex<Real>>& pn_minus_1() const { return pm_; }

    /// Cauchy transform of poly * w at z off the circle; near it the value of the integrand at z
    /// is subtracted so the sum stays regular.
    Complex<Real> cauchy(const std::vector<Complex<Real>>& poly, const Complex<Real>& z) const {
        const int N = static_cast<int>(nodes_.x.size());
        const bool close = std::abs(std::abs(z) - r_) < Real(0.2) * r_;
        Complex<Real> hz(0), s(0);
        if (close) hz = poly_eval(poly, z) * weight_eval(spec_, z, t_);
        for (int j = 0; j < N; ++j) {
            const Complex<Real> h = poly_eval(poly, nodes_.x[j]) * nodes_.w[j];
            s += nodes_.x[j] * (h - hz) / (nodes_.x[j] - z);
        }
        s /= Real(N);
        if (close && std::abs(z) < r_) s += hz;
        return s;
    }

    Mat2<Real> operator()(const Complex<Real>& z) const { return assemble(z, cauchy(pn_, z), n_ > 0 ? cauchy(pm_, z) : Complex<Real>(0)); }

    /// Boundary values at z0 on the circle: first from outside, second from inside.
    std::pair<Mat2<Real>, Mat2<Real>> boundary(const Complex<Real>& z0) const {
        const int N = static_cast<int>(nodes_.x.size());
        auto side = [&](const std::vector<Complex<Real>>& poly) {
            const Complex<Real> hz = poly_eval(poly, z0) * weight_eval(spec_, z0, t_);
            Complex<Real> s(0);
            for (int j = 0; j < N; ++j) {
                const Complex<Real> h = poly_eval(poly, nodes_.x[j]) * nodes_.w[j];
                s += nodes_.x[j] * (h - hz) / (nodes_.x[j] - z0);
            }
            s /= Real(N);
            return std::make_pair(s, s + hz);
        };
        const auto a = side(pn_);
        const auto b = n_ > 0 ? side(pm_) : std::make_pair(Complex<Real>(0), Complex<Real>(0));
        return {assemble(z0, a.first, b.first), assemble(z0, a.second, b.second)};
    }

    /// Y1 in Y(z) z^{-n s3} = I + Y1/z + O(z^-2), from the moments.
    Mat2<Real> Y1() const {
        Mat2<Real> Y = Mat2<Real>::Zero();
        if (n_ == 0) {
            Y(0, 1) = tab_(0);
            return Y;
        }
        const Complex<Real> D = ladder_.Delta[n_];
        Y(0, 0) = pn_[n_ - 1] / D;
        Y(0, 1) = ladder_.Delta[n_ + 1] / D;
        Y(1, 0) = ladder_.Delta[n_ - 1] / D;
        Complex<Real> s(0);
        for (int j = 0; j < n_; ++j) s += pm_[j] * tab_(n_ + j);
        Y(1, 1) = s / D;
        return Y;
    }

private:
    Mat2<Real> assemble(const Complex<Real>& z, const Complex<Real>& cn, const Complex<Real>& cm) const {
        Mat2<Real> Y;
        if (n_ == 0) {
            Y << Complex<Real>(1), -cn, Complex<Real>(0), Complex<Real>(1);
            return Y;
        }
        const Complex<Real> D = ladder_.Delta[n_];
        Y << poly_eval(pn_, z) / D, -cn / D, poly_eval(pm_, z) / D, -cm / D;
        return Y;
    }

    WeightSpec<Real> spec_;
    Complex<Real> t_;
    int n_;
    Real r_ = 0;
    MomentTable<Real> tab_;
    detail::Nodes<Real> nodes_;
    HankelLadder<Real> ladder_;
    std::vector<Complex<Real>> pn_, pm_;
};

template <typename Real>
YSolution<Real> y_solution(const WeightSpec<Real>& s, const Complex<Real>& t, int n) {
    return YSolution<Real>(s, t, n);
}

/// One index of a special-function orbit.
template <typename Real>
struct SpecialEntry {
    long m = 0;
    bool solvable = false;
    bool reducible_lax = false;   ///< A12 identically zero: coordinates undefined
    std::string note;
    std::optional<LaxMatrix<Real>> A;
    std::optional<LaxCoords<Real>> coords;
    Real polynomial_defect = 0;   ///< size of the z^3, z^4 Fourier modes of the fitted A
    Real cross_check = 0;         ///< disagreement between coords_from_A and fg_from_psi
    Complex<Real> hankel{0};
};

/// Coefficient matrix of a special solution at t = q^m t0: A(z) = Y(qz) L(z) adj Y(z), with
/// L = diag(kinf (z - kt t)(z - k1), (z - t/kt)(z - 1/k1)/kinf) for Chain and
/// L = q^{-m s3} diag(kinf (z - kt t)(z - t/kt), (z - k1)(z - 1/k1)/kinf) for T0,
/// recovered from eight samples on |z| = 2r/|q| by a discrete Fourier transform.
template <typename Real>
SpecialEntry<Real> special_solution_at(const WeightSpec<Real>& s, long m, int n) {
    s.validate();
    const auto& p = s.p;
    const Complex<Real> q = p.q.value(), one(1), t = p.time(m);
    SpecialEntry<Real> e;
    e.m = m;
    int degree = n;
    ParameterSet<Real> pn = p;
    if (s.family == WeightFamily::T0) {
        if (n != 0) throw InvalidArgument("special_solution_at: T0 family has no second index");
        if (m < 0) {
            e.note = "degree m < 0";
            return e;
        }
        degree = static_cast<int>(m);
    } else {
        if (n < 0) {
            e.note = "degree n < 0";
            return e;
        }
        pn = p.shifted_inf(n);
    }
    std::optional<YSolution<Real>> Y;
    try {
        Y.emplace(s, t, degree);
    } catch (const NotSolvable& ex) {
        e.note = ex.what();
        return e;
    }
    e.solvable = true;
    e.hankel = Y->ladder().Delta[degree];
    const Real r = Y->radius();
    const Real R = Real(2) * r / p.q.modulus();
    const Complex<Real> ki = p.kappaInf;
    auto Lam = [&](const Complex<Real>& z) {
        if (s.family == WeightFamily::Chain)
            return diag2<Real>(ki * (z - p.kappaT * t) * (z - p.kappa1), (z - t / p.kappaT) * (z - one / p.kappa1) / ki);
        return Mat2<Real>(diag2<Real>(p.q.pow(-m) * ki * (z - p.kappaT * t) * (z - t / p.kappaT),
                                      p.q.pow(m) * (z - p.kappa1) * (z - one / p.kappa1) / ki));
    };
    const int NN = 8;
    std::array<Mat2<Real>, 5> co;
    co.fill(Mat2<Real>::Zero());
    Real amax = 0;
    for (int j = 0; j < NN; ++j) {
        const Complex<Real> z = std::polar(R, detail::two_pi<Real>() * j / NN);
        const Mat2<Real> Az = (*Y)(q * z) * Lam(z) * adjugate<Real>((*Y)(z));
        amax = std::max(amax, sup_norm(Az));
        Complex<Real> zk(1);
        for (int k = 0; k < 5; ++k) {
            co[k] += Az / zk;
            zk *= z;
        }
    }
    for (auto& c : co) c /= Real(NN);
    e.polynomial_defect = std::max(sup_norm(co[3]) * R * R * R, sup_norm(co[4]) * R * R * R * R) / amax;
    LaxMatrix<Real> A{co[0], co[1], co[2], t};
    e.A = A;
    try {
        e.coords = coords_from_A(A, pn);
    } catch (const ReducibleLax&) {
        e.reducible_lax = true;
        e.note = "reducible coefficient matrix";
        return e;
    }
    // Cross-check through the Psi-readout: H ~ Y(0) up to columns, U = Y1 + F1.
    Mat2<Real> F1;
    if (s.family == WeightFamily::Chain)
        F1 = diag2<Real>(p.kappaT * t + p.kappa1, t / p.kappaT + one / p.kappa1);
    else
        F1 = diag2<Real>(p.kappaT * t + t / p.kappaT, p.kappa1 + one / p.kappa1);
    F1 *= -q / (one - q);
    try {
        const auto fg = fg_from_psi<Real>((*Y)(Complex<Real>(0)), Y->Y1() + F1, pn, t);
        const Real df = std::abs(fg.f - e.coords->f) / std::max(Real(1), std::abs(e.coords->f));
        e.cross_check = std::max(df, chordal(fg.g, e.coords->g));
    } catch (const Error& ex) {
        e.note = std::string("cross-check unavailable: ") + ex.what();
        e.cross_check = std::numeric_limits<Real>::infinity();
    }
    return e;
}

template <typename Real>
std::vector<SpecialEntry<Real>> special_solution_orbit(const WeightSpec<Real>& s, long m_lo, long m_hi, int n) {
    std::vector<SpecialEntry<Real>> out;
    for (long m = m_lo; m <= m_hi; ++m) out.push_back(special_solution_at(s, m, n));
    return out;
}

enum class SolvabilityForm { Form1, Form2, Form3, Form4, Form5, Inconclusive };

inline const char* to_string(SolvabilityForm f) {
    switch (f) {
        case SolvabilityForm::Form1: return "form1";
        case SolvabilityForm::Form2: return "form2";
        case SolvabilityForm::Form3: return "form3";
        case SolvabilityForm::Form4: return "form4";
        case SolvabilityForm::Form5: return "form5";
        case SolvabilityForm::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct SolvabilityDomain {
    SolvabilityForm form = SolvabilityForm::Inconclusive;
    std::optional<long> m0;
};

/// Match the solvable set M on a contiguous window against the five possible shapes. A gap of two
/// consecutive unsolvable indices is what separates the shapes; shapes needing evidence beyond the
/// window edges are reported inconclusive.
inline SolvabilityDomain solvability_domain(const std::vector<std::pair<long, bool>>& flags) {
    SolvabilityDomain d;
    if (flags.size() < 3) return d;
    const long lo = flags.front().first, hi = flags.back().first;
    for (std::size_t i = 1; i < flags.size(); ++i)
        if (flags[i].first != flags[i - 1].first + 1) return d;
    std::vector<long> S;
    for (const auto& [m, ok] : flags)
        if (ok) S.push_back(m);
    if (S.empty()) {
        d.form = SolvabilityForm::Form5;
        return d;
    }
    auto in = [&](long m) { return std::find(S.begin(), S.end(), m) != S.end(); };
    auto no_double_gap = [&](long a, long b) {
        for (long m = a; m < b; ++m)
            if (!in(m) && !in(m + 1)) return false;
        return true;
    };
    const long first = S.front(), last = S.back();
    if (S.size() == 1 && first >= lo + 2 && first <= hi - 2) {
        d.form = SolvabilityForm::Form4;
        d.m0 = first;
        return d;
    }
    if (no_double_gap(lo, hi)) {
        d.form = SolvabilityForm::Form1;
        return d;
    }
    if (first >= lo + 2 && no_double_gap(first, hi) && last >= hi - 1) {
        d.form = SolvabilityForm::Form2;
        d.m0 = first;
        return d;
    }
    if (last <= hi - 2 && no_double_gap(lo, last) && first <= lo + 1) {
        d.form = SolvabilityForm::Form3;
        d.m0 = last;
        return d;
    }
    return d;
}

}  // namespace qpvi
