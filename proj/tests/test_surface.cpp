#include "doctest.h"
#include "helpers.hpp"

using namespace qpvi;
using namespace testutil;

namespace {

enum Pair { k12, k13, k14, k23, k24, k34 };

RhoPoint<double> random_rho(Rng& rng, P& p) {
    p = generic_params(rng);
    const auto d = sampling::draw_state(rng, p, 0);
    return rho_coords(build_A(d.f, d.g, d.w, p, p.t0), p).rho;
}

/// Largest 2x2 minor of (a, b) over the norms: zero iff the coefficient vectors are proportional.
double proportional_error(const std::array<C, 6>& a, const std::array<C, 6>& b) {
    double na = 0, nb = 0, worst = 0;
    for (int i = 0; i < 6; ++i) {
        na = std::max(na, std::abs(a[i]));
        nb = std::max(nb, std::abs(b[i]));
    }
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) worst = std::max(worst, std::abs(a[i] * b[j] - a[j] * b[i]));
    return worst / (na * nb);
}

double sum_products(const std::array<C, 6>& T) {
    return std::max({std::abs(T[k12] * T[k34]), std::abs(T[k13] * T[k24]), std::abs(T[k14] * T[k23])});
}

RhoPoint<double> rho_of(std::initializer_list<PP> pts) {
    RhoPoint<double> r;
    int k = 0;
    for (const auto& v : pts) r.rho[k++] = v;
    return r;
}

}  // namespace

TEST_CASE("coefficients vanish on the reducible families") {
    Rng rng(61);
    P p = generic_params(rng);
    for (const auto& T : t_coeffs(p).T) CHECK(std::abs(T) > 1e-8);
    p.kappa0 = p.kappaInf * p.t0;
    auto c = t_coeffs(p);
    CHECK(std::abs(c.T[k34]) < 1e-14 * sum_products(c.T));
    p = generic_params(rng);
    p.kappa0 = p.kappaT * p.kappa1 * p.kappaInf;
    c = t_coeffs(p);
    CHECK(std::abs(c.T[k24]) < 1e-14 * sum_products(c.T));
    CHECK(std::abs(c.T[k13]) > 1e-6 * std::abs(c.T[k12]));
}

TEST_CASE("monodromy points lie on the surface") {
    Rng rng(62);
    for (int i = 0; i < 15; ++i) {
        P p;
        const auto rho = random_rho(rng, p);
        const auto c = t_coeffs(p);
        CHECK(t_eval(rho, c).normalized_residual < 1e-8);
        // Homogeneous scaling of one coordinate scales T; the normalised residual is unchanged.
        auto r2 = rho;
        r2.rho[1] = r2.rho[1].scaled(C(3.0, -2.0));
        CHECK(std::abs(t_eval(r2, c).normalized_residual - t_eval(rho, c).normalized_residual) < 1e-12);
        auto off = rho;
        off.rho[2] = PP::finite(C(0.37, 1.9));
        CHECK(t_eval(off, c).normalized_residual > 1e-4);
    }
}

TEST_CASE("T is multilinear in the coordinates") {
    Rng rng(63);
    P p;
    const auto rho = random_rho(rng, p);
    const auto c = t_coeffs(p);
    // Affine in the x component of rho_1: T(a + b) - T(a) - T(b) + T(0) = 0. Projective points are
    // stored normalised, so the value is scaled back by the normalising factor.
    auto with = [&](C x) {
        auto r = rho;
        r.rho[0] = PP(x, rho[0].y());
        return t_eval(r, c).value * std::max(std::abs(x), std::abs(rho[0].y()));
    };
    const C a(0.4, 0.2), b(-0.7, 0.9);
    const C lhs = with(a + b) - with(a) - with(b) + with(C(0));
    CHECK(std::abs(lhs) < 1e-12 * (std::abs(with(a)) + std::abs(with(b))));
}

TEST_CASE("Hessian determinant") {
    Rng rng(64);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
        const P p = generic_params(rng);
        worst = std::max(worst, hessian_check(t_coeffs(p), p).rel_err);
    }
    CHECK(worst < 1e-9);

    P p = generic_params(rng);
    p.kappaT = std::sqrt(p.q.value() * (1.0 + 1e-12));
    const auto c = t_coeffs(p);
    const auto h = hessian_check(c, p);
    const double sc = std::pow(sum_products(c.T), 2);
    CHECK(std::abs(h.closed_form) < 1e-20 * sc);
    CHECK(std::abs(h.numeric_det - h.closed_form) < 1e-12 * sc);

    // k1 -> 1/k1 multiplies the closed form by k1^-8; the numeric determinant follows.
    p = generic_params(rng);
    P sw = p;
    sw.kappa1 = 1.0 / p.kappa1;
    CHECK(rel(hessian_closed_form(sw), hessian_closed_form(p) * ipow(p.kappa1, -8)) < 1e-12);
    CHECK(hessian_check(t_coeffs(sw), sw).rel_err < 1e-9);
}

TEST_CASE("eta coordinates") {
    Rng rng(65);
    for (int i = 0; i < 15; ++i) {
        P p;
        const auto rho = random_rho(rng, p);
        const auto c = t_coeffs(p);
        const auto e = eta_from_rho(rho, c);
        for (double r : eta_residuals(e, c)) CHECK(r < 1e-8);
        RhoPoint<double> s = rho;
        for (auto& v : s.rho) v = v.scaled(C(0.3, 1.7));
        const auto es = eta_from_rho(s, c);
        for (int a = 0; a < 6; ++a) CHECK(rel(es[a], e[a]) < 1e-10);
        const auto qr = quadric_residuals(e, quadric_coeffs(p));
        CHECK(qr[0] < 1e-8);
        CHECK(qr[1] < 1e-8);
    }
}

TEST_CASE("quadric coefficients match direct elimination") {
    Rng rng(66);
    for (int i = 0; i < 30; ++i) {
        const P p = generic_params(rng);
        const auto Q = quadric_coeffs(p);
        const auto O = quadric_elimination_oracle(t_coeffs(p));
        CHECK(proportional_error(Q.u, O.u) < 1e-9);
        CHECK(proportional_error(Q.v, O.v) < 1e-9);
        const auto c = t_coeffs(p);
        const C det = c.T[k24] * c.Tp[k34] - c.T[k34] * c.Tp[k24];
        CHECK(rel(det, elimination_determinant_closed(p)) < 1e-9);
    }
    P p = generic_params(rng);
    p.t0 = p.q.pow(2) / (p.kappaT * p.kappa1 * p.kappaInf * p.kappaInf);
    CHECK_THROWS_AS(quadric_coeffs(p), EliminationDegenerate);
}

TEST_CASE("curve X") {
    Rng rng(67);
    const P p = generic_params(rng);
    const auto c = t_coeffs(p);
    for (int i = 0; i < 5; ++i) {
        const auto rho = curve_x_point(rng.polar(0.5, 2.0), p);
        CHECK(t_eval(rho, c).normalized_residual < 1e-9);
        CHECK(t_eval(rho, c.Tp).normalized_residual < 1e-9);
        CHECK_THROWS_AS(eta_from_rho(rho, c), OnCurveX);
        CHECK_THROWS_AS(construct_connection_from_rho(rho, p), OnCurveX);
    }
    // tau x_1 kinf on q^Z puts rho_1 at zero.
    const C tau = p.q.pow(2) / (p.roots(p.t0)[0] * p.kappaInf);
    CHECK(curve_x_point(tau, p)[0].is_zero(1e-12));
    CHECK_THROWS_AS(curve_x_point(C(0), p), InvalidArgument);
}

TEST_CASE("pattern classes") {
    const PP z = PP::finite(0), inf = PP::infinity(), a = PP::finite(C(0.5, 1)), b = PP::finite(C(-2, 0.3));
    CHECK(classify_rho(rho_of({a, b, a, b})) == RhoClass::Irreducible);
    CHECK(classify_rho(rho_of({z, a, z, b})) == RhoClass::ReducibleUpper);
    CHECK(classify_rho(rho_of({inf, a, b, inf})) == RhoClass::ReducibleLower);
    CHECK(classify_rho(rho_of({z, inf, z, inf})) == RhoClass::SingularTheta);
    CHECK(classify_rho(rho_of({inf, z, inf, z})) == RhoClass::SingularTheta);
    CHECK(classify_rho(rho_of({z, a, inf, b})) == RhoClass::Irreducible);
    CHECK_THROWS_AS(classify_rho(rho_of({z, z, z, b})), OnCurveX);
    CHECK_THROWS_AS(classify_rho(rho_of({z, inf, inf, b})), OnCurveX);
}

TEST_CASE("connection rebuilt from rho") {
    Rng rng(68);
    for (int i = 0; i < 10; ++i) {
        P p;
        const auto rho = random_rho(rng, p);
        const auto Cx = construct_connection_from_rho(rho, p);
        CHECK(rho_projective_error(rho_of_connection(Cx, p), rho) < 1e-8);
        CHECK(fit_det_constant(Cx, p).second < 1e-8);
        for (double r : {0.6, 1.5}) {
            const C zz = std::polar(r, 0.8);
            CHECK(connection_functional_residual(Cx(zz), Cx(p.q.value() * zz), zz, p.t0, p) < 1e-10);
        }
    }
}

TEST_CASE("triangular connections") {
    Rng rng(69);
    P p = generic_params(rng);
    p.kappa0 = p.kappaT * p.kappa1 * p.kappaInf;
    const C c(0.8, 0.3), nu(1.1, -0.4);
    const auto Cc = build_triangular_connection(c, nu, p, TriangularFamily::KappaChain);
    const auto rc = rho_of_connection(Cc, p);
    CHECK(classify_rho(rc) == RhoClass::ReducibleUpper);
    CHECK(rc[0].is_zero(1e-12));
    CHECK(rc[2].is_zero(1e-12));
    CHECK(t_eval(rc, t_coeffs(p)).normalized_residual < 1e-10);
    for (double r : {0.7, 1.3}) {
        const C zz = std::polar(r, -0.5);
        CHECK(connection_functional_residual(Cc(zz), Cc(p.q.value() * zz), zz, p.t0, p) < 1e-10);
    }
    CHECK(classify_rho(rho_of_connection(build_triangular_connection(C(0), nu, p, TriangularFamily::KappaChain), p)) ==
          RhoClass::SingularTheta);
    CHECK_THROWS_AS(build_triangular_connection(c, nu, p, TriangularFamily::KappaInfT0), ConstraintError);
    CHECK_THROWS_AS(build_triangular_connection(c, C(0), p, TriangularFamily::KappaChain), InvalidArgument);

    P p2 = generic_params(rng);
    p2.kappa0 = p2.kappaInf * p2.t0;
    const auto Ct = build_triangular_connection(c, nu, p2, TriangularFamily::KappaInfT0);
    const auto rt = rho_of_connection(Ct, p2);
    CHECK(classify_rho(rt) == RhoClass::ReducibleUpper);
    CHECK(rt[0].is_zero(1e-12));
    CHECK(rt[1].is_zero(1e-12));
    CHECK(t_eval(rt, t_coeffs(p2)).normalized_residual < 1e-10);
    CHECK_THROWS_AS(build_triangular_connection(c, nu, p2, TriangularFamily::KappaChain), ConstraintError);
}
