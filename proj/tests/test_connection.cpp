#include "doctest.h"
#include "helpers.hpp"

using namespace qpvi;
using namespace testutil;

namespace {

struct Sys {
    P p;
    C f, g, w;
    LaxMatrix<double> A;
};

Sys random_sys(Rng& rng) {
    const P p = generic_params(rng);
    const auto d = sampling::draw_state(rng, p, 0);
    return {p, d.f, d.g, d.w, build_A(d.f, d.g, d.w, p, p.time(0))};
}

Mat2<double> k_pow(const C& k) { return diag2<double>(k, 1.0 / k); }

}  // namespace

TEST_CASE("series solve the q-difference equation") {
    Rng rng(41);
    for (int i = 0; i < 20; ++i) {
        const auto s = random_sys(rng);
        const C q = s.p.q.value(), t = s.A.t;
        const auto S0 = psi0_series(s.A, 60, s.p);
        const auto Si = psi_inf_series(s.A, 60, s.p);
        CHECK(sup_norm(Mat2<double>(series_sum(S0, C(0)) - S0.H())) == 0.0);
        const C z0 = std::polar(0.9 * S0.radius, 0.7);
        const Mat2<double> l0 = series_sum(S0, q * z0);
        const Mat2<double> r0 = s.A(z0) * series_sum(S0, z0) * k_pow(1.0 / s.p.kappa0) / t;
        CHECK(sup_norm(Mat2<double>(l0 - r0)) < 1e-11 * sup_norm(l0));
        const C zi = std::polar(1.2 * Si.radius / std::abs(q), -0.4);
        const Mat2<double> li = series_sum(Si, q * zi);
        const Mat2<double> ri = s.A(zi) * series_sum(Si, zi) * k_pow(1.0 / s.p.kappaInf) / (zi * zi);
        CHECK(sup_norm(Mat2<double>(li - ri)) < 1e-11 * sup_norm(li));
    }
}

TEST_CASE("continuation agrees with the series and is stable in K") {
    Rng rng(42);
    const auto s = random_sys(rng);
    const auto S0 = psi0_series(s.A, 60, s.p);
    const auto S1 = psi0_series(s.A, 70, s.p);
    const C q = s.p.q.value();
    // Psi_0(qw) = t^-1 A(w) Psi_0(w) k0^-s3 with w outside the series disk.
    const C w = std::polar(3.0 * S0.radius, 1.1);
    const Mat2<double> lhs = eval_psi0(S0, q * w);
    const Mat2<double> rhs = s.A(w) * eval_psi0(S0, w) * k_pow(1.0 / s.p.kappa0) / s.A.t;
    CHECK(sup_norm(Mat2<double>(lhs - rhs)) < 1e-10 * sup_norm(lhs));
    CHECK(sup_norm(Mat2<double>(eval_psi0(S0, w) - eval_psi0(S1, w))) < 1e-12 * sup_norm(eval_psi0(S0, w)));
    const Mat2<double> prod = eval_psi0(S0, w) * eval_psi0_inv(S0, w);
    CHECK(sup_norm(Mat2<double>(prod - Mat2<double>::Identity())) < 1e-10);
}

TEST_CASE("determinants match their closed forms") {
    Rng rng(43);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        const auto s = random_sys(rng);
        const auto S0 = psi0_series(s.A, 60, s.p);
        const auto Si = psi_inf_series(s.A, 60, s.p);
        for (double r : {0.3, 1.0, 3.0}) {
            const C z = std::polar(r, 0.25 + r);
            worst = std::max(worst, rel(eval_psi0_inv(S0, z).determinant(), det_psi0_inv_closed(S0, z)));
            worst = std::max(worst, rel(eval_psi_inf(Si, z).determinant(), det_psi_inf_closed(Si, z)));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("det Psi_inf vanishes at q x_k, not at x_k") {
    Rng rng(44);
    const auto s = random_sys(rng);
    const auto Si = psi_inf_series(s.A, 60, s.p);
    const auto x = s.p.roots(s.A.t);
    const C q = s.p.q.value();
    const Mat2<double> at_qx = eval_psi_inf(Si, q * x[0]);
    const Mat2<double> at_x = eval_psi_inf(Si, x[0]);
    const auto scale = [](const Mat2<double>& M) { return std::abs(M(0, 0) * M(1, 1)) + std::abs(M(0, 1) * M(1, 0)); };
    CHECK(std::abs(at_qx.determinant()) < 1e-9 * scale(at_qx));
    CHECK(std::abs(at_x.determinant()) > 1e-4 * scale(at_x));
}

TEST_CASE("connection matrix functional equation and rank drop") {
    Rng rng(45);
    for (int i = 0; i < 20; ++i) {
        const auto s = random_sys(rng);
        const auto S0 = psi0_series(s.A, 60, s.p);
        const auto Si = psi_inf_series(s.A, 60, s.p);
        const C q = s.p.q.value();
        for (double r : {0.7, 1.4}) {
            const C z = std::polar(r, 0.9);
            const auto c0 = connection_at(z, S0, Si), c1 = connection_at(q * z, S0, Si);
            CHECK(connection_functional_residual(c0.C, c1.C, z, s.A.t, s.p) < 1e-9);
            // det C = det Psi_0^-1 det Psi_inf, measured against the size of its two products.
            const double sc = std::abs(c0.C(0, 0) * c0.C(1, 1)) + std::abs(c0.C(0, 1) * c0.C(1, 0));
            CHECK(std::abs(c0.C.determinant() - det_psi0_inv_closed(S0, z) * det_psi_inf_closed(Si, z)) < 1e-12 * sc);
        }
        const auto rr = rho_coords(s.A, s.p);
        for (double ratio : rr.rank_ratio) CHECK(ratio < 1e-8);
    }
}

TEST_CASE("diagonal system has a diagonal connection matrix") {
    Rng rng(46);
    const P p = generic_params(rng);
    const C t = p.time(0);
    LaxMatrix<double> A;
    A.t = t;
    A.A0 = diag2<double>(p.kappa0 * t, t / p.kappa0);
    A.A1 = diag2<double>(C(0.3, 0.2), C(-0.5, 0.1));
    A.A2 = diag2<double>(p.kappaInf, 1.0 / p.kappaInf);
    const auto S0 = psi0_series(A, 60, p);
    const auto Si = psi_inf_series(A, 60, p);
    for (double r : {0.5, 1.3, 2.2}) {
        const Mat2<double> Cz = connection_at(std::polar(r, 0.4), S0, Si).C;
        CHECK(std::abs(Cz(0, 1)) == 0.0);
        CHECK(std::abs(Cz(1, 0)) == 0.0);
        CHECK(std::abs(Cz(0, 0)) > 0.0);
    }
}

TEST_CASE("pi of a rank-one matrix") {
    Mat2<double> R;
    R << C(1), C(2), C(2), C(4);
    CHECK(chordal(pi_of_singular(R), C(0.5)) < 1e-15);
    R << C(0), C(0), C(3), C(5);
    CHECK(chordal(pi_of_singular(R), C(0.6)) < 1e-15);
    R << C(0), C(1), C(0), C(2);
    CHECK(pi_of_singular(R).is_zero());
    CHECK_THROWS_AS(pi_of_singular(Mat2<double>(Mat2<double>::Zero())), ZeroMatrix);
    CHECK_THROWS_AS(pi_of_singular(Mat2<double>(Mat2<double>::Identity())), NotSingular);
}

TEST_CASE("rho ignores column scaling of Psi_0 and the gauge of A") {
    Rng rng(47);
    for (int i = 0; i < 10; ++i) {
        const auto s = random_sys(rng);
        const auto base = rho_coords(s.A, s.p);
        auto S0 = psi0_series(s.A, 60, s.p);
        const auto Si = psi_inf_series(s.A, 60, s.p);
        const Mat2<double> D = diag2<double>(C(2.5, -1.0), C(0.2, 0.6));
        for (auto& M : S0.coeffs) M = (M * D).eval();
        RhoPoint<double> scaled;
        const auto x = s.p.roots(s.A.t);
        for (int k = 0; k < 4; ++k) scaled.rho[k] = pi_of_singular(connection_at(x[k], S0, Si).C);
        CHECK(rho_projective_error(base.rho, scaled) < 1e-10);
        const auto gauged = rho_coords(s.A.gauged(C(0.4, 1.3)), s.p);
        CHECK(rho_projective_error(base.rho, gauged.rho) < 1e-9);
    }
}

TEST_CASE("coordinates recovered from the local solutions") {
    Rng rng(48);
    for (int i = 0; i < 20; ++i) {
        const auto s = random_sys(rng);
        const auto S0 = psi0_series(s.A, 30, s.p);
        const auto Si = psi_inf_series(s.A, 30, s.p);
        const auto r = fg_from_psi(S0.H(), Si.coeffs[1], s.p, s.A.t);
        CHECK_FALSE(r.lax_singular);
        CHECK(rel(r.f, s.f) < 1e-9);
        CHECK(chordal(r.g, s.g) < 1e-9);
        CHECK(rel(r.w, s.w) < 1e-9);
    }
    Rng rng2(49);
    const auto s = random_sys(rng2);
    Mat2<double> U;
    U << C(0.3), C(0), C(0.1), C(-0.2);
    CHECK(fg_from_psi(Mat2<double>(Mat2<double>::Identity()), U, s.p, s.A.t).lax_singular);
}

TEST_CASE("series reject bad truncation") {
    Rng rng(50);
    const auto s = random_sys(rng);
    CHECK_THROWS_AS(psi0_series(s.A, 0, s.p), InvalidArgument);
    CHECK_THROWS_AS(psi_inf_series(s.A, 0, s.p), InvalidArgument);
    const auto S0 = psi0_series(s.A, 5, s.p);
    CHECK_THROWS_AS(eval_psi_inf(S0, C(1)), InvalidArgument);
}
