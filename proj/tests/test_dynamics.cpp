#include "doctest.h"
#include "helpers.hpp"

using namespace qpvi;
using namespace testutil;

namespace {

P fixed_params() {
    return P(QBase<double>(std::polar(0.45, 0.7)), std::polar(1.2, 0.3), std::polar(0.8, 1.9), std::polar(1.3, -1.1),
             std::polar(0.7, 2.6), std::polar(1.1, -0.4));
}

bool has(const std::vector<Violation>& v, const std::string& cond, long n) {
    for (const auto& x : v)
        if (x.condition == cond && x.n == n) return true;
    return false;
}

}  // namespace

TEST_CASE("nonresonance scan") {
    P p = fixed_params();
    CHECK(check_nonresonance(p).empty());
    p.kappaT = std::sqrt(p.q.value());
    CHECK(has(check_nonresonance(p), "kappaT^2 in q^Z", 1));
    p = fixed_params();
    p.kappa1 = p.kappaT / p.t0 * p.q.pow(2);
    CHECK(has(check_nonresonance(p), "kappaT/kappa1 in t0 q^Z", -2));
    CHECK_THROWS_AS(check_nonresonance(p, 0), InvalidArgument);
}

TEST_CASE("nonsplitting scan") {
    P p = fixed_params();
    CHECK(check_nonsplitting(p).empty());
    p.kappa0 = p.kappaT * p.kappa1 * p.kappaInf;
    bool found = false;
    for (const auto& v : check_nonsplitting(p))
        if (v.n == 0 && v.signs == std::array<int, 4>{1, -1, -1, -1}) found = true;
    CHECK(found);
    p = fixed_params();
    p.kappa0 = p.kappaInf * p.t0;
    found = false;
    for (const auto& v : check_nonsplitting(p))
        if (v.signs == std::array<int, 4>{1, 0, 0, -1} && v.n == 0) found = true;
    CHECK(found);
}

TEST_CASE("projective pairs are scale invariant") {
    const PP a(C(2, 1), C(0.5, -0.3));
    CHECK(chordal(a, a.scaled(C(-3.0, 7.0))) < 1e-16);
    CHECK(PP::infinity().is_infinite());
    CHECK_THROWS_AS(PP(C(0), C(0)), InvalidArgument);
    CHECK(chordal(PP::finite(C(0)), PP::infinity()) == doctest::Approx(1.0));
}

TEST_CASE("every base point is detected") {
    const P p = fixed_params();
    const long m = 3;
    const auto table = detail::basepoint_table(p, p.time(m));
    for (const auto& b : table) {
        const PState<double> s{b.f, b.g, m};
        REQUIRE(detect_basepoint(s, p).has_value());
        CHECK(*detect_basepoint(s, p) == b.label);
    }
    CHECK(*detect_basepoint(PState<double>{PP::finite(p.kappa1), PP::infinity(), 0}, p) == "b5");
    CHECK(*detect_basepoint(PState<double>{PP::infinity(), PP::finite(p.kappaInf), 0}, p) == "b7");
    CHECK_FALSE(detect_basepoint(finite_state(C(0.3, 0.2), C(1.1, -0.4), 0), p).has_value());
    CHECK_THROWS_AS(detect_basepoint(finite_state(C(1), C(1), 0), p, 0.0), InvalidArgument);
}

TEST_CASE("forward step solves both equations and inverts") {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const P p = generic_params(rng);
        const auto d = sampling::draw_state(rng, p, 0);
        const auto s = finite_state(d.f, d.g, 0);
        const auto r = step_forward<double>(s, AuxState<double>{d.w}, p);
        const auto res = qpvi_residual(s, r.state, p);
        CHECK(res[0] < 1e-12);
        CHECK(res[1] < 1e-12);
        const auto b = step_backward<double>(r.state, r.aux, p);
        CHECK(chordal(b.state.f, s.f) < 1e-10);
        CHECK(chordal(b.state.g, s.g) < 1e-10);
        REQUIRE(b.aux.has_value());
        CHECK(rel(b.aux->w, d.w) < 1e-10);
    }
}

TEST_CASE("auxiliary variable obeys its ratio") {
    const P p = fixed_params();
    const auto s = finite_state(C(0.4, 0.9), C(1.3, 0.2), 0);
    const auto r = step_forward<double>(s, AuxState<double>{C(0.7, -0.2)}, p);
    const C gb = r.state.g.value(), q = p.q.value(), ki = p.kappaInf;
    REQUIRE(r.aux.has_value());
    CHECK(rel(r.aux->w / C(0.7, -0.2), ki * (q * ki * gb - 1.0) / (gb - ki)) < 1e-13);
}

TEST_CASE("f at kt t sends g to zero") {
    const P p = fixed_params();
    const C t = p.time(0);
    const auto r = step_forward<double>(finite_state(p.kappaT * t, C(0.9, 0.3), 0), std::nullopt, p);
    CHECK(r.state.g.is_zero(1e-14));
}

TEST_CASE("indeterminate steps raise with a label") {
    const P p = fixed_params();
    const auto table = detail::basepoint_table(p, p.time(0));
    try {
        step_forward<double>(PState<double>{table[2].f, table[2].g, 0}, std::nullopt, p);
        FAIL("no exception");
    } catch (const SingularityEncountered& e) {
        CHECK(e.label() == "b3");
        CHECK(e.index() == 0);
    }
    try {
        step_backward<double>(PState<double>{table[6].f, table[6].g, 0}, std::nullopt, p);
        FAIL("no exception");
    } catch (const SingularityEncountered& e) {
        CHECK(e.label() == "b7");
    }
}

TEST_CASE("orbit of length one is the start") {
    const P p = fixed_params();
    const auto s = finite_state(C(0.3, 0.5), C(1.2, -0.6), 4);
    const auto tr = orbit<double>(s, std::nullopt, p, 4, 4);
    REQUIRE(tr.entries.size() == 1);
    CHECK(tr.entries[0].state.m == 4);
    CHECK(tr.singularities.empty());
    CHECK_THROWS_AS(orbit<double>(s, std::nullopt, p, 5, 8), InvalidArgument);
}

TEST_CASE("six steps forward then six back") {
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        const P p = generic_params(rng);
        const auto d = sampling::draw_state(rng, p, 0);
        const auto s = finite_state(d.f, d.g, 0);
        auto tr = orbit<double>(s, AuxState<double>{d.w}, p, 0, 6);
        if (!tr.singularities.empty()) continue;
        REQUIRE(tr.entries.size() == 7);
        auto back = orbit<double>(tr.entries.back().state, tr.entries.back().aux, p, 0, 6);
        const auto* e0 = back.at(0);
        REQUIRE(e0 != nullptr);
        CHECK(chordal(e0->state.f, s.f) < 1e-10);
        CHECK(chordal(e0->state.g, s.g) < 1e-10);
    }
}

TEST_CASE("the Lax-singular point is reached and then left through b8") {
    // Choose g at m = 0 so that gbar = kinf; the step lands on (inf, kinf) at m = 1.
    const P p = fixed_params();
    const C t = p.time(0), f(0.6, 0.8);
    const C N = (f - p.kappaT * t) * (f - t / p.kappaT);
    const C D = p.q.value() * (f - p.kappa1) * (f - 1.0 / p.kappa1);
    const C g = N / (D * p.kappaInf);
    const auto r = step_forward<double>(finite_state(f, g, 0), AuxState<double>{C(1)}, p);
    CHECK(r.lax_singular);
    CHECK(r.state.f.is_infinite(1e-12));
    CHECK_FALSE(r.aux.has_value());
    const auto tr = orbit<double>(finite_state(f, g, 0), std::nullopt, p, 0, 5);
    REQUIRE(tr.at(1) != nullptr);
    CHECK(tr.at(1)->lax_singular);
    REQUIRE(tr.singularities.size() == 1);
    CHECK(tr.singularities[0].label == "b8");
    CHECK(tr.singularities[0].m == 2);
}

TEST_CASE("g = 1/(q kinf) gives the Lax-singular point one step back") {
    const P p = fixed_params();
    const auto s = finite_state(C(0.5, -0.7), 1.0 / (p.q.value() * p.kappaInf), 2);
    const auto r = step_backward<double>(s, std::nullopt, p);
    CHECK(r.state.m == 1);
    CHECK(r.lax_singular);
}
