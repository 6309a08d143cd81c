#include "doctest.h"
#include "helpers.hpp"

using namespace qpvi;
using namespace testutil;

// First outputs for seed 42, from an independent Python transcription of the reference
// splitmix64 and xoshiro256** algorithms.
TEST_CASE("generator reference stream") {
    Rng rng(42);
    CHECK(rng() == 0x15780b2e0c2ec716ULL);
    CHECK(rng() == 0x6104d9866d113a7eULL);
    CHECK(rng() == 0xae17533239e499a1ULL);
    CHECK(rng() == 0xecb8ad4703b360a1ULL);
}

TEST_CASE("uniform draws stay in range") {
    Rng rng(7);
    double lo = 1, hi = 0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        const C z = rng.polar(0.3, 0.9);
        CHECK(std::abs(z) >= 0.3);
        CHECK(std::abs(z) <= 0.9);
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(lo < 1e-3);
    CHECK(hi > 1 - 1e-3);
}

TEST_CASE("parameter draws are generic and reproducible") {
    Rng a(99), b(99);
    for (int i = 0; i < 50; ++i) {
        const auto da = sampling::draw_generic(a), db = sampling::draw_generic(b);
        CHECK(da.p.q.value() == db.p.q.value());
        CHECK(da.p.t0 == db.p.t0);
        CHECK(check_nonresonance(da.p).empty());
        CHECK(check_nonsplitting(da.p).empty());
        CHECK(da.p.q.modulus() >= 0.2);
        CHECK(da.p.q.modulus() <= 0.6);
        for (const C& k : {da.p.kappa0, da.p.kappaT, da.p.kappa1, da.p.kappaInf}) {
            CHECK(std::abs(k) >= 0.6);
            CHECK(std::abs(k) <= 1.6);
        }
    }
}

TEST_CASE("custom ranges are honoured") {
    Rng rng(4);
    sampling::DrawRanges r;
    r.q_lo = 0.7;
    r.q_hi = 0.75;
    r.kappa_lo = 2.0;
    r.kappa_hi = 2.5;
    const auto p = sampling::draw_raw(rng, r);
    CHECK(p.q.modulus() >= 0.7);
    CHECK(p.q.modulus() <= 0.75);
    CHECK(std::abs(p.kappaT) >= 2.0);
}

TEST_CASE("state draws avoid base points") {
    Rng rng(12);
    for (int i = 0; i < 100; ++i) {
        const auto p = generic_params(rng);
        const auto s = sampling::draw_state(rng, p, 2);
        CHECK_FALSE(detect_basepoint(finite_state(s.f, s.g, 2), p, 1e-3).has_value());
        const C t = p.time(2);
        for (const C& a : {p.kappa1, 1.0 / p.kappa1, p.kappaT * t, t / p.kappaT})
            CHECK(chordal(PP::finite(s.f), a) > 1e-3);
    }
}
