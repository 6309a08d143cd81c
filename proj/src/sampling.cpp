#include "qpvi/sampling.hpp"

#include "qpvi/dynamics.hpp"

namespace qpvi::sampling {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

Xoshiro256ss::Xoshiro256ss(std::uint64_t seed) {
    for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Xoshiro256ss::operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Xoshiro256ss::uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

std::complex<double> Xoshiro256ss::polar(double lo, double hi) {
    const double m = uniform(lo, hi);
    return std::polar(m, kTwoPi * uniform());
}

ParameterSet<double> draw_raw(Xoshiro256ss& rng, const DrawRanges& r) {
    const auto q = rng.polar(r.q_lo, r.q_hi);
    const auto k0 = rng.polar(r.kappa_lo, r.kappa_hi);
    const auto kt = rng.polar(r.kappa_lo, r.kappa_hi);
    const auto k1 = rng.polar(r.kappa_lo, r.kappa_hi);
    const auto ki = rng.polar(r.kappa_lo, r.kappa_hi);
    const auto t0 = rng.polar(r.kappa_lo, r.kappa_hi);
    return ParameterSet<double>(QBase<double>(q), k0, kt, k1, ki, t0);
}

ParameterDraw draw_generic(Xoshiro256ss& rng, const DrawRanges& r) {
    ParameterDraw d;
    for (;;) {
        d.p = draw_raw(rng, r);
        if (check_nonresonance(d.p, r.window).empty() && check_nonsplitting(d.p, r.window).empty()) return d;
        ++d.rejections;
    }
}

StateDraw draw_state(Xoshiro256ss& rng, const ParameterSet<double>& p, long m, const DrawRanges& r) {
    using PP = ProjectivePoint<double>;
    StateDraw s;
    const auto t = p.time(m);
    const std::complex<double> avoid_f[] = {0.0, p.kappa1, 1.0 / p.kappa1, p.kappaT * t, t / p.kappaT};
    for (;;) {
        s.f = rng.polar(r.kappa_lo, r.kappa_hi);
        s.g = rng.polar(r.kappa_lo, r.kappa_hi);
        s.w = rng.polar(r.kappa_lo, r.kappa_hi);
        bool ok = !detect_basepoint(PState<double>{PP::finite(s.f), PP::finite(s.g), m}, p, 1e-3).has_value();
        for (const auto& a : avoid_f) ok = ok && chordal(PP::finite(s.f), a) > 1e-3;
        if (ok) return s;
        ++s.rejections;
    }
}

}  // namespace qpvi::sampling
