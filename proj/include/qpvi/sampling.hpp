#pragma once

#include <complex>
#include <cstdint>

#include "qpvi/types.hpp"

namespace qpvi::sampling {

/// xoshiro256** seeded through splitmix64. Fixed algorithm, so a seed replays on every platform
/// (std::uniform_real_distribution is implementation-defined, hence unused).
class Xoshiro256ss {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256ss(std::uint64_t seed);

    std::uint64_t operator()();
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t(0); }

    /// Uniform in [0, 1) from the top 53 bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Modulus uniform in [lo, hi], phase uniform in [0, 2 pi).
    std::complex<double> polar(double lo, double hi);

private:
    std::uint64_t s_[4];
};

struct DrawRanges {
    double q_lo = 0.2, q_hi = 0.6;
    double kappa_lo = 0.6, kappa_hi = 1.6;
    long window = 64;
};

struct ParameterDraw {
    ParameterSet<double> p;
    long rejections = 0;  ///< candidates discarded by the resonance and splitting scans
};

/// Parameters with no resonance or splitting violation in the lattice window.
ParameterDraw draw_generic(Xoshiro256ss& rng, const DrawRanges& r = {});

/// Parameters drawn the same way but without any rejection.
ParameterSet<double> draw_raw(Xoshiro256ss& rng, const DrawRanges& r = {});

struct StateDraw {
    std::complex<double> f, g, w;
    long rejections = 0;
};

/// (f, g, w) with moduli in the kappa range, kept at chordal distance >= 1e-3 from every base
/// point and from the zeros of (f - k1)(f - 1/k1) and (f - kt t)(f - t/kt) at t = q^m t0.
StateDraw draw_state(Xoshiro256ss& rng, const ParameterSet<double>& p, long m, const DrawRanges& r = {});

}  // namespace qpvi::sampling
