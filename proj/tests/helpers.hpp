#pragma once

#include <algorithm>
#include <complex>

#include "qpvi/qpvi.hpp"
#include "qpvi/sampling.hpp"

namespace testutil {

using C = std::complex<double>;
using P = qpvi::ParameterSet<double>;
using PP = qpvi::ProjectivePoint<double>;
using Rng = qpvi::sampling::Xoshiro256ss;

inline double rel(C a, C b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

/// Random complex with modulus uniform in [lo, hi] and uniform phase.
inline C polar_draw(Rng& g, double lo, double hi) { return g.polar(lo, hi); }

/// Generic parameters: |q| in [0.2, 0.6], moduli in [0.6, 1.6], redrawn until both scans are clean.
inline P generic_params(Rng& g) { return qpvi::sampling::draw_generic(g).p; }

inline qpvi::PState<double> finite_state(C f, C g, long m) { return {PP::finite(f), PP::finite(g), m}; }

/// Parameters shared by the reducible-chain special-function tests (k0 = kt k1 kinf).
inline P chain_params() {
    const qpvi::QBase<double> q(std::polar(0.5, 0.3));
    const C kt = std::polar(4.0, 0.4), k1 = std::polar(4.0, -0.7), ki = std::polar(0.06, 1.1);
    return P(q, kt * k1 * ki, kt, k1, ki, std::polar(1.0, 0.5));
}

/// Parameters of the k0 = kinf t0 family used by the special-function tests.
inline P t0_params() {
    const qpvi::QBase<double> q(std::polar(0.5, 0.3));
    const C k0 = std::polar(0.7, 0.9), t0 = std::polar(8.0, 0.5);
    return P(q, k0, std::polar(1.1, 0.4), std::polar(1.1, -0.7), k0 / t0, t0);
}

}  // namespace testutil
