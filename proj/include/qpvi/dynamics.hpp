#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qpvi/qspecial.hpp"
#include "qpvi/types.hpp"

namespace qpvi {

/// A lattice condition that failed: the quantity value equals base * q^n.
struct Violation {
    std::string condition;
    long n = 0;
    std::array<int, 4> signs{0, 0, 0, 0};
};

/// Scan of k_j^2 notin q^Z and (kt k1)^{+-1}, (kt/k1)^{+-1} notin t0 q^Z.
template <typename Real>
std::vector<Violation> check_nonresonance(const ParameterSet<Real>& p, long window = 64) {
    if (window < 1) throw InvalidArgument("window must be >= 1");
    std::vector<Violation> out;
    const Complex<Real> one(1);
    const std::pair<const char*, Complex<Real>> squares[] = {
        {"kappa0^2", p.kappa0 * p.kappa0},
        {"kappaT^2", p.kappaT * p.kappaT},
        {"kappa1^2", p.kappa1 * p.kappa1},
        {"kappaInf^2", p.kappaInf * p.kappaInf}};
    for (const auto& [name, v] : squares)
        if (auto n = lattice_index(v, one, p.q, window)) out.push_back({std::string(name) + " in q^Z", *n, {}});
    const std::pair<const char*, Complex<Real>> shifted[] = {
        {"kappaT*kappa1", p.kappaT * p.kappa1},
        {"1/(kappaT*kappa1)", one / (p.kappaT * p.kappa1)},
        {"kappaT/kappa1", p.kappaT / p.kappa1},
        {"kappa1/kappaT", p.kappa1 / p.kappaT}};
    for (const auto& [name, v] : shifted)
        if (auto n = lattice_index(v, p.t0, p.q, window)) out.push_back({std::string(name) + " in t0 q^Z", *n, {}});
    return out;
}

/// Scan of all sign choices of k0^e0 kt^et k1^e1 kinf^einf notin q^Z and k0^e0 kinf^einf notin t0 q^Z.
/// Signs are stored in the order (0, t, 1, inf); entries unused by a condition stay 0.
template <typename Real>
std::vector<Violation> check_nonsplitting(const ParameterSet<Real>& p, long window = 64) {
    if (window < 1) throw InvalidArgument("window must be >= 1");
    std::vector<Violation> out;
    auto pw = [](const Complex<Real>& k, int e) { return e > 0 ? k : Complex<Real>(1) / k; };
    for (int mask = 0; mask < 16; ++mask) {
        const std::array<int, 4> e{mask & 1 ? -1 : 1, mask & 2 ? -1 : 1, mask & 4 ? -1 : 1, mask & 8 ? -1 : 1};
        const Complex<Real> v = pw(p.kappa0, e[0]) * pw(p.kappaT, e[1]) * pw(p.kappa1, e[2]) * pw(p.kappaInf, e[3]);
        if (auto n = lattice_index(v, Complex<Real>(1), p.q, window))
            out.push_back({"k0 kt k1 kinf product in q^Z", *n, e});
    }
    for (int mask = 0; mask < 4; ++mask) {
        const std::array<int, 4> e{mask & 1 ? -1 : 1, 0, 0, mask & 2 ? -1 : 1};
        const Complex<Real> v = pw(p.kappa0, e[0]) * pw(p.kappaInf, e[3]);
        if (auto n = lattice_index(v, p.t0, p.q, window)) out.push_back({"k0 kinf product in t0 q^Z", *n, e});
    }
    return out;
}

/// Point (f, g) of P^1 x P^1 at lattice time t = q^m t0.
template <typename Real>
struct PState {
    ProjectivePoint<Real> f, g;
    long m = 0;
};

template <typename Real>
struct AuxState {
    Complex<Real> w{1};
};

template <typename Real>
struct StepResult {
    PState<Real> state;
    std::optional<AuxState<Real>> aux;  ///< dropped when w degenerates to 0 or infinity
    bool lax_singular = false;          ///< (f, g) = (inf, kinf): no coefficient matrix exists
};

namespace detail {

/// x - a y, the homogeneous form of (v - a).
template <typename Real>
Complex<Real> lin(const ProjectivePoint<Real>& v, const Complex<Real>& a) {
    return v.x() - a * v.y();
}

template <typename Real>
bool near(const ProjectivePoint<Real>& v, const ProjectivePoint<Real>& target, Real tol) {
    return chordal(v, target) <= tol;
}

template <typename Real>
struct BasePointRow {
    const char* label;
    ProjectivePoint<Real> f, g;
};

template <typename Real>
std::array<BasePointRow<Real>, 8> basepoint_table(const ParameterSet<Real>& p, const Complex<Real>& t) {
    using PP = ProjectivePoint<Real>;
    const Complex<Real> q = p.q.value();
    const PP zero = PP::finite(0), inf = PP::infinity();
    return {{{"b1", zero, PP::finite(p.kappa0 * t / q)},
             {"b2", zero, PP::finite(t / (q * p.kappa0))},
             {"b3", PP::finite(p.kappaT * t), zero},
             {"b4", PP::finite(t / p.kappaT), zero},
             {"b5", PP::finite(p.kappa1), inf},
             {"b6", PP::finite(Complex<Real>(1) / p.kappa1), inf},
             {"b7", inf, PP::finite(p.kappaInf)},
             {"b8", inf, PP::finite(Complex<Real>(1) / (q * p.kappaInf))}}};
}

template <typename Real>
std::optional<std::string> match_rows(const PState<Real>& s, const ParameterSet<Real>& p, Real tol,
                                      std::initializer_list<int> rows) {
    const auto table = basepoint_table(p, p.time(s.m));
    for (int r : rows) {
        const auto& b = table[r];
        if (near(s.f, b.f, tol) && near(s.g, b.g, tol)) return std::string(b.label);
    }
    return std::nullopt;
}

template <typename Real>
bool lax_singular_state(const ProjectivePoint<Real>& f, const ProjectivePoint<Real>& g, const ParameterSet<Real>& p,
                        Real tol) {
    return near(f, ProjectivePoint<Real>::infinity(), tol) && near(g, ProjectivePoint<Real>::finite(p.kappaInf), tol);
}

/// Pair with both components below the scale of the inputs: genuine 0/0.
template <typename Real>
bool indeterminate(const Complex<Real>& a, const Complex<Real>& b, Real scale) {
    return std::max(std::abs(a), std::abs(b)) <= Real(64) * eps<Real>() * scale;
}

}  // namespace detail

/// Base point label b1..b8 within chordal distance tol in both factors, evaluated at t = q^m t0.
template <typename Real>
std::optional<std::string> detect_basepoint(const PState<Real>& s, const ParameterSet<Real>& p, Real tol = Real(1e-9)) {
    if (!(tol > 0)) throw InvalidArgument("tol must be positive");
    return detail::match_rows(s, p, tol, {0, 1, 2, 3, 4, 5, 6, 7});
}

/// One step m -> m+1: gbar from g gbar = (f - kt t)(f - t/kt) / (q (f - k1)(f - 1/k1)), then
/// fbar from f fbar = (gbar - k0 t)(gbar - t/k0) / ((gbar - kinf)(gbar - 1/(q kinf))), in homogeneous form.
/// The auxiliary variable moves by wbar = w kinf (q kinf gbar - 1)/(gbar - kinf).
template <typename Real>
StepResult<Real> step_forward(const PState<Real>& s, const std::optional<AuxState<Real>>& aux,
                              const ParameterSet<Real>& p, Real tol = Real(1e-9)) {
    using namespace detail;
    using PP = ProjectivePoint<Real>;
    const Complex<Real> t = p.time(s.m), q = p.q.value(), one(1);
    if (auto lbl = match_rows(s, p, tol, {2, 3, 4, 5})) throw SingularityEncountered(*lbl, s.m);

    const Complex<Real> N = lin(s.f, p.kappaT * t) * lin(s.f, t / p.kappaT);
    const Complex<Real> D = q * lin(s.f, p.kappa1) * lin(s.f, one / p.kappa1);
    const Complex<Real> gx = N * s.g.y(), gy = D * s.g.x();
    if (indeterminate(gx, gy, std::max(std::abs(N), std::abs(D)))) throw SingularityEncountered("b3-b6", s.m);
    const PP gb(gx, gy);

    const auto zero = PP::finite(0), inf = PP::infinity();
    if (near(s.f, zero, tol)) {
        if (near(gb, PP::finite(p.kappa0 * t), tol)) throw SingularityEncountered("b1", s.m + 1);
        if (near(gb, PP::finite(t / p.kappa0), tol)) throw SingularityEncountered("b2", s.m + 1);
    }
    if (near(s.f, inf, tol)) {
        if (near(gb, PP::finite(p.kappaInf), tol)) throw SingularityEncountered("b7", s.m + 1);
        if (near(gb, PP::finite(one / (q * p.kappaInf)), tol)) throw SingularityEncountered("b8", s.m + 1);
    }
    const Complex<Real> N2 = lin(gb, p.kappa0 * t) * lin(gb, t / p.kappa0);
    const Complex<Real> D2 = lin(gb, p.kappaInf) * lin(gb, one / (q * p.kappaInf));
    const Complex<Real> fx = N2 * s.f.y(), fy = D2 * s.f.x();
    if (indeterminate(fx, fy, std::max(std::abs(N2), std::abs(D2)))) throw SingularityEncountered("b1,b2,b7,b8", s.m + 1);

    StepResult<Real> r;
    r.state = {PP(fx, fy), gb, s.m + 1};
    r.lax_singular = lax_singular_state(r.state.f, r.state.g, p, tol);
    if (aux) {
        const Complex<Real> num = p.kappaInf * (q * p.kappaInf * gb.x() - gb.y());
        const Complex<Real> den = lin(gb, p.kappaInf);
        const Complex<Real> wb = aux->w * num / den;
        if (is_finite(wb) && wb != Complex<Real>(0) && !r.lax_singular) r.aux = AuxState<Real>{wb};
    }
    return r;
}

/// One step m -> m-1, inverting the two substeps in reverse order. Indeterminacy of the
/// second substep is reported with the mirrored labels b3..b6 at index m-1.
template <typename Real>
StepResult<Real> step_backward(const PState<Real>& s, const std::optional<AuxState<Real>>& aux,
                               const ParameterSet<Real>& p, Real tol = Real(1e-9)) {
    using namespace detail;
    using PP = ProjectivePoint<Real>;
    const Complex<Real> tp = p.time(s.m - 1), q = p.q.value(), one(1);
    if (auto lbl = match_rows(s, p, tol, {0, 1, 6, 7})) throw SingularityEncountered(*lbl, s.m);

    const Complex<Real> N2 = lin(s.g, p.kappa0 * tp) * lin(s.g, tp / p.kappa0);
    const Complex<Real> D2 = lin(s.g, p.kappaInf) * lin(s.g, one / (q * p.kappaInf));
    const Complex<Real> fx = N2 * s.f.y(), fy = D2 * s.f.x();
    if (indeterminate(fx, fy, std::max(std::abs(N2), std::abs(D2)))) throw SingularityEncountered("b1,b2,b7,b8", s.m);
    const PP fp(fx, fy);

    const auto zero = PP::finite(0), inf = PP::infinity();
    if (near(s.g, inf, tol)) {
        if (near(fp, PP::finite(p.kappaT * tp), tol)) throw SingularityEncountered("b3", s.m - 1);
        if (near(fp, PP::finite(tp / p.kappaT), tol)) throw SingularityEncountered("b4", s.m - 1);
    }
    if (near(s.g, zero, tol)) {
        if (near(fp, PP::finite(p.kappa1), tol)) throw SingularityEncountered("b5", s.m - 1);
        if (near(fp, PP::finite(one / p.kappa1), tol)) throw SingularityEncountered("b6", s.m - 1);
    }
    const Complex<Real> N = lin(fp, p.kappaT * tp) * lin(fp, tp / p.kappaT);
    const Complex<Real> D = q * lin(fp, p.kappa1) * lin(fp, one / p.kappa1);
    const Complex<Real> gx = N * s.g.y(), gy = D * s.g.x();
    if (indeterminate(gx, gy, std::max(std::abs(N), std::abs(D)))) throw SingularityEncountered("b3-b6", s.m - 1);

    StepResult<Real> r;
    r.state = {fp, PP(gx, gy), s.m - 1};
    r.lax_singular = lax_singular_state(r.state.f, r.state.g, p, tol);
    if (aux) {
        const Complex<Real> num = p.kappaInf * (q * p.kappaInf * s.g.x() - s.g.y());
        const Complex<Real> den = lin(s.g, p.kappaInf);
        const Complex<Real> w = aux->w * den / num;
        if (is_finite(w) && w != Complex<Real>(0) && !r.lax_singular) r.aux = AuxState<Real>{w};
    }
    return r;
}

/// Relative residuals of the two defining equations between consecutive states s (at m) and sb (at m+1).
template <typename Real>
std::array<Real, 2> qpvi_residual(const PState<Real>& s, const PState<Real>& sb, const ParameterSet<Real>& p) {
    using detail::lin;
    const Complex<Real> t = p.time(s.m), q = p.q.value(), one(1);
    auto rel = [](const Complex<Real>& a, const Complex<Real>& b) {
        const Real sc = std::max(std::abs(a), std::abs(b));
        return sc > 0 ? std::abs(a - b) / sc : Real(0);
    };
    const Complex<Real> l1 = s.g.x() * sb.g.x() * q * lin(s.f, p.kappa1) * lin(s.f, one / p.kappa1);
    const Complex<Real> r1 = s.g.y() * sb.g.y() * lin(s.f, p.kappaT * t) * lin(s.f, t / p.kappaT);
    const Complex<Real> l2 = s.f.x() * sb.f.x() * lin(sb.g, p.kappaInf) * lin(sb.g, one / (q * p.kappaInf));
    const Complex<Real> r2 = s.f.y() * sb.f.y() * lin(sb.g, p.kappa0 * t) * lin(sb.g, t / p.kappa0);
    return {rel(l1, r1), rel(l2, r2)};
}

template <typename Real>
struct OrbitEntry {
    PState<Real> state;
    std::optional<AuxState<Real>> aux;
    bool lax_singular = false;
};

template <typename Real>
struct OrbitEvent {
    long m = 0;
    std::string label;
    int direction = 0;  ///< +1 forward, -1 backward
};

template <typename Real>
struct Trajectory {
    std::vector<OrbitEntry<Real>> entries;  ///< ascending in m, contiguous
    std::vector<OrbitEvent<Real>> singularities;

    const OrbitEntry<Real>* at(long m) const {
        for (const auto& e : entries)
            if (e.state.m == m) return &e;
        return nullptr;
    }
};

/// Iterate from start in both directions over [m_lo, m_hi]; a direction stops at the first indeterminacy.
template <typename Real>
Trajectory<Real> orbit(const PState<Real>& start, const std::optional<AuxState<Real>>& aux, const ParameterSet<Real>& p,
                       long m_lo, long m_hi, Real tol = Real(1e-9)) {
    if (!(m_lo <= start.m && start.m <= m_hi)) throw InvalidArgument("orbit: start index outside window");
    Trajectory<Real> tr;
    std::vector<OrbitEntry<Real>> back;
    OrbitEntry<Real> cur{start, aux, detail::lax_singular_state(start.f, start.g, p, tol)};
    for (OrbitEntry<Real> e = cur; e.state.m > m_lo;) {
        try {
            auto r = step_backward(e.state, e.aux, p, tol);
            e = {r.state, r.aux, r.lax_singular};
            back.push_back(e);
        } catch (const SingularityEncountered& ex) {
            tr.singularities.push_back({ex.index(), ex.label(), -1});
            break;
        }
    }
    tr.entries.assign(back.rbegin(), back.rend());
    tr.entries.push_back(cur);
    for (OrbitEntry<Real> e = cur; e.state.m < m_hi;) {
        try {
            auto r = step_forward(e.state, e.aux, p, tol);
            e = {r.state, r.aux, r.lax_singular};
            tr.entries.push_back(e);
        } catch (const SingularityEncountered& ex) {
            tr.singularities.push_back({ex.index(), ex.label(), +1});
            break;
        }
    }
    return tr;
}

}  // namespace qpvi
