#pragma once

#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "qpsl2/cocycle.hpp"
#include "qpsl2/config.hpp"
#include "qpsl2/continued_fraction.hpp"
#include "qpsl2/errors.hpp"
#include "qpsl2/invariants.hpp"

// Fibered Z^2-actions on R x SL(2,R): basis changes, normalization, the
// continued-fraction driven (U_k, V_k) renormalization, rescaling, and the
// degree / rotation-number invariants of actions.

namespace qpsl2 {

using MapFn = std::function<Mat2R(double)>;

struct FiberedGen {
    double freq = 0;
    MapFn map;

    Mat2R operator()(double t) const { return map(t); }
};

struct FiberedAction {
    FiberedGen gen1, gen2;
    double dom_lo = scheme().window_lo;
    double dom_hi = scheme().window_hi;
};

inline FiberedGen gen_identity() {
    return {0.0, [](double) { return Mat2R::identity(); }};
}

// (g a) (g b): frequency adds, fiber parts compose as D_a(t + freq_b) D_b(t).
inline FiberedGen gen_compose(const FiberedGen& a, const FiberedGen& b) {
    const double fb = b.freq;
    auto ma = a.map, mb = b.map;
    return {a.freq + b.freq, [ma, mb, fb](double t) { return ma(t + fb) * mb(t); }};
}

inline FiberedGen gen_inverse(const FiberedGen& g) {
    const double f = g.freq;
    auto m = g.map;
    return {-f, [m, f](double t) { return m(t - f).inverse(); }};
}

inline FiberedGen gen_power(const FiberedGen& g, long long n) {
    const double f = g.freq;
    const MapFn m = g.map;
    return {f * static_cast<double>(n), [m, f, n](double t) {
                Mat2R out = Mat2R::identity();
                if (n >= 0) {
                    for (long long i = 0; i < n; ++i)
                        out = m(t + static_cast<double>(i) * f) * out;
                } else {
                    for (long long i = 1; i <= -n; ++i)
                        out = m(t - static_cast<double>(i) * f).inverse() * out;
                }
                return out;
            }};
}

// sup over the sampled domain of |C(t + g2) A(t) - A(t + g1) C(t)|
inline double commutation_defect(const FiberedAction& act, int n = 256) {
    double worst = 0;
    double span = act.dom_hi - act.dom_lo - std::max(std::fabs(act.gen1.freq),
                                                     std::fabs(act.gen2.freq)) - 0.01;
    if (span < 1.0) span = 1.0;
    for (int j = 0; j <= n; ++j) {
        const double t = act.dom_lo + span * static_cast<double>(j) / n;
        const Mat2R lhs = act.gen1.map(t + act.gen2.freq) * act.gen2.map(t);
        const Mat2R rhs = act.gen2.map(t + act.gen1.freq) * act.gen1.map(t);
        worst = std::max(worst, (lhs - rhs).frob());
    }
    return worst;
}

inline FiberedAction action_from_cocycle(const QpCocycle& c) {
    if (c.map.period() != 1)
        throw Error(Errc::config_invalid, "actions are built from period-1 cocycles");
    FiberedAction act;
    act.gen1 = {1.0, [](double) { return Mat2R::identity(); }};
    const Sl2Map m = c.map;
    act.gen2 = {c.alpha, [m](double t) { return m.eval(t); }};
    return act;
}

struct BasisChange {
    long long a = 1, b = 0, c = 0, d = 1;  // new e1 = e1^a e2^c, new e2 = e1^b e2^d
    long long det() const { return a * d - b * c; }
};

inline FiberedAction change_basis(const FiberedAction& act, const BasisChange& m) {
    if (m.det() != 1 && m.det() != -1)
        throw Error(Errc::not_unimodular_basis, "basis change needs |det| = 1");
    FiberedAction out = act;
    out.gen1 = gen_compose(gen_power(act.gen1, m.a), gen_power(act.gen2, m.c));
    out.gen2 = gen_compose(gen_power(act.gen1, m.b), gen_power(act.gen2, m.d));
    return out;
}

// Solves B(t+1) = C(t) B(t) with B interpolating Id -> C(0) on [0,1) through
// polar factors, extended by the functional equation. A constant C with a
// real logarithm gets the exact one-parameter subgroup.
inline MapFn normalizing_conjugator(const FiberedGen& gen1, int probe = 64) {
    if (std::fabs(gen1.freq - 1.0) > 1e-9)
        throw Error(Errc::config_invalid, "normalize expects gen1 frequency 1");
    const MapFn c = gen1.map;

    // constant-map detection
    const Mat2R c0 = c(0.0);
    double variation = 0;
    for (int j = 0; j <= probe; ++j)
        variation = std::max(variation, (c(static_cast<double>(j) / probe) - c0).frob());
    const bool constant = variation <= 1e-12;
    if (constant && (c0 - Mat2R::identity()).frob() <= 1e-14) {
        return [](double) { return Mat2R::identity(); };
    }

    MapFn base;
    if (constant && c0.trace() > -2.0 + 1e-9) {
        const Mat2R h = log_unimodular(c0);
        base = [h](double s) { return exp_traceless(h * s); };
    } else {
        // polar blend with a smoothstep ramp
        const double phi = polar_angle(c0);
        const Mat2R spd = Mat2R::rotation(-phi) * c0;
        const Mat2R ls = log_unimodular(spd.renormalized());
        base = [phi, ls](double s) {
            const double r = s * s * (3.0 - 2.0 * s);
            return Mat2R::rotation(phi * r) * exp_traceless(ls * r);
        };
    }

    return [base, c](double t) {
        double s = t - std::floor(t);
        Mat2R out = base(s);
        // climb the functional equation back to the base interval
        double u = t;
        while (u >= 1.0 - 1e-15) {
            u -= 1.0;
            out = c(u) * out;
        }
        while (u < -1e-15) {
            out = c(u).inverse() * out;
            u += 1.0;
        }
        return out;
    };
}

struct NormalizedAction {
    FiberedAction action;
    MapFn conjugator;  // B with B(t+1) = C(t) B(t); new maps are B(t+g)^{-1} D(t) B(t)
};

inline NormalizedAction normalize(const FiberedAction& act) {
    NormalizedAction out;
    out.conjugator = normalizing_conjugator(act.gen1);
    const MapFn b = out.conjugator;
    auto conj_gen = [&b](const FiberedGen& g) {
        const double f = g.freq;
        const MapFn m = g.map;
        return FiberedGen{f, [b, m, f](double t) { return b(t + f).inverse() * m(t) * b(t); }};
    };
    out.action.gen1 = {1.0, [](double) { return Mat2R::identity(); }};
    out.action.gen2 = conj_gen(act.gen2);
    out.action.dom_lo = act.dom_lo;
    out.action.dom_hi = act.dom_hi;
    return out;
}

// ---------------------------------------------------------------------------
// The continued-fraction renormalization. U_k and V_k stay inside the integer
// lattice spanned by e1 = (1, Id) and e2 = (alpha, A(. - nu)), so the state is
// four integers plus the expansion. Fiber parts are fibered products A_n.

struct RenormState {
    QpCocycle base;
    CfExpansion cf;
    double nu = 0;
    int k = 0;
    long long u_e1 = 1, u_e2 = 0;  // U_k = e1^{u_e1} e2^{u_e2}
    long long v_e1 = 0, v_e2 = 1;

    double u_freq() const { return u_e1 + u_e2 * base.alpha; }
    double v_freq() const { return v_e1 + v_e2 * base.alpha; }
};

inline RenormState renorm_init(const QpCocycle& c, const CfExpansion& cf, double nu = 0.0) {
    RenormState st;
    st.base = QpCocycle{c.alpha, nu == 0.0 ? c.map : Sl2Map::shift(c.map, -nu)};
    st.cf = cf;
    st.nu = nu;
    return st;
}

// U_{k+1} = V_k, V_{k+1} = U_k V_k^{-a_{k+1}}
inline RenormState renorm_step(const RenormState& st) {
    const int k1 = st.k + 1;
    if (k1 > st.cf.depth()) throw Error(Errc::depth_exhausted, "no partial quotient left");
    const long long a = st.cf.a[static_cast<std::size_t>(k1)];
    RenormState out = st;
    out.k = k1;
    out.u_e1 = st.v_e1;
    out.u_e2 = st.v_e2;
    out.v_e1 = st.u_e1 - a * st.v_e1;
    out.v_e2 = st.u_e2 - a * st.v_e2;
    return out;
}

inline FiberedGen state_gen(const RenormState& st, long long e1, long long e2) {
    const QpCocycle base = st.base;
    return {static_cast<double>(e1) + static_cast<double>(e2) * base.alpha,
            [base, e2](double t) { return fibered_product(base, e2, t); }};
}

inline FiberedAction action_of_state(const RenormState& st) {
    FiberedAction act;
    act.gen1 = state_gen(st, st.u_e1, st.u_e2);
    act.gen2 = state_gen(st, st.v_e1, st.v_e2);
    return act;
}

// (tilde U_k, tilde V_k) = L^{-1} (U_k, V_k) L with L the dilation by
// beta_{k-1}: frequencies become (1, alpha_k), maps are read at beta_{k-1} t.
inline FiberedAction rescaled_pair(const RenormState& st) {
    const double lambda = st.cf.beta_prev(st.k);
    if (lambda <= 1e-12) throw Error(Errc::underflow, "rescale factor below 1e-12");
    FiberedAction act = action_of_state(st);
    auto rescale = [lambda](const FiberedGen& g) {
        const MapFn m = g.map;
        return FiberedGen{g.freq / lambda, [m, lambda](double t) { return m(lambda * t); }};
    };
    FiberedAction out;
    out.gen1 = rescale(act.gen1);
    out.gen2 = rescale(act.gen2);
    return out;
}

// ---------------------------------------------------------------------------
// Degree and rotation number of actions.

namespace detail {

// Exact lift value at (t, x): the table only picks the integer branch, the
// fractional part is re-evaluated from the matrix itself.
inline double lift_exact(const LiftTable& table, const MapFn& map, double t, double x) {
    const double raw = direction_displacement(map(t), x);
    const double tab = table.eval(t, x);
    return raw + std::round(tab - raw);
}

}  // namespace detail

// deg(e1, e2) = (a o F_c + c) - (c o F_a + a), a constant integer.
// Lifts are tabulated over a window wide enough for one application of each
// generator; n_t_per_unit controls the t-resolution of the tables.
inline int action_degree(const FiberedAction& act, int n_t_per_unit = 512, int n_x = 128,
                         double* defect_out = nullptr) {
    const double gc = act.gen1.freq, ga = act.gen2.freq;
    const double lo = std::min({0.0, gc, ga}) - 0.05;
    const double hi = 0.55 + std::max({0.0, gc, ga}) + 0.05;
    const int n_t = std::max(64, static_cast<int>((hi - lo) * n_t_per_unit));
    const LiftTable lift_c(act.gen1.map, lo, hi, n_t, n_x);
    const LiftTable lift_a(act.gen2.map, lo, hi, n_t, n_x);

    double lo_val = std::numeric_limits<double>::infinity();
    double hi_val = -lo_val;
    for (int i = 0; i < 8; ++i) {
        const double t = 0.5 * static_cast<double>(i) / 8;
        for (int j = 0; j < 8; ++j) {
            const double x = static_cast<double>(j) / 8;
            const double cv = detail::lift_exact(lift_c, act.gen1.map, t, x);
            const double av = detail::lift_exact(lift_a, act.gen2.map, t, x);
            const double a_fc = detail::lift_exact(lift_a, act.gen2.map, t + gc, x + cv);
            const double c_fa = detail::lift_exact(lift_c, act.gen1.map, t + ga, x + av);
            const double val = (a_fc + cv) - (c_fa + av);
            lo_val = std::min(lo_val, val);
            hi_val = std::max(hi_val, val);
        }
    }
    if (hi_val - lo_val > 1e-3)
        throw Error(Errc::nonconstant, "degree formula spread exceeds 1e-3; lift fault");
    const double mid = 0.5 * (lo_val + hi_val);
    const double r = std::round(mid);
    if (defect_out) *defect_out = std::max(std::fabs(hi_val - r), std::fabs(lo_val - r));
    return static_cast<int>(r);
}

struct ActionRotation {
    double representative = 0;  // one representative of the class mod (1/2) M_A
    double g1 = 0, g2 = 0;      // frequency-module generators
    double residual = 0;
};

// Distance from x to the half frequency module (1/2)(Z g1 + Z g2), searched
// over coefficients up to the given bound.
inline double lattice_distance(double x, double g1, double g2, int bound = 50) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = -bound; a <= bound; ++a)
        for (int b = -bound; b <= bound; ++b)
            best = std::min(best,
                            std::fabs(x - 0.5 * (a * g1 + b * g2)));
    return best;
}

// Rotation number of a degree-0 action: normalize, then run the fibered
// rotation number of the (0,1)-generator, whose map is 1-periodic.
inline ActionRotation action_rotation_number(const FiberedAction& act, long long n = 100000) {
    if (action_degree(act) != 0)
        throw Error(Errc::nonzero_degree, "action rotation number needs degree 0");
    const NormalizedAction norm = normalize(act);
    const FiberedGen& g = norm.action.gen2;
    // Birkhoff average through the tabulated lift of the periodic generator
    const LiftTable lift(g.map, 0.0, 1.0, 1024, 128);
    auto lift_fn = [&](double t, double x) {
        return detail::lift_exact(lift, g.map, t - std::floor(t), x);
    };
    const auto r = detail::rotation_birkhoff(g.freq, lift_fn, n, 0.0, 0.0);
    ActionRotation out;
    out.representative = r.value;
    out.g1 = act.gen1.freq;
    out.g2 = act.gen2.freq;
    out.residual = r.residual;
    return out;
}

struct ProximityResult {
    int r = 0;
    double distance = 0;  // C0 distance of the normalized generator to E_r
};

// Best rotation model E_r for the normalized rescaled (alpha_k, .)-generator.
inline ProximityResult proximity_to_rotation_model(const RenormState& st, int r_max = 6,
                                                   int n = 256) {
    const FiberedAction resc = rescaled_pair(st);
    const NormalizedAction norm = normalize(resc);
    const MapFn& u = norm.action.gen2.map;
    std::vector<Mat2R> samples(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) samples[j] = u(static_cast<double>(j) / n);
    ProximityResult best;
    best.distance = std::numeric_limits<double>::infinity();
    for (int r = -r_max; r <= r_max; ++r) {
        double d = 0;
        for (int j = 0; j < n; ++j) {
            const double t = static_cast<double>(j) / n;
            d = std::max(d, (samples[j] - Mat2R::rotation(kTwoPi * r * t)).frob());
        }
        if (d < best.distance) {
            best.distance = d;
            best.r = r;
        }
    }
    return best;
}

}  // namespace qpsl2
