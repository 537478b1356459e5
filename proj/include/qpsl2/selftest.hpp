#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "qpsl2/cocycle.hpp"
#include "qpsl2/complex_rotation.hpp"
#include "qpsl2/cone_monitors.hpp"
#include "qpsl2/continued_fraction.hpp"
#include "qpsl2/invariants.hpp"
#include "qpsl2/reducibility.hpp"
#include "qpsl2/renormalization.hpp"
#include "qpsl2/sl2.hpp"

// The acceptance suite: every tolerance is pinned here, one entry per
// criterion. The CLI `selftest` command and the acceptance test binary both
// run exactly this list.

namespace qpsl2::selftest {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

inline double golden() { return 0.6180339887498948482; }
inline double sqrt2m1() { return 0.41421356237309503; }

inline Sl2Map bounded_conjugator() {
    Sl2TrigPoly p;
    p.x = TrigPolyC::cosine(1, 0.23);
    p.y = TrigPolyC::sine(1, 0.31) + TrigPolyC::cosine(2, -0.12);
    p.z = TrigPolyC::sine(3, 0.14);
    return Sl2Map::exp_trig(p);
}

inline QpCocycle bounded_family(double alpha, double psi_turns) {
    return conjugate(bounded_conjugator(),
                     QpCocycle{alpha, Sl2Map::constant(Mat2R::rotation(kTwoPi * psi_turns))});
}

inline std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

inline double mod1_gap(double x) {
    double d = x - std::round(x);
    return std::fabs(d);
}

}  // namespace detail

// 1. conjugation by E_r shifts rho_f by r alpha mod 1 (3e-4 at n = 1e5)
inline CheckResult criterion_rotation_law() {
    const double alpha = detail::golden();
    const QpCocycle base{alpha, Sl2Map::constant(Mat2R::rotation(kTwoPi * 0.25))};
    double worst = 0;
    for (int r = -2; r <= 2; ++r) {
        const QpCocycle cc = conjugate(Sl2Map::rot_path(r), base);
        const auto rot = fibered_rotation_number(cc, 100000);
        worst = std::max(worst, detail::mod1_gap(rot.value - (0.25 + r * alpha)));
    }
    return {1, "rotation-number conjugation law", worst <= 3e-4,
            detail::fmt("max mod-1 defect %.2e (tol 3e-4)", worst)};
}

// 2. lambda(diag(e,1/e)) = 1 +- 1e-6; rho_f(R_psi) = psi +- 1e-4
inline CheckResult criterion_constant_invariants() {
    const double alpha = detail::golden();
    const QpCocycle hyp{alpha, Sl2Map::constant(Mat2R::diagonal(std::exp(1.0), std::exp(-1.0)))};
    const double lam = lyapunov_exponent(hyp, 2000000, 4).value;
    bool pass = std::fabs(lam - 1.0) <= 1e-6;
    double worst_rho = 0;
    for (double psi : {0.1, 0.25, 0.4}) {
        const QpCocycle rot{alpha, Sl2Map::constant(Mat2R::rotation(kTwoPi * psi))};
        const auto r = fibered_rotation_number(rot, 100000);
        worst_rho = std::max(worst_rho, detail::mod1_gap(r.value - psi));
    }
    pass = pass && worst_rho <= 1e-4;
    return {2, "constant-cocycle invariants", pass,
            detail::fmt("|lambda-1| %.2e (tol 1e-6), rho defect %.2e (tol 1e-4)",
                        std::fabs(lam - 1.0), worst_rho)};
}

// 3. CF identities: exact determinants (20 random alpha, depth 30), beta
//    bounds, basis-matrix eigen-relation at (2,0), (4,2), (6,2)
inline CheckResult criterion_cf_identities() {
    detail::Rng rng(12345);
    bool pass = true;
    std::string why = "ok";
    for (int trial = 0; trial < 20 && pass; ++trial) {
        const double alpha = rng.uniform(1e-3, 1.0 - 1e-3);
        const auto cf = expand(alpha, 30);
        for (int k = 1; k <= cf.depth() && pass; ++k) {
            const int128 det = cf.q[k] * cf.p[k - 1] - cf.q[k - 1] * cf.p[k];
            if (det != ((k % 2 == 0) ? 1 : -1)) {
                pass = false;
                why = detail::fmt("determinant identity broke at k=%g", k);
            }
        }
        for (int k = 0; k + 1 <= cf.depth() && pass; ++k) {
            const double bk = cf.beta[static_cast<std::size_t>(k)];
            const double lo = 1.0 / static_cast<double>(cf.q[k + 1] + cf.q[k]);
            const double hi = 1.0 / static_cast<double>(cf.q[k + 1]);
            if (!(bk > lo - 1e-15 && bk < hi + 1e-15)) {
                pass = false;
                why = detail::fmt("beta bounds broke at k=%g", k);
            }
        }
    }
    double worst_rel = 0;
    const auto cf = expand(std::sqrt(2.0) - 1.0, 10);
    for (auto [k, l] : std::vector<std::pair<int, int>>{{2, 0}, {4, 2}, {6, 2}}) {
        const auto m = basis_matrix(cf, k, l);
        const double scale = cf.beta_prev(l) / cf.beta_prev(k);
        auto absd = [](int128 v) { return std::fabs(static_cast<double>(v)); };
        const double r1 = absd(m.m4) + absd(m.m2) * cf.alpha_k[k];
        const double r2 = absd(m.m3) + absd(m.m1) * cf.alpha_k[k];
        worst_rel = std::max(worst_rel, std::fabs(r1 - scale) / scale);
        worst_rel = std::max(worst_rel, std::fabs(r2 - scale * cf.alpha_k[l]) / scale);
    }
    pass = pass && worst_rel <= 1e-9;
    return {3, "continued-fraction identities", pass,
            pass ? detail::fmt("eigen-relation residual %.2e (tol 1e-9)", worst_rel) : why};
}

// 4. acs identity, anti-Cauchy-Schwarz, Ad-invariance of q on random samples
inline CheckResult criterion_sl2_geometry() {
    detail::Rng rng(777);
    double worst_acs = 0, worst_cs = 0, worst_ad = 0;
    for (int i = 0; i < 1000000; ++i) {
        const double x1 = rng.uniform(-1, 1), y1 = rng.uniform(-1, 1);
        const double x2 = rng.uniform(-1, 1), y2 = rng.uniform(-1, 1);
        const AlgebraVector v{x1, y1, 1.5 * std::hypot(x1, y1) + rng.uniform(0.001, 1.0)};
        const AlgebraVector w{x2, y2, 1.5 * std::hypot(x2, y2) + rng.uniform(0.001, 1.0)};
        const double lhs = quad_form(v) * quad_form(w);
        const double rhs =
            kappa(v, w) * kappa(v, w) + 0.25 * quad_form(bracket(v, w));
        worst_acs = std::max(worst_acs, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(lhs)));
        worst_cs = std::max(worst_cs,
                            minkowski_norm(v) * minkowski_norm(w) - kappa(v, w));
    }
    for (int i = 0; i < 20000; ++i) {
        const AlgebraVector v{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const AlgebraVector g{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const Mat2R a = exp_traceless(g.matrix());
        const double q0 = quad_form(v), q1 = quad_form(ad_action(a, v));
        worst_ad = std::max(worst_ad, std::fabs(q1 - q0) / std::max(1.0, std::fabs(q0)));
    }
    const bool pass = worst_acs <= 1e-10 && worst_cs <= 1e-12 && worst_ad <= 1e-10;
    return {4, "sl(2,R) cone geometry", pass,
            detail::fmt("acs %.2e (1e-10), anti-CS defect %.2e (1e-12), Ad %.2e (1e-10)",
                        worst_acs, worst_cs, worst_ad)};
}

// 5. exact renormalization frequencies for k <= 8; rescaled commutation defect
inline CheckResult criterion_renorm_bookkeeping() {
    const double alpha = detail::sqrt2m1();
    const auto cf = expand(alpha, 12);
    const QpCocycle c = detail::bounded_family(alpha, 0.23);
    RenormState st = renorm_init(c, cf);
    double worst_freq = 0;
    double worst_comm = 0;
    for (int k = 1; k <= 8; ++k) {
        st = renorm_step(st);
        worst_freq = std::max(worst_freq, std::fabs(st.u_freq() - cf.beta_prev(k)));
        worst_freq = std::max(worst_freq,
                              std::fabs(st.v_freq() - cf.beta[static_cast<std::size_t>(k)]));
        if (k <= 6) {
            const FiberedAction resc = rescaled_pair(st);
            for (int j = 0; j <= 32; ++j) {
                const double t = -3.0 + 6.0 * j / 32.0;
                const Mat2R lhs = resc.gen2.map(t + 1.0) * resc.gen1.map(t);
                const Mat2R rhs = resc.gen1.map(t + resc.gen2.freq) * resc.gen2.map(t);
                worst_comm = std::max(worst_comm, (lhs - rhs).frob());
            }
        }
    }
    const bool pass = worst_freq <= 1e-12 && worst_comm <= 1e-7;
    return {5, "renormalization bookkeeping", pass,
            detail::fmt("freq defect %.2e (1e-12), rescaled commutation %.2e (1e-7)",
                        worst_freq, worst_comm)};
}

// 6. monotone functionals: 2M >= ubar_k^{+/-} >= ubar_{k-1}^{-/+} >= 0 up to k = 6
inline CheckResult criterion_monotone_functionals() {
    const double alpha = detail::sqrt2m1();
    const auto cf = expand(alpha, 10);
    const QpCocycle c = detail::bounded_family(alpha, 0.23);
    const ConeDecomposition dec(c, 0.5);
    const double m_bound = measured_bound_constant(c, dec, 10000);
    double worst_drop = 0, worst_cap = 0;
    IntegratedQuantities prev = integrated_quantities(c, dec, cf, 0);
    for (int k = 1; k <= 6; ++k) {
        const IntegratedQuantities cur = integrated_quantities(c, dec, cf, k);
        worst_drop = std::max({worst_drop, prev.ubar_m - cur.ubar_p, prev.ubar_p - cur.ubar_m,
                               prev.ubar - cur.ubar, -cur.ubar_p, -cur.ubar_m});
        worst_cap = std::max({worst_cap, cur.ubar_p - 2.0 * m_bound, cur.ubar_m - 2.0 * m_bound,
                              cur.ubar - 2.0 * m_bound});
        prev = cur;
    }
    const bool pass = worst_drop <= 1e-8 && worst_cap <= 1e-6;
    return {6, "monotone cone functionals", pass,
            detail::fmt("worst monotonicity drop %.2e (1e-8), cap excess %.2e (1e-6)",
                        worst_drop, worst_cap)};
}

// 7. degree lower bound: equality for E_r, strict for a conjugated E_1
inline CheckResult criterion_degree_bound() {
    const double alpha = detail::golden();
    double worst_eq = 0;
    for (int r : {1, 2, 3}) {
        const auto b = degree_bound_check({alpha, Sl2Map::rot_path(r)}, r, 0.1, 1024);
        worst_eq = std::max(worst_eq, std::fabs(b.lhs - b.rhs));
        if (!b.ok) worst_eq = 1e9;
    }
    Sl2TrigPoly p;
    p.x = TrigPolyC::cosine(1, 0.05);
    p.y = TrigPolyC::sine(1, 0.04);
    const QpCocycle cc = conjugate(Sl2Map::exp_trig(p), {alpha, Sl2Map::rot_path(1)});
    const auto b1 = degree_bound_check(cc, 1, 0.1, 1024);
    const bool strict = b1.ok && b1.lhs > b1.rhs + 1e-6;
    const bool pass = worst_eq <= 1e-8 && strict;
    return {7, "degree lower bound", pass,
            detail::fmt("E_r equality defect %.2e (1e-8), conjugated slack %.2e (>0)", worst_eq,
                        b1.lhs - b1.rhs)};
}

// 8. complex rotation number: Re zeta vs Lyapunov, boundary Im zeta vs rho_f,
//    and the I - 4 Im J positivity
inline CheckResult criterion_complex_rotation() {
    const double alpha = detail::golden();
    const QpCocycle c = detail::bounded_family(alpha, 0.23);
    double worst_re = 0;
    for (const cplx z : {cplx(0.9, 0.0), std::polar(0.9, 0.3)}) {
        const ComplexCocycle cc = complexify(c, z);
        const DiskSection sec = invariant_section(cc, 2048, 1e-10);
        const ZetaResult zr = zeta(cc, sec, 100000, 8);
        worst_re = std::max(worst_re, std::fabs(zr.zeta.real() - zr.re_check));
    }
    std::vector<double> betas;
    for (int j = 0; j < 8; ++j) betas.push_back(0.05 + 0.7 * j / 7.0);
    const auto rows = boundary_scan(c, betas, {0.9, 0.99, 0.999}, 1024, 1e-10, 100000);
    double worst_im = 0;
    for (const auto& row : rows)
        if (row.r == 0.0)
            worst_im = std::max(worst_im, detail::mod1_gap(row.im - row.rot_direct));
    const IjResult ij = ij_defect(c, cplx(0.3, -0.05), 1024);
    const bool pass = worst_re <= 1e-3 && worst_im <= 1e-3 && ij.defect >= -1e-6;
    return {8, "complex rotation number", pass,
            detail::fmt("Re gap %.2e, boundary Im gap %.2e (both 1e-3), I-4ImJ %.2e (>=-1e-6)",
                        worst_re, worst_im, ij.defect)};
}

// 9. normal-form quadraticity: remainder scales like the square of the input,
//    and exp(Gamma + F) reproduces the conjugated map exactly on the grid
inline CheckResult criterion_normal_form() {
    const double alpha = detail::golden();
    auto make_u = [](double size) {
        Su11TrigPoly u;
        u.nu.add(1, cplx(size, 0.0));
        u.t = TrigPolyC::cosine(1, 0.5 * size);
        return u;
    };
    const Su11TrigPoly u2 = make_u(1e-2), u3 = make_u(1e-3);
    const auto big = normal_form_step(u2, alpha, 1, 32);
    const auto small = normal_form_step(u3, alpha, 1, 32);
    const double ratio = big.f_norm[0] / small.f_norm[0];
    double recon = 0;
    for (int j = 0; j < big.grid; j += 37) {
        const double t = static_cast<double>(j) / big.grid;
        const Mat2C lhs = exp_traceless(big.z.eval(t + alpha).matrix()) *
                          su11_rotation_model(1, t) * exp_traceless(u2.eval(t).matrix()) *
                          exp_traceless((big.z.eval(t) * -1.0).matrix());
        const Su11Vector total = big.gamma.eval(t) + big.f[static_cast<std::size_t>(j)];
        const Mat2C rhs = su11_rotation_model(1, t) * exp_traceless(total.matrix());
        recon = std::max(recon, (lhs - rhs).frob());
    }
    const bool pass = ratio >= 50.0 && ratio <= 200.0 && recon <= 1e-12;
    return {9, "normal-form quadratic smallness", pass,
            detail::fmt("|F| ratio %.1f (window [50, 200]), reconstruction %.2e (1e-12)", ratio,
                        recon)};
}

// 10. local KAM loop on a synthetic near-rotation cocycle
inline CheckResult criterion_kam() {
    const double alpha = detail::golden();
    const double psi = 0.292893218813;
    Sl2TrigPoly w;
    w.x = TrigPolyC::cosine(1, 1e-4);
    w.y = TrigPolyC::sine(1, -7e-5) + TrigPolyC::cosine(2, 4e-5);
    w.z = TrigPolyC::sine(2, 6e-5);
    const QpCocycle c{alpha, Sl2Map::product(Sl2Map::constant(Mat2R::rotation(kTwoPi * psi)),
                                             Sl2Map::exp_trig(w))};
    const auto cert = diophantine_wrt(psi, alpha, 50.0, 2.0, 1000);
    try {
        const KamResult res = kam_reduce_local(c, 6, 1024, 1e-10, &cert);
        const auto rho = fibered_rotation_number(c, 100000);
        const double gap = detail::mod1_gap(res.rho_a0 - rho.value);
        const bool pass = res.steps <= 6 && res.defect <= 1e-10 && gap <= 3e-4;
        return {10, "local KAM reduction", pass,
                detail::fmt("defect %.2e (1e-10) in %g steps, rho gap %.2e (3e-4)", res.defect,
                            res.steps, gap)};
    } catch (const Error& e) {
        return {10, "local KAM reduction", false, e.what()};
    }
}

// 11. hyperbolic neighbor of R(0.3): C^2 budget and exact exponent
inline CheckResult criterion_hyperbolic_neighbor() {
    const double alpha = detail::golden();
    const Mat2R a0 = Mat2R::rotation(0.3);
    const auto nb = hyperbolic_neighbor(a0, alpha, 0.1, 2);
    const double dist = cs_distance(nb.map, a0, 2);
    const auto lyap = lyapunov_exponent({alpha, nb.map}, 100000, 4);
    const bool pass =
        dist <= 0.1 && nb.log_spec_h > 0.0 && std::fabs(lyap.value - nb.log_spec_h) <= 1e-6;
    return {11, "hyperbolic neighbor", pass,
            detail::fmt("C2 distance %.3f (<=0.1), |lambda - log spec H| %.2e (1e-6)", dist,
                        std::fabs(lyap.value - nb.log_spec_h))};
}

// 12. Schroedinger destabilizer: lambda^2 - mu nu > 0 and the small-delta limits
inline CheckResult criterion_destabilizer() {
    Sl2TrigPoly w;
    w.x = TrigPolyC::cosine(1, 0.15);
    w.z = TrigPolyC::sine(2, 0.1);
    const Sl2Map b = Sl2Map::product(Sl2Map::rot_path(1), Sl2Map::exp_trig(w));
    const auto res = schrodinger_destabilizer(b, 0.01);
    const double dx = b.eval(res.x).d, cy = b.eval(res.y).b;
    const double mu_gap = std::fabs(res.mu - dx * dx) / (dx * dx);
    const double nu_gap = std::fabs(res.nu + cy * cy) / (cy * cy);
    const bool pass = res.margin > 0.0 && mu_gap <= 0.05 && nu_gap <= 0.05;
    return {12, "schrodinger destabilizer", pass,
            detail::fmt("margin %.3f (>0), mu gap %.1f%%, nu gap %.1f%% (both <=5%%)", res.margin,
                        100 * mu_gap, 100 * nu_gap)};
}

inline std::vector<CheckResult> run_all() {
    return {criterion_rotation_law(),     criterion_constant_invariants(),
            criterion_cf_identities(),    criterion_sl2_geometry(),
            criterion_renorm_bookkeeping(), criterion_monotone_functionals(),
            criterion_degree_bound(),     criterion_complex_rotation(),
            criterion_normal_form(),      criterion_kam(),
            criterion_hyperbolic_neighbor(), criterion_destabilizer()};
}

}  // namespace qpsl2::selftest
