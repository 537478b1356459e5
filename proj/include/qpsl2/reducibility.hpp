#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "qpsl2/cocycle.hpp"
#include "qpsl2/config.hpp"
#include "qpsl2/continued_fraction.hpp"
#include "qpsl2/errors.hpp"
#include "qpsl2/fft.hpp"
#include "qpsl2/invariants.hpp"
#include "qpsl2/sl2.hpp"
#include "qpsl2/trig_poly.hpp"

// Cohomological solvers over the rotation, the resonant normal-form step near
// E_r, a desk-scale local KAM loop, the rigidity Fourier argument, and the two
// explicit perturbation constructions (hyperbolic neighbor of an elliptic
// constant; Schroedinger destabilizing bump).

namespace qpsl2 {

// Principal traceless logarithm of a det-1 complex matrix (near identity).
inline Mat2C log_unimodular_c(const Mat2C& m) {
    const cplx half_tr = 0.5 * m.trace();
    const cplx om = std::acos(half_tr);
    const cplx sinc = std::abs(om) < 1e-8 ? cplx(1.0) - om * om / 6.0 : std::sin(om) / om;
    Mat2C out = (m - Mat2C::identity() * half_tr) * (1.0 / sinc);
    const cplx tr = 0.5 * out.trace();
    out.a -= tr;
    out.d -= tr;
    return out;
}

struct CohomologySolution {
    TrigPolyC y;
    double amplification = 0;  // largest 1/|divisor| inverted
};

// y(theta + alpha) - y(theta) = h(theta), solvable once the mean of h is
// removed; the solver drops h(0) silently and reports the worst divisor.
inline CohomologySolution solve_translation_cohomology(const TrigPolyC& h, double alpha,
                                                       long long n_max) {
    CohomologySolution out;
    for (const auto& [k, c] : h.coeffs()) {
        if (k == 0 || std::llabs(k) > n_max) continue;
        const cplx div = std::polar(1.0, kTwoPi * static_cast<double>(k) * alpha) - 1.0;
        if (std::abs(div) < tol().small_divisor)
            throw Error(Errc::small_divisor, "resonant translation divisor", k);
        out.y.add(k, c / div);
        out.amplification = std::max(out.amplification, 1.0 / std::abs(div));
    }
    return out;
}

inline double translation_residual(const TrigPolyC& y, const TrigPolyC& h, double alpha,
                                   int n = 257) {
    double worst = 0;
    for (int j = 0; j < n; ++j) {
        const double t = (static_cast<double>(j) + 0.31) / n;  // offset nodes
        const cplx lhs = y.eval(t + alpha) - y.eval(t);
        const cplx rhs = h.eval(t) - h.coeff(0);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

struct TwistedSolution {
    TrigPolyC nu;   // the solved part
    TrigPolyC p_r;  // resonant band left unsolved, modes -(2r-1)..0
    double amplification = 0;
};

// e^{-4 pi i r theta} nu(theta + alpha) - nu(theta) = P_r(theta) - g(theta).
// Mode m couples to m + 2r, so each residue class mod 2r carries a two-term
// recurrence; the band {-(2r-1)..0} holds one representative per class and its
// coefficient is chosen so both one-sided telescopes meet.
inline TwistedSolution solve_twisted_cohomology(const TrigPolyC& g, double alpha, int r,
                                                long long n_max) {
    if (r < 1) throw Error(Errc::config_invalid, "twisted solver needs r >= 1");
    const long long two_r = 2LL * r;
    TwistedSolution out;
    auto divisor = [&](long long k) {
        const cplx d = std::polar(1.0, kTwoPi * static_cast<double>(k) * alpha);
        if (std::abs(d) < tol().small_divisor)
            throw Error(Errc::small_divisor, "twisted divisor vanished", k);
        return d;
    };
    const TrigPolyC gt = g.truncated(n_max);
    for (long long cls = 0; cls < two_r; ++cls) {
        // band representative of this class in {-(2r-1)..0}
        const long long m_b = -((two_r - cls) % two_r);
        // support range on the chain
        long long m_lo = m_b, m_hi = m_b;
        for (const auto& [k, c] : gt.coeffs()) {
            if (((k % two_r) + two_r) % two_r != cls) continue;
            m_lo = std::min(m_lo, k);
            m_hi = std::max(m_hi, k);
        }
        // upward telescope, nu = 0 below the support:
        // nu(m + 2r) = (nu(m) - g(m)) / d(m + 2r) for non-band m < m_b
        cplx nu_up = 0;
        for (long long m = m_lo; m < m_b; m += two_r) {
            nu_up = (nu_up - gt.coeff(m)) / divisor(m + two_r);
            out.nu.add(m + two_r, nu_up);
        }
        const cplx nu_at_band = nu_up;
        // downward telescope, nu = 0 above the support:
        // nu(m) = nu(m + 2r) d(m + 2r) + g(m) for non-band m > m_b
        cplx nu_down = 0;
        for (long long m = m_hi; m > m_b; m -= two_r) {
            nu_down = nu_down * divisor(m + two_r) + gt.coeff(m);
            out.nu.add(m, nu_down);
        }
        // band equation fixes the resonant coefficient
        const cplx p = nu_down * divisor(m_b + two_r) - nu_at_band + gt.coeff(m_b);
        if (p != 0.0) out.p_r.add(m_b, p);
    }
    double gmax = 1e-300, numax = 0;
    for (const auto& [k, c] : gt.coeffs()) gmax = std::max(gmax, std::abs(c));
    for (const auto& [k, c] : out.nu.coeffs()) numax = std::max(numax, std::abs(c));
    out.amplification = numax / gmax;
    return out;
}

inline double twisted_residual(const TrigPolyC& nu, const TrigPolyC& p_r, const TrigPolyC& g,
                               double alpha, int r, int n = 257) {
    double worst = 0;
    for (int j = 0; j < n; ++j) {
        const double t = (static_cast<double>(j) + 0.17) / n;
        const cplx tw = std::polar(1.0, -2.0 * kTwoPi * r * t);
        const cplx lhs = tw * nu.eval(t + alpha) - nu.eval(t);
        const cplx rhs = p_r.eval(t) - g.eval(t);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Normal-form step near E_r in the su(1,1) picture.

inline Mat2C su11_rotation_model(int r, double theta) {
    return Mat2C::diagonal(std::polar(1.0, kTwoPi * r * theta),
                           std::polar(1.0, -kTwoPi * r * theta));
}

struct NormalFormOutput {
    Su11TrigPoly z;           // the conjugating exponent
    Su11TrigPoly gamma;       // resonant part {f(0), band}
    std::vector<Su11Vector> f;  // measured remainder on the grid
    int grid = 0;
    double f_norm[3] = {0, 0, 0};  // C^0..C^2 norms of the remainder
    double z_norm0 = 0;
    double gamma_norm0 = 0;
};

namespace detail {

inline void su11_grid_norms(const std::vector<Su11Vector>& f, double* out3) {
    const std::size_t n = f.size();
    std::vector<cplx> t(n), nu(n);
    for (std::size_t j = 0; j < n; ++j) {
        t[j] = f[j].t;
        nu[j] = f[j].nu;
    }
    for (int s = 0; s <= 2; ++s) {
        double m = 0;
        for (std::size_t j = 0; j < n; ++j)
            m = std::max(m, std::max(std::abs(t[j]), std::abs(nu[j])));
        out3[s] = m;
        if (s < 2) {
            t = spectral_derivative(t);
            nu = spectral_derivative(nu);
        }
    }
}

}  // namespace detail

// One resonant normal-form step: solves the linearized conjugation equation,
// keeps the resonant band in Gamma, and measures the exact remainder
//   F = log( E_r(theta)^{-1} e^{Z(theta+alpha)} E_r(theta) e^{U(theta)} e^{-Z(theta)} ) - Gamma.
inline NormalFormOutput normal_form_step(const Su11TrigPoly& u, double alpha, int r,
                                         long long n_max, int grid = 0) {
    const double gate = u.cs_norm(2) * std::pow(static_cast<double>(n_max), scheme().nf_a);
    if (gate > scheme().nf_eps0)
        throw Error(Errc::step_too_large, "normal-form gate |U|_2 N^a exceeded");
    NormalFormOutput out;
    // t-part: y(.+alpha) - y = f(0) - f
    const TrigPolyC f_rhs = TrigPolyC::constant(u.t.coeff(0)) - u.t;
    const CohomologySolution ysol = solve_translation_cohomology(f_rhs, alpha, n_max);
    // nu-part: twisted equation with the band absorbed into P_r
    const TwistedSolution nsol = solve_twisted_cohomology(u.nu, alpha, r, n_max);
    out.z.t = ysol.y;
    out.z.nu = nsol.nu;
    out.gamma.t = TrigPolyC::constant(u.t.coeff(0));
    out.gamma.nu = nsol.p_r;

    if (grid == 0) {
        grid = 256;
        while (grid < 8 * (n_max + 2 * r + 1)) grid <<= 1;
    }
    out.grid = grid;
    out.f.resize(static_cast<std::size_t>(grid));
    for (int j = 0; j < grid; ++j) {
        const double t = static_cast<double>(j) / grid;
        const Mat2C er = su11_rotation_model(r, t);
        const Mat2C lhs = exp_traceless(out.z.eval(t + alpha).matrix()) * er *
                          exp_traceless(u.eval(t).matrix()) *
                          exp_traceless((out.z.eval(t) * -1.0).matrix());
        const Mat2C x = er.inverse() * lhs;
        const Su11Vector total = su11_algebra_from_matrix(log_unimodular_c(x));
        out.f[static_cast<std::size_t>(j)] = total - out.gamma.eval(t);
    }
    detail::su11_grid_norms(out.f, out.f_norm);
    out.z_norm0 = out.z.c0_norm();
    out.gamma_norm0 = out.gamma.c0_norm();
    return out;
}

struct Lambda2rMonitor {
    double lhs = 0;  // |Lambda_{2r} U|_0
    double rhs = 0;  // |U - Lambda_{2r} U|_0
    double nu_l1 = 0;       // int |nu|
    double du_norm0 = 0;    // |dU|_0
};

inline Su11TrigPoly lambda_projection(const Su11TrigPoly& u, int r) {
    Su11TrigPoly out;
    out.t = TrigPolyC::constant(u.t.coeff(0));
    for (long long k = -(2LL * r - 1); k <= 0; ++k) out.nu.add(k, u.nu.coeff(k));
    return out;
}

inline Lambda2rMonitor lambda_2r_monitor(const Su11TrigPoly& u, int r, int grid = 1024) {
    Lambda2rMonitor out;
    const Su11TrigPoly lam = lambda_projection(u, r);
    const Su11TrigPoly rest = u - lam;
    out.lhs = lam.c0_norm();
    out.rhs = rest.c0_norm();
    const TrigPolyC dnu = u.nu.derivative();
    const TrigPolyC dt = u.t.derivative();
    for (int j = 0; j < grid; ++j) {
        const double t = static_cast<double>(j) / grid;
        out.nu_l1 += std::abs(u.nu.eval(t)) / grid;
        out.du_norm0 = std::max(out.du_norm0,
                                std::max(std::abs(dt.eval(t)), std::abs(dnu.eval(t))));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Local KAM reduction of a near-constant cocycle (the r = 0 regime: both
// solvers untwisted, the constant re-absorbed each step).

struct SuDiagonalization {
    Mat2C q;   // SU(1,1) change of frame
    cplx w;    // Q V Q^{-1} = diag(w, 1/w), |w| = 1 for elliptic V
};

inline SuDiagonalization su11_diagonalize(const Mat2C& v) {
    // interior fixed point of the Moebius action: v.c tau^2 + (v.d - v.a) tau - v.b = 0
    const cplx a = v.c, b = v.d - v.a, c = -v.b;
    cplx tau;
    if (std::abs(a) < 1e-14) {
        if (std::abs(b) < 1e-14) {
            tau = 0;  // already diagonal
        } else {
            tau = -c / b;
        }
    } else {
        const cplx disc = std::sqrt(b * b - 4.0 * a * c);
        const cplx t1 = (-b + disc) / (2.0 * a);
        const cplx t2 = (-b - disc) / (2.0 * a);
        tau = std::abs(t1) < std::abs(t2) ? t1 : t2;
    }
    if (std::abs(tau) >= 1.0 - 1e-12)
        throw Error(Errc::not_elliptic, "no interior fixed point; matrix not elliptic");
    const double uu = 1.0 / std::sqrt(1.0 - std::norm(tau));
    SuDiagonalization out;
    out.q = Mat2C{uu, -tau * uu, -std::conj(tau) * uu, uu};
    const Mat2C d = out.q * v * out.q.inverse();
    out.w = d.a;
    return out;
}

struct KamResult {
    std::function<Mat2R(double)> b;  // conjugator, A(theta) = B(theta+alpha) A0 B(theta)^{-1}
    Sl2Map b_map;          // the same conjugator as a serializable expression tree
    Mat2R a0;
    int steps = 0;
    double defect = 0;     // final sup |U_n|
    double rho_a0 = 0;     // rotation angle of A0 in turns
};

// su(1,1)-valued trig poly {t, nu} as the sl(2,R)-valued poly {Re nu, Im nu, t}
inline Sl2TrigPoly sl2_poly_from_su11(const Su11TrigPoly& z) {
    Sl2TrigPoly out;
    out.z = z.t;
    for (const auto& [k, c] : z.nu.coeffs()) {
        // Re nu and Im nu mode-by-mode: x(k) = (nu(k) + conj(nu(-k)))/2
        const cplx cm = std::conj(z.nu.coeff(-k));
        out.x.add(k, 0.5 * (c + cm));
        out.y.add(k, cplx(0, -0.5) * (c - cm));
    }
    return out;
}

inline KamResult kam_reduce_local(const QpCocycle& c, int max_steps = 8, int grid = 1024,
                                  double target = 1e-10,
                                  const RhoCert* cert = nullptr) {
    if (cert && cert->rational)
        throw Error(Errc::resonance_hit, "rotation number rational w.r.t. alpha");
    // constant part and su(1,1) frame
    Mat2R mean{0, 0, 0, 0};
    for (int j = 0; j < grid; ++j)
        mean = mean + c.map.eval(static_cast<double>(j) / grid) * (1.0 / grid);
    if (mean.det() <= 0)
        throw Error(Errc::not_elliptic, "no constant part with positive determinant");
    const Mat2R a0_guess = mean.renormalized();
    const SuDiagonalization diag = su11_diagonalize(sl2_to_su11(a0_guess));

    // accumulated frame G with current map G(.+alpha) U_A(.) G(.)^{-1}
    const Sl2Map base_map = c.map;
    std::vector<Su11TrigPoly> zs;
    const Mat2C q0 = diag.q;
    auto g_eval = [&zs, q0](double t) {
        Mat2C g = q0;
        for (const auto& z : zs) g = exp_traceless(z.eval(t).matrix()) * g;
        return g;
    };
    cplx w = diag.w;

    double prev_defect = std::numeric_limits<double>::infinity();
    int grew = 0;
    KamResult out;
    for (int step = 0; step <= max_steps; ++step) {
        // current U_n on the grid
        std::vector<cplx> tpart(static_cast<std::size_t>(grid)), nupart(tpart);
        double defect = 0;
        const Mat2C a0_inv = Mat2C::diagonal(1.0 / w, w);
        for (int j = 0; j < grid; ++j) {
            const double t = static_cast<double>(j) / grid;
            const Mat2C cur = g_eval(t + c.alpha) * sl2_to_su11(base_map.eval(t)) *
                              g_eval(t).inverse();
            const Su11Vector u = su11_algebra_from_matrix(log_unimodular_c(a0_inv * cur));
            tpart[static_cast<std::size_t>(j)] = u.t;
            nupart[static_cast<std::size_t>(j)] = u.nu;
            defect = std::max(defect, u.sup_abs());
        }
        out.steps = step;
        out.defect = defect;
        if (defect <= target) break;
        if (step == max_steps) throw Error(Errc::diverged, "defect target not reached");
        if (defect > prev_defect) {
            if (++grew >= 2) throw Error(Errc::diverged, "defect grew twice in a row");
        } else {
            grew = 0;
        }
        prev_defect = defect;

        const long long n_trunc =
            std::min<long long>(grid / 4, std::llround(std::exp(std::pow(1.5, step + 1))));
        auto that = fourier_coefficients(tpart);
        auto nhat = fourier_coefficients(nupart);
        Su11TrigPoly z;
        const cplx w2 = std::conj(w) * std::conj(w);
        for (long long k = -n_trunc; k <= n_trunc; ++k) {
            const cplx rot = std::polar(1.0, kTwoPi * static_cast<double>(k) * c.alpha);
            if (k != 0) {
                const cplx div_t = rot - 1.0;
                if (std::abs(div_t) < tol().resonance_floor)
                    throw Error(Errc::resonance_hit, "translation divisor collapsed", k);
                z.t.add(k, -coeff_at(that, k) / div_t);
            }
            const cplx div_n = w2 * rot - 1.0;
            if (std::abs(div_n) < tol().resonance_floor)
                throw Error(Errc::resonance_hit, "rotation-number resonance", k);
            z.nu.add(k, -coeff_at(nhat, k) / div_n);
        }
        zs.push_back(z);
        // absorb the kept mean of the t-part into the constant
        w *= std::polar(1.0, coeff_at(that, 0).real());
    }

    const Mat2C a0_su = Mat2C::diagonal(w, 1.0 / w);
    const Mat2R a0 = su11_to_sl2(a0_su);
    out.a0 = a0;
    out.rho_a0 = std::arg(w) / kTwoPi - std::floor(std::arg(w) / kTwoPi);
    out.b = [g_zs = zs, q0, base_map](double t) {
        Mat2C g = q0;
        for (const auto& z : g_zs) g = exp_traceless(z.eval(t).matrix()) * g;
        return su11_to_sl2(g.inverse());
    };
    // same conjugator as a tree: B = (e^{Z_n} ... e^{Z_1} Q0)^{-1} in the real picture
    Sl2Map g_tree = Sl2Map::constant(su11_to_sl2(q0).renormalized());
    for (const auto& z : zs)
        g_tree = Sl2Map::product(Sl2Map::exp_trig(sl2_poly_from_su11(z)), g_tree);
    out.b_map = Sl2Map::inverse(g_tree);
    return out;
}

// ---------------------------------------------------------------------------
// Rigidity: a map equivariant under a diophantine rotation has no nonzero
// Fourier modes, so it must be the constant D(0).

inline Mat2R rigidity_conjugacy(const std::vector<Mat2R>& samples, double rel_tol = 1e-6) {
    const std::size_t n = samples.size();
    std::vector<std::vector<cplx>> comp(4, std::vector<cplx>(n));
    for (std::size_t j = 0; j < n; ++j) {
        comp[0][j] = samples[j].a;
        comp[1][j] = samples[j].b;
        comp[2][j] = samples[j].c;
        comp[3][j] = samples[j].d;
    }
    Mat2R mean{0, 0, 0, 0};
    double scale = 0, worst = 0;
    long long worst_k = 0;
    for (auto& v : comp) v = fourier_coefficients(v);
    mean = {comp[0][0].real(), comp[1][0].real(), comp[2][0].real(), comp[3][0].real()};
    scale = std::max(1.0, mean.frob());
    for (long long k = 1; k < static_cast<long long>(n) / 2; ++k) {
        double mag = 0;
        for (const auto& v : comp)
            mag = std::max({mag, std::abs(coeff_at(v, k)), std::abs(coeff_at(v, -k))});
        if (mag > worst) {
            worst = mag;
            worst_k = k;
        }
    }
    if (worst > rel_tol * scale)
        throw Error(Errc::nonconstant, "nonzero Fourier mode survives", worst_k);
    return mean;
}

// ---------------------------------------------------------------------------
// Hyperbolic neighbor of an elliptic constant (the local accumulation
// construction): A(theta) = Q E_k(theta + alpha) H E_{-k}(theta) Q^{-1}.

struct HyperbolicNeighbor {
    Sl2Map map;
    Mat2R h;
    Mat2R q;          // frame with A0 = Q R Q^{-1}
    long long k = 0;
    double psi = 0;   // rotation number of A0, turns
    double log_spec_h = 0;
};

inline HyperbolicNeighbor hyperbolic_neighbor(const Mat2R& a0, double alpha, double eps, int s,
                                              long long k_cap = 2000000) {
    if (!a0.unimodular(1e-9)) throw Error(Errc::not_unimodular, "A0 must be unimodular");
    const double half_tr = 0.5 * a0.trace();
    if (std::fabs(half_tr) >= 1.0 - 1e-12)
        throw Error(Errc::not_elliptic, "A0 is not elliptic");
    const double phi = std::acos(half_tr);
    double psi = phi / kTwoPi;
    if (a0.c - a0.b < 0) psi = 1.0 - psi;

    // frame: A0 = cos(phi) + sin(phi) M with M^2 = -Id and M oriented like J,
    // so Q = (e, M e) has positive determinant and Q J Q^{-1} = M
    const double sphi = (a0.c - a0.b >= 0 ? 1.0 : -1.0) * std::sin(phi);
    const Mat2R m = (a0 - Mat2R::identity() * half_tr) * (1.0 / sphi);
    const Mat2R q_raw = m.c > 1e-9 ? Mat2R{1, m.a, 0, m.c} : Mat2R{0, m.b, 1, m.d};
    const Mat2R q = q_raw.renormalized();

    // minimal |k| with |R_{2 pi psi} - R_{2 pi k alpha}| <= eps_eff / 2
    const double eps_eff = eps / std::max(1.0, q.norm() * q.norm());
    const double tol_turns = std::asin(std::min(1.0, eps_eff / 4.0)) / kPi;
    long long k = 0;
    bool found = false;
    for (long long cand = 0; cand <= k_cap && !found; ++cand) {
        for (const long long kk : {cand, -cand}) {
            if (dist_to_integers(psi - static_cast<double>(kk) * alpha) <= tol_turns) {
                k = kk;
                found = true;
                break;
            }
            if (cand == 0) break;
        }
    }
    if (!found) throw Error(Errc::no_zero_found, "no k matched the rotation number");

    // |H - Id| small enough that the C^s distance budget closes:
    // each theta-derivative brings a factor 2 pi k from either side
    const double denom =
        20.0 * std::pow(std::max(1.0, 4.0 * kPi * static_cast<double>(std::llabs(k))),
                        static_cast<double>(s));
    const double g = std::log1p(eps_eff / denom);
    HyperbolicNeighbor out;
    out.h = Mat2R::diagonal(std::exp(g), std::exp(-g));
    out.q = q;
    out.k = k;
    out.psi = psi;
    out.log_spec_h = g;
    const Sl2Map inner = Sl2Map::product(
        Sl2Map::product(Sl2Map::shift(Sl2Map::rot_path(static_cast<double>(k)), alpha),
                        Sl2Map::constant(out.h)),
        Sl2Map::rot_path(static_cast<double>(-k)));
    out.map = Sl2Map::conj(Sl2Map::constant(q), inner);
    return out;
}

// sup over the grid of |d^i (A - A0)| for i <= s, derivatives by spectral
// differentiation of the sampled entries.
inline double cs_distance(const Sl2Map& m, const Mat2R& a0, int s, int n = 4096) {
    const std::vector<Mat2R>& g = m.grid(n);
    std::vector<std::vector<cplx>> comp(4, std::vector<cplx>(static_cast<std::size_t>(n)));
    for (int j = 0; j < n; ++j) {
        comp[0][j] = g[j].a - a0.a;
        comp[1][j] = g[j].b - a0.b;
        comp[2][j] = g[j].c - a0.c;
        comp[3][j] = g[j].d - a0.d;
    }
    double worst = 0;
    for (int i = 0; i <= s; ++i) {
        for (int j = 0; j < n; ++j) {
            const double f = std::sqrt(std::norm(comp[0][j]) + std::norm(comp[1][j]) +
                                       std::norm(comp[2][j]) + std::norm(comp[3][j]));
            worst = std::max(worst, f);
        }
        if (i < s)
            for (auto& v : comp) v = spectral_derivative(v);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Schroedinger destabilizer: bump difference w = chi_x - chi_y placed at a
// zero x of c and a zero y of d, where (c, d) is the second column of the
// conjugacy B. The integrals (lambda, mu, nu) then satisfy lambda^2 - mu nu > 0.

struct DestabilizerResult {
    double x = 0, y = 0;          // zero of c, zero of d
    double lambda = 0, mu = 0, nu = 0;
    double margin = 0;            // lambda^2 - mu nu
    std::function<double(double)> w;
};

namespace detail {

inline double bisect_zero(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((flo < 0) == (fm < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline std::vector<double> find_zeros(const std::function<double(double)>& f, int n = 4096) {
    std::vector<double> zeros;
    double prev = f(0.0);
    for (int j = 1; j <= n; ++j) {
        const double t = static_cast<double>(j) / n;
        const double cur = f(t);
        if ((prev < 0 && cur >= 0) || (prev > 0 && cur <= 0))
            zeros.push_back(bisect_zero(f, t - 1.0 / n, t));
        prev = cur;
    }
    return zeros;
}

inline double circle_dist(double a, double b) {
    double d = std::fabs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

}  // namespace detail

inline DestabilizerResult schrodinger_destabilizer(const Sl2Map& b, double delta,
                                                   int quad_n = 1 << 15) {
    if (degree(b) == 0)
        throw Error(Errc::config_invalid, "destabilizer needs a conjugacy of nonzero degree");
    auto c_fn = [&b](double t) { return b.eval(t).b; };   // top-right entry
    auto d_fn = [&b](double t) { return b.eval(t).d; };   // bottom-right entry
    const auto zeros_c = detail::find_zeros(c_fn);
    const auto zeros_d = detail::find_zeros(d_fn);
    if (zeros_c.empty() || zeros_d.empty())
        throw Error(Errc::no_zero_found, "column entries have no sign change");
    double best = -1, bx = 0, by = 0;
    for (double zx : zeros_c)
        for (double zy : zeros_d) {
            if (detail::circle_dist(zx, zy) <= 2.5 * delta) continue;
            const double score = std::fabs(d_fn(zx)) * std::fabs(c_fn(zy));
            if (score > best) {
                best = score;
                bx = zx;
                by = zy;
            }
        }
    if (best < 0)
        throw Error(Errc::zeros_coincide, "every zero pair sits inside the bump overlap");

    // chi(u) = (315/256)(1 - u^2)^4 on [-1, 1], mass one
    auto chi = [](double u) {
        if (std::fabs(u) >= 1.0) return 0.0;
        const double w2 = 1.0 - u * u;
        return 315.0 / 256.0 * w2 * w2 * w2 * w2;
    };
    const double x = bx, y = by;
    auto w_fn = [chi, x, y, delta](double t) {
        double acc = 0;
        for (int img = -1; img <= 1; ++img) {
            const double tt = t + img;
            acc += chi((x - tt) / delta) / delta;
            acc -= chi((y - tt) / delta) / delta;
        }
        return acc;
    };
    DestabilizerResult out;
    out.x = x;
    out.y = y;
    out.w = w_fn;
    for (int j = 0; j < quad_n; ++j) {
        const double t = static_cast<double>(j) / quad_n;
        const double wv = w_fn(t);
        if (wv == 0.0) continue;
        const double cv = c_fn(t), dv = d_fn(t);
        out.lambda += wv * cv * dv / quad_n;
        out.mu += wv * dv * dv / quad_n;
        out.nu += wv * cv * cv / quad_n;
    }
    out.margin = out.lambda * out.lambda - out.mu * out.nu;
    return out;
}

}  // namespace qpsl2
