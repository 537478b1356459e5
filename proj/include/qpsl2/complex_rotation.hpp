#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "qpsl2/cocycle.hpp"
#include "qpsl2/config.hpp"
#include "qpsl2/errors.hpp"
#include "qpsl2/invariants.hpp"
#include "qpsl2/sl2.hpp"

// Complexified cocycles A_z = A C_z, their invariant disk sections obtained by
// Picard iteration, the complex rotation number zeta(z) whose real part is the
// Lyapunov exponent (nats) and whose imaginary part is the fibered rotation
// number (turns), boundary scans, and the I - 4 Im J boundary identity.

namespace qpsl2 {

struct ComplexCocycle {
    double alpha = 0;
    Sl2Map map;
    cplx z = 1.0;

    Mat2C eval(double theta) const {
        return Mat2C::from_real(map.eval(theta)) * rotation_c(z);
    }
    // su(1,1) picture U(theta) D_z
    Mat2C eval_su11(double theta) const { return sl2_to_su11(map.eval(theta)) * diagonal_d(z); }
};

inline ComplexCocycle complexify(const QpCocycle& c, cplx z) {
    if (c.map.period() != 1)
        throw Error(Errc::config_invalid, "complexification works on period-1 maps");
    const double az = std::abs(z);
    if (!(az > 0.0) || az > 1.0 + tol().unimodular)
        throw Error(Errc::config_invalid, "z must satisfy 0 < |z| <= 1");
    return {c.alpha, c.map, z};
}

struct DiskSection {
    std::vector<cplx> tau;  // grid values; reciprocal coordinates when plus-side
    int sweeps = 0;
    double residual = 0;
    bool plus_side = false;  // true: values are 1/tau_+ (inside the disk again)

    int size() const { return static_cast<int>(tau.size()); }

    cplx interp(double theta) const {
        const int n = size();
        double u = (theta - std::floor(theta)) * n;
        int j = static_cast<int>(u);
        if (j >= n) j = n - 1;
        const double s = u - j;
        return (1.0 - s) * tau[static_cast<std::size_t>(j)] +
               s * tau[static_cast<std::size_t>((j + 1) % n)];
    }
};

namespace detail {

// Moebius map flipped to reciprocal coordinates: if s = 1/m, the image of
// m under M reads 1/(flip(M).s) with flip swapping both diagonals.
inline Mat2C flip(const Mat2C& m) { return {m.d, m.c, m.b, m.a}; }

}  // namespace detail

// Fixed section of the transfer operator by Jacobi sweeps.
//  minus side: tau(theta) = U_z(theta - alpha) . tau(theta - alpha)   (in D)
//  plus side:  sigma = 1/tau_+ with sigma(theta) = flip(U_z(theta)^{-1}) . sigma(theta + alpha)
inline DiskSection invariant_section(const ComplexCocycle& c, int n = scheme().grid_default,
                                     double tolerance = 1e-10, bool plus_side = false,
                                     int max_sweeps = 10000, cplx init = cplx(0, 0)) {
    if (std::abs(c.z) >= 1.0)
        throw Error(Errc::no_contraction, "Picard iteration needs |z| < 1; extrapolate radially");
    DiskSection sec;
    sec.plus_side = plus_side;
    sec.tau.assign(static_cast<std::size_t>(n), init);

    std::vector<Mat2C> transfer(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double theta = static_cast<double>(j) / n;
        transfer[j] = plus_side ? detail::flip(c.eval_su11(theta).inverse())
                                : c.eval_su11(theta - c.alpha);
    }
    const double shift = plus_side ? c.alpha : -c.alpha;

    std::vector<cplx> next(sec.tau.size());
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double disp = 0;
        for (int j = 0; j < n; ++j) {
            const double theta = static_cast<double>(j) / n + shift;
            const cplx img = moebius(transfer[j], sec.interp(theta));
            disp = std::max(disp, std::abs(img - sec.tau[static_cast<std::size_t>(j)]));
            next[static_cast<std::size_t>(j)] = img;
        }
        sec.tau.swap(next);
        sec.sweeps = sweep;
        sec.residual = disp;
        if (disp <= tolerance) return sec;
    }
    throw Error(Errc::no_contraction, "section sweep stalled above tolerance");
}

// Grid refinement until the transfer-equation defect of the section meets the
// target (the shifted lookups interpolate linearly, so the defect scales like
// the squared grid step).
inline DiskSection invariant_section_auto(const ComplexCocycle& c, double equi_target,
                                          bool plus_side = false, int n0 = 4096,
                                          int n_cap = 1 << 18);

// sup over nodes of the transfer-equation defect of a minus-side section
inline double section_residual(const ComplexCocycle& c, const DiskSection& sec) {
    double worst = 0;
    const int n = sec.size();
    for (int j = 0; j < n; ++j) {
        const double theta = static_cast<double>(j) / n;
        const cplx img = moebius(c.eval_su11(theta), sec.tau[static_cast<std::size_t>(j)]);
        worst = std::max(worst, std::abs(img - sec.interp(theta + c.alpha)));
    }
    return worst;
}

inline DiskSection invariant_section_auto(const ComplexCocycle& c, double equi_target,
                                          bool plus_side, int n0, int n_cap) {
    for (int n = n0; n <= n_cap; n <<= 1) {
        const DiskSection sec = invariant_section(c, n, 0.1 * equi_target, plus_side);
        if (plus_side || section_residual(c, sec) <= equi_target) return sec;
    }
    throw Error(Errc::grid_too_coarse, "section residual target unreachable at the grid cap");
}

struct ZetaResult {
    cplx zeta;            // Re in nats, Im in turns
    double re_check = 0;  // independent Lyapunov estimate of the complexified cocycle
    double im_check = 0;  // independent geometric rotation number
    double max_branch_jump = 0;
};

namespace detail {

// rho(z, theta, tau) = second component of U_z(theta) (tau, 1)^T
inline cplx rho_of(const Mat2C& u_z, cplx tau) { return u_z.c * tau + u_z.d; }

inline double lyapunov_complex(const ComplexCocycle& c, long long n, int samples) {
    double acc_total = 0;
    for (int s = 0; s < samples; ++s) {
        double theta = static_cast<double>(s) / samples;
        cplx vx = 0.8, vy = 0.6;
        double acc = 0;
        for (long long k = 0; k < n; ++k) {
            const Mat2C m = c.eval(theta);
            const cplx wx = m.a * vx + m.b * vy;
            const cplx wy = m.c * vx + m.d * vy;
            const double nr = std::sqrt(std::norm(wx) + std::norm(wy));
            acc += std::log(nr);
            vx = wx / nr;
            vy = wy / nr;
            theta += c.alpha;
            theta -= std::floor(theta);
        }
        acc_total += acc / static_cast<double>(n);
    }
    return acc_total / samples;
}

// Birkhoff average of the phase lift along the skew orbit on X x D. The
// projective scaling rho turns clockwise when directions turn counterclockwise
// (det = 1 splits the multiplier as 1/rho^2), so the fibered displacement per
// step is -arg(rho)/2pi.
inline double geometric_rotation_number(const ComplexCocycle& c, const DiskSection& sec,
                                        long long n) {
    // global branch cut from the phase samples along the section
    std::vector<double> samples;
    const int grid = sec.size();
    samples.reserve(static_cast<std::size_t>(grid));
    for (int j = 0; j < grid; ++j) {
        const double theta = static_cast<double>(j) / grid;
        const cplx rho = rho_of(c.eval_su11(theta), sec.tau[static_cast<std::size_t>(j)]);
        double ph = -std::arg(rho) / kTwoPi;
        ph -= std::floor(ph);
        samples.push_back(ph);
    }
    const double cut = displacement_branch_cut(samples);
    double theta = 0.0;
    cplx tau = sec.tau[0];
    double acc = 0;
    for (long long k = 0; k < n; ++k) {
        const Mat2C u = c.eval_su11(theta);
        const cplx rho = rho_of(u, tau);
        double ph = -std::arg(rho) / kTwoPi - cut;
        ph -= std::floor(ph);
        acc += ph + cut;
        tau = moebius(u, tau);
        theta += c.alpha;
        theta -= std::floor(theta);
    }
    double v = acc / static_cast<double>(n);
    v -= std::floor(v);
    return v;
}

}  // namespace detail

// zeta(z) = int [log|rho| - i arg rho] over the minus section, the phase
// unwrapped continuously in theta from the principal branch at theta = 0.
// Re zeta is the Lyapunov exponent (nats); Im zeta, reported in turns, is the
// counterclockwise fibered rotation number (the raw arg rho carries the
// opposite orientation, see geometric_rotation_number). The holomorphic
// object in z is conj(zeta).
inline ZetaResult zeta(const ComplexCocycle& c, const DiskSection& sec,
                       long long check_n = 100000, int check_samples = 8) {
    if (sec.residual > 1e-8)
        throw Error(Errc::config_invalid, "section residual too large for zeta");
    const int n = sec.size();
    ZetaResult out;
    double re = 0, im = 0;
    double prev_arg = 0;
    for (int j = 0; j < n; ++j) {
        const double theta = static_cast<double>(j) / n;
        const cplx rho = detail::rho_of(c.eval_su11(theta), sec.tau[static_cast<std::size_t>(j)]);
        re += std::log(std::abs(rho));
        double a = -std::arg(rho);
        if (j == 0) {
            prev_arg = a;
        } else {
            double d = a - prev_arg;
            while (d > kPi) d -= kTwoPi;
            while (d < -kPi) d += kTwoPi;
            out.max_branch_jump = std::max(out.max_branch_jump, std::fabs(d) / kTwoPi);
            // wrapped jumps near a half turn leave the branch ambiguous
            if (std::fabs(d) > 0.9 * kPi)
                throw Error(Errc::branch_fault, "phase jump near a half turn; refine the grid");
            a = prev_arg + d;
            prev_arg = a;
        }
        im += a;
    }
    out.zeta = cplx(re / n, im / n / kTwoPi);
    out.re_check = detail::lyapunov_complex(c, check_n / check_samples, check_samples);
    out.im_check = detail::geometric_rotation_number(c, sec, check_n);
    return out;
}

struct BoundaryRow {
    double beta = 0;       // angle of z on the unit circle, radians
    double r = 0;          // 0 marks the extrapolated boundary row
    double re = 0, im = 0;
    double lyap_direct = 0, rot_direct = 0;
    bool zero_exponent_candidate = false;
};

// Radial scan toward the boundary circle: zeta at r e^{i beta} for each r,
// a Richardson row extrapolated to r -> 1, and direct Lyapunov / rotation
// estimates of the real cocycle (alpha, A R_beta).
inline std::vector<BoundaryRow> boundary_scan(const QpCocycle& c,
                                              const std::vector<double>& betas,
                                              const std::vector<double>& radii,
                                              int n = scheme().grid_default,
                                              double tolerance = 1e-10,
                                              long long direct_n = 100000) {
    if (radii.size() < 2)
        throw Error(Errc::config_invalid, "boundary scan needs at least two radii");
    std::vector<BoundaryRow> rows;
    for (double beta : betas) {
        std::vector<cplx> vals;
        for (double r : radii) {
            const ComplexCocycle cc = complexify(c, std::polar(r, beta));
            const DiskSection sec = invariant_section(cc, n, tolerance);
            const ZetaResult zr = zeta(cc, sec, 2000, 2);
            BoundaryRow row;
            row.beta = beta;
            row.r = r;
            row.re = zr.zeta.real();
            row.im = zr.zeta.imag();
            rows.push_back(row);
            vals.push_back(zr.zeta);
        }
        // polynomial extrapolation in s = 1 - r to s = 0 (Neville)
        std::vector<cplx> w = vals;
        std::vector<double> s(radii.size());
        for (std::size_t i = 0; i < radii.size(); ++i) s[i] = 1.0 - radii[i];
        for (std::size_t m = 1; m < w.size(); ++m)
            for (std::size_t i = 0; i + m < w.size(); ++i)
                w[i] = (w[i + 1] * s[i] - w[i] * s[i + m]) * (1.0 / (s[i] - s[i + m]));
        BoundaryRow lim;
        lim.beta = beta;
        lim.r = 0.0;
        lim.re = w[0].real();
        lim.im = w[0].imag();
        const QpCocycle rotated{c.alpha,
                                Sl2Map::product(c.map, Sl2Map::constant(Mat2R::rotation(beta)))};
        lim.lyap_direct = lyapunov_exponent(rotated, direct_n, 8).value;
        lim.rot_direct = degree(rotated.map) == 0
                             ? fibered_rotation_number(rotated, direct_n).value
                             : std::numeric_limits<double>::quiet_NaN();
        lim.zero_exponent_candidate = std::fabs(lim.re) <= 1e-3;
        rows.push_back(lim);
    }
    return rows;
}

struct IjResult {
    double i_value = 0;
    cplx j_value;
    double defect = 0;  // I - 4 Im J, nonnegative up to quadrature
};

// Half-plane sections m_+/- transported from the disk picture, then the
// boundary identity I - 4 Im J. Sections at conj(lambda) are the conjugates
// of the swapped pair, so lambda in either half plane is accepted.
inline IjResult ij_defect(const QpCocycle& c, cplx lambda, int n = scheme().grid_default,
                          double tolerance = 1e-10) {
    if (lambda.imag() == 0.0)
        throw Error(Errc::config_invalid, "ij_defect needs Im lambda != 0");
    const bool flipped = lambda.imag() < 0.0;
    const cplx lam = flipped ? std::conj(lambda) : lambda;
    const cplx z = (lam - cplx(0, 1)) / (cplx(0, 1) + lam);
    const ComplexCocycle cc = complexify(c, z);
    const DiskSection minus = invariant_section(cc, n, tolerance, false);
    const DiskSection plus = invariant_section(cc, n, tolerance, true);

    const Mat2C pinv = conversion_matrix_inv();
    double i_acc = 0;
    cplx j_acc = 0;
    for (int j = 0; j < n; ++j) {
        const cplx tau_m = minus.tau[static_cast<std::size_t>(j)];
        const cplx sigma_p = plus.tau[static_cast<std::size_t>(j)];
        const cplx m_m = moebius(pinv, tau_m);
        // tau_+ = 1/sigma in homogeneous coordinates (1 : sigma)
        const cplx num = pinv.a + pinv.b * sigma_p;
        const cplx den = pinv.c + pinv.d * sigma_p;
        if (std::abs(den) < tol().pole)
            throw Error(Errc::pole, "half-plane transport hit infinity");
        const cplx m_p = num / den;
        if (std::abs(m_p - m_m) < 1e-8)
            throw Error(Errc::section_collapse, "m_+ and m_- collapsed");
        i_acc += (1.0 + std::norm(m_p)) / m_p.imag() - (1.0 + std::norm(m_m)) / m_m.imag();
        j_acc += (1.0 + m_m * m_p) / (m_m - m_p);
    }
    IjResult out;
    out.i_value = i_acc / n;
    out.j_value = j_acc / static_cast<double>(n);
    out.defect = out.i_value - 4.0 * out.j_value.imag();
    return out;
}

// Energy-complexified Schroedinger cocycle [[V - lambda, 1], [-1, 0]].
struct ComplexSchrodinger {
    double alpha = 0;
    TrigPolyC potential;
    cplx lambda = 0;

    Mat2C eval(double theta) const {
        return {potential.eval(theta) - lambda, 1.0, -1.0, 0.0};
    }
};

inline ComplexSchrodinger schrodinger_complexify(double alpha, const TrigPolyC& v, cplx lambda) {
    return {alpha, v, lambda};
}

// The inversion conjugacy of Schroedinger blocks: T M T^{-1} = M^{-1} with
// T the antidiagonal reflection, valid for every [[w, 1], [-1, 0]].
inline double schrodinger_inversion_defect(const ComplexSchrodinger& s, double theta) {
    const Mat2C t{0, -1, -1, 0};
    const Mat2C m = s.eval(theta);
    return (t * m * t.inverse() - m.inverse()).frob();
}

}  // namespace qpsl2
