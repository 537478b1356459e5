#pragma once

#include <cmath>
#include <complex>

#include "qpsl2/config.hpp"
#include "qpsl2/errors.hpp"

namespace qpsl2 {

using cplx = std::complex<double>;

struct Mat2R {
    double a = 1, b = 0, c = 0, d = 1;  // row-major [[a,b],[c,d]]

    static Mat2R identity() { return {}; }
    static Mat2R rotation(double angle) {
        const double co = std::cos(angle), si = std::sin(angle);
        return {co, -si, si, co};
    }
    static Mat2R diagonal(double p, double q) { return {p, 0, 0, q}; }

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    Mat2R transpose() const { return {a, c, b, d}; }

    Mat2R operator*(const Mat2R& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2R operator+(const Mat2R& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2R operator-(const Mat2R& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Mat2R operator*(double s) const { return {a * s, b * s, c * s, d * s}; }

    Mat2R inverse() const {
        const double dt = det();
        return {d / dt, -b / dt, -c / dt, a / dt};
    }

    double frob() const { return std::sqrt(a * a + b * b + c * c + d * d); }

    // Spectral norm via the closed form for 2x2: the larger singular value.
    double norm() const {
        const double f2 = a * a + b * b + c * c + d * d;
        const double dt = det();
        const double disc = std::max(0.0, f2 * f2 - 4.0 * dt * dt);
        return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
    }

    bool unimodular(double eps = tol().unimodular) const { return std::fabs(det() - 1.0) <= eps; }

    // Rescale a nearly-unimodular matrix with positive determinant back to det 1.
    Mat2R renormalized() const {
        const double dt = det();
        if (dt <= 0) throw Error(Errc::not_unimodular, "determinant not positive");
        const double s = 1.0 / std::sqrt(dt);
        return {a * s, b * s, c * s, d * s};
    }
};

inline Mat2R operator*(double s, const Mat2R& m) { return m * s; }

struct Mat2C {
    cplx a = 1, b = 0, c = 0, d = 1;

    static Mat2C identity() { return {}; }
    static Mat2C diagonal(cplx p, cplx q) { return {p, 0, 0, q}; }
    static Mat2C from_real(const Mat2R& m) { return {m.a, m.b, m.c, m.d}; }

    cplx det() const { return a * d - b * c; }
    cplx trace() const { return a + d; }

    Mat2C operator*(const Mat2C& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2C operator+(const Mat2C& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2C operator-(const Mat2C& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Mat2C operator*(cplx s) const { return {a * s, b * s, c * s, d * s}; }

    Mat2C inverse() const {
        const cplx dt = det();
        return {d / dt, -b / dt, -c / dt, a / dt};
    }

    Mat2C adjoint() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }

    double frob() const {
        return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
    }

    double norm() const {
        const double f2 = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
        const double dt2 = std::norm(det());
        const double disc = std::max(0.0, f2 * f2 - 4.0 * dt2);
        return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
    }

    double max_imag() const {
        return std::max(std::max(std::fabs(a.imag()), std::fabs(b.imag())),
                        std::max(std::fabs(c.imag()), std::fabs(d.imag())));
    }

    Mat2R real_part() const { return {a.real(), b.real(), c.real(), d.real()}; }
};

inline Mat2C operator*(cplx s, const Mat2C& m) { return m * s; }

// cos(sqrt(w)) and sin(sqrt(w))/sqrt(w), entire in w; series near zero.
inline cplx cos_sqrt(cplx w) {
    if (std::abs(w) < 1e-8) return 1.0 - w / 2.0 + w * w / 24.0;
    const cplx s = std::sqrt(w);
    return std::cos(s);
}
inline cplx sinc_sqrt(cplx w) {
    if (std::abs(w) < 1e-8) return 1.0 - w / 6.0 + w * w / 120.0;
    const cplx s = std::sqrt(w);
    return std::sin(s) / s;
}

// exp of a traceless 2x2: M^2 = -det(M) Id, so exp M = cos(sqrt(det)) Id + sinc(sqrt(det)) M.
inline Mat2C exp_traceless(const Mat2C& m) {
    const cplx w = m.det();
    const cplx co = cos_sqrt(w), si = sinc_sqrt(w);
    return {co + si * m.a, si * m.b, si * m.c, co + si * m.d};
}

inline Mat2R exp_traceless(const Mat2R& m) {
    const double w = m.det();
    double co, si;
    if (w > 1e-8) {
        const double s = std::sqrt(w);
        co = std::cos(s);
        si = std::sin(s) / s;
    } else if (w < -1e-8) {
        const double s = std::sqrt(-w);
        co = std::cosh(s);
        si = std::sinh(s) / s;
    } else {
        co = 1.0 - w / 2.0 + w * w / 24.0;
        si = 1.0 - w / 6.0 + w * w / 120.0;
    }
    return {co + si * m.a, si * m.b, si * m.c, co + si * m.d};
}

// Real logarithm of a unimodular matrix, defined when trace > -2.
// Elliptic: log = (beta/sin beta)(M - cos(beta) Id); hyperbolic analogue with cosh.
inline Mat2R log_unimodular(const Mat2R& m) {
    if (!m.unimodular(1e-9)) throw Error(Errc::not_unimodular, "log of non-unimodular matrix");
    const double h = 0.5 * m.trace();
    if (h <= -1.0 + 1e-12) throw Error(Errc::not_elliptic, "no real log: trace <= -2");
    double scale;
    if (h < 1.0 - 1e-10) {
        const double beta = std::acos(std::min(1.0, std::max(-1.0, h)));
        scale = beta / std::sin(beta);
    } else if (h > 1.0 + 1e-10) {
        const double t = std::acosh(h);
        scale = t / std::sinh(t);
    } else {
        scale = 1.0;  // parabolic or identity: log = M - Id to first order
    }
    Mat2R out = (m - Mat2R::identity() * h) * scale;
    // symmetrize the zero trace
    const double tr = 0.5 * out.trace();
    out.a -= tr;
    out.d -= tr;
    return out;
}

// Polar factorization A = R_phi * S with S symmetric positive definite.
// phi is continuous in A, which is what the degree computation relies on.
inline double polar_angle(const Mat2R& m) {
    // R = A S^{-1}; for 2x2 the rotation part is atan2(c - b, a + d).
    return std::atan2(m.c - m.b, m.a + m.d);
}

inline Mat2R sqrt_spd(const Mat2R& m) {
    // sqrt of symmetric positive definite 2x2
    const double dt = std::sqrt(std::max(0.0, m.det()));
    const double s = std::sqrt(std::max(1e-300, m.trace() + 2.0 * dt));
    return (m + Mat2R::identity() * dt) * (1.0 / s);
}

inline Mat2R polar_rotation(const Mat2R& m) {
    const Mat2R s = sqrt_spd(m.transpose() * m);
    return m * s.inverse();
}

}  // namespace qpsl2
