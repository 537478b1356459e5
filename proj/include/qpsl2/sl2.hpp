#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>

#include "qpsl2/config.hpp"
#include "qpsl2/errors.hpp"
#include "qpsl2/mat2.hpp"

// Minkowski geometry of sl(2,R) and its su(1,1) twin: the quadratic form
// q{x,y,z} = -x^2 - y^2 + z^2, the future cone E+ where N = sqrt(q) is an
// Ad-invariant norm, commutator bounds on the cone, and Moebius actions.
//
// Coordinates: {x,y,z} is realized as [[x, y-z],[y+z, -x]], so that the
// counterclockwise rotation generator d/dt R(t)|_0 is {0,0,1} and lies in E+.

namespace qpsl2 {

struct AlgebraVector {
    double x = 0, y = 0, z = 0;

    Mat2R matrix() const { return {x, y - z, y + z, -x}; }

    AlgebraVector operator+(const AlgebraVector& o) const { return {x + o.x, y + o.y, z + o.z}; }
    AlgebraVector operator-(const AlgebraVector& o) const { return {x - o.x, y - o.y, z - o.z}; }
    AlgebraVector operator*(double s) const { return {x * s, y * s, z * s}; }
    AlgebraVector operator-() const { return {-x, -y, -z}; }

    double euclid() const { return std::sqrt(x * x + y * y + z * z); }
};

inline AlgebraVector operator*(double s, const AlgebraVector& v) { return v * s; }

inline AlgebraVector algebra_from_matrix(const Mat2R& m) {
    // traceless projection: x from the symmetric diagonal part
    const double x = 0.5 * (m.a - m.d);
    const double y = 0.5 * (m.b + m.c);
    const double z = 0.5 * (m.c - m.b);
    return {x, y, z};
}

inline double quad_form(const AlgebraVector& v) { return -v.x * v.x - v.y * v.y + v.z * v.z; }

inline double kappa(const AlgebraVector& v, const AlgebraVector& w) {
    return -v.x * w.x - v.y * w.y + v.z * w.z;
}

inline bool in_future_cone(const AlgebraVector& v, double eps = tol().cone_slack) {
    return quad_form(v) >= -eps && v.z >= -eps;
}

// N(v) = sqrt(q(v)), defined on E+; Ad-invariant there.
inline double minkowski_norm(const AlgebraVector& v) {
    const double q = quad_form(v);
    if (q < -tol().cone_slack || v.z < -tol().cone_slack)
        throw Error(Errc::cone_violation, "N(v) requested outside the future cone");
    return std::sqrt(std::max(0.0, q));
}

// z >= (1+delta) sqrt(x^2+y^2), up to the configured slack.
inline bool cone_membership(const AlgebraVector& v, double delta) {
    return v.z >= (1.0 + delta) * std::hypot(v.x, v.y) - tol().cone_slack;
}

// Opening margin z/sqrt(x^2+y^2) - 1 (infinite on the axis).
inline double cone_margin(const AlgebraVector& v) {
    const double r = std::hypot(v.x, v.y);
    if (r == 0.0) return v.z > 0 ? std::numeric_limits<double>::infinity() : -1.0;
    return v.z / r - 1.0;
}

inline AlgebraVector ad_action(const Mat2R& g, const AlgebraVector& v) {
    if (!g.unimodular(1e-9)) throw Error(Errc::not_unimodular, "Ad by non-unimodular matrix");
    return algebra_from_matrix(g * v.matrix() * g.inverse());
}

inline AlgebraVector bracket(const AlgebraVector& v, const AlgebraVector& w) {
    const Mat2R a = v.matrix(), b = w.matrix();
    return algebra_from_matrix(a * b - b * a);
}

// Opening margin delta of a strict cone, with the derived margin delta' that
// survives Ad by matrices of norm at most M (measured, not assumed).
struct ConeParams {
    double delta = 0;
    double delta_prime = 0;
};

struct CommutatorDefect {
    double bracket_norm = 0;  // Euclidean norm of [v,w]
    double bound = 0;         // 2 sqrt(kappa^2 - q(v)q(w)) |v|^2 / q(v)
};

// The cone commutator estimate; also enforces the anti-Cauchy-Schwarz
// inequality kappa(v,w) >= N(v)N(w) which holds on E+.
inline CommutatorDefect commutator_defect(const AlgebraVector& v, const AlgebraVector& w) {
    const double qv = quad_form(v), qw = quad_form(w);
    if (!in_future_cone(v) || !in_future_cone(w))
        throw Error(Errc::cone_violation, "commutator bound needs both vectors in E+");
    const double vv = v.x * v.x + v.y * v.y + v.z * v.z;
    if (qv < scheme().cone_reject * vv)
        throw Error(Errc::cone_violation, "first argument too close to the light cone");
    const double k = kappa(v, w);
    if (k < std::sqrt(std::max(0.0, qv)) * std::sqrt(std::max(0.0, qw)) - tol().cone_slack)
        throw Error(Errc::cone_violation, "anti-Cauchy-Schwarz violated: inputs not in E+");
    CommutatorDefect out;
    out.bracket_norm = bracket(v, w).euclid();
    out.bound = 2.0 * std::sqrt(std::max(0.0, k * k - qv * qw)) * vv / qv;
    return out;
}

// ---------------------------------------------------------------------------
// su(1,1) picture.  {t, nu} is [[it, nu],[conj(nu), -it]]; q = t^2 - |nu|^2.
// The isomorphism A -> P A P^{-1} with P = [[-1,-i],[-1,i]] sends {x,y,z} to
// {t = z, nu = x + i y}, so both future cones line up.

struct Su11Vector {
    double t = 0;
    cplx nu = 0;

    Mat2C matrix() const { return {cplx(0, t), nu, std::conj(nu), cplx(0, -t)}; }
    double q() const { return t * t - std::norm(nu); }

    Su11Vector operator+(const Su11Vector& o) const { return {t + o.t, nu + o.nu}; }
    Su11Vector operator-(const Su11Vector& o) const { return {t - o.t, nu - o.nu}; }
    Su11Vector operator*(double s) const { return {t * s, nu * s}; }
    double sup_abs() const { return std::max(std::fabs(t), std::abs(nu)); }
};

inline Su11Vector su11_from_sl2(const AlgebraVector& v) { return {v.z, cplx(v.x, v.y)}; }
inline AlgebraVector sl2_from_su11(const Su11Vector& u) { return {u.nu.real(), u.nu.imag(), u.t}; }

inline Mat2C conversion_matrix() { return {-1.0, cplx(0, -1), -1.0, cplx(0, 1)}; }
inline Mat2C conversion_matrix_inv() {
    return {-0.5, -0.5, cplx(0, 0.5), cplx(0, -0.5)};
}

inline Mat2C sl2_to_su11(const Mat2R& a) {
    if (!a.unimodular(1e-9)) throw Error(Errc::not_unimodular, "conversion needs det 1");
    return conversion_matrix() * Mat2C::from_real(a) * conversion_matrix_inv();
}

inline Mat2R su11_to_sl2(const Mat2C& u) {
    const Mat2C b = conversion_matrix_inv() * u * conversion_matrix();
    return b.real_part();
}

inline Su11Vector su11_algebra_from_matrix(const Mat2C& m) {
    const double t = 0.5 * (m.a.imag() - m.d.imag());
    const cplx nu = 0.5 * (m.b + std::conj(m.c));
    return {t, nu};
}

// ---------------------------------------------------------------------------
// Moebius action m -> (am+b)/(cm+d).

struct MoebiusResult {
    cplx value = 0;
    bool at_infinity = false;
};

inline MoebiusResult moebius_projective(const Mat2C& g, cplx m) {
    const cplx num = g.a * m + g.b;
    const cplx den = g.c * m + g.d;
    if (std::abs(den) < tol().pole) return {cplx(0, 0), true};
    return {num / den, false};
}

inline cplx moebius(const Mat2C& g, cplx m) {
    const MoebiusResult r = moebius_projective(g, m);
    if (r.at_infinity) throw Error(Errc::pole, "Moebius image at infinity");
    return r.value;
}

// Moebius image of the point at infinity (a/c projectively).
inline MoebiusResult moebius_of_infinity(const Mat2C& g) {
    if (std::abs(g.c) < tol().pole) return {cplx(0, 0), true};
    return {g.a / g.c, false};
}

// C_z = [[e(z), -f(z)],[f(z), e(z)]] with e = (z + 1/z)/2, f = (z - 1/z)/(2i);
// for z = e^{i beta} this is the real rotation by beta.
inline Mat2C rotation_c(cplx z) {
    const cplx zi = 1.0 / z;
    const cplx e = 0.5 * (z + zi);
    const cplx f = (z - zi) / cplx(0, 2);
    return {e, -f, f, e};
}

inline Mat2C diagonal_d(cplx z) { return Mat2C::diagonal(z, 1.0 / z); }

}  // namespace qpsl2
