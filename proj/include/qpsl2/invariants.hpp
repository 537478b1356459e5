#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qpsl2/cocycle.hpp"
#include "qpsl2/config.hpp"
#include "qpsl2/errors.hpp"

// Birkhoff-average invariants: the fibered rotation number, the Lyapunov
// exponent with per-step renormalization, and Oseledec directions.

namespace qpsl2 {

struct RotationNumberResult {
    double value = 0;      // in [0,1), turns
    long long iterations = 0;
    double residual = 0;   // gap between the last two dyadic-window averages
};

namespace detail {

// Orbit average of the lifted displacement. The displacement function is
// evaluated through `lift_fn(theta, x) -> continuous branch value`.
template <class LiftFn>
RotationNumberResult rotation_birkhoff(double alpha, const LiftFn& lift_fn, long long n,
                                       double theta0, double x0) {
    double x = x0;
    double theta = theta0;
    double sum = 0, sum_half = 0, sum_quarter = 0;
    const long long n_half = n / 2, n_quarter = n / 4;
    for (long long k = 0; k < n; ++k) {
        const double d = lift_fn(theta, x);
        sum += d;
        if (k >= n_half) sum_half += d;
        else if (k >= n_quarter) sum_quarter += d;
        x += d;
        x -= std::floor(x);
        theta += alpha;
        theta -= std::floor(theta);
    }
    RotationNumberResult out;
    out.iterations = n;
    const double w1 = sum_half / static_cast<double>(n - n_half);
    const double w2 = sum_quarter / static_cast<double>(n_half - n_quarter);
    out.residual = std::fabs(w1 - w2);
    out.value = sum / static_cast<double>(n);
    out.value -= std::floor(out.value);
    return out;
}

}  // namespace detail

// Fibered rotation number of a degree-zero cocycle, computed as the Birkhoff
// mean of a continuous lift of the projective displacement. Reported mod 1.
// Period-2 maps are handled through rho_f(alpha, A(.)) = rho_f(alpha/2, A(2.)).
inline RotationNumberResult fibered_rotation_number(const QpCocycle& c, long long n = 100000,
                                                    double theta0 = 0.0, double x0 = 0.0) {
    if (n < 1000) throw Error(Errc::config_invalid, "rotation number needs n >= 1e3");
    if (degree(c.map) != 0)
        throw Error(Errc::nonzero_degree, "rotation number defined for degree-0 maps");

    const double period = static_cast<double>(c.map.period());
    const double alpha_eff = c.alpha / period;
    auto map_eval = [&](double t) { return c.map.eval(period * t); };

    // Fast path: one global branch cut when the displacements leave a gap on
    // the circle; otherwise fall back to a tabulated 2-d lift.
    try {
        std::vector<double> samples;
        const int nt = 256, nx = 64;
        samples.reserve(static_cast<std::size_t>(nt) * nx);
        for (int i = 0; i < nt; ++i) {
            const Mat2R g = map_eval(static_cast<double>(i) / nt);
            for (int j = 0; j < nx; ++j)
                samples.push_back(direction_displacement(g, static_cast<double>(j) / nx));
        }
        const Lift lift{displacement_branch_cut(samples)};
        auto lift_fn = [&](double t, double x) { return lift.displacement(map_eval(t), x); };
        return detail::rotation_birkhoff(alpha_eff, lift_fn, n, theta0 / period, x0);
    } catch (const Error& e) {
        if (e.code() != Errc::grid_too_coarse) throw;
    }
    const LiftTable table(map_eval, 0.0, 1.0, 2048, 256);
    auto lift_fn = [&](double t, double x) { return table.eval(t, x); };
    return detail::rotation_birkhoff(alpha_eff, lift_fn, n, theta0 / period, x0);
}

struct LyapunovResult {
    double value = 0;   // mean over theta samples, clamped at zero
    double median = 0;
    std::vector<double> per_sample;
    long long n = 0;
    double residual = 0;  // |forward - backward| estimate gap
};

namespace detail {

inline double lyapunov_orbit(const QpCocycle& c, double theta, long long n, bool forward) {
    // generic start: never exactly a singular axis of a constant cocycle
    double ux = 0.8, uy = 0.6;
    double acc = 0;
    double t = theta;
    for (long long k = 0; k < n; ++k) {
        Mat2R m;
        if (forward) {
            m = c.map.eval(t);
            t += c.alpha;
        } else {
            t -= c.alpha;
            m = c.map.eval(t).inverse();
        }
        t -= std::floor(t / c.map.period()) * c.map.period();
        const double wx = m.a * ux + m.b * uy;
        const double wy = m.c * ux + m.d * uy;
        const double nr = std::hypot(wx, wy);
        acc += std::log(nr);
        ux = wx / nr;
        uy = wy / nr;
    }
    return acc / static_cast<double>(n);
}

}  // namespace detail

// Lyapunov exponent by unit-vector renormalization, averaged over
// equidistributed theta samples; forward and backward runs cross-check.
inline LyapunovResult lyapunov_exponent(const QpCocycle& c, long long n = 100000,
                                        int samples = scheme().lyapunov_samples) {
    if (n < 1000) throw Error(Errc::config_invalid, "lyapunov needs n >= 1e3");
    LyapunovResult out;
    out.n = n;
    out.per_sample.resize(static_cast<std::size_t>(samples));
    double fwd = 0, bwd = 0;
    for (int s = 0; s < samples; ++s) {
        const double theta = static_cast<double>(s) / samples * c.map.period();
        const double lf = detail::lyapunov_orbit(c, theta, n, true);
        const double lb = detail::lyapunov_orbit(c, theta, n, false);
        out.per_sample[static_cast<std::size_t>(s)] = lf;
        fwd += lf;
        bwd += lb;
    }
    fwd /= samples;
    bwd /= samples;
    out.residual = std::fabs(fwd - bwd);
    out.value = std::max(0.0, fwd);
    std::vector<double> sorted = out.per_sample;
    std::nth_element(sorted.begin(), sorted.begin() + samples / 2, sorted.end());
    out.median = sorted[static_cast<std::size_t>(samples) / 2];
    return out;
}

struct OseledecResult {
    double stable_angle = 0;    // direction angles in radians, mod pi
    double unstable_angle = 0;
    double defect = 0;          // equivariance defect of the stable direction
};

namespace detail {

// Right-singular directions of M: returns angle of the singular vector for
// the largest (want_max) or smallest singular value.
inline double singular_direction(const Mat2R& m, bool want_max) {
    // eigenvector of M^T M
    const Mat2R s = m.transpose() * m;
    const double tr = s.trace(), dt = s.det();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - dt));
    const double lam = want_max ? tr / 2.0 + disc : tr / 2.0 - disc;
    // (s - lam I) v = 0
    double vx = s.b, vy = lam - s.a;
    if (std::hypot(vx, vy) < 1e-14 * std::fabs(lam)) {
        vx = lam - s.d;
        vy = s.c;
    }
    if (std::hypot(vx, vy) == 0.0) return 0.0;
    return std::atan2(vy, vx);
}

inline double projective_distance(double a1, double a2) {
    double d = std::fmod(a1 - a2, kPi);
    if (d > kPi / 2) d -= kPi;
    if (d < -kPi / 2) d += kPi;
    return std::fabs(d);
}

// Product with scale tracking to avoid overflow.
inline Mat2R scaled_product(const QpCocycle& c, long long n, double theta) {
    Mat2R out = Mat2R::identity();
    for (long long k = 0; k < n; ++k) {
        out = c.map.eval(theta + static_cast<double>(k) * c.alpha) * out;
        const double nr = out.norm();
        if (nr > 1e100) out = out * (1.0 / nr);
    }
    return out;
}

}  // namespace detail

// Stable/unstable splitting at theta from singular directions of long
// products: unstable pulled forward from the past, stable from the future.
inline OseledecResult oseledec_directions(const QpCocycle& c, double theta, long long n = 1000) {
    const Mat2R past = detail::scaled_product(c, n, theta - static_cast<double>(n) * c.alpha);
    const Mat2R future = detail::scaled_product(c, n, theta);
    // sigma_max/sigma_min = norm^2/|det|, insensitive to the overflow rescale
    const double ratio_f = future.norm() * future.norm() / std::fabs(future.det());
    if (ratio_f < 10.0)
        throw Error(Errc::no_hyperbolicity, "singular value ratio below 10");
    OseledecResult out;
    // unstable: image direction of the dominant right-singular vector of the past product
    const double a_in = detail::singular_direction(past, true);
    const double ux = std::cos(a_in), uy = std::sin(a_in);
    out.unstable_angle =
        std::atan2(past.c * ux + past.d * uy, past.a * ux + past.b * uy);
    out.stable_angle = detail::singular_direction(future, false);

    // equivariance defect: A(theta) E^s(theta) vs E^s(theta + alpha)
    const Mat2R fut_next = detail::scaled_product(c, n, theta + c.alpha);
    const double stable_next = detail::singular_direction(fut_next, false);
    const Mat2R a = c.map.eval(theta);
    const double sx = std::cos(out.stable_angle), sy = std::sin(out.stable_angle);
    const double image = std::atan2(a.c * sx + a.d * sy, a.a * sx + a.b * sy);
    out.defect = detail::projective_distance(image, stable_next);
    return out;
}

}  // namespace qpsl2
