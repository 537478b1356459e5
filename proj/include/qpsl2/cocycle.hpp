#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qpsl2/config.hpp"
#include "qpsl2/errors.hpp"
#include "qpsl2/fft.hpp"
#include "qpsl2/sl2.hpp"
#include "qpsl2/sl2_map.hpp"

// Quasi-periodic cocycles (alpha, A) on T x SL(2,R): iteration, conjugation,
// topological degree, the logarithmic-derivative operator L, and the
// C0-boundedness probe.

namespace qpsl2 {

struct QpCocycle {
    double alpha = 0;
    Sl2Map map;
};

// A_n(theta) = A(theta+(n-1)a) ... A(theta);  A_{-n}(theta) = A(theta-na)^{-1} ... A(theta-a)^{-1}.
inline Mat2R fibered_product(const QpCocycle& c, long long n, double theta) {
    Mat2R out = Mat2R::identity();
    if (n >= 0) {
        for (long long k = 0; k < n; ++k)
            out = c.map.eval(theta + static_cast<double>(k) * c.alpha) * out;
    } else {
        for (long long k = 1; k <= -n; ++k)
            out = c.map.eval(theta - static_cast<double>(k) * c.alpha).inverse() * out;
    }
    return out;
}

// Winding number of the polar-rotation part along one period. Samples must
// turn by less than a quarter turn per step, otherwise the caller has to
// refine the grid.
inline int degree(const Sl2Map& m, int n = scheme().grid_default) {
    const double p = static_cast<double>(m.period());
    double prev = polar_angle(m.eval(0.0));
    double total = 0;
    for (int j = 1; j <= n; ++j) {
        const double ang = polar_angle(m.eval(p * static_cast<double>(j) / n));
        double d = ang - prev;
        while (d > kPi) d -= kTwoPi;
        while (d < -kPi) d += kTwoPi;
        if (std::fabs(d) > kPi / 2.0)
            throw Error(Errc::grid_too_coarse, "polar angle steps exceed a quarter turn");
        total += d;
        prev = ang;
    }
    const double w = total / kTwoPi;
    const double r = std::round(w);
    if (std::fabs(w - r) > 0.1)
        throw Error(Errc::grid_too_coarse, "winding number failed to lock onto an integer");
    return static_cast<int>(r);
}

// (alpha, B(.+alpha) A(.) B(.)^{-1})
inline QpCocycle conjugate(const Sl2Map& b, const QpCocycle& c) {
    const Sl2Map m =
        Sl2Map::product(Sl2Map::product(Sl2Map::shift(b, c.alpha), c.map), Sl2Map::inverse(b));
    return {c.alpha, m};
}

inline Sl2Map schrodinger_map(const TrigPolyC& potential, double energy_shift) {
    return Sl2Map::schrodinger(potential, energy_shift);
}

// L u = (du) u^{-1}, sampled spectrally on the grid; the result is traceless
// up to the spectral-differentiation error.
inline std::vector<AlgebraVector> l_operator(const Sl2Map& m, int n = scheme().grid_default) {
    if (n < scheme().grid_min_l_operator)
        throw Error(Errc::config_invalid, "l_operator needs grid resolution >= 256");
    const std::vector<Mat2R>& g = m.grid(n);
    std::vector<std::vector<cplx>> comp(4, std::vector<cplx>(static_cast<std::size_t>(n)));
    for (int j = 0; j < n; ++j) {
        comp[0][j] = g[j].a;
        comp[1][j] = g[j].b;
        comp[2][j] = g[j].c;
        comp[3][j] = g[j].d;
    }
    // period-2 maps live on [0,2): mode frequencies halve
    const double freq_scale = 1.0 / static_cast<double>(m.period());
    for (auto& v : comp) {
        v = spectral_derivative(v);
        if (freq_scale != 1.0)
            for (auto& e : v) e *= freq_scale;
    }
    std::vector<AlgebraVector> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const Mat2R d{comp[0][j].real(), comp[1][j].real(), comp[2][j].real(), comp[3][j].real()};
        const Mat2R lu = d * g[j].inverse();
        if (std::fabs(lu.trace()) > tol().traceless * std::max(1.0, lu.frob()))
            throw Error(Errc::grid_too_coarse, "L u not traceless at grid tolerance");
        out[j] = algebra_from_matrix(lu);
    }
    return out;
}

// L u at a single point, from the closed-form derivative of the tree.
inline AlgebraVector l_operator_at(const Sl2Map& m, double theta) {
    return algebra_from_matrix(m.derivative(theta) * m.eval(theta).inverse());
}

struct BoundednessReport {
    double sup = 1;        // max over |k| <= K and grid theta of |A_k(theta)|
    long long argmax_k = 0;
    bool overflowed = false;  // some norm exceeded 1e300: unboundedness evidence
};

inline BoundednessReport boundedness_probe(const QpCocycle& c, long long k_max, int n = 256) {
    if (k_max < 1) throw Error(Errc::config_invalid, "boundedness probe needs K >= 1");
    BoundednessReport rep;
    const double p = static_cast<double>(c.map.period());
    std::vector<Mat2R> fwd(static_cast<std::size_t>(n), Mat2R::identity());
    std::vector<Mat2R> bwd(fwd);
    for (long long k = 1; k <= k_max; ++k) {
        for (int j = 0; j < n; ++j) {
            const double theta = p * static_cast<double>(j) / n;
            fwd[j] = c.map.eval(theta + static_cast<double>(k - 1) * c.alpha) * fwd[j];
            bwd[j] = c.map.eval(theta - static_cast<double>(k) * c.alpha).inverse() * bwd[j];
            const double nf = fwd[j].norm(), nb = bwd[j].norm();
            if (nf > rep.sup) {
                rep.sup = nf;
                rep.argmax_k = k;
            }
            if (nb > rep.sup) {
                rep.sup = nb;
                rep.argmax_k = -k;
            }
            if (nf > 1e300 || nb > 1e300) {
                rep.overflowed = true;
                return rep;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Lifts of the projective action.  For a fixed theta the direction map
// x -> x + f(theta, x) (angles in turns) is continuous and f(theta, x+1) =
// f(theta, x).  We tabulate a continuous branch of f on a (theta, x) grid.

// Raw angular displacement of the projective action, in turns, reduced mod 1
// to [0,1).
inline double direction_displacement(const Mat2R& m, double x_turns) {
    const double ang = kTwoPi * x_turns;
    const double vx = std::cos(ang), vy = std::sin(ang);
    const double wx = m.a * vx + m.b * vy;
    const double wy = m.c * vx + m.d * vy;
    double d = (std::atan2(wy, wx) - ang) / kTwoPi;
    d -= std::floor(d);
    return d;
}

// Branch cut for a family of mod-1 displacement samples: the midpoint of the
// largest gap of the sampled values on the circle. Returns the cut; every
// sample is then lifted into (cut, cut+1).
inline double displacement_branch_cut(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    double best_gap = samples.front() + 1.0 - samples.back();
    double cut = 0.5 * (samples.back() + samples.front() + 1.0);
    for (std::size_t j = 1; j < n; ++j) {
        const double gap = samples[j] - samples[j - 1];
        if (gap > best_gap) {
            best_gap = gap;
            cut = 0.5 * (samples[j - 1] + samples[j]);
        }
    }
    if (best_gap < 0.02)
        throw Error(Errc::grid_too_coarse,
                    "projective displacements fill the circle; no continuous branch visible");
    return cut - std::floor(cut);
}

struct Lift {
    double cut = 0;  // displacements are lifted into (cut, cut+1)

    double displacement(const Mat2R& m, double x_turns) const {
        double d = direction_displacement(m, x_turns) - cut;
        d -= std::floor(d);
        return d + cut;
    }
};

// Builds the lift of the projective action of an Sl2Map by sampling the
// displacement over a (theta, x) grid and choosing the branch cut in the
// largest unoccupied arc.
inline Lift build_lift(const Sl2Map& m, int n_theta = 128, int n_x = 64) {
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(n_theta) * n_x);
    const double p = static_cast<double>(m.period());
    for (int i = 0; i < n_theta; ++i) {
        const Mat2R g = m.eval(p * static_cast<double>(i) / n_theta);
        for (int j = 0; j < n_x; ++j)
            samples.push_back(direction_displacement(g, static_cast<double>(j) / n_x));
    }
    return Lift{displacement_branch_cut(samples)};
}

// Tabulated continuous branch of f(t, x) over a rectangle [t_lo, t_hi] x [0,1),
// continued from the base corner along t, then along x within each column.
// Handles displacement functions whose range exceeds one turn, which the
// single-cut Lift cannot represent (E_r for example). Per-step changes must
// stay under a quarter turn; refine the grid otherwise.
class LiftTable {
  public:
    template <class MapFn>
    LiftTable(const MapFn& map, double t_lo, double t_hi, int n_t, int n_x)
        : t_lo_(t_lo), t_hi_(t_hi), n_t_(n_t), n_x_(n_x),
          f_(static_cast<std::size_t>(n_t + 1) * static_cast<std::size_t>(n_x)) {
        std::vector<Mat2R> row_m(static_cast<std::size_t>(n_t) + 1);
        for (int i = 0; i <= n_t; ++i) row_m[i] = map(t_at(i));
        // spine along t at x = 0
        double prev = principal(direction_displacement(row_m[0], 0.0));
        at(0, 0) = prev;
        for (int i = 1; i <= n_t; ++i) {
            prev = continue_branch(direction_displacement(row_m[i], 0.0), prev);
            at(i, 0) = prev;
        }
        // columns along x
        for (int i = 0; i <= n_t; ++i) {
            double cur = at(i, 0);
            for (int j = 1; j < n_x; ++j) {
                cur = continue_branch(
                    direction_displacement(row_m[i], static_cast<double>(j) / n_x), cur);
                at(i, j) = cur;
            }
            // wrap check: f(t, 1) must return to f(t, 0)
            const double back =
                continue_branch(direction_displacement(row_m[i], 0.0), cur) - at(i, 0);
            if (std::fabs(back) > 0.25)
                throw Error(Errc::grid_too_coarse, "lift column does not close up in x");
        }
    }

    double t_lo() const { return t_lo_; }
    double t_hi() const { return t_hi_; }

    // bilinear interpolation of the continuous branch; x wrapped mod 1
    double eval(double t, double x) const {
        const double u = (t - t_lo_) / (t_hi_ - t_lo_) * n_t_;
        if (u < -1e-9 || u > n_t_ + 1e-9)
            throw Error(Errc::config_invalid, "lift evaluated outside its t-range");
        const double uc = std::min(std::max(u, 0.0), static_cast<double>(n_t_));
        int i = std::min(static_cast<int>(uc), n_t_ - 1);
        const double du = uc - i;
        double xw = x - std::floor(x);
        const double v = xw * n_x_;
        int j = std::min(static_cast<int>(v), n_x_ - 1);
        const double dv = v - j;
        const int jn = (j + 1) % n_x_;
        // crossing the x-seam keeps the same branch: f(t,1) = f(t,0)
        const double f00 = at(i, j), f10 = at(i + 1, j);
        const double f01 = at(i, jn), f11 = at(i + 1, jn);
        return (1 - du) * ((1 - dv) * f00 + dv * f01) + du * ((1 - dv) * f10 + dv * f11);
    }

  private:
    static double principal(double mod1) {
        return mod1 >= 0.5 ? mod1 - 1.0 : mod1;
    }
    static double continue_branch(double raw_mod1, double prev) {
        double d = raw_mod1 - prev;
        d -= std::round(d);
        if (std::fabs(d) > 0.25)
            throw Error(Errc::grid_too_coarse, "lift step exceeds a quarter turn");
        return prev + d;
    }

    double t_at(int i) const {
        return t_lo_ + (t_hi_ - t_lo_) * static_cast<double>(i) / n_t_;
    }
    double& at(int i, int j) {
        return f_[static_cast<std::size_t>(i) * n_x_ + static_cast<std::size_t>(j)];
    }
    double at(int i, int j) const {
        return f_[static_cast<std::size_t>(i) * n_x_ + static_cast<std::size_t>(j)];
    }

    double t_lo_, t_hi_;
    int n_t_, n_x_;
    std::vector<double> f_;
};

}  // namespace qpsl2
