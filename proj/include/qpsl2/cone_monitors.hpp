#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "qpsl2/cocycle.hpp"
#include "qpsl2/config.hpp"
#include "qpsl2/continued_fraction.hpp"
#include "qpsl2/errors.hpp"
#include "qpsl2/renormalization.hpp"
#include "qpsl2/sl2.hpp"

// Cone-field renormalization diagnostics: the eta_k^{+/-}, gamma_k^{+/-}
// decompositions transported along the continued-fraction scheme, the
// integrated monotone functionals u_k, and the decay quantity eps_k.
//
// eta_k^{+/-} are evaluated by the flat expansion over the level-0
// decomposition: A^{(k)} is a signed word in A, and each letter contributes
// one Ad-transported eta_0^{+/-} term with nonnegative weight. Positive
// letters keep the sign, inverse letters swap it.

namespace qpsl2 {

// Periodic cubic (Catmull-Rom) interpolation of AlgebraVector samples.
class PeriodicField {
  public:
    PeriodicField() = default;
    explicit PeriodicField(std::vector<AlgebraVector> samples) : v_(std::move(samples)) {}

    AlgebraVector eval(double t) const {
        const int n = static_cast<int>(v_.size());
        double u = (t - std::floor(t)) * n;
        int j = static_cast<int>(u);
        if (j >= n) j = n - 1;
        const double s = u - j;
        const AlgebraVector& p0 = v_[static_cast<std::size_t>((j + n - 1) % n)];
        const AlgebraVector& p1 = v_[static_cast<std::size_t>(j)];
        const AlgebraVector& p2 = v_[static_cast<std::size_t>((j + 1) % n)];
        const AlgebraVector& p3 = v_[static_cast<std::size_t>((j + 2) % n)];
        auto cr = [s](double a, double b, double c, double d) {
            return b + 0.5 * s * (c - a + s * (2 * a - 5 * b + 4 * c - d + s * (3 * (b - c) + d - a)));
        };
        return {cr(p0.x, p1.x, p2.x, p3.x), cr(p0.y, p1.y, p2.y, p3.y),
                cr(p0.z, p1.z, p2.z, p3.z)};
    }

    bool empty() const { return v_.empty(); }

  private:
    std::vector<AlgebraVector> v_;
};

// eta_0 = eta_0^+ - eta_0^- with eta_0^+ = {0,0,z0} constant and z0 large
// enough that both pieces sit strictly inside the cone.
class ConeDecomposition {
  public:
    ConeDecomposition() = default;

    ConeDecomposition(const QpCocycle& c, double margin, int table_n = 4096) {
        if (margin <= 0) throw Error(Errc::config_invalid, "decompose needs margin > 0");
        auto eta0 = l_operator(c.map, table_n);
        double sup = 0;
        for (const auto& v : eta0) sup = std::max(sup, v.euclid());
        z0_ = (1.0 + margin) * (sup + 1.0);
        table_ = PeriodicField(std::move(eta0));
        delta_ = std::numeric_limits<double>::infinity();
        for (int j = 0; j < table_n; ++j) {
            const double t = static_cast<double>(j) / table_n;
            delta_ = std::min(delta_, cone_margin(plus(t)));
            delta_ = std::min(delta_, cone_margin(minus(t)));
        }
        if (delta_ <= 0)
            throw Error(Errc::cone_violation, "decomposition failed to land in a strict cone");
    }

    // degenerate choice eta_0^+ = L(A), eta_0^- = 0, valid when L(A) is
    // already cone-valued (the degree-bound situation)
    static ConeDecomposition cone_valued(const QpCocycle& c, int table_n = 4096) {
        ConeDecomposition dec;
        auto eta0 = l_operator(c.map, table_n);
        dec.z0_ = 0.0;
        dec.pure_ = true;
        dec.delta_ = std::numeric_limits<double>::infinity();
        for (const auto& v : eta0) dec.delta_ = std::min(dec.delta_, cone_margin(v));
        if (dec.delta_ <= 0)
            throw Error(Errc::cone_violation, "L(A) is not cone-valued");
        dec.table_ = PeriodicField(std::move(eta0));
        return dec;
    }

    AlgebraVector plus(double t) const {
        return pure_ ? table_.eval(t) : AlgebraVector{0, 0, z0_};
    }
    AlgebraVector minus(double t) const {
        return pure_ ? AlgebraVector{0, 0, 0} : AlgebraVector{0, 0, z0_} - table_.eval(t);
    }
    AlgebraVector eta0(double t) const { return table_.eval(t); }

    double z0() const { return z0_; }
    double delta() const { return delta_; }

  private:
    PeriodicField table_;
    double z0_ = 0;
    double delta_ = 0;
    bool pure_ = false;
};

using ConePair = std::pair<AlgebraVector, AlgebraVector>;  // (plus, minus)

// eta_k^{+/-}(t): flat expansion of L(A^{(k)}) with A^{(k)} = A_{(-1)^k q_k}.
inline ConePair eta_pair(const QpCocycle& c, const ConeDecomposition& dec, const CfExpansion& cf,
                         int k, double t) {
    if (k == 0) return {dec.plus(t), dec.minus(t)};
    if (k > cf.depth()) throw Error(Errc::depth_exhausted, "eta_pair beyond expansion depth");
    const long long n = static_cast<long long>(cf.q[static_cast<std::size_t>(k)]);
    AlgebraVector accp{}, accm{};
    Mat2R pref = Mat2R::identity();
    if (k % 2 == 0) {
        // positive word: prefix excludes the current letter
        for (long long i = 1; i <= n; ++i) {
            const double arg = t + static_cast<double>(n - i) * c.alpha;
            const Mat2R pinv = pref.inverse();
            accp = accp + algebra_from_matrix(pref * dec.plus(arg).matrix() * pinv);
            accm = accm + algebra_from_matrix(pref * dec.minus(arg).matrix() * pinv);
            pref = pref * c.map.eval(arg);
        }
    } else {
        // inverse word: prefix includes the current letter, signs swap
        for (long long j = 1; j <= n; ++j) {
            const double arg = t - static_cast<double>(n - j + 1) * c.alpha;
            pref = pref * c.map.eval(arg).inverse();
            const Mat2R pinv = pref.inverse();
            accp = accp + algebra_from_matrix(pref * dec.minus(arg).matrix() * pinv);
            accm = accm + algebra_from_matrix(pref * dec.plus(arg).matrix() * pinv);
        }
    }
    return {accp, accm};
}

// gamma_k^{+/-} = eta_{k-1}^{+/-}
inline ConePair gamma_pair(const QpCocycle& c, const ConeDecomposition& dec,
                           const CfExpansion& cf, int k, double t) {
    if (k == 0) return {AlgebraVector{}, AlgebraVector{}};
    return eta_pair(c, dec, cf, k - 1, t);
}

struct ConeFields {
    int k = 0;
    int n = 0;
    std::vector<AlgebraVector> eta_p, eta_m, gam_p, gam_m;
    double delta_prime = 0;  // measured opening margin across every node
};

inline int cone_grid_size(const CfExpansion& cf, int k) {
    const double q = k >= 0 && k <= cf.depth()
                         ? static_cast<double>(cf.q[static_cast<std::size_t>(k)])
                         : 1.0;
    int n = 256;
    while (n < 8 * q && n < (1 << 15)) n <<= 1;
    return n;
}

inline ConeFields cone_fields(const QpCocycle& c, const ConeDecomposition& dec,
                              const CfExpansion& cf, int k, int n = 0) {
    if (n == 0) n = cone_grid_size(cf, k);
    ConeFields out;
    out.k = k;
    out.n = n;
    out.eta_p.resize(static_cast<std::size_t>(n));
    out.eta_m.resize(static_cast<std::size_t>(n));
    out.gam_p.resize(static_cast<std::size_t>(n));
    out.gam_m.resize(static_cast<std::size_t>(n));
    out.delta_prime = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        const double t = static_cast<double>(j) / n;
        const ConePair e = eta_pair(c, dec, cf, k, t);
        const ConePair g = gamma_pair(c, dec, cf, k, t);
        out.eta_p[j] = e.first;
        out.eta_m[j] = e.second;
        out.gam_p[j] = g.first;
        out.gam_m[j] = g.second;
        for (const AlgebraVector* v : {&e.first, &e.second}) {
            if (!in_future_cone(*v, 1e-8))
                throw Error(Errc::cone_escape, "cone field left E+; unboundedness evidence");
            out.delta_prime = std::min(out.delta_prime, cone_margin(*v));
        }
        if (k >= 1) {
            for (const AlgebraVector* v : {&g.first, &g.second}) {
                if (!in_future_cone(*v, 1e-8))
                    throw Error(Errc::cone_escape, "cone field left E+; unboundedness evidence");
                out.delta_prime = std::min(out.delta_prime, cone_margin(*v));
            }
        }
    }
    return out;
}

// RenormState-facing overloads: the state carries the cocycle, expansion and
// level, the decomposition supplies the level-0 fields.
inline ConeFields cone_fields(const ConeDecomposition& dec, const RenormState& st, int n = 0) {
    return cone_fields(st.base, dec, st.cf, st.k, n);
}

// Measured delta -> delta' map of the strict cones: worst margin of Ad(A).v
// over boundary vectors of E+_delta and matrices of norm up to m_bound.
inline ConeParams cone_params_probe(double delta, double m_bound, int samples = 4096) {
    ConeParams out;
    out.delta = delta;
    out.delta_prime = std::numeric_limits<double>::infinity();
    std::uint64_t state = 0x2545f4914f6cdd1dull;
    auto uniform = [&state]() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
    };
    for (int i = 0; i < samples; ++i) {
        const double phi = kTwoPi * uniform();
        const AlgebraVector v{std::cos(phi), std::sin(phi), 1.0 + delta};  // boundary of E+_delta
        // unimodular with norm exactly s: diag(s, 1/s) rotated both sides
        const double target = 1.0 + (m_bound - 1.0) * uniform();
        const Mat2R a = Mat2R::rotation(kTwoPi * uniform()) *
                        Mat2R::diagonal(target, 1.0 / target) *
                        Mat2R::rotation(kTwoPi * uniform());
        out.delta_prime = std::min(out.delta_prime, cone_margin(ad_action(a, v)));
    }
    return out;
}

struct IntegratedQuantities {
    double e_p = 0, e_m = 0, e = 0;
    double f_p = 0, f_m = 0, f = 0;
    double u_p = 0, u_m = 0, u = 0;
    double ubar_p = 0, ubar_m = 0, ubar = 0;
};

// e_k^{+/-} = int N(eta_k^{+/-}), f from gamma, u_k^{+/-} = e^{+/-} + alpha_k f^{-/+},
// ubar = beta_{k-1} u. Quadrature is the node mean over one period.
inline IntegratedQuantities integrated_quantities(const QpCocycle& c,
                                                  const ConeDecomposition& dec,
                                                  const CfExpansion& cf, int k, int n = 0) {
    const ConeFields fld = cone_fields(c, dec, cf, k, n);
    IntegratedQuantities out;
    for (int j = 0; j < fld.n; ++j) {
        out.e_p += minkowski_norm(fld.eta_p[j]);
        out.e_m += minkowski_norm(fld.eta_m[j]);
        out.e += minkowski_norm(fld.eta_p[j] + fld.eta_m[j]);
        if (k >= 1) {
            out.f_p += minkowski_norm(fld.gam_p[j]);
            out.f_m += minkowski_norm(fld.gam_m[j]);
            out.f += minkowski_norm(fld.gam_p[j] + fld.gam_m[j]);
        }
    }
    const double inv = 1.0 / static_cast<double>(fld.n);
    out.e_p *= inv;
    out.e_m *= inv;
    out.e *= inv;
    out.f_p *= inv;
    out.f_m *= inv;
    out.f *= inv;
    const double ak = cf.alpha_k[static_cast<std::size_t>(k)];
    out.u_p = out.e_p + ak * out.f_m;
    out.u_m = out.e_m + ak * out.f_p;
    out.u = out.e + ak * out.f;
    const double b = cf.beta_prev(k);
    out.ubar_p = b * out.u_p;
    out.ubar_m = b * out.u_m;
    out.ubar = b * out.u;
    return out;
}

inline IntegratedQuantities integrated_quantities(const ConeDecomposition& dec,
                                                  const RenormState& st, int n = 0) {
    return integrated_quantities(st.base, dec, st.cf, st.k, n);
}

// The bound constant of the estimates, measured rather than assumed:
// M = 2 S^2 max(sup |eta_0^+|, sup |eta_0^-|) with S the observed product sup.
inline double measured_bound_constant(const QpCocycle& c, const ConeDecomposition& dec,
                                      long long probe_k = 1000, int probe_n = 64) {
    const auto rep = boundedness_probe(c, probe_k, probe_n);
    double m0 = 0;
    for (int j = 0; j < 512; ++j) {
        const double t = static_cast<double>(j) / 512;
        m0 = std::max(m0, std::max(dec.plus(t).euclid(), dec.minus(t).euclid()));
    }
    return 2.0 * rep.sup * rep.sup * m0;
}

// ---------------------------------------------------------------------------
// Decay monitor in the rescaled picture: all fields are sampled on the fixed
// window after the beta_{k-1} dilation, where they vary on unit scale, and
// eps_k is the per-unit-length window average of
//   |d eta~_k| + |d gamma~_k| + r~_{k+2,k} + r~^+_{k+2,k} + r~^-_{k+2,k},
// which matches beta_{k-1}^2 (|d eta_k|_{L1} + |d gamma_k|_{L1} + rho terms)
// in per-period normalization.

struct DecayPoint {
    int k = 0;
    double eps = 0;
    bool sigma_window = false;  // alpha_k, alpha_{k+1} both in (1/5, 1/4]
    double d_eta = 0, d_gam = 0, rho = 0, rho_p = 0, rho_m = 0;
};

namespace detail {

struct WindowField {
    double lo = 0, h = 0;
    std::vector<AlgebraVector> v;

    AlgebraVector at(int j) const { return v[static_cast<std::size_t>(j)]; }
    int size() const { return static_cast<int>(v.size()); }

    AlgebraVector eval(double t) const {
        const double u = (t - lo) / h;
        int j = static_cast<int>(std::floor(u));
        const double s = u - j;
        j = std::max(1, std::min(j, size() - 3));
        auto cr = [s](double a, double b, double c, double d) {
            return b + 0.5 * s * (c - a + s * (2 * a - 5 * b + 4 * c - d + s * (3 * (b - c) + d - a)));
        };
        const AlgebraVector &p0 = v[j - 1], &p1 = v[j], &p2 = v[j + 1], &p3 = v[j + 2];
        return {cr(p0.x, p1.x, p2.x, p3.x), cr(p0.y, p1.y, p2.y, p3.y),
                cr(p0.z, p1.z, p2.z, p3.z)};
    }

    // 4th-order central difference at node j
    AlgebraVector deriv(int j) const {
        const int n = size();
        const int jm2 = std::max(j - 2, 0), jm1 = std::max(j - 1, 0);
        const int jp1 = std::min(j + 1, n - 1), jp2 = std::min(j + 2, n - 1);
        if (j < 2 || j > n - 3) {
            return (v[jp1] - v[jm1]) * (1.0 / ((jp1 - jm1) * h));
        }
        return (8.0 * (v[jp1] - v[jm1]) - (v[jp2] - v[jm2])) * (1.0 / (12.0 * h));
    }
};

}  // namespace detail

inline DecayPoint decay_point(const QpCocycle& c, const ConeDecomposition& dec,
                              const CfExpansion& cf, int k, int nodes_per_unit = 186) {
    if (k < 1 || k > cf.depth())
        throw Error(Errc::config_invalid, "decay monitor needs 1 <= k <= depth");
    const double beta = cf.beta_prev(k);
    const double ak = cf.alpha_k[static_cast<std::size_t>(k)];
    const double lo = scheme().window_lo, hi = scheme().window_hi;
    const double h = 1.0 / nodes_per_unit;
    const int n = static_cast<int>(std::llround((hi - lo) / h)) + 1;

    detail::WindowField etp{lo, h, {}}, etm{lo, h, {}}, gap{lo, h, {}}, gam{lo, h, {}};
    etp.v.resize(n);
    etm.v.resize(n);
    gap.v.resize(n);
    gam.v.resize(n);
    for (int j = 0; j < n; ++j) {
        const double t = lo + j * h;
        const ConePair e = eta_pair(c, dec, cf, k, beta * t);
        const ConePair g = gamma_pair(c, dec, cf, k, beta * t);
        etp.v[j] = e.first * beta;
        etm.v[j] = e.second * beta;
        gap.v[j] = g.first * beta;
        gam.v[j] = g.second * beta;
    }

    // fiber transports at level k
    const long long n_c = (k % 2 == 1 ? 1 : -1) *
                          static_cast<long long>(cf.q[static_cast<std::size_t>(k) - 1]);
    const long long n_a = (k % 2 == 0 ? 1 : -1) *
                          static_cast<long long>(cf.q[static_cast<std::size_t>(k)]);

    const int off1 = nodes_per_unit, off2 = 2 * nodes_per_unit;
    DecayPoint out;
    out.k = k;
    out.sigma_window = k + 1 <= cf.depth() && ak > 0.2 && ak <= 0.25 &&
                       cf.alpha_k[static_cast<std::size_t>(k) + 1] > 0.2 &&
                       cf.alpha_k[static_cast<std::size_t>(k) + 1] <= 0.25;

    double sum = 0, sum_de = 0, sum_dg = 0, sum_r = 0, sum_rp = 0, sum_rm = 0;
    int count = 0;
    auto br_norm = [](const AlgebraVector& a, const AlgebraVector& b) {
        return bracket(a, b).euclid();
    };
    for (int j = off2; j < n; ++j) {
        const double t = lo + j * h;
        const AlgebraVector de = etp.deriv(j) - etm.deriv(j);
        const AlgebraVector dg = gap.deriv(j) - gam.deriv(j);
        const Mat2R ct1 = fibered_product(c, n_c, beta * (t - 1.0));  // C~(t-1)
        const Mat2R at0 = fibered_product(c, n_a, beta * t);          // A~(t)
        const Mat2R ct1_inv = ct1.inverse();

        auto ad_c = [&](const AlgebraVector& v) {
            return algebra_from_matrix(ct1_inv * v.matrix() * ct1);
        };
        auto ad_a = [&](const AlgebraVector& v) {
            return algebra_from_matrix(at0 * v.matrix() * at0.inverse());
        };
        const AlgebraVector ep0 = etp.at(j), em0 = etm.at(j);
        const AlgebraVector ep_s = etp.eval(t - ak), em_s = etm.eval(t - ak);
        const AlgebraVector gp1 = gap.at(j - off1), gm1 = gam.at(j - off1);
        const AlgebraVector gp2 = gap.at(j - off2), gm2 = gam.at(j - off2);

        const double rp = br_norm(gm2, ad_c(gm1)) + br_norm(gm1, ep0) + br_norm(ep0, ad_a(ep_s));
        const double rm = br_norm(gp2, ad_c(gp1)) + br_norm(gp1, em0) + br_norm(em0, ad_a(em_s));
        const double r = br_norm(gp2 + gm2, ad_c(gp1 + gm1)) + br_norm(gp1 + gm1, ep0 + em0) +
                         br_norm(ep0 + em0, ad_a(ep_s + em_s));
        sum_de += de.euclid();
        sum_dg += dg.euclid();
        sum_r += r;
        sum_rp += rp;
        sum_rm += rm;
        sum += de.euclid() + dg.euclid() + r + rp + rm;
        ++count;
    }
    const double inv = 1.0 / static_cast<double>(count);
    out.d_eta = sum_de * inv;
    out.d_gam = sum_dg * inv;
    out.rho = sum_r * inv;
    out.rho_p = sum_rp * inv;
    out.rho_m = sum_rm * inv;
    out.eps = sum * inv;
    return out;
}

inline std::vector<DecayPoint> decay_monitor(const QpCocycle& c, const ConeDecomposition& dec,
                                             const CfExpansion& cf, const std::vector<int>& ks,
                                             int nodes_per_unit = 186) {
    std::vector<DecayPoint> out;
    out.reserve(ks.size());
    for (int k : ks) out.push_back(decay_point(c, dec, cf, k, nodes_per_unit));
    return out;
}

// Coarse surrogate for the best window shift: the argmin of eps_k over a
// nu-grid, each candidate evaluated on a low-resolution window of the shifted
// cocycle A(. - nu). The underlying selection is existential, so this is a
// heuristic stand-in and is reported as such.
inline double select_shift(const QpCocycle& c, const CfExpansion& cf, int k, double margin = 0.5,
                           int n_grid = scheme().shift_grid, int nodes_per_unit = 31) {
    double best_eps = std::numeric_limits<double>::infinity();
    double best_nu = 0;
    for (int j = 0; j < n_grid; ++j) {
        const double nu = static_cast<double>(j) / n_grid;
        const QpCocycle shifted{c.alpha,
                                nu == 0.0 ? c.map : Sl2Map::shift(c.map, -nu)};
        const ConeDecomposition dec(shifted, margin, 1024);
        const double eps = decay_point(shifted, dec, cf, k, nodes_per_unit).eps;
        if (eps < best_eps) {
            best_eps = eps;
            best_nu = nu;
        }
    }
    return best_nu;
}

struct DegreeBound {
    double lhs = 0;  // 2 pi r
    double rhs = 0;  // int N(L(A))
    bool ok = false;
};

// 2 pi r >= int_T N(L(A(theta))) d theta, requiring L(A) in E+_delta node-wise.
inline DegreeBound degree_bound_check(const QpCocycle& c, int r, double delta,
                                      int n = scheme().grid_default) {
    const auto lu = l_operator(c.map, n);
    double acc = 0;
    for (const auto& v : lu) {
        // strictly inside the cone: the tip (constant maps) does not qualify
        if (!cone_membership(v, delta) || v.z <= 1e-12)
            throw Error(Errc::cone_violation, "L(A) leaves the strict cone");
        acc += minkowski_norm(v);
    }
    DegreeBound out;
    out.lhs = kTwoPi * r;
    out.rhs = acc / static_cast<double>(n);
    out.ok = out.lhs >= out.rhs - 1e-6;
    return out;
}

}  // namespace qpsl2
