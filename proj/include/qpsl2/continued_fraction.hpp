#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qpsl2/config.hpp"
#include "qpsl2/errors.hpp"

// Continued-fraction expansion with exact 128-bit convergents, diophantine
// class tests, the Sigma-window search, and the partial-quotient basis
// matrices used by the renormalization bookkeeping.
//
// A double is a dyadic rational; its Euclid expansion is computed exactly and
// agrees with the expansion of the underlying real for every depth the 53-bit
// mantissa can support. Gauss iterates are recovered from the convergents
// (alpha_k = beta_k / beta_{k-1}) instead of iterating 1/x - floor, which
// loses all digits by k ~ 35.

namespace qpsl2 {

using int128 = __int128;

inline std::string int128_str(int128 v) {
    if (v == 0) return "0";
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
    std::string s;
    while (u > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    return {s.rbegin(), s.rend()};
}

enum class CfStatus { ok, rational_stop, depth_limit };

struct CfExpansion {
    double alpha = 0;
    CfStatus status = CfStatus::ok;
    std::vector<long long> a;     // a[k], k >= 1; a[0] = 0
    std::vector<int128> p, q;     // convergents, p[k]/q[k]
    std::vector<double> beta;     // beta[k] = prod_{j<=k} alpha_j = |q_k alpha - p_k|
    std::vector<double> alpha_k;  // Gauss iterates, alpha_k[0] = alpha

    int depth() const { return static_cast<int>(a.size()) - 1; }

    // beta_{k-1} with the convention beta_{-1} = 1
    double beta_prev(int k) const { return k == 0 ? 1.0 : beta[static_cast<std::size_t>(k) - 1]; }
};

inline CfExpansion expand(double alpha, int depth) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(Errc::config_invalid, "expand needs 0 < alpha < 1");
    CfExpansion cf;
    cf.alpha = alpha;

    // alpha = u/v exactly
    int exp2 = 0;
    const double mant = std::frexp(alpha, &exp2);  // alpha = mant * 2^exp2, mant in [0.5,1)
    int128 u = static_cast<int128>(std::ldexp(mant, 53));
    int shift = 53 - exp2;
    while (u % 2 == 0 && shift > 0) {
        u /= 2;
        --shift;
    }
    if (shift > 100) throw Error(Errc::config_invalid, "alpha too small for exact expansion");
    const int128 v = static_cast<int128>(1) << shift;

    cf.a.push_back(0);
    cf.p.push_back(0);  // p_0
    cf.q.push_back(1);  // q_0
    cf.alpha_k.push_back(alpha);

    int128 num = u, den = v;  // alpha_{k-1} = num/den
    const int128 limit = static_cast<int128>(1) << 100;
    for (int k = 1; k <= depth; ++k) {
        if (num == 0) {
            cf.status = CfStatus::rational_stop;
            break;
        }
        const int128 ak = den / num;
        const int128 rem = den % num;
        den = num;
        num = rem;
        int128 pk, qk;
        if (k == 1) {
            pk = 1;
            qk = ak;
            if (qk > limit) {
                cf.status = CfStatus::depth_limit;
                break;
            }
        } else {
            const int128 q1 = cf.q[static_cast<std::size_t>(k) - 1];
            const int128 q2 = cf.q[static_cast<std::size_t>(k) - 2];
            if (ak > (limit - q2) / q1) {
                cf.status = CfStatus::depth_limit;
                break;
            }
            pk = ak * cf.p[static_cast<std::size_t>(k) - 1] + cf.p[static_cast<std::size_t>(k) - 2];
            qk = ak * q1 + q2;
        }
        cf.a.push_back(static_cast<long long>(ak));
        cf.p.push_back(pk);
        cf.q.push_back(qk);
    }

    // beta_k = (-1)^k (q_k alpha - p_k) = |q_k u - p_k v| / v, exact numerator
    const double vd = static_cast<double>(v);
    for (std::size_t k = 0; k < cf.q.size(); ++k) {
        int128 numer = cf.q[k] * u - cf.p[k] * v;
        if (numer < 0) numer = -numer;
        cf.beta.push_back(static_cast<double>(numer) / vd);
    }
    for (std::size_t k = 1; k < cf.beta.size(); ++k)
        cf.alpha_k.push_back(cf.beta[k] / cf.beta[k - 1]);

    if (cf.depth() < depth && cf.status == CfStatus::ok) cf.status = CfStatus::rational_stop;
    // alpha_k below 1e-14 is an effective rational truncation
    if (cf.status == CfStatus::ok && !cf.alpha_k.empty() && cf.alpha_k.back() < 1e-14)
        cf.status = CfStatus::rational_stop;
    return cf;
}

inline double dist_to_integers(double x) {
    const double f = x - std::floor(x);
    return std::min(f, 1.0 - f);
}

struct DiophantineCert {
    double gamma = 0, sigma = 0;
    long long K = 0;
    long long worst_k = 0;
    double margin = 0;  // min over k of gamma |k|^sigma dist(k alpha); valid iff >= 1
    bool valid() const { return margin >= 1.0; }
};

// Exhaustive CD(gamma, sigma) scan over 1 <= k <= K.
inline DiophantineCert cd_test(double alpha, double gamma, double sigma, long long K) {
    if (K < 1 || gamma <= 0 || sigma <= 0)
        throw Error(Errc::config_invalid, "cd_test needs K >= 1, gamma > 0, sigma > 0");
    DiophantineCert cert{gamma, sigma, K, 1, std::numeric_limits<double>::infinity()};
    for (long long k = 1; k <= K; ++k) {
        const double m =
            gamma * std::pow(static_cast<double>(k), sigma) * dist_to_integers(k * alpha);
        if (m < cert.margin) {
            cert.margin = m;
            cert.worst_k = k;
        }
    }
    return cert;
}

inline double dist_to_half_integers(double x) {
    const double y = 2.0 * x;
    return 0.5 * dist_to_integers(y);
}

struct RhoCert {
    bool rational = false;
    long long k0 = 0;        // rho = k0 alpha / 2 mod 1/2 when rational
    double kappa = 0, tau = 0;
    long long K = 0;
    long long worst_k = 0;
    double margin = 0;       // min over k != 0 of kappa |k|^tau dist_{Z/2}(rho - k alpha/2)
    bool valid() const { return rational || margin >= 1.0; }
};

// Diophantine-with-respect-to-alpha test for a rotation number rho:
// scans |rho - k alpha/2 - l/2| over |k| <= K; flags the rational case first.
inline RhoCert diophantine_wrt(double rho, double alpha, double kappa, double tau, long long K,
                               double rational_eps = 1e-10) {
    if (K < 1) throw Error(Errc::config_invalid, "diophantine_wrt needs K >= 1");
    RhoCert cert;
    cert.kappa = kappa;
    cert.tau = tau;
    cert.K = K;
    cert.margin = std::numeric_limits<double>::infinity();
    for (long long k = -K; k <= K; ++k) {
        const double d = dist_to_half_integers(rho - 0.5 * static_cast<double>(k) * alpha);
        if (d < rational_eps &&
            (!cert.rational || std::llabs(k) < std::llabs(cert.k0))) {
            cert.rational = true;
            cert.k0 = k;
        }
        if (k != 0) {
            const double m = kappa * std::pow(static_cast<double>(std::llabs(k)), tau) * d;
            if (m < cert.margin) {
                cert.margin = m;
                cert.worst_k = k;
            }
        }
    }
    return cert;
}

inline RhoCert diophantine_wrt(double rho, const CfExpansion& cf, double kappa, double tau,
                               long long K, double rational_eps = 1e-10) {
    return diophantine_wrt(rho, cf.alpha, kappa, tau, K, rational_eps);
}

// Indices k with both Gauss iterates in (1/5, 1/4] and CD-certified at the
// finite window K = 1e3. Finite-window evidence only.
inline std::vector<int> sigma_window_search(const CfExpansion& cf, double gamma, double sigma,
                                            long long K = 1000) {
    if (cf.depth() < 2) throw Error(Errc::config_invalid, "sigma search needs depth >= 2");
    std::vector<int> out;
    for (std::size_t k = 0; k + 1 < cf.alpha_k.size(); ++k) {
        const double a0 = cf.alpha_k[k], a1 = cf.alpha_k[k + 1];
        const bool window = a0 > 0.2 && a0 <= 0.25 && a1 > 0.2 && a1 <= 0.25;
        if (!window) continue;
        if (cd_test(a0, gamma, sigma, K).valid() && cd_test(a1, gamma, sigma, K).valid())
            out.push_back(static_cast<int>(k));
    }
    return out;
}

struct BasisMatrix {
    int128 m1 = 1, m2 = 0, m3 = 0, m4 = 1;

    BasisMatrix mul(const BasisMatrix& o) const {
        return {m1 * o.m1 + m2 * o.m3, m1 * o.m2 + m2 * o.m4, m3 * o.m1 + m4 * o.m3,
                m3 * o.m2 + m4 * o.m4};
    }
    bool operator==(const BasisMatrix& o) const {
        return m1 == o.m1 && m2 == o.m2 && m3 == o.m3 && m4 == o.m4;
    }
};

// Product (0 1; 1 -a_k) ... (0 1; 1 -a_{l+1}); requires k - l even.
// Sign pattern: m1, m4 >= 0 and m2, m3 <= 0; l = 0 gives (p_{k-1}, -q_{k-1}; -p_k, q_k).
inline BasisMatrix basis_matrix(const CfExpansion& cf, int k, int l) {
    if (k < l || l < 0) throw Error(Errc::config_invalid, "basis_matrix needs k >= l >= 0");
    if ((k - l) % 2 != 0) throw Error(Errc::parity, "basis_matrix needs k - l even");
    if (k > cf.depth()) throw Error(Errc::depth_exhausted, "basis_matrix beyond expansion depth");
    BasisMatrix out;
    for (int j = k; j >= l + 1; --j) {
        const BasisMatrix f{0, 1, 1, -static_cast<int128>(cf.a[static_cast<std::size_t>(j)])};
        out = out.mul(f);
    }
    return out;
}

}  // namespace qpsl2
