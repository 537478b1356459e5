#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <vector>

#include "qpsl2/config.hpp"
#include "qpsl2/fft.hpp"
#include "qpsl2/sl2.hpp"

namespace qpsl2 {

// Trigonometric polynomial with complex coefficients, f(t) = sum c(k) e^{2pi i k t}.
// Real-valued polynomials keep c(-k) = conj(c(k)).
class TrigPolyC {
  public:
    TrigPolyC() = default;

    static TrigPolyC constant(cplx c) {
        TrigPolyC p;
        if (c != 0.0) p.c_[0] = c;
        return p;
    }

    // Real cosine/sine mode: amp*cos(2pi k t) or amp*sin(2pi k t).
    static TrigPolyC cosine(int k, double amp) {
        TrigPolyC p;
        p.add(k, 0.5 * amp);
        p.add(-k, 0.5 * amp);
        return p;
    }
    static TrigPolyC sine(int k, double amp) {
        TrigPolyC p;
        p.add(k, cplx(0, -0.5 * amp));
        p.add(-k, cplx(0, 0.5 * amp));
        return p;
    }

    void add(long long k, cplx c) {
        if (c == 0.0) return;
        c_[k] += c;
        if (c_[k] == 0.0) c_.erase(k);
    }

    cplx coeff(long long k) const {
        auto it = c_.find(k);
        return it == c_.end() ? cplx(0) : it->second;
    }

    const std::map<long long, cplx>& coeffs() const { return c_; }

    cplx eval(double t) const {
        cplx s = 0;
        for (const auto& [k, c] : c_) {
            const double ang = kTwoPi * static_cast<double>(k) * t;
            s += c * cplx(std::cos(ang), std::sin(ang));
        }
        return s;
    }

    double eval_real(double t) const { return eval(t).real(); }

    TrigPolyC derivative() const {
        TrigPolyC d;
        for (const auto& [k, c] : c_) d.add(k, c * cplx(0, kTwoPi * static_cast<double>(k)));
        return d;
    }

    TrigPolyC truncated(long long n) const {
        TrigPolyC t;
        for (const auto& [k, c] : c_)
            if (std::llabs(k) <= n) t.add(k, c);
        return t;
    }

    TrigPolyC operator+(const TrigPolyC& o) const {
        TrigPolyC s = *this;
        for (const auto& [k, c] : o.c_) s.add(k, c);
        return s;
    }
    TrigPolyC operator-(const TrigPolyC& o) const {
        TrigPolyC s = *this;
        for (const auto& [k, c] : o.c_) s.add(k, -c);
        return s;
    }
    TrigPolyC operator*(cplx s) const {
        TrigPolyC p;
        for (const auto& [k, c] : c_) p.add(k, c * s);
        return p;
    }

    long long degree() const {
        long long n = 0;
        for (const auto& [k, c] : c_) n = std::max(n, std::llabs(k));
        return n;
    }

    bool is_real(double eps = 1e-12) const {
        for (const auto& [k, c] : c_)
            if (std::abs(c - std::conj(coeff(-k))) > eps) return false;
        return true;
    }

    // sup |f| estimated on a grid that resolves every mode.
    double c0_norm() const {
        const int n = static_cast<int>(std::max<long long>(64, 8 * (degree() + 1)));
        double m = 0;
        for (int j = 0; j < n; ++j) m = std::max(m, std::abs(eval(static_cast<double>(j) / n)));
        return m;
    }

    double cs_norm(int s) const {
        TrigPolyC d = *this;
        double m = c0_norm();
        for (int j = 0; j < s; ++j) {
            d = d.derivative();
            m = std::max(m, d.c0_norm());
        }
        return m;
    }

    // Interpolating polynomial of equispaced samples over one period.
    static TrigPolyC from_samples(const std::vector<cplx>& samples) {
        auto hat = fourier_coefficients(samples);
        const long long n = static_cast<long long>(samples.size());
        TrigPolyC p;
        for (long long k = -n / 2; k < n / 2; ++k) p.add(k, coeff_at(hat, k));
        return p;
    }

  private:
    std::map<long long, cplx> c_;
};

// sl(2,R)-valued trig polynomial, one real-constrained scalar per coordinate.
struct Sl2TrigPoly {
    TrigPolyC x, y, z;

    AlgebraVector eval(double t) const {
        return {x.eval_real(t), y.eval_real(t), z.eval_real(t)};
    }
    Sl2TrigPoly derivative() const { return {x.derivative(), y.derivative(), z.derivative()}; }
    double c0_norm() const {
        const long long deg = std::max(x.degree(), std::max(y.degree(), z.degree()));
        const int n = static_cast<int>(std::max<long long>(64, 8 * (deg + 1)));
        double m = 0;
        for (int j = 0; j < n; ++j) m = std::max(m, eval(static_cast<double>(j) / n).euclid());
        return m;
    }
};

// su(1,1)-valued trig polynomial {t, nu}: t real-constrained, nu unconstrained.
struct Su11TrigPoly {
    TrigPolyC t, nu;

    Su11Vector eval(double th) const { return {t.eval_real(th), nu.eval(th)}; }
    Su11TrigPoly operator+(const Su11TrigPoly& o) const { return {t + o.t, nu + o.nu}; }
    Su11TrigPoly operator-(const Su11TrigPoly& o) const { return {t - o.t, nu - o.nu}; }
    Su11TrigPoly operator*(double s) const { return {t * s, nu * s}; }

    double c0_norm() const {
        const long long deg = std::max(t.degree(), nu.degree());
        const int n = static_cast<int>(std::max<long long>(64, 8 * (deg + 1)));
        double m = 0;
        for (int j = 0; j < n; ++j) {
            const Su11Vector v = eval(static_cast<double>(j) / n);
            m = std::max(m, std::hypot(v.t, std::abs(v.nu)));
        }
        return m;
    }

    double cs_norm(int s) const {
        Su11TrigPoly d = *this;
        double m = c0_norm();
        for (int j = 0; j < s; ++j) {
            d = Su11TrigPoly{d.t.derivative(), d.nu.derivative()};
            m = std::max(m, d.c0_norm());
        }
        return m;
    }
};

}  // namespace qpsl2
