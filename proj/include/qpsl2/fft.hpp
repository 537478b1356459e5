#pragma once

#include <complex>
#include <vector>

#include "qpsl2/config.hpp"

namespace qpsl2 {

// In-place iterative radix-2 FFT. Forward: X(k) = sum_j x(j) e^{-2pi i jk/N}.
inline void fft(std::vector<std::complex<double>>& x, bool inverse = false) {
    const std::size_t n = x.size();
    if (n < 2) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const auto u = x[i + j];
                const auto v = x[i + j + len / 2] * w;
                x[i + j] = u + v;
                x[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (auto& v : x) v /= static_cast<double>(n);
    }
}

// Fourier coefficient c(k) of equispaced samples over one period,
// f(t) ~ sum_k c(k) e^{2pi i k t}; k indexed in [-N/2, N/2).
inline std::vector<std::complex<double>> fourier_coefficients(
    const std::vector<std::complex<double>>& samples) {
    std::vector<std::complex<double>> work = samples;
    fft(work);
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (auto& v : work) v *= inv;
    return work;  // work[(k+N) % N] = c(k)
}

inline std::complex<double> coeff_at(const std::vector<std::complex<double>>& hat, long long k) {
    const long long n = static_cast<long long>(hat.size());
    long long idx = ((k % n) + n) % n;
    return hat[static_cast<std::size_t>(idx)];
}

// Spectral derivative of periodic samples (period 1): multiply mode k by 2pi i k.
inline std::vector<std::complex<double>> spectral_derivative(
    const std::vector<std::complex<double>>& samples) {
    const std::size_t n = samples.size();
    std::vector<std::complex<double>> hat = samples;
    fft(hat);
    for (std::size_t j = 0; j < n; ++j) {
        long long k = static_cast<long long>(j);
        if (k > static_cast<long long>(n) / 2) k -= static_cast<long long>(n);
        if (2 * static_cast<std::size_t>(std::llabs(k)) == n) k = 0;  // drop the Nyquist mode
        hat[j] *= std::complex<double>(0.0, kTwoPi * static_cast<double>(k));
    }
    fft(hat, true);
    return hat;
}

}  // namespace qpsl2
