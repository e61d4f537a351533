#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <vector>

#include "wavetwin/errors.hpp"

namespace wavetwin::fft {

using cplx = std::complex<double>;

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Twiddles and bit-reversal for one transform size, built once per size per
// thread and reused. Sizes in play are few (the grid and its dealiasing pads).
struct Tables {
    std::vector<std::size_t> rev;   // bit-reversal permutation, length n
    std::vector<cplx> w;            // e^{-2 pi i j / n}, j = 0 .. n/2-1
    std::vector<cplx> half;         // e^{-2 pi i k / (2n)}, k = 0 .. n-1 (for real packing)

    explicit Tables(std::size_t n) : rev(n), w(n / 2), half(n) {
        int bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (int b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
            rev[i] = r;
        }
        constexpr double two_pi = 6.283185307179586476925287;
        for (std::size_t j = 0; j < n / 2; ++j) {
            const double a = -two_pi * static_cast<double>(j) / static_cast<double>(n);
            w[j] = {std::cos(a), std::sin(a)};
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double a = -two_pi * static_cast<double>(k) / static_cast<double>(2 * n);
            half[k] = {std::cos(a), std::sin(a)};
        }
    }
};

inline const Tables& tables(std::size_t n) {
    static thread_local std::map<std::size_t, Tables> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Tables(n)).first;
    return it->second;
}

// In-place complex transform, unnormalized. forward: sum x_j e^{-2pi i jk/n};
// inverse: sum X_k e^{+2pi i jk/n} (no 1/n).
inline void cfft(cplx* x, std::size_t n, bool inverse) {
    if (n <= 1) return;
    const Tables& t = tables(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = t.rev[i];
        if (i < r) std::swap(x[i], x[r]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                cplx w = t.w[j * stride];
                if (inverse) w = std::conj(w);
                const cplx u = x[base + j];
                const cplx v = x[base + j + len / 2] * w;
                x[base + j] = u + v;
                x[base + j + len / 2] = u - v;
            }
        }
    }
}

} // namespace detail

/// Forward transform of n real samples (n a power of two), unnormalized.
/// Output has n/2 + 1 bins: X_k = sum_j x_j e^{-2 pi i jk/n}, k = 0..n/2.
/// Bins 0 and n/2 have exactly zero imaginary part. Implemented by packing
/// pairs of reals into one complex transform of half the size.
inline void rfft_half(const double* x, std::size_t n, cplx* out) {
    if (!detail::is_pow2(n)) throw invalid_input("rfft_half: size must be a power of two");
    if (n == 1) {
        out[0] = {x[0], 0.0};
        return;
    }
    if (n == 2) {
        out[0] = {x[0] + x[1], 0.0};
        out[1] = {x[0] - x[1], 0.0};
        return;
    }
    const std::size_t h = n / 2;
    std::vector<cplx> z(h);
    for (std::size_t j = 0; j < h; ++j) z[j] = {x[2 * j], x[2 * j + 1]};
    detail::cfft(z.data(), h, false);
    const detail::Tables& t = detail::tables(h); // t.half[k] = e^{-2 pi i k/n}
    for (std::size_t k = 0; k < h; ++k) {
        const cplx zk = z[k];
        const cplx zc = std::conj(z[(h - k) & (h - 1)]);
        const cplx e = 0.5 * (zk + zc);
        const cplx o = cplx(0.0, -0.5) * (zk - zc);
        out[k] = e + t.half[k] * o;
    }
    // k = n/2: twiddle is -1 applied to the (periodic) odd part at k = 0.
    out[h] = {z[0].real() - z[0].imag(), 0.0};
    out[0] = {z[0].real() + z[0].imag(), 0.0};
}

inline std::vector<cplx> rfft_half(const std::vector<double>& x) {
    std::vector<cplx> out(x.size() / 2 + 1);
    rfft_half(x.data(), x.size(), out.data());
    return out;
}

/// Inverse of rfft_half, unnormalized: treats the n/2 + 1 input bins as the
/// half spectrum of a real signal and returns sum_k C_k e^{+2 pi i jk/n} over
/// the Hermitian extension. irfft_half(rfft_half(x)) == n * x.
inline void irfft_half(const cplx* X, std::size_t n, double* out) {
    if (!detail::is_pow2(n)) throw invalid_input("irfft_half: size must be a power of two");
    if (n == 1) {
        out[0] = X[0].real();
        return;
    }
    if (n == 2) {
        out[0] = X[0].real() + X[1].real();
        out[1] = X[0].real() - X[1].real();
        return;
    }
    const std::size_t h = n / 2;
    std::vector<cplx> z(h);
    const detail::Tables& t = detail::tables(h);
    for (std::size_t k = 0; k < h; ++k) {
        const cplx xk = X[k];
        const cplx xc = std::conj(X[h - k]);
        const cplx e = 0.5 * (xk + xc);
        const cplx o = std::conj(t.half[k]) * (0.5 * (xk - xc));
        z[k] = e + cplx(0.0, 1.0) * o;
    }
    detail::cfft(z.data(), h, true);
    for (std::size_t j = 0; j < h; ++j) {
        out[2 * j] = 2.0 * z[j].real();
        out[2 * j + 1] = 2.0 * z[j].imag();
    }
}

inline std::vector<double> irfft_half(const std::vector<cplx>& X, std::size_t n) {
    if (X.size() != n / 2 + 1) throw invalid_input("irfft_half: expected n/2 + 1 bins");
    std::vector<double> out(n);
    irfft_half(X.data(), n, out.data());
    return out;
}

} // namespace wavetwin::fft
