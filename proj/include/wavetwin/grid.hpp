#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "wavetwin/errors.hpp"
#include "wavetwin/fft.hpp"

namespace wavetwin {

using cplx = std::complex<double>;

/// Periodic 1-D collocation grid on [0, domain_length).
struct Grid {
    std::size_t n = 0;
    double domain_length = 0.0;

    Grid() = default;
    Grid(std::size_t n_, double length) : n(n_), domain_length(length) {
        if (!fft::detail::is_pow2(n) || n < 4)
            throw invalid_input("Grid: point count must be a power of two >= 4, got " +
                                std::to_string(n));
        if (!(domain_length > 0.0))
            throw invalid_input("Grid: domain length must be positive");
    }

    double dx() const { return domain_length / static_cast<double>(n); }
    double k0() const { return 6.283185307179586476925287 / domain_length; }
    double x(std::size_t j) const { return dx() * static_cast<double>(j); }
    /// Largest resolved wavenumber; the Nyquist bin is excluded by convention.
    double k_max() const { return k0() * static_cast<double>(n / 2 - 1); }

    bool operator==(const Grid& o) const {
        return n == o.n && domain_length == o.domain_length;
    }
};

/// Half-spectrum of a real periodic field: modes[m] multiplies e^{i m k0 x}
/// for m = 0 .. n/2, and the field is
///     f(x) = modes[0].real() + 2 Re sum_{m>=1} modes[m] e^{i m k0 x}.
/// Mode 0 is real and the Nyquist bin (m = n/2) is kept identically zero, so
/// realness of the represented field is structural rather than a runtime
/// property to maintain.
struct SpectralField {
    Grid grid;
    std::vector<cplx> modes;

    SpectralField() = default;
    explicit SpectralField(const Grid& g) : grid(g), modes(g.n / 2 + 1, cplx{0.0, 0.0}) {}

    std::size_t n_modes() const { return modes.size(); }
};

/// Samples -> mode amplitudes (forward transform scaled by 1/n).
inline SpectralField to_spectral(const Grid& grid, const std::vector<double>& samples) {
    if (samples.size() != grid.n)
        throw invalid_input("to_spectral: sample count " + std::to_string(samples.size()) +
                            " does not match grid size " + std::to_string(grid.n));
    SpectralField f(grid);
    fft::rfft_half(samples.data(), grid.n, f.modes.data());
    const double inv_n = 1.0 / static_cast<double>(grid.n);
    for (auto& m : f.modes) m *= inv_n;
    f.modes[0] = {f.modes[0].real(), 0.0};
    f.modes.back() = {0.0, 0.0};
    return f;
}

/// Mode amplitudes -> samples, optionally on a finer grid (out_n >= n) for
/// dealiased pointwise work. Amplitudes are physical, so refinement is plain
/// zero-extension of the spectrum.
inline std::vector<double> to_physical(const SpectralField& f, std::size_t out_n = 0) {
    if (out_n == 0) out_n = f.grid.n;
    if (out_n < f.grid.n || !fft::detail::is_pow2(out_n))
        throw invalid_input("to_physical: output size must be a power of two >= grid size");
    std::vector<double> samples(out_n);
    if (out_n == f.grid.n) {
        fft::irfft_half(f.modes.data(), out_n, samples.data());
    } else {
        std::vector<cplx> padded(out_n / 2 + 1, cplx{0.0, 0.0});
        std::copy(f.modes.begin(), f.modes.end(), padded.begin());
        fft::irfft_half(padded.data(), out_n, samples.data());
    }
    return samples;
}

/// d^order/dx^order in spectral space: mode m scales by (i m k0)^order.
inline SpectralField spectral_derivative(const SpectralField& f, int order = 1) {
    if (order < 0) throw invalid_input("spectral_derivative: order must be >= 0");
    SpectralField out = f;
    const double k0 = f.grid.k0();
    for (std::size_t m = 0; m + 1 < out.modes.size(); ++m) {
        cplx factor{1.0, 0.0};
        const cplx ik{0.0, k0 * static_cast<double>(m)};
        for (int p = 0; p < order; ++p) factor *= ik;
        out.modes[m] *= factor;
    }
    out.modes.back() = {0.0, 0.0};
    if (order >= 1) out.modes[0] = {0.0, 0.0};
    return out;
}

/// Zeroes all modes with |k| strictly above cutoff_frac * k_max. The mean
/// (m = 0) is never touched. cutoff_frac >= 1 is a no-op.
inline SpectralField apply_lowpass(const SpectralField& f, double cutoff_frac) {
    if (!(cutoff_frac > 0.0))
        throw invalid_input("apply_lowpass: cutoff fraction must be positive");
    SpectralField out = f;
    if (cutoff_frac >= 1.0) return out;
    const double kc = cutoff_frac * f.grid.k_max();
    const double k0 = f.grid.k0();
    for (std::size_t m = 1; m < out.modes.size(); ++m)
        if (k0 * static_cast<double>(m) > kc) out.modes[m] = {0.0, 0.0};
    return out;
}

namespace detail {
/// Smallest power of two >= x.
inline std::size_t next_pow2(std::size_t x) {
    std::size_t p = 1;
    while (p < x) p <<= 1;
    return p;
}
} // namespace detail

/// Pointwise product of two fields, evaluated on a double-size grid so the
/// quadratic interaction cannot alias back into the resolved band; the result
/// is truncated to the original band.
inline SpectralField dealiased_product(const SpectralField& a, const SpectralField& b) {
    if (!(a.grid == b.grid))
        throw invalid_input("dealiased_product: operands live on different grids");
    const std::size_t pad = 2 * a.grid.n;
    std::vector<double> pa = to_physical(a, pad);
    const std::vector<double> pb = to_physical(b, pad);
    for (std::size_t j = 0; j < pad; ++j) pa[j] *= pb[j];
    std::vector<cplx> wide(pad / 2 + 1);
    fft::rfft_half(pa.data(), pad, wide.data());
    SpectralField out(a.grid);
    const double inv = 1.0 / static_cast<double>(pad);
    for (std::size_t m = 0; m + 1 < out.modes.size(); ++m) out.modes[m] = wide[m] * inv;
    out.modes[0] = {out.modes[0].real(), 0.0};
    out.modes.back() = {0.0, 0.0};
    return out;
}

} // namespace wavetwin
