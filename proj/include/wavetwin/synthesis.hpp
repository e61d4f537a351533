#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wavetwin/errors.hpp"
#include "wavetwin/grid.hpp"
#include "wavetwin/hos.hpp"
#include "wavetwin/rng.hpp"

namespace wavetwin {

/// Irregular-sea prescription. Wavenumber-domain shape with peak enhancement;
/// the realized field is rescaled so the global steepness kp * Hs / 2 hits
/// the requested value exactly (Hs = 4 sigma_eta).
struct JonswapSpec {
    double kp = 16.0;
    double steepness = 0.11;
    double gamma = 3.3;
    std::uint64_t seed = 0;
};

/// Unnormalized spectral density in k. The frequency-domain form
/// w^-5 exp(-1.25 (wp/w)^4) gamma^r maps through deep-water dispersion
/// w = sqrt(k) (g = 1) to k^-3 exp(-1.25 (kp/k)^2), with the peak-enhancement
/// exponent r = exp(-(sqrt k - sqrt kp)^2 / (2 sigma^2 kp)), sigma = 0.07
/// below the peak and 0.09 above.
inline double jonswap_density(double k, double kp, double gamma) {
    if (!(k > 0.0)) return 0.0;
    const double sigma = k <= kp ? 0.07 : 0.09;
    const double sq = std::sqrt(k) - std::sqrt(kp);
    const double r = std::exp(-sq * sq / (2.0 * sigma * sigma * kp));
    return std::pow(k, -3.0) * std::exp(-1.25 * (kp / k) * (kp / k)) *
           std::pow(gamma, r);
}

/// psi from eta by the linear deep-water relation for right-traveling waves:
/// per mode, psi_hat = -i eta_hat / sqrt(k); the mean is dropped.
inline std::vector<cplx> reconstruct_psi_spectral(const Grid& grid,
                                                  const std::vector<cplx>& eta_hat) {
    if (eta_hat.size() != grid.n / 2 + 1)
        throw invalid_input("reconstruct_psi: mode count does not match the grid");
    std::vector<cplx> psi_hat(eta_hat.size(), cplx{0.0, 0.0});
    const double k0 = grid.k0();
    for (std::size_t m = 1; m + 1 < eta_hat.size(); ++m) {
        const double inv_sqrt_k = 1.0 / std::sqrt(k0 * static_cast<double>(m));
        psi_hat[m] = cplx{0.0, -inv_sqrt_k} * eta_hat[m];
    }
    return psi_hat;
}

inline std::vector<double> reconstruct_psi_linear(const Grid& grid,
                                                  const std::vector<double>& eta) {
    SpectralField f(grid);
    f.modes = reconstruct_psi_spectral(grid, to_spectral(grid, eta).modes);
    return to_physical(f);
}

/// Random-phase realization of the spectrum on the grid at t = 0, with psi
/// attached by the linear relation. Reproducible from spec.seed; two seeds
/// share the amplitude moduli and differ only in phases.
inline WaveField realize_jonswap(const JonswapSpec& spec, const Grid& grid) {
    if (!(spec.kp >= grid.k0())) throw invalid_input("realize_jonswap: kp below k0");
    if (!(spec.steepness > 0.0)) throw invalid_input("realize_jonswap: steepness must be > 0");
    if (!(spec.gamma >= 1.0)) throw invalid_input("realize_jonswap: gamma must be >= 1");
    if (!(spec.kp < grid.k_max() / 4.0))
        throw invalid_input("realize_jonswap: kp unresolvable (needs kp < k_max/4, kp = " +
                            std::to_string(spec.kp) + ", k_max = " +
                            std::to_string(grid.k_max()) + ")");

    const double k0 = grid.k0();
    const std::size_t n_free = grid.n / 2 - 1; // modes 1 .. n/2-1
    std::vector<double> amp(n_free + 1, 0.0);
    double half_sum_sq = 0.0; // sum a_m^2 / 2 = variance of the field
    for (std::size_t m = 1; m <= n_free; ++m) {
        const double k = k0 * static_cast<double>(m);
        amp[m] = std::sqrt(2.0 * jonswap_density(k, spec.kp, spec.gamma) * k0);
        half_sum_sq += 0.5 * amp[m] * amp[m];
    }
    // Exact steepness: kp Hs / 2 = target, Hs = 4 sqrt(variance).
    const double hs_raw = 4.0 * std::sqrt(half_sum_sq);
    const double hs_target = 2.0 * spec.steepness / spec.kp;
    const double scale = hs_target / hs_raw;

    Rng rng(derive_seed(spec.seed, "jonswap-phase"));
    SpectralField eta(grid);
    for (std::size_t m = 1; m <= n_free; ++m) {
        const double phase = rng.uniform(0.0, 6.283185307179586476925287);
        // a cos(kx + phi) contributes (a/2) e^{i phi} to the half spectrum
        eta.modes[m] = 0.5 * scale * amp[m] * cplx{std::cos(phase), std::sin(phase)};
    }

    WaveField wf(grid);
    wf.eta = to_physical(eta);
    SpectralField psi(grid);
    psi.modes = reconstruct_psi_spectral(grid, eta.modes);
    wf.psi = to_physical(psi);
    wf.t = 0.0;
    return wf;
}

/// Measurement-noise magnitudes, all absolute standard deviations.
struct NoiseModel {
    double sigma_eta = 0.0;
    double sigma_psi = 0.0;
    double sigma_heave = 0.0;
    double sigma_roll = 0.0;
};

/// Variance carried into a pointwise psi value when white elevation noise of
/// unit variance per node passes through the linear reconstruction:
/// Var(psi_m(x)) = sigma^2 * (2 / (n k0)) * sum_{m=1}^{n/2-1} 1/m.
/// A cutoff below 1 restricts the sum to the retained band.
inline double psi_noise_variance_factor(const Grid& grid, double cutoff_frac = 1.0) {
    const double kc = cutoff_frac * grid.k_max();
    double h = 0.0;
    for (std::size_t m = 1; m < grid.n / 2; ++m)
        if (grid.k0() * static_cast<double>(m) <= kc) h += 1.0 / static_cast<double>(m);
    return 2.0 * h / (static_cast<double>(grid.n) * grid.k0());
}

/// Fraction of white per-node elevation noise variance that survives the
/// low-pass: kept spectral degrees of freedom over n. Exactly 1 at cutoff 1.
inline double eta_noise_variance_factor(const Grid& grid, double cutoff_frac) {
    if (cutoff_frac >= 1.0) return 1.0;
    const double kc = cutoff_frac * grid.k_max();
    double dofs = 1.0; // mode 0 always kept
    for (std::size_t m = 1; m <= grid.n / 2; ++m)
        if (grid.k0() * static_cast<double>(m) <= kc)
            dofs += (m == grid.n / 2) ? 1.0 : 2.0;
    return dofs / static_cast<double>(grid.n);
}

/// The field-level measurement process: white noise on every elevation node,
/// then psi rebuilt from the noisy elevation. This is also what gives the
/// probe's psi channel its (correlated-through-reconstruction) noise.
struct MeasuredWave {
    std::vector<double> eta_m;
    std::vector<double> psi_m;
};

inline MeasuredWave measure_wave_field(const Grid& grid, const std::vector<double>& eta_true,
                                       double sigma_eta, Rng& rng,
                                       double cutoff_frac = 1.0) {
    if (eta_true.size() != grid.n)
        throw invalid_input("measure_wave_field: field size does not match the grid");
    if (!(sigma_eta >= 0.0)) throw invalid_input("measure_wave_field: negative noise std");
    MeasuredWave out;
    out.eta_m.resize(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j)
        out.eta_m[j] = eta_true[j] + sigma_eta * rng.normal();
    if (cutoff_frac < 1.0) {
        // Project the noisy record onto the band the evolution model resolves:
        // outside it the signal is zero, so everything removed is pure noise.
        out.eta_m = to_physical(apply_lowpass(to_spectral(grid, out.eta_m), cutoff_frac));
    }
    out.psi_m = reconstruct_psi_linear(grid, out.eta_m);
    return out;
}

/// N copies of a raw measurement with independent zero-mean Gaussian noise
/// per channel; the exact variances used are recorded alongside.
struct MeasurementEnsemble {
    std::vector<double> raw;      // d
    std::vector<double> members;  // N x d, row-major
    std::vector<double> r_spec;   // d per-channel variances
    std::size_t n_members = 0;

    double member(std::size_t n, std::size_t c) const {
        return members[n * raw.size() + c];
    }
};

inline MeasurementEnsemble perturb_measurements(const std::vector<double>& raw,
                                                const std::vector<double>& stds,
                                                std::size_t n_members, Rng& rng) {
    if (n_members < 2)
        throw invalid_input("perturb_measurements: need at least 2 members, got " +
                            std::to_string(n_members));
    if (stds.size() != raw.size())
        throw invalid_input("perturb_measurements: one std per channel required");
    for (double s : stds)
        if (!(s >= 0.0)) throw invalid_input("perturb_measurements: negative std");

    MeasurementEnsemble out;
    out.raw = raw;
    out.n_members = n_members;
    out.r_spec.resize(raw.size());
    for (std::size_t c = 0; c < raw.size(); ++c) out.r_spec[c] = stds[c] * stds[c];
    out.members.resize(n_members * raw.size());
    // Centered draws: subtracting the sample mean of each channel's noise
    // keeps the member average pinned to the raw measurement exactly, so no
    // O(1/sqrt(N)) perturbation bias random-walks into the analysis mean.
    std::vector<double> noise(n_members);
    for (std::size_t c = 0; c < raw.size(); ++c) {
        double bar = 0.0;
        for (std::size_t n = 0; n < n_members; ++n) {
            noise[n] = stds[c] * rng.normal();
            bar += noise[n];
        }
        bar /= static_cast<double>(n_members);
        for (std::size_t n = 0; n < n_members; ++n)
            out.members[n * raw.size() + c] = raw[c] + noise[n] - bar;
    }
    return out;
}

} // namespace wavetwin
