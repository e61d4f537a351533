#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wavetwin/errors.hpp"
#include "wavetwin/fft.hpp"
#include "wavetwin/grid.hpp"

namespace wavetwin {

// Nonlinear potential-flow wave propagation on a periodic deep-water domain,
// nondimensionalized so g = 1. State is the surface elevation eta(x) and the
// surface potential psi(x) = phi(x, eta(x)). Their evolution is
//
//     eta_t = -psi_x eta_x + (1 + eta_x^2) phi_z
//     psi_t = -eta - 1/2 psi_x^2 + 1/2 (1 + eta_x^2) phi_z^2
//
// with phi_z obtained from a perturbation expansion of the vertical surface
// velocity in wave steepness (orders W_1 .. W_M). All products are formed
// order-consistently: a term whose total perturbation order exceeds M is
// dropped, so order = 1 reduces exactly to linear waves. Products are
// evaluated pointwise on a grid padded by ceil((M+1)/2), which folds any
// aliased images of an order-M product above the retained band.

struct HosConfig {
    int order = 3;
    double dt = 0.0;
    /// Energy-dissipation surrogate for breaking: after a step, modes above
    /// breaking_cutoff * k_max are zeroed. >= 1 disables the filter.
    double breaking_cutoff = 0.75;
    /// advance() applies the filter on every filter_every-th step; a lone
    /// step() call always counts as a filter step.
    int filter_every = 1;
    /// Pin the spatial mean of eta during propagation (the semi-discrete
    /// equations only conserve it to truncation error).
    bool conserve_mass = true;
};

struct WaveField {
    Grid grid;
    std::vector<double> eta, psi;
    double t = 0.0;

    WaveField() = default;
    explicit WaveField(const Grid& g)
        : grid(g), eta(g.n, 0.0), psi(g.n, 0.0) {}
};

struct WaveRates {
    std::vector<double> eta_t, psi_t;
};

/// Wave state in mode space; the representation the integrator and the
/// filter actually advance. eta/psi each hold n/2 + 1 half-spectrum bins.
struct SpectralPair {
    std::vector<cplx> eta, psi;
};

/// Stage elevations captured from one RK4 step, for force models that must
/// sample the wave surface at the integrator's internal stage times
/// (t, t + dt/2, t + dt/2, t + dt).
struct RkStageEta {
    std::array<std::vector<cplx>, 4> eta_hat;
};

namespace hos_detail {

inline std::size_t pad_size(std::size_t n, int order) {
    const std::size_t mult = (static_cast<std::size_t>(order) + 2) / 2; // ceil((M+1)/2)
    return detail::next_pow2(mult * n);
}

/// Scratch for one right-hand-side evaluation; reused across steps.
struct Workspace {
    std::size_t n = 0, pad = 0;
    int order = 0;
    double k0 = 0.0;

    std::vector<std::vector<double>> eta_pow;      // eta^l / l!, l = 1..M-1, padded grid
    std::vector<std::vector<cplx>> phi_hat;        // phi^(m) half spectra, m = 1..M
    std::vector<std::vector<std::vector<double>>> dphi; // dphi[m][d] = Lambda^d phi^(m), padded physical
    std::vector<std::vector<char>> dphi_ready;
    std::vector<std::vector<double>> w;            // W_m, padded grid
    std::vector<double> eta_x, psi_x, acc, acc2, wprefix;
    std::vector<cplx> wide;                        // padded half spectrum

    void resize(std::size_t n_, int order_, double k0_) {
        if (n == n_ && order == order_ && k0 == k0_) return;
        n = n_;
        order = order_;
        k0 = k0_;
        pad = pad_size(n, order);
        const std::size_t M = static_cast<std::size_t>(order);
        eta_pow.assign(M, std::vector<double>(pad));
        phi_hat.assign(M + 1, std::vector<cplx>(n / 2 + 1));
        dphi.assign(M + 1, std::vector<std::vector<double>>(M + 2));
        dphi_ready.assign(M + 1, std::vector<char>(M + 2, 0));
        for (auto& row : dphi)
            for (auto& v : row) v.resize(pad);
        w.assign(M + 1, std::vector<double>(pad));
        eta_x.resize(pad);
        psi_x.resize(pad);
        acc.resize(pad);
        acc2.resize(pad);
        wprefix.resize(pad);
        wide.resize(pad / 2 + 1);
    }
};

inline Workspace& workspace(std::size_t n, int order, double k0) {
    static thread_local Workspace ws;
    ws.resize(n, order, k0);
    return ws;
}

/// Inverse transform of a band-limited half spectrum onto the padded grid,
/// with per-mode multiplier factor(m).
template <typename F>
void to_padded(const std::vector<cplx>& hat, std::size_t n, Workspace& ws, F&& factor,
               double* out) {
    const std::size_t nb = n / 2 + 1;
    for (std::size_t m = 0; m < nb; ++m) ws.wide[m] = hat[m] * factor(m);
    std::fill(ws.wide.begin() + static_cast<std::ptrdiff_t>(nb), ws.wide.end(), cplx{0.0, 0.0});
    fft::irfft_half(ws.wide.data(), ws.pad, out);
}

/// Forward transform of a padded physical field, truncated to the resolved
/// band (Nyquist zeroed, mode 0 forced real).
inline void to_band(const double* f, Workspace& ws, std::vector<cplx>& hat) {
    fft::rfft_half(f, ws.pad, ws.wide.data());
    const double inv = 1.0 / static_cast<double>(ws.pad);
    const std::size_t nb = ws.n / 2 + 1;
    hat.resize(nb);
    for (std::size_t m = 0; m + 1 < nb; ++m) hat[m] = ws.wide[m] * inv;
    hat[0] = {hat[0].real(), 0.0};
    hat[nb - 1] = {0.0, 0.0};
}

inline const double* lambda_phi(Workspace& ws, std::size_t m, std::size_t d) {
    if (!ws.dphi_ready[m][d]) {
        const double k0 = ws.k0;
        to_padded(ws.phi_hat[m], ws.n, ws,
                  [&](std::size_t mode) {
                      double f = 1.0;
                      const double lam = k0 * static_cast<double>(mode);
                      for (std::size_t p = 0; p < d; ++p) f *= lam;
                      return cplx{f, 0.0};
                  },
                  ws.dphi[m][d].data());
        ws.dphi_ready[m][d] = 1;
    }
    return ws.dphi[m][d].data();
}

/// Evaluates the order-expanded vertical velocities W_1..W_M on the padded
/// grid from the current (eta_hat, psi_hat). Leaves them in ws.w.
inline void vertical_velocity_orders(const std::vector<cplx>& eta_hat,
                                     const std::vector<cplx>& psi_hat, Workspace& ws) {
    const std::size_t M = static_cast<std::size_t>(ws.order);
    const std::size_t P = ws.pad;

    for (auto& row : ws.dphi_ready) std::fill(row.begin(), row.end(), 0);

    to_padded(eta_hat, ws.n, ws, [](std::size_t) { return cplx{1.0, 0.0}; },
              ws.eta_pow[0].data());
    const double* eta_p = ws.eta_pow[0].data();
    for (std::size_t l = 2; M >= 2 && l <= M - 1; ++l) {
        const double inv_l = 1.0 / static_cast<double>(l);
        double* dst = ws.eta_pow[l - 1].data();
        const double* prev = ws.eta_pow[l - 2].data();
        for (std::size_t j = 0; j < P; ++j) dst[j] = prev[j] * eta_p[j] * inv_l;
    }

    ws.phi_hat[1] = psi_hat;
    for (std::size_t m = 2; m <= M; ++m) {
        std::fill(ws.acc.begin(), ws.acc.end(), 0.0);
        for (std::size_t l = 1; l <= m - 1; ++l) {
            const double* ep = ws.eta_pow[l - 1].data();
            const double* dp = lambda_phi(ws, m - l, l);
            double* a = ws.acc.data();
            for (std::size_t j = 0; j < P; ++j) a[j] -= ep[j] * dp[j];
        }
        to_band(ws.acc.data(), ws, ws.phi_hat[m]);
    }

    for (std::size_t m = 1; m <= M; ++m) {
        double* wm = ws.w[m].data();
        const double* base = lambda_phi(ws, m, 1);
        std::copy(base, base + P, wm);
        for (std::size_t l = 1; l <= m - 1; ++l) {
            const double* ep = ws.eta_pow[l - 1].data();
            const double* dp = lambda_phi(ws, m - l, l + 1);
            for (std::size_t j = 0; j < P; ++j) wm[j] += ep[j] * dp[j];
        }
    }
}

/// Order-consistent free-surface right-hand side in mode space.
inline void rhs_spectral(const std::vector<cplx>& eta_hat, const std::vector<cplx>& psi_hat,
                         const Grid& grid, int order, std::vector<cplx>& eta_t_hat,
                         std::vector<cplx>& psi_t_hat) {
    if (order < 1) throw invalid_input("wave rhs: expansion order must be >= 1");
    Workspace& ws = workspace(grid.n, order, grid.k0());
    const std::size_t M = static_cast<std::size_t>(order);
    const std::size_t P = ws.pad;
    const double k0 = grid.k0();

    vertical_velocity_orders(eta_hat, psi_hat, ws);

    if (M >= 2) {
        to_padded(eta_hat, grid.n, ws,
                  [&](std::size_t m) { return cplx{0.0, k0 * static_cast<double>(m)}; },
                  ws.eta_x.data());
        to_padded(psi_hat, grid.n, ws,
                  [&](std::size_t m) { return cplx{0.0, k0 * static_cast<double>(m)}; },
                  ws.psi_x.data());
    }

    // eta_t = W (all orders) - psi_x eta_x [order >= 2]
    //         + eta_x^2 * (W_1..W_{M-2})  [order >= 3]
    std::fill(ws.acc.begin(), ws.acc.end(), 0.0);
    double* et = ws.acc.data();
    for (std::size_t m = 1; m <= M; ++m) {
        const double* wm = ws.w[m].data();
        for (std::size_t j = 0; j < P; ++j) et[j] += wm[j];
    }
    if (M >= 2) {
        const double* ex = ws.eta_x.data();
        const double* px = ws.psi_x.data();
        for (std::size_t j = 0; j < P; ++j) et[j] -= px[j] * ex[j];
    }
    if (M >= 3) {
        std::fill(ws.wprefix.begin(), ws.wprefix.end(), 0.0);
        double* pre = ws.wprefix.data();
        for (std::size_t m = 1; m <= M - 2; ++m) {
            const double* wm = ws.w[m].data();
            for (std::size_t j = 0; j < P; ++j) pre[j] += wm[j];
        }
        const double* ex = ws.eta_x.data();
        for (std::size_t j = 0; j < P; ++j) et[j] += ex[j] * ex[j] * pre[j];
    }
    to_band(ws.acc.data(), ws, eta_t_hat);

    // psi_t = -eta - 1/2 psi_x^2 + 1/2 (W W)_{<=M} [order >= 2]
    //         + 1/2 eta_x^2 (W W)_{<=M-2}          [order >= 4]
    std::fill(ws.acc2.begin(), ws.acc2.end(), 0.0);
    double* pt = ws.acc2.data();
    if (M >= 2) {
        const double* px = ws.psi_x.data();
        for (std::size_t j = 0; j < P; ++j) pt[j] -= 0.5 * px[j] * px[j];
        std::fill(ws.wprefix.begin(), ws.wprefix.end(), 0.0);
        double* pre = ws.wprefix.data();
        for (std::size_t i = M - 1; i >= 1; --i) {
            // pre accumulates W_1 + .. + W_{M-i} as i descends
            const double* wadd = ws.w[M - i].data();
            for (std::size_t j = 0; j < P; ++j) pre[j] += wadd[j];
            const double* wi = ws.w[i].data();
            for (std::size_t j = 0; j < P; ++j) pt[j] += 0.5 * wi[j] * pre[j];
        }
    }
    if (M >= 4) {
        std::fill(ws.wprefix.begin(), ws.wprefix.end(), 0.0);
        double* pre = ws.wprefix.data();
        const double* ex = ws.eta_x.data();
        for (std::size_t i = M - 3; i >= 1; --i) {
            const double* wadd = ws.w[M - 2 - i].data();
            for (std::size_t j = 0; j < P; ++j) pre[j] += wadd[j];
            const double* wi = ws.w[i].data();
            for (std::size_t j = 0; j < P; ++j)
                pt[j] += 0.5 * ex[j] * ex[j] * wi[j] * pre[j];
        }
    }
    to_band(ws.acc2.data(), ws, psi_t_hat);
    for (std::size_t m = 0; m < psi_t_hat.size(); ++m) psi_t_hat[m] -= eta_hat[m];
    psi_t_hat[0] = {psi_t_hat[0].real(), 0.0};
    psi_t_hat.back() = {0.0, 0.0};
}

inline void check_finite(const SpectralPair& s, double t) {
    for (const auto& v : {&s.eta, &s.psi})
        for (const cplx& c : *v)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw numerical_instability(
                    "wave step produced non-finite values at t = " + std::to_string(t));
}

} // namespace hos_detail

inline SpectralPair to_spectral_pair(const WaveField& wf) {
    if (wf.eta.size() != wf.grid.n || wf.psi.size() != wf.grid.n)
        throw invalid_input("wave field sample counts do not match the grid");
    SpectralPair s;
    s.eta = to_spectral(wf.grid, wf.eta).modes;
    s.psi = to_spectral(wf.grid, wf.psi).modes;
    return s;
}

inline void to_wave_field(const SpectralPair& s, WaveField& wf) {
    SpectralField f(wf.grid);
    f.modes = s.eta;
    wf.eta = to_physical(f);
    f.modes = s.psi;
    wf.psi = to_physical(f);
}

/// Instantaneous time derivatives (eta_t, psi_t) at the given expansion order.
inline WaveRates rhs(const WaveField& wf, int order) {
    const SpectralPair s = to_spectral_pair(wf);
    std::vector<cplx> et, pt;
    hos_detail::rhs_spectral(s.eta, s.psi, wf.grid, order, et, pt);
    SpectralField f(wf.grid);
    WaveRates r;
    f.modes = et;
    r.eta_t = to_physical(f);
    f.modes = pt;
    r.psi_t = to_physical(f);
    return r;
}

/// phi_z at the free surface, summed over expansion orders 1..order.
inline std::vector<double> surface_vertical_velocity(const WaveField& wf, int order) {
    if (order < 1) throw invalid_input("surface_vertical_velocity: order must be >= 1");
    const SpectralPair s = to_spectral_pair(wf);
    auto& ws = hos_detail::workspace(wf.grid.n, order, wf.grid.k0());
    hos_detail::vertical_velocity_orders(s.eta, s.psi, ws);
    std::fill(ws.acc.begin(), ws.acc.end(), 0.0);
    for (int m = 1; m <= order; ++m)
        for (std::size_t j = 0; j < ws.pad; ++j) ws.acc[j] += ws.w[m][j];
    std::vector<cplx> hat;
    hos_detail::to_band(ws.acc.data(), ws, hat);
    SpectralField f(wf.grid);
    f.modes = hat;
    return to_physical(f);
}

/// One RK4 step of the mode-space state. Does not filter; the caller owns the
/// breaking filter cadence. Optionally captures the stage elevations.
inline void step_spectral(SpectralPair& s, const Grid& grid, const HosConfig& cfg, double t,
                          RkStageEta* stages = nullptr) {
    if (!(cfg.dt > 0.0)) throw invalid_input("wave step: dt must be positive");
    const std::size_t nb = grid.n / 2 + 1;
    if (s.eta.size() != nb || s.psi.size() != nb)
        throw invalid_input("wave step: state size does not match the grid");

    static thread_local std::vector<cplx> e1, p1, e2, p2, e3, p3, e4, p4, te, tp;
    const double dt = cfg.dt;

    auto stage_state = [&](const std::vector<cplx>& ke, const std::vector<cplx>& kp,
                           double h) {
        te.resize(nb);
        tp.resize(nb);
        for (std::size_t m = 0; m < nb; ++m) {
            te[m] = s.eta[m] + h * ke[m];
            tp[m] = s.psi[m] + h * kp[m];
        }
    };
    auto eval = [&](const std::vector<cplx>& e, const std::vector<cplx>& p,
                    std::vector<cplx>& ke, std::vector<cplx>& kp) {
        hos_detail::rhs_spectral(e, p, grid, cfg.order, ke, kp);
        if (cfg.conserve_mass) ke[0] = {0.0, 0.0};
    };

    if (stages) stages->eta_hat[0] = s.eta;
    eval(s.eta, s.psi, e1, p1);
    stage_state(e1, p1, 0.5 * dt);
    if (stages) stages->eta_hat[1] = te;
    eval(te, tp, e2, p2);
    stage_state(e2, p2, 0.5 * dt);
    if (stages) stages->eta_hat[2] = te;
    eval(te, tp, e3, p3);
    stage_state(e3, p3, dt);
    if (stages) stages->eta_hat[3] = te;
    eval(te, tp, e4, p4);

    const double w = dt / 6.0;
    for (std::size_t m = 0; m < nb; ++m) {
        s.eta[m] += w * (e1[m] + 2.0 * e2[m] + 2.0 * e3[m] + e4[m]);
        s.psi[m] += w * (p1[m] + 2.0 * p2[m] + 2.0 * p3[m] + p4[m]);
    }
    hos_detail::check_finite(s, t + dt);
}

inline void filter_spectral(SpectralPair& s, const Grid& grid, double cutoff_frac) {
    if (cutoff_frac >= 1.0) return;
    const double kc = cutoff_frac * grid.k_max();
    const double k0 = grid.k0();
    for (std::size_t m = 1; m < s.eta.size(); ++m) {
        if (k0 * static_cast<double>(m) > kc) {
            s.eta[m] = {0.0, 0.0};
            s.psi[m] = {0.0, 0.0};
        }
    }
}

/// One RK4 step plus the breaking filter.
inline WaveField step(const WaveField& wf, const HosConfig& cfg) {
    SpectralPair s = to_spectral_pair(wf);
    step_spectral(s, wf.grid, cfg, wf.t);
    filter_spectral(s, wf.grid, cfg.breaking_cutoff);
    WaveField out = wf;
    to_wave_field(s, out);
    out.t = wf.t + cfg.dt;
    return out;
}

/// n_steps RK4 steps with the filter applied every cfg.filter_every steps.
inline WaveField advance(const WaveField& wf, const HosConfig& cfg, std::size_t n_steps) {
    if (cfg.filter_every < 1) throw invalid_input("advance: filter_every must be >= 1");
    SpectralPair s = to_spectral_pair(wf);
    double t = wf.t;
    for (std::size_t i = 0; i < n_steps; ++i) {
        step_spectral(s, wf.grid, cfg, t);
        t += cfg.dt;
        if ((i + 1) % static_cast<std::size_t>(cfg.filter_every) == 0)
            filter_spectral(s, wf.grid, cfg.breaking_cutoff);
    }
    WaveField out = wf;
    to_wave_field(s, out);
    out.t = t;
    return out;
}

struct WaveDiagnostics {
    double mass = 0.0;         // integral of eta over the domain
    double energy = 0.0;       // 1/2 integral of (eta^2 + psi eta_t)
    double peak_wavenumber = 0.0;
    double sig_height = 0.0;   // 4 x std dev of eta
    double steepness = 0.0;    // peak_wavenumber * sig_height / 2
};

inline WaveDiagnostics diagnostics(const WaveField& wf, int order) {
    WaveDiagnostics d;
    const double dx = wf.grid.dx();
    const std::size_t n = wf.grid.n;
    double sum = 0.0, sum2 = 0.0;
    for (double e : wf.eta) {
        sum += e;
        sum2 += e * e;
    }
    d.mass = dx * sum;
    const double mean = sum / static_cast<double>(n);
    const double var = sum2 / static_cast<double>(n) - mean * mean;
    d.sig_height = 4.0 * std::sqrt(var > 0.0 ? var : 0.0);

    const WaveRates r = rhs(wf, order);
    double e_acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        e_acc += 0.5 * (wf.eta[j] * wf.eta[j] + wf.psi[j] * r.eta_t[j]);
    d.energy = dx * e_acc;

    const SpectralField f = to_spectral(wf.grid, wf.eta);
    double best = -1.0;
    std::size_t best_m = 0;
    for (std::size_t m = 1; m < f.modes.size(); ++m) {
        const double a = std::abs(f.modes[m]);
        if (a > best) {
            best = a;
            best_m = m;
        }
    }
    d.peak_wavenumber = wf.grid.k0() * static_cast<double>(best_m);
    d.steepness = 0.5 * d.peak_wavenumber * d.sig_height;
    return d;
}

} // namespace wavetwin
