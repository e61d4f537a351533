#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wavetwin/errors.hpp"
#include "wavetwin/observation.hpp"
#include "wavetwin/rng.hpp"

namespace wavetwin {

// Perturbed-observation ensemble Kalman filter over the joint wave-ship
// (-parameter) state. The state covariance is never materialized: the gain
// K = A (GA)^T [ (GA)(GA)^T + R ]^{-1}
// works through the N anomaly columns, and only the obs x obs innovation
// covariance is factorized.

/// Flat-state bookkeeping: [eta samples | psi samples | S3 S4 V3 V4 | params].
struct StateLayout {
    std::size_t n_grid = 0;
    std::size_t n_params = 0;
    static constexpr std::size_t ship_dofs = 4;

    std::size_t eta_offset() const { return 0; }
    std::size_t psi_offset() const { return n_grid; }
    std::size_t ship_offset() const { return 2 * n_grid; }
    std::size_t param_offset() const { return 2 * n_grid + ship_dofs; }
    std::size_t dim() const { return 2 * n_grid + ship_dofs + n_params; }

    bool operator==(const StateLayout& o) const {
        return n_grid == o.n_grid && n_params == o.n_params;
    }

    std::size_t index_of(const ObservationChannel& ch) const {
        using K = ObservationChannel::Kind;
        switch (ch.kind) {
            case K::eta_node:
                if (ch.node >= n_grid)
                    throw invalid_input("observation channel: eta node out of range");
                return eta_offset() + ch.node;
            case K::psi_node:
                if (ch.node >= n_grid)
                    throw invalid_input("observation channel: psi node out of range");
                return psi_offset() + ch.node;
            case K::heave: return ship_offset() + 0;
            case K::roll: return ship_offset() + 1;
        }
        throw invalid_input("observation channel: unknown kind");
    }
};

/// N state vectors sharing one layout, stored member-major (each member's
/// vector contiguous).
struct EnsembleState {
    StateLayout layout;
    std::size_t n_members = 0;
    std::vector<double> data;

    EnsembleState() = default;
    EnsembleState(const StateLayout& l, std::size_t n)
        : layout(l), n_members(n), data(l.dim() * n, 0.0) {
        if (n < 2) throw invalid_input("ensemble needs at least 2 members");
    }

    double* member(std::size_t n) { return data.data() + n * layout.dim(); }
    const double* member(std::size_t n) const { return data.data() + n * layout.dim(); }

    std::vector<double> mean() const {
        const std::size_t d = layout.dim();
        std::vector<double> mu(d, 0.0);
        for (std::size_t n = 0; n < n_members; ++n) {
            const double* m = member(n);
            for (std::size_t i = 0; i < d; ++i) mu[i] += m[i];
        }
        const double inv = 1.0 / static_cast<double>(n_members);
        for (double& v : mu) v *= inv;
        // Entries identical across all members must carry exactly zero
        // spread, but the rounded average can drift off the shared value;
        // that phantom spread would make a singular innovation covariance
        // look invertible. Snap exact ties.
        for (std::size_t i = 0; i < d; ++i) {
            const double v = member(0)[i];
            bool same = true;
            for (std::size_t n = 1; same && n < n_members; ++n) same = member(n)[i] == v;
            if (same) mu[i] = v;
        }
        return mu;
    }
};

/// Centered, 1/sqrt(N-1)-scaled member columns (column n contiguous).
struct Anomalies {
    std::vector<double> mean; // dim
    std::vector<double> a;    // dim x N, a[n*dim + i]
    std::size_t dim = 0, n_members = 0;
};

inline Anomalies anomalies(const EnsembleState& ens) {
    Anomalies out;
    out.dim = ens.layout.dim();
    out.n_members = ens.n_members;
    out.mean = ens.mean();
    out.a.resize(out.dim * out.n_members);
    const double s = 1.0 / std::sqrt(static_cast<double>(ens.n_members - 1));
    for (std::size_t n = 0; n < ens.n_members; ++n) {
        const double* m = ens.member(n);
        double* col = out.a.data() + n * out.dim;
        for (std::size_t i = 0; i < out.dim; ++i) col[i] = s * (m[i] - out.mean[i]);
    }
    return out;
}

namespace enkf_detail {

/// In-place lower Cholesky of a dense symmetric matrix; false on a
/// nonpositive pivot (singular/indefinite).
inline bool cholesky(std::vector<double>& m, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = m[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= m[i * d + k] * m[j * d + k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                m[i * d + i] = std::sqrt(s);
            } else {
                m[i * d + j] = s / m[j * d + j];
            }
        }
        for (std::size_t j = i + 1; j < d; ++j) m[i * d + j] = 0.0;
    }
    return true;
}

inline void chol_solve(const std::vector<double>& l, std::size_t d, const double* b,
                       double* x) {
    // L y = b
    for (std::size_t i = 0; i < d; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * d + k] * x[k];
        x[i] = s / l[i * d + i];
    }
    // L^T x = y
    for (std::size_t i = d; i-- > 0;) {
        double s = x[i];
        for (std::size_t k = i + 1; k < d; ++k) s -= l[k * d + i] * x[k];
        x[i] = s / l[i * d + i];
    }
}

} // namespace enkf_detail

/// Gaspari-Cohn fifth-order compactly supported correlation taper: 1 at zero
/// separation, smoothly to 0 at |r| = 2c. Standard antidote to the spurious
/// long-range covariances a finite ensemble fabricates.
inline double taper_weight(double r, double c) {
    if (!(c > 0.0)) throw invalid_input("taper_weight: radius must be > 0");
    const double z = std::abs(r) / c;
    if (z >= 2.0) return 0.0;
    const double z2 = z * z, z3 = z2 * z, z4 = z3 * z, z5 = z4 * z;
    if (z <= 1.0) return 1.0 - (5.0 / 3.0) * z2 + 0.625 * z3 + 0.5 * z4 - 0.25 * z5;
    return 4.0 - 5.0 * z + (5.0 / 3.0) * z2 + 0.625 * z3 - 0.5 * z4 + z5 / 12.0 -
           (2.0 / 3.0) / z;
}

/// Elementwise weights on the state-observation covariance, row per state
/// entry, column per observation channel. Empty = no localization.
struct GainTaper {
    std::vector<double> w; // dim x d
    std::size_t dim = 0, d = 0;
    bool empty() const { return w.empty(); }
};

/// The gain as an operator: apply() maps an innovation (obs space) to a state
/// increment without ever forming the dim x dim covariance.
class KalmanGain {
public:
    /// a: state anomalies (dim x N); ga: observed anomalies (d per member,
    /// ga[n*d + c]); r: dense d x d observation covariance; taper: optional
    /// elementwise localization of the state-observation covariance; shrink:
    /// scale each cross-covariance entry by its estimated signal fraction
    /// p^2 / (p^2 + var_i var_c / (N-1)), damping correlations that are
    /// indistinguishable from finite-ensemble sampling noise while leaving
    /// strong ones intact, whatever their range.
    KalmanGain(std::vector<double> a, std::size_t dim, std::vector<double> ga,
               std::size_t d, std::size_t n_members, const std::vector<double>& r,
               const GainTaper& taper = {}, bool shrink = false)
        : dim_(dim), d_(d) {
        std::vector<double> s(r);
        if (s.size() != d * d) throw invalid_input("kalman_gain: R must be d x d");
        for (std::size_t n = 0; n < n_members; ++n) {
            const double* g = ga.data() + n * d_;
            for (std::size_t i = 0; i < d_; ++i)
                for (std::size_t j = 0; j < d_; ++j) s[i * d_ + j] += g[i] * g[j];
        }
        if (!enkf_detail::cholesky(s, d_)) {
            double ga_norm = 0.0;
            for (double v : ga) ga_norm = std::max(ga_norm, std::abs(v));
            throw degenerate_ensemble(
                "innovation covariance is singular (observed-anomaly max |GA| = " +
                std::to_string(ga_norm) + ")");
        }
        chol_ = std::move(s);

        // cross-covariance P = A (GA)^T, tapered elementwise
        if (!taper.empty() && (taper.dim != dim_ || taper.d != d_))
            throw invalid_input("kalman_gain: taper shape mismatch");
        p_.assign(dim_ * d_, 0.0);
        for (std::size_t n = 0; n < n_members; ++n) {
            const double* g = ga.data() + n * d_;
            const double* col = a.data() + n * dim_;
            for (std::size_t i = 0; i < dim_; ++i)
                for (std::size_t c = 0; c < d_; ++c) p_[i * d_ + c] += col[i] * g[c];
        }
        if (shrink && n_members > 1) {
            std::vector<double> v_state(dim_, 0.0), v_obs(d_, 0.0);
            for (std::size_t n = 0; n < n_members; ++n) {
                const double* g = ga.data() + n * d_;
                const double* col = a.data() + n * dim_;
                for (std::size_t i = 0; i < dim_; ++i) v_state[i] += col[i] * col[i];
                for (std::size_t c = 0; c < d_; ++c) v_obs[c] += g[c] * g[c];
            }
            const double inv_nm1 = 1.0 / static_cast<double>(n_members - 1);
            for (std::size_t i = 0; i < dim_; ++i)
                for (std::size_t c = 0; c < d_; ++c) {
                    double& p = p_[i * d_ + c];
                    const double noise = v_state[i] * v_obs[c] * inv_nm1;
                    p = (p == 0.0) ? 0.0 : p * (p * p) / (p * p + noise);
                }
        }
        if (!taper.empty())
            for (std::size_t i = 0; i < dim_ * d_; ++i) p_[i] *= taper.w[i];
    }

    std::size_t state_dim() const { return dim_; }
    std::size_t obs_dim() const { return d_; }

    /// increment = P S^{-1} innovation
    void apply(const double* innovation, double* increment) const {
        std::vector<double> y(d_);
        enkf_detail::chol_solve(chol_, d_, innovation, y.data());
        for (std::size_t i = 0; i < dim_; ++i) {
            double u = 0.0;
            const double* row = p_.data() + i * d_;
            for (std::size_t c = 0; c < d_; ++c) u += row[c] * y[c];
            increment[i] = u;
        }
    }

    /// Dense dim x d gain matrix (testing/diagnostics; O(dim d N)).
    std::vector<double> dense() const {
        std::vector<double> k(dim_ * d_, 0.0);
        std::vector<double> e(d_, 0.0), col(dim_);
        for (std::size_t c = 0; c < d_; ++c) {
            std::fill(e.begin(), e.end(), 0.0);
            e[c] = 1.0;
            apply(e.data(), col.data());
            for (std::size_t i = 0; i < dim_; ++i) k[i * d_ + c] = col[i];
        }
        return k;
    }

private:
    std::vector<double> p_, chol_;
    std::size_t dim_ = 0, d_ = 0;
};

/// Builds the gain from ensemble anomalies and an observation description.
inline KalmanGain kalman_gain(const Anomalies& an, const StateLayout& layout,
                              const ObservationOperator& op,
                              const std::vector<double>& r_dense,
                              const GainTaper& taper = {}, bool shrink = false) {
    const std::size_t d = op.dim();
    std::vector<double> ga(an.n_members * d);
    for (std::size_t n = 0; n < an.n_members; ++n) {
        const double* col = an.a.data() + n * an.dim;
        for (std::size_t c = 0; c < d; ++c) ga[n * d + c] = col[layout.index_of(op.channels[c])];
    }
    return KalmanGain(an.a, an.dim, std::move(ga), d, an.n_members, r_dense, taper,
                      shrink);
}

/// Localization weights from physical positions: wave-grid entries sit at
/// their nodes, the ship block and every parameter sit at the hull center.
/// Distances are periodic on the domain; radius is the taper's half-support.
inline GainTaper make_gain_taper(const StateLayout& layout, double domain_length,
                                 double hull_x, const ObservationOperator& op,
                                 double radius, double psi_radius = 0.0) {
    if (!(domain_length > 0.0)) throw invalid_input("make_gain_taper: bad domain length");
    if (!(radius > 0.0)) throw invalid_input("make_gain_taper: radius must be > 0");
    if (psi_radius < 0.0) throw invalid_input("make_gain_taper: psi radius must be >= 0");
    // The potential sample is the far sharper channel (its measurement error
    // is the smoothed image of the elevation noise), and its genuine
    // correlations reach further; give it a wider taper when asked.
    if (psi_radius == 0.0) psi_radius = radius;
    const std::size_t d = op.dim();
    const double dx = domain_length / static_cast<double>(layout.n_grid);

    auto channel_x = [&](const ObservationChannel& ch) {
        using K = ObservationChannel::Kind;
        return (ch.kind == K::eta_node || ch.kind == K::psi_node)
                   ? dx * static_cast<double>(ch.node)
                   : hull_x;
    };
    auto entry_x = [&](std::size_t i) {
        return i < 2 * layout.n_grid ? dx * static_cast<double>(i % layout.n_grid) : hull_x;
    };

    GainTaper t;
    t.dim = layout.dim();
    t.d = d;
    t.w.resize(t.dim * d);
    const std::size_t param_start = 2 * layout.n_grid + 4;
    for (std::size_t c = 0; c < d; ++c) {
        using K = ObservationChannel::Kind;
        const double xc = channel_x(op.channels[c]);
        for (std::size_t i = 0; i < t.dim; ++i) {
            // The estimated parameters (added mass, heave radiation kernel)
            // enter the dynamics only through the heave equation, so heave is
            // the one channel with real information about them; whatever
            // coupling the sample covariance shows elsewhere is noise.
            if (i >= param_start) {
                t.w[i * d + c] = op.channels[c].kind == K::heave ? 1.0 : 0.0;
                continue;
            }
            double r = std::abs(entry_x(i) - xc);
            r = std::min(r, domain_length - r);
            const double rad =
                op.channels[c].kind == K::psi_node ? psi_radius : radius;
            t.w[i * d + c] = taper_weight(r, rad);
        }
    }
    return t;
}

/// Observation covariance for a batch: the recorded per-channel variances by
/// default, or the member sample covariance when the batch asks for the
/// empirical estimate.
inline std::vector<double> observation_covariance(const ObservationBatch& obs) {
    const std::size_t d = obs.dim();
    std::vector<double> r(d * d, 0.0);
    if (!obs.empirical_r) {
        if (obs.r_diag.size() != d)
            throw invalid_input("observation batch: one variance per channel required");
        for (std::size_t c = 0; c < d; ++c) r[c * d + c] = obs.r_diag[c];
        return r;
    }
    std::vector<double> mu(d, 0.0);
    for (std::size_t n = 0; n < obs.n_members; ++n)
        for (std::size_t c = 0; c < d; ++c) mu[c] += obs.member(n, c);
    for (double& v : mu) v /= static_cast<double>(obs.n_members);
    for (std::size_t c = 0; c < d; ++c) {
        // same exact-tie snap as the state mean: identical copies mean R = 0
        bool same = true;
        for (std::size_t n = 1; same && n < obs.n_members; ++n)
            same = obs.member(n, c) == obs.member(0, c);
        if (same) mu[c] = obs.member(0, c);
    }
    const double inv = 1.0 / static_cast<double>(obs.n_members - 1);
    for (std::size_t n = 0; n < obs.n_members; ++n)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j)
                r[i * d + j] += inv * ((obs.member(n, i) - mu[i]) * (obs.member(n, j) - mu[j]));
    for (std::size_t i = 1; i < d; ++i)
        for (std::size_t j = 0; j < i; ++j) r[i * d + j] = r[j * d + i];
    return r;
}

/// Member-wise analysis update: each member blends toward its own perturbed
/// observation through the shared gain. If the innovation covariance is
/// singular but there is literally no information in the batch (all observed
/// anomalies zero and every innovation zero), the forecast is returned
/// unchanged; any other singularity raises degenerate_ensemble.
inline EnsembleState analysis(const EnsembleState& ens_f, const ObservationBatch& obs,
                              const GainTaper& taper = {}, bool shrink = false) {
    if (obs.n_members != ens_f.n_members)
        throw invalid_input("analysis: observation members " + std::to_string(obs.n_members) +
                            " != ensemble members " + std::to_string(ens_f.n_members));
    const std::size_t d = obs.dim();
    if (d == 0) throw invalid_input("analysis: empty observation operator");
    if (obs.members.size() != d * obs.n_members)
        throw invalid_input("analysis: observation member block has wrong size");

    const Anomalies an = anomalies(ens_f);
    std::vector<std::size_t> idx(d);
    for (std::size_t c = 0; c < d; ++c) idx[c] = ens_f.layout.index_of(obs.op.channels[c]);

    EnsembleState out = ens_f;
    std::vector<double> innov(d), incr(ens_f.layout.dim());
    try {
        const KalmanGain gain = kalman_gain(an, ens_f.layout, obs.op,
                                            observation_covariance(obs), taper, shrink);
        for (std::size_t n = 0; n < ens_f.n_members; ++n) {
            double* m = out.member(n);
            for (std::size_t c = 0; c < d; ++c) innov[c] = obs.member(n, c) - m[idx[c]];
            gain.apply(innov.data(), incr.data());
            for (std::size_t i = 0; i < ens_f.layout.dim(); ++i) m[i] += incr[i];
        }
    } catch (const degenerate_ensemble&) {
        bool vacuous = true;
        for (std::size_t n = 0; vacuous && n < ens_f.n_members; ++n) {
            const double* col = an.a.data() + n * an.dim;
            const double* m = ens_f.member(n);
            for (std::size_t c = 0; c < d; ++c) {
                if (col[idx[c]] != 0.0 || obs.member(n, c) - m[idx[c]] != 0.0) {
                    vacuous = false;
                    break;
                }
            }
        }
        if (!vacuous) throw;
        // zero anomalies, zero innovations: the update is the identity
    }
    return out;
}

/// Appends a parameter block: per member, value = guess + spread * N(0,1).
/// Entries from `corr_first` on are drawn with a +-corr_window moving-average
/// correlation along the block (unit variance kept). Samples of a response
/// kernel need this: narrowband motion only pins a couple of linear combos of
/// them, and with independent draws everything orthogonal to those combos
/// would keep its full initial error forever. Smooth priors let the observed
/// combos carry the rest of the curve.
inline EnsembleState augment(const EnsembleState& ens, const std::vector<double>& guess,
                             const std::vector<double>& spread, Rng& rng,
                             std::size_t corr_first = 0, std::size_t corr_window = 0) {
    if (ens.layout.n_params != 0)
        throw invalid_input("augment: ensemble already carries a parameter block");
    if (guess.size() != spread.size())
        throw invalid_input("augment: guess/spread length mismatch");
    if (guess.empty()) throw invalid_input("augment: empty parameter block");
    if (corr_window > 0 && corr_first >= guess.size())
        throw invalid_input("augment: correlated block starts outside the parameters");

    StateLayout nl = ens.layout;
    nl.n_params = guess.size();
    EnsembleState out(nl, ens.n_members);
    const std::size_t base = ens.layout.dim();
    const std::size_t np = guess.size();
    std::vector<double> white(np), draw(np);
    for (std::size_t n = 0; n < ens.n_members; ++n) {
        const double* src = ens.member(n);
        double* dst = out.member(n);
        std::copy(src, src + base, dst);
        for (std::size_t p = 0; p < np; ++p) white[p] = rng.normal();
        for (std::size_t p = 0; p < np; ++p) draw[p] = white[p];
        if (corr_window > 0) {
            for (std::size_t p = corr_first; p < np; ++p) {
                const std::size_t lo = p >= corr_first + corr_window ? p - corr_window
                                                                     : corr_first;
                const std::size_t hi = std::min(np - 1, p + corr_window);
                double acc = 0.0;
                for (std::size_t q = lo; q <= hi; ++q) acc += white[q];
                draw[p] = acc / std::sqrt(static_cast<double>(hi - lo + 1));
            }
        }
        for (std::size_t p = 0; p < np; ++p)
            dst[base + p] = guess[p] + spread[p] * draw[p];
    }
    return out;
}

/// Spread scaling about the ensemble mean; rho = 1 is the exact identity.
/// Only entries in [first, last) are scaled, so the physical state and the
/// parameter block can be treated separately: the wave field needs a little
/// inflation to stay honest about errors the analysis did not really remove,
/// while converged parameters must not be pumped back open.
inline EnsembleState inflate(const EnsembleState& ens, double rho,
                             std::size_t first = 0,
                             std::size_t last = static_cast<std::size_t>(-1)) {
    if (!(rho >= 1.0)) throw invalid_input("inflate: factor must be >= 1, got " +
                                           std::to_string(rho));
    if (last == static_cast<std::size_t>(-1)) last = ens.layout.dim();
    if (first >= last || last > ens.layout.dim())
        throw invalid_input("inflate: entry range outside the state");
    if (rho == 1.0) return ens;
    EnsembleState out = ens;
    const std::vector<double> mu = ens.mean();
    for (std::size_t n = 0; n < ens.n_members; ++n) {
        double* m = out.member(n);
        for (std::size_t i = first; i < last; ++i) m[i] = mu[i] + rho * (m[i] - mu[i]);
    }
    return out;
}

} // namespace wavetwin
