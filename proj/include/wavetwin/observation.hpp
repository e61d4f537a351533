#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wavetwin/errors.hpp"
#include "wavetwin/grid.hpp"
#include "wavetwin/hos.hpp"
#include "wavetwin/rng.hpp"
#include "wavetwin/ship.hpp"
#include "wavetwin/synthesis.hpp"

namespace wavetwin {

/// Which data stream feeds the filter.
enum class ObservationSelector { wave, heave, roll, all };

inline const char* to_string(ObservationSelector s) {
    switch (s) {
        case ObservationSelector::wave: return "wave";
        case ObservationSelector::heave: return "heave";
        case ObservationSelector::roll: return "roll";
        case ObservationSelector::all: return "all";
    }
    return "?";
}

inline ObservationSelector selector_from_string(const std::string& s) {
    if (s == "wave") return ObservationSelector::wave;
    if (s == "heave") return ObservationSelector::heave;
    if (s == "roll") return ObservationSelector::roll;
    if (s == "all") return ObservationSelector::all;
    throw invalid_input("unknown observation selector '" + s +
                        "' (expected wave|heave|roll|all)");
}

/// One observed channel; each maps to exactly one state-vector entry.
struct ObservationChannel {
    enum class Kind { eta_node, psi_node, heave, roll };
    Kind kind = Kind::heave;
    std::size_t node = 0; // grid index, for the wave kinds
};

struct ObservationOperator {
    std::vector<ObservationChannel> channels;
    std::size_t dim() const { return channels.size(); }
};

/// Maps a probe coordinate to its grid node; the probe must sit on a node.
inline std::size_t probe_node(const Grid& grid, double x_probe) {
    const double pos = x_probe / grid.dx();
    const double rounded = std::round(pos);
    if (std::abs(pos - rounded) > 1e-9 || rounded < 0.0 ||
        rounded >= static_cast<double>(grid.n))
        throw invalid_input("probe at x = " + std::to_string(x_probe) +
                            " does not coincide with a grid node");
    return static_cast<std::size_t>(rounded);
}

inline ObservationOperator make_selector_operator(ObservationSelector sel,
                                                  std::size_t probe) {
    using K = ObservationChannel::Kind;
    ObservationOperator op;
    if (sel == ObservationSelector::wave || sel == ObservationSelector::all) {
        op.channels.push_back({K::eta_node, probe});
        op.channels.push_back({K::psi_node, probe});
    }
    if (sel == ObservationSelector::heave || sel == ObservationSelector::all)
        op.channels.push_back({K::heave, 0});
    if (sel == ObservationSelector::roll || sel == ObservationSelector::all)
        op.channels.push_back({K::roll, 0});
    return op;
}

/// Every elevation and potential node observed (diagnostic/testing operator).
inline ObservationOperator make_full_field_operator(const Grid& grid) {
    using K = ObservationChannel::Kind;
    ObservationOperator op;
    op.channels.reserve(2 * grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) op.channels.push_back({K::eta_node, j});
    for (std::size_t j = 0; j < grid.n; ++j) op.channels.push_back({K::psi_node, j});
    return op;
}

/// A perturbed observation set for one analysis time: per-member observation
/// vectors, the raw (unperturbed-ensemble) measurement, and the noise
/// covariance specification.
struct ObservationBatch {
    ObservationOperator op;
    std::vector<double> raw;     // d
    std::vector<double> members; // N x d, row-major
    std::vector<double> r_diag;  // d known per-channel variances
    bool empirical_r = false;    // estimate R from the member sample instead
    std::size_t n_members = 0;
    double t = 0.0;

    std::size_t dim() const { return op.dim(); }
    double member(std::size_t n, std::size_t c) const { return members[n * dim() + c]; }
};

/// Synthesizes the measurement for one analysis time from the truth state:
/// the elevation field picks up white noise on every node, psi is rebuilt
/// from the noisy elevation (so the probe's psi error is the reconstruction
/// image of the field noise), ship channels get their own draws; then the
/// raw vector is perturbed into N member copies.
inline ObservationBatch synthesize_observation(const WaveField& truth_wave,
                                               const ShipState& truth_ship,
                                               ObservationSelector sel, std::size_t probe,
                                               const NoiseModel& nm, std::size_t n_members,
                                               std::uint64_t seed, bool empirical_r = false,
                                               double measurement_cutoff = 1.0) {
    if (probe >= truth_wave.grid.n)
        throw invalid_input("synthesize_observation: probe index outside the grid");
    ObservationBatch batch;
    batch.op = make_selector_operator(sel, probe);
    batch.t = truth_wave.t;
    batch.empirical_r = empirical_r;

    const bool wants_wave =
        sel == ObservationSelector::wave || sel == ObservationSelector::all;

    std::vector<double> raw, stds;
    if (wants_wave) {
        Rng field_rng(derive_seed(seed, "meas-field"));
        const MeasuredWave mw = measure_wave_field(truth_wave.grid, truth_wave.eta,
                                                   nm.sigma_eta, field_rng,
                                                   measurement_cutoff);
        raw.push_back(mw.eta_m[probe]);
        raw.push_back(mw.psi_m[probe]);
        if (measurement_cutoff < 1.0) {
            // Probe-channel noise after the band projection, not the raw field noise.
            const Grid& g = truth_wave.grid;
            stds.push_back(nm.sigma_eta *
                           std::sqrt(eta_noise_variance_factor(g, measurement_cutoff)));
            stds.push_back(nm.sigma_eta *
                           std::sqrt(psi_noise_variance_factor(g, measurement_cutoff)));
        } else {
            stds.push_back(nm.sigma_eta);
            stds.push_back(nm.sigma_psi);
        }
    }
    if (sel == ObservationSelector::heave || sel == ObservationSelector::all) {
        Rng rng(derive_seed(seed, "meas-heave"));
        raw.push_back(truth_ship.s3 + nm.sigma_heave * rng.normal());
        stds.push_back(nm.sigma_heave);
    }
    if (sel == ObservationSelector::roll || sel == ObservationSelector::all) {
        Rng rng(derive_seed(seed, "meas-roll"));
        raw.push_back(truth_ship.s4 + nm.sigma_roll * rng.normal());
        stds.push_back(nm.sigma_roll);
    }

    Rng perturb_rng(derive_seed(seed, "meas-perturb"));
    MeasurementEnsemble ens = perturb_measurements(raw, stds, n_members, perturb_rng);
    batch.raw = std::move(ens.raw);
    batch.members = std::move(ens.members);
    batch.r_diag = std::move(ens.r_spec);
    batch.n_members = n_members;
    return batch;
}

} // namespace wavetwin
