#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "enkf.hpp"
#include "threading.hpp"

namespace wavetwin {

/// Normalized field error: mean squared elevation mismatch over the domain
/// (trapezoid quadrature on the periodic grid) against twice the sea-state
/// variance, so white measurement noise of std 0.316 sigma lands near 0.05
/// and a fully decorrelated field near 1.
inline double error_metric(const std::vector<double>& eta_sim,
                           const std::vector<double>& eta_true, double sigma_eta) {
    if (eta_sim.size() != eta_true.size() || eta_sim.empty())
        throw invalid_input("error_metric: fields must share one grid");
    if (!(sigma_eta > 0.0)) throw invalid_input("error_metric: sigma_eta must be > 0");
    double acc = 0.0;
    for (std::size_t j = 0; j < eta_sim.size(); ++j) {
        const double d = eta_sim[j] - eta_true[j];
        acc += d * d;
    }
    return acc / static_cast<double>(eta_sim.size()) / (2.0 * sigma_eta * sigma_eta);
}

// ---------------------------------------------------------------------------
// Coupled wave–ship propagation. The wave advances in mode space; the RK4
// stage elevations feed the hull load at the matching stage times, so the
// two integrators stay order-consistent with each other.

struct CoupledModel {
    SpectralPair wave;
    ShipState ship;
    std::size_t steps_done = 0; // filter cadence counter, trajectory-wide
};

inline void advance_coupled(CoupledModel& m, const Grid& grid, const HosConfig& hcfg,
                            const ShipParams& sp, const FkTable& fk, std::size_t n_steps) {
    RkStageEta stages;
    StageForces forces;
    for (std::size_t i = 0; i < n_steps; ++i) {
        step_spectral(m.wave, grid, hcfg, m.ship.t, &stages);
        for (std::size_t s = 0; s < 4; ++s) {
            const auto [f3, f4] = fk_from_modes(stages.eta_hat[s], fk);
            forces[s] = {f3, f4};
        }
        m.ship = cmi_step_forced(m.ship, sp, forces, hcfg.dt);
        ++m.steps_done;
        if (m.steps_done % static_cast<std::size_t>(hcfg.filter_every) == 0)
            filter_spectral(m.wave, grid, hcfg.breaking_cutoff);
    }
}

// ---------------------------------------------------------------------------

/// Reference trajectory, archived at every analysis time (index j = t0 + j tau).
struct TruthTrajectory {
    double tau = 0.0, tp = 0.0;
    double sigma_eta = 0.0; // realized sea-state std dev at t0
    std::vector<WaveField> waves;
    std::vector<ShipState> ships;
};

inline TruthTrajectory run_truth(const ExperimentConfig& cfg) {
    cfg.validate();
    const Grid grid = cfg.grid();
    WaveField wf = realize_jonswap(cfg.jonswap(derive_seed(cfg.seed, "truth-wave")), grid);

    TruthTrajectory out;
    out.tau = cfg.tau();
    out.tp = cfg.tp();
    double s = 0.0, s2 = 0.0;
    for (double v : wf.eta) {
        s += v;
        s2 += v * v;
    }
    const double nn = static_cast<double>(grid.n);
    out.sigma_eta = std::sqrt(s2 / nn - (s / nn) * (s / nn));

    const ShipParams sp = cfg.truth_ship();
    const FkTable fk = make_fk_table(grid, cfg.geometry());
    const HosConfig hcfg = cfg.hos();
    CoupledModel m{to_spectral_pair(wf), make_ship_state(sp)};

    const std::size_t cycles = cfg.n_cycles();
    out.waves.reserve(cycles + 1);
    out.ships.reserve(cycles + 1);
    out.waves.push_back(wf);
    out.ships.push_back(m.ship);
    for (std::size_t c = 1; c <= cycles; ++c) {
        advance_coupled(m, grid, hcfg, sp, fk, cfg.steps_per_tau);
        to_wave_field(m.wave, wf);
        wf.t = m.ship.t;
        out.waves.push_back(wf);
        out.ships.push_back(m.ship);
    }
    return out;
}

// ---------------------------------------------------------------------------
// State packing. One member vector = [eta nodes; psi nodes; S3 S4 V3 V4;
// params]. The ship's velocity history is model-internal memory and is not
// part of the filtered state; after an analysis moves V, the newest history
// sample is rewritten to match.

namespace harness_detail {

inline void pack_member(double* m, const StateLayout& l, const Grid& grid,
                        const SpectralPair& wave, const ShipState& ship) {
    SpectralField f(grid);
    f.modes = wave.eta;
    const std::vector<double> eta = to_physical(f);
    f.modes = wave.psi;
    const std::vector<double> psi = to_physical(f);
    std::copy(eta.begin(), eta.end(), m + l.eta_offset());
    std::copy(psi.begin(), psi.end(), m + l.psi_offset());
    double* ship_block = m + l.ship_offset();
    ship_block[0] = ship.s3;
    ship_block[1] = ship.s4;
    ship_block[2] = ship.v3;
    ship_block[3] = ship.v4;
}

inline void unpack_member(const double* m, const StateLayout& l, const Grid& grid,
                          SpectralPair& wave, ShipState& ship) {
    const std::vector<double> eta(m + l.eta_offset(), m + l.eta_offset() + grid.n);
    const std::vector<double> psi(m + l.psi_offset(), m + l.psi_offset() + grid.n);
    wave.eta = to_spectral(grid, eta).modes;
    wave.psi = to_spectral(grid, psi).modes;
    const double* ship_block = m + l.ship_offset();
    ship.s3 = ship_block[0];
    ship.s4 = ship_block[1];
    ship.v3 = ship_block[2];
    ship.v4 = ship_block[3];
    ship.hist3[0] = ship.v3;
    ship.hist4[0] = ship.v4;
}

/// Linear interpolation of coarse kernel samples (at the given sample
/// indices, which must start at 0 and end at count-1) onto the full grid.
inline std::vector<double> interp_kernel(const double* coarse,
                                         const std::vector<std::size_t>& idx,
                                         std::size_t count) {
    std::vector<double> fine(count);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < count; ++i) {
        while (idx[seg + 1] < i) ++seg;
        const double span = static_cast<double>(idx[seg + 1] - idx[seg]);
        const double w = static_cast<double>(i - idx[seg]) / span;
        fine[i] = (1.0 - w) * coarse[seg] + w * coarse[seg + 1];
    }
    return fine;
}

inline ShipParams member_ship_params(const ShipParams& base, const double* params,
                                     const std::vector<std::size_t>& kernel_idx) {
    ShipParams p = base;
    p.added_mass = params[0];
    p.k33.samples = interp_kernel(params + 1, kernel_idx, base.k33.samples.size());
    return p;
}

inline std::string g17(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

} // namespace harness_detail

// ---------------------------------------------------------------------------

struct CycleRecord {
    double t_over_tp = 0.0;
    double eps_pre = 0.0;  // DA ensemble-mean error entering the analysis
    double eps_post = 0.0; // and leaving it
    double eps_noda = 0.0;
    double s3_true = 0.0, s3_da = 0.0, s3_noda = 0.0;
    double s4_true = 0.0, s4_da = 0.0, s4_noda = 0.0;
    double ma_rel_err = 0.0;
    double kernel_rmse = 0.0; // normalized by max |K33_true|
};

struct KernelSnapshot {
    std::size_t t_tp = 0;                     // snapshot time in Tp units
    std::vector<std::array<double, 3>> rows;  // lag, K33_true, K33_est
};

struct ExperimentResult {
    std::vector<CycleRecord> records; // index 0 = initial condition
    std::vector<KernelSnapshot> kernels;
    std::vector<std::string> log;
    std::vector<double> final_x, final_eta_da, final_eta_truth; // end-of-run fields
    double tau = 0.0, tp = 0.0, sigma_eta = 0.0;
    std::size_t clamp_events = 0;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();

    const TruthTrajectory truth = run_truth(cfg);
    const Grid grid = cfg.grid();
    const HosConfig hcfg = cfg.hos();
    const NoiseModel nm = cfg.noise(grid);
    const std::size_t probe = probe_node(grid, cfg.probe_x());
    const std::size_t n_members = cfg.n_members;
    const std::size_t cycles = cfg.n_cycles();
    const FkTable fk = make_fk_table(grid, cfg.geometry());
    const ShipParams truth_ship = cfg.truth_ship();
    const ShipParams model_base = cfg.model_ship();
    const std::vector<std::size_t> kidx = cfg.kernel_param_indices();

    ExperimentResult res;
    res.tau = truth.tau;
    res.tp = truth.tp;
    res.sigma_eta = truth.sigma_eta;
    res.log.push_back("seed " + std::to_string(cfg.seed) + ", selector " +
                      to_string(cfg.selector) + ", members " + std::to_string(n_members) +
                      ", cycles " + std::to_string(cycles));
    res.log.push_back("sigma_eta " + harness_detail::g17(res.sigma_eta) + ", noise eta " +
                      harness_detail::g17(nm.sigma_eta) + ", psi " +
                      harness_detail::g17(nm.sigma_psi) + ", heave " +
                      harness_detail::g17(nm.sigma_heave) + ", roll " +
                      harness_detail::g17(nm.sigma_roll));

    // Both forecasters start from the same noisy measurement of the initial
    // sea, not from the truth: the whole point of assimilation is recovering
    // from exactly that initial error.
    Rng init_rng(derive_seed(cfg.seed, "init-field"));
    const MeasuredWave m0 = measure_wave_field(grid, truth.waves[0].eta, nm.sigma_eta, init_rng);

    CoupledModel noda;
    {
        WaveField wf(grid);
        wf.eta = m0.eta_m;
        wf.psi = m0.psi_m;
        noda.wave = to_spectral_pair(wf);
        noda.ship = make_ship_state(model_base);
    }

    // Ensemble: each member is the measurement re-noised at the measurement
    // level, so the member spread matches R while the ensemble mean stays on
    // the measurement.
    StateLayout layout{grid.n, 0};
    EnsembleState ens(layout, n_members);
    std::vector<ShipState> member_ships(n_members, make_ship_state(model_base));
    for (std::size_t n = 0; n < n_members; ++n) {
        Rng rng(derive_seed(cfg.seed, "init-member", n));
        std::vector<double> eta(grid.n);
        for (std::size_t j = 0; j < grid.n; ++j) eta[j] = m0.eta_m[j] + nm.sigma_eta * rng.normal();
        const std::vector<double> psi = reconstruct_psi_linear(grid, eta);
        double* m = ens.member(n);
        std::copy(eta.begin(), eta.end(), m + layout.eta_offset());
        std::copy(psi.begin(), psi.end(), m + layout.psi_offset());
        // ship block stays zero: the ship starts at rest, exactly known
    }

    const double ma_truth = truth_ship.added_mass;
    double ktrue_max = 0.0;
    for (double v : truth_ship.k33.samples) ktrue_max = std::max(ktrue_max, std::abs(v));

    if (cfg.augment_params) {
        std::vector<double> guess, spread;
        guess.push_back(model_base.added_mass);
        spread.push_back(cfg.ma_spread_frac * model_base.added_mass);
        double kguess_max = 0.0;
        for (double v : model_base.k33.samples) kguess_max = std::max(kguess_max, std::abs(v));
        // Kernel spread follows the guess magnitude (with a floor near its
        // zero crossings): the plausible errors scale the curve rather than
        // roughen it, and the prior should say so.
        for (const std::size_t i : kidx) {
            guess.push_back(model_base.k33.samples[i]);
            spread.push_back(cfg.kernel_spread_frac *
                             std::max(std::abs(model_base.k33.samples[i]),
                                      0.15 * kguess_max));
        }
        Rng rng(derive_seed(cfg.seed, "augment"));
        ens = augment(ens, guess, spread, rng, 1, 6); // kernel block drawn smooth
        layout = ens.layout;
    }

    // With d observed scalars against hundreds of state entries, the raw
    // sample gain sprays sampling noise across the whole domain every cycle;
    // localizing the cross-covariance around each observation's position is
    // what keeps 400 analyses from drowning the estimate.
    // The taper may widen over the run: the analysis removes short-range error
    // first, so what remains grows longer-ranged and its ensemble correlations
    // become trustworthy at distances that would have been pure noise early on.
    GainTaper taper;
    double taper_radius_lp = 0.0;
    auto retune_taper = [&](double t_tp) {
        if (cfg.localization_radius_lp <= 0.0) return;
        const double grown = cfg.localization_growth_lp_per_tp * t_tp;
        // quarter-wavelength steps so the taper is rebuilt only when it moves
        const double r = std::round((cfg.localization_radius_lp + grown) * 4.0) / 4.0;
        if (r == taper_radius_lp) return;
        taper_radius_lp = r;
        const double lp = 2.0 * 3.141592653589793238463 / cfg.kp();
        const double psi_r = cfg.localization_psi_radius_lp > 0.0
                                 ? std::round((cfg.localization_psi_radius_lp + grown) * 4.0) / 4.0
                                 : 0.0;
        taper = make_gain_taper(layout, grid.domain_length, cfg.geometry().xc,
                                make_selector_operator(cfg.selector, probe),
                                r * lp, psi_r * lp);
    };
    retune_taper(0.0);

    // Negative added mass would break the forward model; fold such members
    // back to zero and account for every event.
    auto clamp_ma = [&](std::size_t cycle) {
        if (!cfg.augment_params) return;
        std::size_t hits = 0;
        for (std::size_t n = 0; n < n_members; ++n) {
            double& ma = ens.member(n)[layout.param_offset()];
            if (ma < 0.0) {
                ma = 0.0;
                ++hits;
            }
        }
        if (hits) {
            res.clamp_events += hits;
            res.log.push_back("cycle " + std::to_string(cycle) + ": clamped Ma to 0 for " +
                              std::to_string(hits) + " member(s)");
        }
    };
    clamp_ma(0);

    std::vector<ShipParams> member_params(n_members, model_base);
    auto refresh_params = [&]() {
        if (!cfg.augment_params) return;
        for (std::size_t n = 0; n < n_members; ++n)
            member_params[n] = harness_detail::member_ship_params(
                model_base, ens.member(n) + layout.param_offset(), kidx);
    };
    refresh_params();

    auto ensemble_eta = [&]() {
        const std::vector<double> mu = ens.mean();
        return std::vector<double>(mu.begin() + layout.eta_offset(),
                                   mu.begin() + layout.eta_offset() + grid.n);
    };

    auto param_errors = [&](double& ma_err, double& k_rmse) {
        const std::vector<double> mu = ens.mean();
        const double* p = cfg.augment_params ? mu.data() + layout.param_offset() : nullptr;
        const double ma = cfg.augment_params ? p[0] : model_base.added_mass;
        ma_err = std::abs(ma - ma_truth) / ma_truth;
        std::vector<double> kfine =
            cfg.augment_params
                ? harness_detail::interp_kernel(p + 1, kidx, truth_ship.k33.samples.size())
                : model_base.k33.samples;
        double acc = 0.0;
        for (std::size_t i = 0; i < kfine.size(); ++i) {
            const double d = kfine[i] - truth_ship.k33.samples[i];
            acc += d * d;
        }
        k_rmse = std::sqrt(acc / static_cast<double>(kfine.size())) / ktrue_max;
    };

    auto take_kernel_snapshot = [&](std::size_t t_tp) {
        const std::vector<double> mu = ens.mean();
        std::vector<double> kfine =
            cfg.augment_params
                ? harness_detail::interp_kernel(mu.data() + layout.param_offset() + 1, kidx,
                                                truth_ship.k33.samples.size())
                : model_base.k33.samples;
        KernelSnapshot snap;
        snap.t_tp = t_tp;
        snap.rows.reserve(kfine.size());
        for (std::size_t i = 0; i < kfine.size(); ++i)
            snap.rows.push_back({truth_ship.k33.dt_mem * static_cast<double>(i),
                                 truth_ship.k33.samples[i], kfine[i]});
        res.kernels.push_back(std::move(snap));
    };
    std::vector<std::size_t> snap_cycles;
    for (const std::size_t s : cfg.kernel_snapshots_tp)
        snap_cycles.push_back(static_cast<std::size_t>(
            std::llround(static_cast<double>(s) * cfg.tp() / cfg.tau())));

    auto record_row = [&](std::size_t cycle, double eps_pre, double eps_post,
                          double eps_noda) {
        CycleRecord r;
        r.t_over_tp = truth.ships[cycle].t / res.tp;
        r.eps_pre = eps_pre;
        r.eps_post = eps_post;
        r.eps_noda = eps_noda;
        r.s3_true = truth.ships[cycle].s3;
        r.s4_true = truth.ships[cycle].s4;
        r.s3_noda = noda.ship.s3;
        r.s4_noda = noda.ship.s4;
        const std::vector<double> mu = ens.mean();
        r.s3_da = mu[layout.ship_offset() + 0];
        r.s4_da = mu[layout.ship_offset() + 1];
        param_errors(r.ma_rel_err, r.kernel_rmse);
        res.records.push_back(r);
    };

    {
        const double e0_da = error_metric(ensemble_eta(), truth.waves[0].eta, res.sigma_eta);
        const double e0_noda = error_metric(m0.eta_m, truth.waves[0].eta, res.sigma_eta);
        record_row(0, e0_da, e0_da, e0_noda);
        for (std::size_t k = 0; k < snap_cycles.size(); ++k)
            if (snap_cycles[k] == 0) take_kernel_snapshot(cfg.kernel_snapshots_tp[k]);
    }

    std::vector<SpectralPair> member_waves(n_members);
    for (std::size_t c = 1; c <= cycles; ++c) {
        const auto t_cycle = clock::now();

        parallel_for(n_members, [&](std::size_t n) {
            CoupledModel m;
            m.wave = std::move(member_waves[n]); // reuse buffers cycle to cycle
            m.ship = member_ships[n];
            m.steps_done = (c - 1) * cfg.steps_per_tau;
            harness_detail::unpack_member(ens.member(n), layout, grid, m.wave, m.ship);
            advance_coupled(m, grid, hcfg, member_params[n], fk, cfg.steps_per_tau);
            harness_detail::pack_member(ens.member(n), layout, grid, m.wave, m.ship);
            member_ships[n] = std::move(m.ship);
            member_waves[n] = std::move(m.wave);
        });
        advance_coupled(noda, grid, hcfg, model_base, fk, cfg.steps_per_tau);

        const double eps_pre = error_metric(ensemble_eta(), truth.waves[c].eta, res.sigma_eta);
        retune_taper(static_cast<double>(c) / static_cast<double>(cfg.analyses_per_t0));
        const std::size_t param_start = 2 * layout.n_grid + 4;
        ens = inflate(ens, cfg.inflation, 0, std::min(param_start, layout.dim()));
        if (layout.dim() > param_start)
            ens = inflate(ens, cfg.param_inflation, param_start);
        const ObservationBatch obs = synthesize_observation(
            truth.waves[c], truth.ships[c], cfg.selector, probe, nm, n_members,
            derive_seed(cfg.seed, "obs-cycle", c), cfg.empirical_r,
            cfg.measurement_lowpass);
        ens = analysis(ens, obs, taper, cfg.gain_shrinkage);
        clamp_ma(c);
        refresh_params();

        std::vector<double> noda_eta;
        {
            SpectralField f(grid);
            f.modes = noda.wave.eta;
            noda_eta = to_physical(f);
        }
        const double eps_post = error_metric(ensemble_eta(), truth.waves[c].eta, res.sigma_eta);
        const double eps_noda = error_metric(noda_eta, truth.waves[c].eta, res.sigma_eta);
        record_row(c, eps_pre, eps_post, eps_noda);
        for (std::size_t k = 0; k < snap_cycles.size(); ++k)
            if (snap_cycles[k] == c) take_kernel_snapshot(cfg.kernel_snapshots_tp[k]);

        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            clock::now() - t_cycle)
                            .count();
        const CycleRecord& r = res.records.back();
        res.log.push_back("cycle " + std::to_string(c) + " t/Tp " +
                          std::to_string(r.t_over_tp) + " eps_pre " +
                          harness_detail::g17(eps_pre) + " eps_post " +
                          harness_detail::g17(eps_post) + " eps_noda " +
                          harness_detail::g17(eps_noda) + " ma_err " +
                          harness_detail::g17(r.ma_rel_err) + " k_rmse " +
                          harness_detail::g17(r.kernel_rmse) + " ms " + std::to_string(ms));
    }

    res.final_eta_da = ensemble_eta();
    res.final_eta_truth = truth.waves[cycles].eta;
    res.final_x.resize(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) res.final_x[j] = grid.x(j);

    const auto total_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t_start).count();
    const CycleRecord& last = res.records.back();
    res.log.push_back("final eps_da " + harness_detail::g17(last.eps_post) + " eps_noda " +
                      harness_detail::g17(last.eps_noda) + " ratio " +
                      harness_detail::g17(last.eps_noda / std::max(last.eps_post, 1e-300)) +
                      " clamp events " + std::to_string(res.clamp_events) + " total ms " +
                      std::to_string(total_ms));
    return res;
}

// ---------------------------------------------------------------------------
// File output. All writes go through here, single-threaded; numbers are
// printed with 17 significant digits so reruns are byte-comparable.

namespace harness_detail {

inline void write_csv(const std::filesystem::path& path, const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot write '" + path.string() + "'");
    out << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ", ";
            out << g17(row[i]);
        }
        out << "\n";
    }
}

} // namespace harness_detail

inline void write_experiment_outputs(const ExperimentResult& res,
                                     const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::vector<std::vector<double>> rows;
    for (const CycleRecord& r : res.records)
        rows.push_back({r.t_over_tp, r.eps_noda, r.eps_post});
    harness_detail::write_csv(dir / "wave_error.csv", "t_over_Tp, eps_noda, eps_da", rows);

    rows.clear();
    for (const CycleRecord& r : res.records)
        rows.push_back({r.t_over_tp, r.s3_true, r.s3_da, r.s3_noda, r.s4_true, r.s4_da,
                        r.s4_noda});
    harness_detail::write_csv(dir / "ship_motion.csv",
                              "t_over_Tp, S3_true, S3_da, S3_noda, S4_true, S4_da, S4_noda",
                              rows);

    rows.clear();
    for (const CycleRecord& r : res.records)
        rows.push_back({r.t_over_tp, r.ma_rel_err, r.kernel_rmse});
    harness_detail::write_csv(dir / "params.csv", "t_over_Tp, Ma_rel_err, kernel_rmse", rows);

    for (const KernelSnapshot& snap : res.kernels) {
        rows.clear();
        for (const auto& r : snap.rows) rows.push_back({r[0], r[1], r[2]});
        harness_detail::write_csv(dir / ("kernel_t" + std::to_string(snap.t_tp) + ".csv"),
                                  "lag, K33_true, K33_est", rows);
    }

    rows.clear();
    for (std::size_t j = 0; j < res.final_x.size(); ++j)
        rows.push_back({res.final_x[j], res.final_eta_da[j], res.final_eta_truth[j]});
    harness_detail::write_csv(dir / "final_field.csv", "x, eta_da, eta_truth", rows);

    std::ofstream log(dir / "run.log");
    if (!log) throw invalid_input("cannot write '" + (dir / "run.log").string() + "'");
    for (const std::string& line : res.log) log << line << "\n";
}

inline void write_truth_outputs(const ExperimentConfig& cfg, const TruthTrajectory& truth,
                                const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < truth.waves.size(); ++j) {
        const WaveDiagnostics d = diagnostics(truth.waves[j], cfg.order);
        rows.push_back({truth.ships[j].t / truth.tp, truth.ships[j].s3, truth.ships[j].s4,
                        d.mass, d.energy, d.sig_height});
    }
    harness_detail::write_csv(dir / "truth.csv",
                              "t_over_Tp, S3, S4, wave_mass, wave_energy, sig_height", rows);
}

inline void write_observation_outputs(const ExperimentConfig& cfg,
                                      const TruthTrajectory& truth,
                                      const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const Grid grid = cfg.grid();
    const NoiseModel nm = cfg.noise(grid);
    const std::size_t probe = probe_node(grid, cfg.probe_x());

    std::string header = "t_over_Tp";
    const ObservationOperator op = make_selector_operator(cfg.selector, probe);
    for (const ObservationChannel& ch : op.channels) {
        switch (ch.kind) {
            case ObservationChannel::Kind::eta_node: header += ", eta_probe"; break;
            case ObservationChannel::Kind::psi_node: header += ", psi_probe"; break;
            case ObservationChannel::Kind::heave: header += ", heave"; break;
            case ObservationChannel::Kind::roll: header += ", roll"; break;
        }
    }

    std::vector<std::vector<double>> rows;
    for (std::size_t c = 1; c < truth.waves.size(); ++c) {
        const ObservationBatch obs = synthesize_observation(
            truth.waves[c], truth.ships[c], cfg.selector, probe, nm, cfg.n_members,
            derive_seed(cfg.seed, "obs-cycle", c), cfg.empirical_r);
        std::vector<double> row{truth.ships[c].t / truth.tp};
        row.insert(row.end(), obs.raw.begin(), obs.raw.end());
        rows.push_back(std::move(row));
    }
    harness_detail::write_csv(dir / "observations.csv", header, rows);
}

} // namespace wavetwin
