// Command-line front end for the coupled wave / ship-motion twin experiment.
//
//   wavetwin truth    — reference simulation only, writes truth.csv
//   wavetwin observe  — reference run plus the noisy measurement sequence
//   wavetwin run      — full twin experiment with ensemble assimilation
//   wavetwin compare  — one run per observation selector, merged error table
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <CLI11.hpp>

#include <wavetwin/harness.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

namespace {

struct CommonOpts {
    std::string config;
    std::string out;
    std::string selector;
    std::uint64_t seed = 0;
    bool has_seed = false;
};

// Attach the shared flag set to a subcommand. `with_selector` is off for
// `compare`, which always sweeps all four selectors.
void add_common(CLI::App* cmd, CommonOpts& o, bool with_selector) {
    cmd->add_option("--config", o.config, "configuration file (defaults apply when omitted)");
    cmd->add_option("--seed", o.seed, "override the experiment seed")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", o.out, "override the output directory");
    if (with_selector)
        cmd->add_option("--selector", o.selector, "observed quantities: wave|heave|roll|all")
            ->check(CLI::IsMember({"wave", "heave", "roll", "all"}));
}

wavetwin::ExperimentConfig load_config(const CommonOpts& o, CLI::App* cmd) {
    wavetwin::ExperimentConfig cfg = o.config.empty()
                                         ? wavetwin::ExperimentConfig{}
                                         : wavetwin::ExperimentConfig::from_file(o.config);
    if (cmd->count("--seed")) cfg.seed = o.seed;
    if (!o.out.empty()) cfg.out_dir = o.out;
    if (!o.selector.empty()) cfg.selector = wavetwin::selector_from_string(o.selector);
    cfg.validate();
    return cfg;
}

int run_compare(const wavetwin::ExperimentConfig& base) {
    using namespace wavetwin;
    const std::filesystem::path parent = base.out_dir;

    // All four runs share the truth, the initial measurement, and the no-DA
    // baseline (none of those depend on the selector), so eps_noda is taken
    // from the first run and the merge key is the shared analysis time.
    std::vector<std::vector<double>> merged;
    const ObservationSelector sweep[] = {ObservationSelector::wave, ObservationSelector::heave,
                                         ObservationSelector::roll, ObservationSelector::all};
    for (std::size_t s = 0; s < 4; ++s) {
        ExperimentConfig cfg = base;
        cfg.selector = sweep[s];
        cfg.out_dir = (parent / to_string(sweep[s])).string();
        const ExperimentResult res = run_experiment(cfg);
        write_experiment_outputs(res, cfg.out_dir);
        if (s == 0) {
            merged.resize(res.records.size());
            for (std::size_t i = 0; i < res.records.size(); ++i)
                merged[i] = {res.records[i].t_over_tp, res.records[i].eps_noda};
        } else if (merged.size() != res.records.size()) {
            throw invalid_input("compare: selector runs produced different cycle counts");
        }
        for (std::size_t i = 0; i < res.records.size(); ++i)
            merged[i].push_back(res.records[i].eps_post);
        std::cout << to_string(sweep[s]) << ": " << res.log.back() << "\n";
    }
    wavetwin::harness_detail::write_csv(parent / "compare.csv",
                                        "t_over_Tp, eps_noda, eps_wave, eps_heave, eps_roll, "
                                        "eps_all",
                                        merged);
    std::cout << "wrote " << (parent / "compare.csv").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase-resolved wave and ship-motion forecasting with ensemble assimilation"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    CommonOpts opt_truth, opt_observe, opt_run, opt_compare;
    CLI::App* cmd_truth = app.add_subcommand("truth", "reference simulation only");
    CLI::App* cmd_observe = app.add_subcommand("observe", "synthesize the measurement sequence");
    CLI::App* cmd_run = app.add_subcommand("run", "twin experiment with assimilation");
    CLI::App* cmd_compare = app.add_subcommand("compare", "run all four observation selectors");
    add_common(cmd_truth, opt_truth, true);
    add_common(cmd_observe, opt_observe, true);
    add_common(cmd_run, opt_run, true);
    add_common(cmd_compare, opt_compare, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // bad flags are configuration errors
    }

    try {
        if (cmd_truth->parsed()) {
            const wavetwin::ExperimentConfig cfg = load_config(opt_truth, cmd_truth);
            const wavetwin::TruthTrajectory truth = wavetwin::run_truth(cfg);
            wavetwin::write_truth_outputs(cfg, truth, cfg.out_dir);
            std::cout << "wrote " << (std::filesystem::path(cfg.out_dir) / "truth.csv").string()
                      << "\n";
        } else if (cmd_observe->parsed()) {
            const wavetwin::ExperimentConfig cfg = load_config(opt_observe, cmd_observe);
            const wavetwin::TruthTrajectory truth = wavetwin::run_truth(cfg);
            wavetwin::write_observation_outputs(cfg, truth, cfg.out_dir);
            std::cout << "wrote "
                      << (std::filesystem::path(cfg.out_dir) / "observations.csv").string()
                      << "\n";
        } else if (cmd_run->parsed()) {
            const wavetwin::ExperimentConfig cfg = load_config(opt_run, cmd_run);
            const wavetwin::ExperimentResult res = wavetwin::run_experiment(cfg);
            wavetwin::write_experiment_outputs(res, cfg.out_dir);
            std::cout << res.log.back() << "\nwrote "
                      << (std::filesystem::path(cfg.out_dir) / "wave_error.csv").string()
                      << " and companions\n";
        } else {
            return run_compare(load_config(opt_compare, cmd_compare));
        }
    } catch (const wavetwin::numerical_instability& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const wavetwin::degenerate_ensemble& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const wavetwin::invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
