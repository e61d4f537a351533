#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "hos.hpp"
#include "observation.hpp"
#include "ship.hpp"
#include "synthesis.hpp"

namespace wavetwin {

/// Sectioned key=value text: [section] headers, '#'/';' comments, one value
/// per key. Duplicate keys or sections are rejected rather than silently
/// merged — a config typo must not become a silent default.
class ConfigFile {
public:
    static ConfigFile parse_text(const std::string& text, const std::string& origin) {
        ConfigFile cf;
        cf.origin_ = origin;
        std::istringstream in(text);
        std::string line, section;
        std::size_t line_no = 0;
        std::map<std::string, int> seen_sections;
        while (std::getline(in, line)) {
            ++line_no;
            const std::size_t cut = line.find_first_of("#;");
            if (cut != std::string::npos) line.erase(cut);
            const std::string s = trim(line);
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']' || s.size() < 3)
                    cf.fail(line_no, "malformed section header '" + s + "'");
                section = trim(s.substr(1, s.size() - 2));
                if (seen_sections[section]++)
                    cf.fail(line_no, "section [" + section + "] appears twice");
                continue;
            }
            const std::size_t eq = s.find('=');
            if (eq == std::string::npos || section.empty())
                cf.fail(line_no, "expected 'key = value' inside a [section], got '" + s + "'");
            const std::string key = trim(s.substr(0, eq));
            const std::string value = trim(s.substr(eq + 1));
            if (key.empty() || value.empty())
                cf.fail(line_no, "empty key or value in '" + s + "'");
            if (!cf.values_.emplace(section + "." + key, value).second)
                cf.fail(line_no, "duplicate key '" + key + "' in [" + section + "]");
        }
        return cf;
    }

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw invalid_input("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_text(buf.str(), path);
    }

    bool has(const std::string& section, const std::string& key) const {
        return values_.count(section + "." + key) != 0;
    }

    std::string get_string(const std::string& section, const std::string& key) const {
        const auto it = values_.find(section + "." + key);
        if (it == values_.end())
            throw invalid_input(origin_ + ": missing key '" + key + "' in [" + section + "]");
        return it->second;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return parse<double>(section, key, "a number");
    }
    std::uint64_t get_u64(const std::string& section, const std::string& key) const {
        return parse<std::uint64_t>(section, key, "an unsigned integer");
    }
    std::size_t get_size(const std::string& section, const std::string& key) const {
        return static_cast<std::size_t>(get_u64(section, key));
    }
    int get_int(const std::string& section, const std::string& key) const {
        return parse<int>(section, key, "an integer");
    }

    bool get_bool(const std::string& section, const std::string& key) const {
        const std::string v = get_string(section, key);
        if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "off" || v == "no" || v == "0") return false;
        throw invalid_input(origin_ + ": " + section + "." + key + " = '" + v +
                            "' is not a boolean");
    }

    /// All "section.key" names present, for schema checks.
    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        out.reserve(values_.size());
        for (const auto& [k, v] : values_) out.push_back(k);
        return out;
    }

    const std::string& origin() const { return origin_; }

private:
    template <typename T>
    T parse(const std::string& section, const std::string& key, const char* what) const {
        const std::string v = get_string(section, key);
        std::istringstream in(v);
        T out;
        in >> out;
        if (in.fail() || !in.eof())
            throw invalid_input(origin_ + ": " + section + "." + key + " = '" + v +
                                "' is not " + what);
        return out;
    }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
        throw invalid_input(origin_ + ":" + std::to_string(line) + ": " + msg);
    }

    std::map<std::string, std::string> values_;
    std::string origin_ = "<text>";
};

// ---------------------------------------------------------------------------

/// The full experiment description. Defaults reproduce the reference twin
/// case out of the box; a config file overrides individual entries. Time
/// units: the domain is 2*pi, gravity 1, so the fundamental mode's period is
/// T0 = 2*pi and the peak period Tp = 2*pi / sqrt(kp). The assimilation
/// interval tau = T0 / analyses_per_t0, and the solver step dt =
/// tau / steps_per_tau, so tau is a positive multiple of dt by construction.
struct ExperimentConfig {
    // grid
    std::size_t n = 256;
    double length_over_pi = 2.0;

    // jonswap
    std::size_t kp_multiple = 16; // kp = kp_multiple * k0
    double steepness = 0.11;      // kp * Hs / 2
    double gamma = 3.3;

    // hos
    int order = 3;
    std::size_t steps_per_tau = 16;
    double breaking_cutoff = 0.75;
    int filter_every = 1;
    bool conserve_mass = true;

    // ship (per unit breadth; waterplane stiffness and roll restoring derive
    // from the geometry)
    double mass = 3.78e-3;
    double added_mass = 1.31e-3; // truth value; the forecast model mis-guesses it
    double inertia = 2.02e-6;
    double added_inertia = 9.89e-7;
    double draft_per_hs = 2.68;
    double footprint_per_lambda_p = 0.08;
    double center_frac = 0.6; // hull center as a fraction of the domain
    double kb_per_hs = 1.34;  // buoyancy center above keel
    double kg = 0.0;          // mass center above keel
    double memory_tp = 2.0;   // radiation-memory horizon in Tp units
    double kappa33 = 5e-3, beta33 = 1.2, nu33 = 2.5; // truth heave kernel
    double kappa44 = 5e-6, beta44 = 1.2, nu44 = 5.0; // truth roll kernel

    // enkf
    std::size_t n_members = 100;
    double inflation = 1.0;       // wave/ship spread scaling per cycle
    double param_inflation = 1.005; // parameter-block spread scaling per cycle
    bool empirical_r = false;
    bool augment_params = true;
    double ma_guess_factor = 1.3;      // initial added-mass mis-set
    double kernel_amp_factor = 1.5;    // initial heave-kernel amplitude mis-set
    double kernel_decay_factor = 0.8;  // initial heave-kernel decay mis-set
    double ma_spread_frac = 0.2;       // member spread, fraction of the Ma guess
    double kernel_spread_frac = 0.2;   // member spread, fraction of max |K33 guess|
    std::size_t kernel_stride = 4;     // estimate every stride-th memory sample
    double localization_radius_lp = 2.0; // gain taper half-support, peak wavelengths; 0 = off
    double localization_psi_radius_lp = 0.0; // wider taper for the potential channel; 0 = same
    double localization_growth_lp_per_tp = 0.0; // taper radius widens at this rate as coherent errors lengthen
    bool gain_shrinkage = true;        // damp sampling-noise-level cross-covariances

    // observation
    ObservationSelector selector = ObservationSelector::all;
    double probe_frac = 0.5; // probe position as a fraction of the domain
    std::size_t analyses_per_t0 = 16;
    double sigma_eta_frac = 0.316;  // of the sea-state std dev Hs/4
    double sigma_heave_frac = 0.05; // of Hs
    double sigma_roll_deg = 0.1; // default keeps roll SNR near heave's
    double measurement_lowpass = 1.0; // project measured elevation onto this band fraction; 1 = raw

    // run
    double t_max_tp = 100.0;
    std::uint64_t seed = 4711;
    std::string out_dir = "out";
    std::vector<std::size_t> kernel_snapshots_tp = {0, 10, 40};

    // ---- derived quantities -------------------------------------------
    double domain_length() const { return length_over_pi * 3.141592653589793238463; }
    double k0() const { return 2.0 * 3.141592653589793238463 / domain_length(); }
    double kp() const { return k0() * static_cast<double>(kp_multiple); }
    double t0() const { return 2.0 * 3.141592653589793238463 / std::sqrt(k0()); }
    double tp() const { return 2.0 * 3.141592653589793238463 / std::sqrt(kp()); }
    double tau() const { return t0() / static_cast<double>(analyses_per_t0); }
    double dt() const { return tau() / static_cast<double>(steps_per_tau); }
    double hs() const { return 2.0 * steepness / kp(); }
    double sigma_eta() const { return hs() / 4.0; }
    double draft() const { return draft_per_hs * hs(); }
    double footprint() const {
        return footprint_per_lambda_p * 2.0 * 3.141592653589793238463 / kp();
    }
    double memory_horizon() const { return memory_tp * tp(); }
    double probe_x() const { return probe_frac * domain_length(); }

    std::size_t n_cycles() const {
        const double want = t_max_tp * tp() / tau();
        const double rounded = std::round(want);
        if (std::abs(want - rounded) > 1e-9 * (1.0 + rounded))
            throw invalid_input("run.t_max_tp = " + std::to_string(t_max_tp) +
                                " does not land on an analysis time (t_max/tau = " +
                                std::to_string(want) + ")");
        return static_cast<std::size_t>(rounded);
    }

    Grid grid() const { return Grid(n, domain_length()); }

    JonswapSpec jonswap(std::uint64_t realization_seed) const {
        JonswapSpec s;
        s.kp = kp();
        s.steepness = steepness;
        s.gamma = gamma;
        s.seed = realization_seed;
        return s;
    }

    HosConfig hos() const {
        HosConfig h;
        h.order = order;
        h.dt = dt();
        h.breaking_cutoff = breaking_cutoff;
        h.filter_every = filter_every;
        h.conserve_mass = conserve_mass;
        return h;
    }

    ShipGeometry geometry() const {
        ShipGeometry g;
        g.footprint = footprint();
        g.draft = draft();
        g.xc = center_frac * domain_length();
        g.kb = kb_per_hs * hs();
        g.kg = kg;
        return g;
    }

    /// The reference ship: true added mass and true radiation kernels.
    ShipParams truth_ship() const {
        ShipParams p;
        p.mass = mass;
        p.added_mass = added_mass;
        p.inertia = inertia;
        p.added_inertia = added_inertia;
        p.c33 = footprint();
        p.c44 = mass * geometry().gm();
        p.k33 = make_decay_kernel(kappa33, beta33, nu33, dt(), memory_horizon());
        p.k44 = make_decay_kernel(kappa44, beta44, nu44, dt(), memory_horizon());
        return p;
    }

    /// The forecast-side ship: added mass and heave kernel deliberately
    /// mis-set (these are what assimilation has to recover); the roll kernel
    /// is taken as known.
    ShipParams model_ship() const {
        ShipParams p = truth_ship();
        p.added_mass = ma_guess_factor * added_mass;
        p.k33 = make_decay_kernel(kernel_amp_factor * kappa33, kernel_decay_factor * beta33,
                                  nu33, dt(), memory_horizon());
        return p;
    }

    NoiseModel noise(const Grid& g) const {
        NoiseModel nm;
        nm.sigma_eta = sigma_eta_frac * sigma_eta();
        nm.sigma_psi = std::sqrt(psi_noise_variance_factor(g)) * nm.sigma_eta;
        nm.sigma_heave = sigma_heave_frac * hs();
        nm.sigma_roll = sigma_roll_deg * 3.141592653589793238463 / 180.0;
        return nm;
    }

    /// Memory-sample indices carried in the augmented state.
    std::vector<std::size_t> kernel_param_indices() const {
        const std::size_t count = truth_ship().k33.samples.size();
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < count; i += kernel_stride) idx.push_back(i);
        if (idx.back() != count - 1) idx.push_back(count - 1);
        return idx;
    }

    void validate() const {
        const Grid g = grid(); // power-of-two and positive-length checks
        if (kp_multiple < 1) throw invalid_input("jonswap.kp_multiple must be >= 1");
        if (!(steepness > 0.0)) throw invalid_input("jonswap.steepness must be > 0");
        if (!(gamma >= 1.0)) throw invalid_input("jonswap.gamma must be >= 1");
        if (order < 1) throw invalid_input("hos.order must be >= 1");
        if (steps_per_tau < 1) throw invalid_input("hos.steps_per_tau must be >= 1");
        if (!(breaking_cutoff > 0.0) || breaking_cutoff > 1.0)
            throw invalid_input("hos.breaking_cutoff must lie in (0, 1]");
        if (filter_every < 1) throw invalid_input("hos.filter_every must be >= 1");
        if (!(memory_tp > 0.0)) throw invalid_input("ship.memory_tp must be > 0");
        if (n_members < 2) throw invalid_input("enkf.n_members must be >= 2");
        if (!(inflation >= 1.0)) throw invalid_input("enkf.inflation must be >= 1");
        if (!(param_inflation >= 1.0))
            throw invalid_input("enkf.param_inflation must be >= 1");
        if (kernel_stride < 1) throw invalid_input("enkf.kernel_stride must be >= 1");
        if (!(ma_guess_factor > 0.0) || !(kernel_amp_factor > 0.0) ||
            !(kernel_decay_factor > 0.0))
            throw invalid_input("enkf guess factors must be > 0");
        if (ma_spread_frac < 0.0 || kernel_spread_frac < 0.0)
            throw invalid_input("enkf spread fractions must be >= 0");
        if (localization_radius_lp < 0.0)
            throw invalid_input("enkf.localization_radius_lp must be >= 0");
        if (localization_psi_radius_lp < 0.0)
            throw invalid_input("enkf.localization_psi_radius_lp must be >= 0");
        if (localization_growth_lp_per_tp < 0.0)
            throw invalid_input("enkf.localization_growth_lp_per_tp must be >= 0");
        if (!(measurement_lowpass > 0.0) || measurement_lowpass > 1.0)
            throw invalid_input("observation.measurement_lowpass must lie in (0, 1]");
        if (analyses_per_t0 < 1) throw invalid_input("observation.analyses_per_t0 must be >= 1");
        if (sigma_eta_frac < 0.0 || sigma_heave_frac < 0.0 || sigma_roll_deg < 0.0)
            throw invalid_input("observation noise levels must be >= 0");
        if (!(t_max_tp >= 0.0)) throw invalid_input("run.t_max_tp must be >= 0");
        check_ship_params(truth_ship());
        make_fk_table(g, geometry());     // hull must sit inside the domain
        probe_node(g, probe_x());         // probe must sit on a grid node
        const std::size_t last = n_cycles(); // t_max must land on an analysis time
        for (const std::size_t s : kernel_snapshots_tp) {
            const double cyc = static_cast<double>(s) * tp() / tau();
            if (std::abs(cyc - std::round(cyc)) > 1e-9 ||
                static_cast<std::size_t>(std::llround(cyc)) > last)
                throw invalid_input("run.kernel_snapshots_tp entry " + std::to_string(s) +
                                    " is not an analysis time within the run");
        }
    }

    static ExperimentConfig from(const ConfigFile& cf) {
        ExperimentConfig c;
        check_schema(cf);
        auto size_of = [&](const char* s, const char* k, std::size_t& v) {
            if (cf.has(s, k)) v = cf.get_size(s, k);
        };
        auto dbl = [&](const char* s, const char* k, double& v) {
            if (cf.has(s, k)) v = cf.get_double(s, k);
        };
        auto boolean = [&](const char* s, const char* k, bool& v) {
            if (cf.has(s, k)) v = cf.get_bool(s, k);
        };
        auto integer = [&](const char* s, const char* k, int& v) {
            if (cf.has(s, k)) v = cf.get_int(s, k);
        };

        size_of("grid", "n", c.n);
        dbl("grid", "length_over_pi", c.length_over_pi);
        size_of("jonswap", "kp_multiple", c.kp_multiple);
        dbl("jonswap", "steepness", c.steepness);
        dbl("jonswap", "gamma", c.gamma);
        integer("hos", "order", c.order);
        size_of("hos", "steps_per_tau", c.steps_per_tau);
        dbl("hos", "breaking_cutoff", c.breaking_cutoff);
        integer("hos", "filter_every", c.filter_every);
        boolean("hos", "conserve_mass", c.conserve_mass);
        dbl("ship", "mass", c.mass);
        dbl("ship", "added_mass", c.added_mass);
        dbl("ship", "inertia", c.inertia);
        dbl("ship", "added_inertia", c.added_inertia);
        dbl("ship", "draft_per_hs", c.draft_per_hs);
        dbl("ship", "footprint_per_lambda_p", c.footprint_per_lambda_p);
        dbl("ship", "center_frac", c.center_frac);
        dbl("ship", "kb_per_hs", c.kb_per_hs);
        dbl("ship", "kg", c.kg);
        dbl("ship", "memory_tp", c.memory_tp);
        dbl("ship", "kappa33", c.kappa33);
        dbl("ship", "beta33", c.beta33);
        dbl("ship", "nu33", c.nu33);
        dbl("ship", "kappa44", c.kappa44);
        dbl("ship", "beta44", c.beta44);
        dbl("ship", "nu44", c.nu44);
        size_of("enkf", "n_members", c.n_members);
        dbl("enkf", "inflation", c.inflation);
        dbl("enkf", "param_inflation", c.param_inflation);
        boolean("enkf", "empirical_r", c.empirical_r);
        boolean("enkf", "augment_params", c.augment_params);
        dbl("enkf", "ma_guess_factor", c.ma_guess_factor);
        dbl("enkf", "kernel_amp_factor", c.kernel_amp_factor);
        dbl("enkf", "kernel_decay_factor", c.kernel_decay_factor);
        dbl("enkf", "ma_spread_frac", c.ma_spread_frac);
        dbl("enkf", "kernel_spread_frac", c.kernel_spread_frac);
        size_of("enkf", "kernel_stride", c.kernel_stride);
        dbl("enkf", "localization_radius_lp", c.localization_radius_lp);
        dbl("enkf", "localization_psi_radius_lp", c.localization_psi_radius_lp);
        dbl("enkf", "localization_growth_lp_per_tp", c.localization_growth_lp_per_tp);
        dbl("observation", "measurement_lowpass", c.measurement_lowpass);
        boolean("enkf", "gain_shrinkage", c.gain_shrinkage);
        if (cf.has("observation", "selector"))
            c.selector = selector_from_string(cf.get_string("observation", "selector"));
        dbl("observation", "probe_frac", c.probe_frac);
        size_of("observation", "analyses_per_t0", c.analyses_per_t0);
        dbl("observation", "sigma_eta_frac", c.sigma_eta_frac);
        dbl("observation", "sigma_heave_frac", c.sigma_heave_frac);
        dbl("observation", "sigma_roll_deg", c.sigma_roll_deg);
        dbl("run", "t_max_tp", c.t_max_tp);
        if (cf.has("run", "seed")) c.seed = cf.get_u64("run", "seed");
        if (cf.has("run", "out_dir")) c.out_dir = cf.get_string("run", "out_dir");
        if (cf.has("run", "kernel_snapshots_tp"))
            c.kernel_snapshots_tp =
                parse_snapshot_list(cf.get_string("run", "kernel_snapshots_tp"), cf.origin());

        c.validate();
        return c;
    }

    static ExperimentConfig from_file(const std::string& path) {
        return from(ConfigFile::load(path));
    }

private:
    static std::vector<std::size_t> parse_snapshot_list(const std::string& v,
                                                        const std::string& origin) {
        std::vector<std::size_t> out;
        std::istringstream in(v);
        std::string item;
        while (std::getline(in, item, ',')) {
            // items may carry surrounding spaces: "0, 10, 40"
            const auto b = item.find_first_not_of(" \t");
            const auto e = item.find_last_not_of(" \t");
            std::istringstream one(b == std::string::npos ? std::string()
                                                          : item.substr(b, e - b + 1));
            std::size_t value = 0;
            one >> value;
            if (one.fail() || !one.eof())
                throw invalid_input(origin + ": run.kernel_snapshots_tp entry '" + item +
                                    "' is not an unsigned integer");
            out.push_back(value);
        }
        return out;
    }

    static void check_schema(const ConfigFile& cf) {
        static const char* known[] = {
            "grid.n", "grid.length_over_pi",
            "jonswap.kp_multiple", "jonswap.steepness", "jonswap.gamma",
            "hos.order", "hos.steps_per_tau", "hos.breaking_cutoff", "hos.filter_every",
            "hos.conserve_mass",
            "ship.mass", "ship.added_mass", "ship.inertia", "ship.added_inertia",
            "ship.draft_per_hs", "ship.footprint_per_lambda_p", "ship.center_frac",
            "ship.kb_per_hs", "ship.kg", "ship.memory_tp", "ship.kappa33", "ship.beta33",
            "ship.nu33", "ship.kappa44", "ship.beta44", "ship.nu44",
            "enkf.n_members", "enkf.inflation", "enkf.empirical_r", "enkf.augment_params",
            "enkf.ma_guess_factor", "enkf.kernel_amp_factor", "enkf.kernel_decay_factor",
            "enkf.ma_spread_frac", "enkf.kernel_spread_frac", "enkf.kernel_stride",
            "enkf.localization_radius_lp",
            "enkf.localization_psi_radius_lp",
            "enkf.localization_growth_lp_per_tp",
            "observation.measurement_lowpass",
            "enkf.gain_shrinkage",
            "enkf.param_inflation",
            "observation.selector", "observation.probe_frac", "observation.analyses_per_t0",
            "observation.sigma_eta_frac", "observation.sigma_heave_frac",
            "observation.sigma_roll_deg",
            "run.t_max_tp", "run.seed", "run.out_dir", "run.kernel_snapshots_tp",
        };
        for (const std::string& key : cf.keys()) {
            bool ok = false;
            for (const char* k : known)
                if (key == k) {
                    ok = true;
                    break;
                }
            if (!ok) throw invalid_input(cf.origin() + ": unknown config key '" + key + "'");
        }
    }
};

} // namespace wavetwin
