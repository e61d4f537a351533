#include <catch2/catch_amalgamated.hpp>

#include <wavetwin/config.hpp>

using namespace wavetwin;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("config text parsing handles sections, comments, and whitespace") {
    const ConfigFile cf = ConfigFile::parse_text(
        "# full-line comment\n"
        "\n"
        "[grid]\n"
        "  n = 128   # trailing comment\n"
        "\tlength_over_pi =\t4.0 ; other comment style\n"
        "[run]\n"
        "out_dir = results/run one\n",
        "demo.cfg");

    CHECK(cf.has("grid", "n"));
    CHECK(cf.has("grid", "length_over_pi"));
    CHECK_FALSE(cf.has("run", "n"));
    CHECK(cf.get_size("grid", "n") == 128);
    CHECK(cf.get_double("grid", "length_over_pi") == 4.0);
    // values keep interior spaces, lose surrounding ones
    CHECK(cf.get_string("run", "out_dir") == "results/run one");
    CHECK(cf.keys().size() == 3);
    CHECK(cf.origin() == "demo.cfg");
}

TEST_CASE("config parsing rejects malformed input with file and line positions") {
    CHECK_THROWS_WITH(ConfigFile::parse_text("n = 4\n", "demo.cfg"),
                      ContainsSubstring("demo.cfg:1") &&
                          ContainsSubstring("inside a [section]"));
    CHECK_THROWS_WITH(ConfigFile::parse_text("[grid]\njust words\n", "demo.cfg"),
                      ContainsSubstring("demo.cfg:2"));
    CHECK_THROWS_WITH(ConfigFile::parse_text("[grid\nn = 4\n", "demo.cfg"),
                      ContainsSubstring("malformed section header"));
    CHECK_THROWS_WITH(ConfigFile::parse_text("[grid]\nn = 4\nn = 8\n", "demo.cfg"),
                      ContainsSubstring("demo.cfg:3") && ContainsSubstring("duplicate key 'n'"));
    CHECK_THROWS_WITH(ConfigFile::parse_text("[grid]\nn = 4\n[run]\nseed = 1\n[grid]\n",
                                             "demo.cfg"),
                      ContainsSubstring("demo.cfg:5") && ContainsSubstring("appears twice"));
    CHECK_THROWS_WITH(ConfigFile::parse_text("[grid]\nn =\n", "demo.cfg"),
                      ContainsSubstring("empty key or value"));
    CHECK_THROWS_WITH(ConfigFile::parse_text("[grid]\n = 4\n", "demo.cfg"),
                      ContainsSubstring("empty key or value"));
}

TEST_CASE("typed getters convert values or reject them by name") {
    const ConfigFile cf = ConfigFile::parse_text(
        "[a]\n"
        "d = 2.5\n"
        "u = 12\n"
        "i = -3\n"
        "bad = 1.5x\n"
        "word = fast\n"
        "b1 = true\nb2 = on\nb3 = yes\nb4 = 1\n"
        "b5 = false\nb6 = off\nb7 = no\nb8 = 0\n",
        "demo.cfg");

    CHECK(cf.get_double("a", "d") == 2.5);
    CHECK(cf.get_u64("a", "u") == 12);
    CHECK(cf.get_int("a", "i") == -3);
    CHECK(cf.get_double("a", "u") == 12.0);

    CHECK_THROWS_WITH(cf.get_double("a", "bad"), ContainsSubstring("is not a number"));
    CHECK_THROWS_WITH(cf.get_u64("a", "d"), ContainsSubstring("is not an unsigned integer"));
    CHECK_THROWS_WITH(cf.get_int("a", "word"), ContainsSubstring("is not an integer"));
    CHECK_THROWS_WITH(cf.get_string("a", "missing"),
                      ContainsSubstring("missing key 'missing' in [a]"));

    CHECK(cf.get_bool("a", "b1"));
    CHECK(cf.get_bool("a", "b2"));
    CHECK(cf.get_bool("a", "b3"));
    CHECK(cf.get_bool("a", "b4"));
    CHECK_FALSE(cf.get_bool("a", "b5"));
    CHECK_FALSE(cf.get_bool("a", "b6"));
    CHECK_FALSE(cf.get_bool("a", "b7"));
    CHECK_FALSE(cf.get_bool("a", "b8"));
    CHECK_THROWS_WITH(cf.get_bool("a", "word"), ContainsSubstring("is not a boolean"));
}

TEST_CASE("default experiment derives the reference scales") {
    const ExperimentConfig cfg;
    const double pi = 3.141592653589793238463;

    CHECK(cfg.domain_length() == Catch::Approx(2.0 * pi));
    CHECK(cfg.k0() == Catch::Approx(1.0));
    CHECK(cfg.kp() == Catch::Approx(16.0));
    CHECK(cfg.t0() == Catch::Approx(2.0 * pi));
    CHECK(cfg.tp() == Catch::Approx(pi / 2.0));
    CHECK(cfg.tau() == Catch::Approx(2.0 * pi / 16.0));
    CHECK(cfg.dt() == Catch::Approx(2.0 * pi / 256.0));
    CHECK(cfg.hs() == Catch::Approx(0.01375));
    CHECK(cfg.sigma_eta() == Catch::Approx(0.01375 / 4.0));
    CHECK(cfg.draft() == Catch::Approx(2.68 * 0.01375));
    CHECK(cfg.footprint() == Catch::Approx(0.08 * 2.0 * pi / 16.0));
    CHECK(cfg.memory_horizon() == Catch::Approx(pi));
    CHECK(cfg.n_cycles() == 400); // 100 peak periods, 4 analyses per peak period

    // the probe sits exactly mid-domain, on node n/2
    CHECK(probe_node(cfg.grid(), cfg.probe_x()) == 128);

    // memory kernel: horizon pi at dt = 2*pi/256 -> 128 intervals + both ends
    const ShipParams truth = cfg.truth_ship();
    CHECK(truth.k33.samples.size() == 129);
    CHECK(truth.k33.samples[0] == Catch::Approx(5e-3));
    CHECK(truth.c33 == Catch::Approx(cfg.footprint()));
    CHECK(truth.c44 == Catch::Approx(7.808e-5).epsilon(1e-3));

    // every 4th memory sample plus the endpoint is estimated
    const std::vector<std::size_t> idx = cfg.kernel_param_indices();
    REQUIRE(idx.size() == 33);
    CHECK(idx[0] == 0);
    CHECK(idx[1] == 4);
    CHECK(idx.back() == 128);

    // the forecast model mis-sets added mass and the heave kernel only
    const ShipParams model = cfg.model_ship();
    CHECK(model.added_mass == Catch::Approx(1.3 * truth.added_mass));
    CHECK(model.k33.samples[0] == Catch::Approx(1.5 * truth.k33.samples[0]));
    CHECK(model.k44.samples == truth.k44.samples);
    CHECK(model.mass == truth.mass);

    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config files override defaults and keep the rest") {
    const ConfigFile cf = ConfigFile::parse_text(
        "[grid]\n"
        "n = 128\n"
        "[jonswap]\n"
        "steepness = 0.08\n"
        "[observation]\n"
        "selector = heave\n"
        "[run]\n"
        "t_max_tp = 5\n"
        "seed = 99\n"
        "out_dir = elsewhere\n"
        "kernel_snapshots_tp = 0,5\n",
        "demo.cfg");
    const ExperimentConfig cfg = ExperimentConfig::from(cf);

    CHECK(cfg.n == 128);
    CHECK(cfg.steepness == 0.08);
    CHECK(cfg.selector == ObservationSelector::heave);
    CHECK(cfg.t_max_tp == 5.0);
    CHECK(cfg.seed == 99);
    CHECK(cfg.out_dir == "elsewhere");
    CHECK(cfg.kernel_snapshots_tp == std::vector<std::size_t>{0, 5});
    // untouched entries keep their defaults
    CHECK(cfg.kp_multiple == 16);
    CHECK(cfg.gamma == 3.3);
    CHECK(cfg.n_members == 100);
    CHECK(cfg.n_cycles() == 20);
}

TEST_CASE("unknown config keys are rejected") {
    CHECK_THROWS_WITH(
        ExperimentConfig::from(ConfigFile::parse_text("[grid]\nm = 4\n", "demo.cfg")),
        ContainsSubstring("unknown config key 'grid.m'"));
    CHECK_THROWS_WITH(
        ExperimentConfig::from(ConfigFile::parse_text("[gird]\nn = 256\n", "demo.cfg")),
        ContainsSubstring("unknown config key 'gird.n'"));
}

TEST_CASE("snapshot lists parse integers and reject the rest") {
    ConfigFile ok = ConfigFile::parse_text("[run]\nkernel_snapshots_tp = 0, 10 , 40\n", "d.cfg");
    CHECK(ExperimentConfig::from(ok).kernel_snapshots_tp ==
          std::vector<std::size_t>{0, 10, 40});

    CHECK_THROWS_WITH(
        ExperimentConfig::from(
            ConfigFile::parse_text("[run]\nkernel_snapshots_tp = 0,x\n", "d.cfg")),
        ContainsSubstring("'x' is not an unsigned integer"));
    CHECK_THROWS_AS(ExperimentConfig::from(ConfigFile::parse_text(
                        "[run]\nkernel_snapshots_tp = 0,1.5\n", "d.cfg")),
                    invalid_input);
}

TEST_CASE("validation rejects out-of-range experiment parameters") {
    auto broken = [](auto&& tweak) {
        ExperimentConfig c;
        tweak(c);
        return c;
    };
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.n = 100; }).validate(), invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.steepness = 0.0; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.gamma = 0.5; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.order = 0; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.breaking_cutoff = 0.0; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.breaking_cutoff = 1.5; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.filter_every = 0; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.memory_tp = 0.0; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.n_members = 1; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.inflation = 0.99; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.kernel_stride = 0; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.ma_guess_factor = 0.0; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.ma_spread_frac = -0.1; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.analyses_per_t0 = 0; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.sigma_roll_deg = -1.0; }).validate(),
                    invalid_input);
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.t_max_tp = -1.0; }).validate(),
                    invalid_input);
    // probe must land on a grid node: 0.3 * 256 nodes = 76.8
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.probe_frac = 0.3; }).validate(),
                    invalid_input);
    // hull centered too close to the boundary sticks out of the domain
    CHECK_THROWS_AS(broken([](ExperimentConfig& c) { c.center_frac = 0.999; }).validate(),
                    invalid_input);
    // peak period must divide into whole assimilation intervals
    CHECK_THROWS_WITH(broken([](ExperimentConfig& c) { c.t_max_tp = 0.013; }).validate(),
                      ContainsSubstring("does not land on an analysis time"));
    CHECK_THROWS_WITH(broken([](ExperimentConfig& c) { c.t_max_tp = 5.0; }).validate(),
                      ContainsSubstring("kernel_snapshots_tp entry 10"));
}

TEST_CASE("missing config file error names the path") {
    CHECK_THROWS_WITH(ExperimentConfig::from_file("/no/such/file.cfg"),
                      ContainsSubstring("/no/such/file.cfg"));
}

TEST_CASE("selector names round-trip") {
    for (const char* name : {"wave", "heave", "roll", "all"})
        CHECK(std::string(to_string(selector_from_string(name))) == name);
    CHECK_THROWS_AS(selector_from_string("waves"), invalid_input);
}
