#include "doctest.h"

#include <stdexcept>
#include <string>

#include "weylwalk/config.hpp"

using namespace weylwalk;
using config::Config;
using config::ConfigError;

namespace {

const char* kSample = R"(
seed = 42
out_dir = "out"

[tolerances]
eps = 1e-8

[sequences.h]
kind = "geometric"
c = 1.0
q = 0.5

[sequences.d]
kind = "power"
c = 0.1
p = 2.0
prefix = [0.7]

[blocks.wide]
prefix = [[0.0, 2.0], [-0.5, 1.0]]
tail_shift = "zero"
tail_delta = "zero"

[operators.D]
eigs = "d"
label = "Dx"

[[scenarios]]
name = "continuity_criterion"
h = "h"
block = "wide"

[[scenarios]]
name = "fourier_decay"
n_max = 6
)";

} // namespace

TEST_CASE("full schema parses and resolves") {
    const Config cfg = config::parse_string(kSample, "sample");
    CHECK(cfg.seed == 42);
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.eps == doctest::Approx(1e-8));
    CHECK(cfg.registry.sequences.count("h") == 1);
    CHECK(cfg.registry.sequences.at("d").term(1) == doctest::Approx(0.7)); // prefix override
    CHECK(cfg.registry.sequences.at("d").term(2) == doctest::Approx(0.025));
    CHECK(cfg.registry.block_defs.at("wide").edge(2).hi == doctest::Approx(1.0));
    CHECK(cfg.registry.diag_ops.at("D").label == "Dx");
    REQUIRE(cfg.scenarios.size() == 2);
    CHECK(cfg.scenarios[0].seed == 42);
    CHECK(std::get<std::string>(cfg.scenarios[0].params.at("h")) == "h");
    CHECK(std::get<int64_t>(cfg.scenarios[1].params.at("n_max")) == 6);
}

TEST_CASE("syntax errors carry line and column") {
    try {
        (void)config::parse_string("seed = 1\nbogus ~ 3\n", "bad.toml");
        FAIL("expected ConfigError");
    } catch (const ConfigError& ex) {
        const std::string msg = ex.what();
        CHECK(msg.find("bad.toml:2:") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS((void)config::parse_string("mystery = 1\n", "x"), ConfigError);
    CHECK_THROWS_AS((void)config::parse_string("[tolerances]\nwat = 2\n", "x"), ConfigError);
    CHECK_THROWS_AS(
        (void)config::parse_string("[sequences.s]\nkind = \"geometric\"\nc = 1.0\nq = 0.5\nextra = 1\n", "x"),
        ConfigError);
}

TEST_CASE("unresolved references are rejected") {
    CHECK_THROWS_AS((void)config::parse_string(
                        "[blocks.b]\nprefix = []\ntail_shift = \"nope\"\ntail_delta = \"zero\"\n", "x"),
                    ConfigError);
    CHECK_THROWS_AS((void)config::parse_string("[[scenarios]]\nname = \"not_a_scenario\"\n", "x"),
                    ConfigError);
}

TEST_CASE("overrides") {
    Config cfg = config::parse_string(kSample, "sample");

    config::apply_override(cfg, "seed=7");
    CHECK(cfg.seed == 7);
    CHECK(cfg.scenarios[0].seed == 7);

    config::apply_override(cfg, "tolerances.eps=1e-6");
    CHECK(cfg.eps == doctest::Approx(1e-6));

    // scenario-qualified override hits only that scenario
    config::apply_override(cfg, "fourier_decay.n_max=9");
    CHECK(std::get<int64_t>(cfg.scenarios[1].params.at("n_max")) == 9);
    CHECK(cfg.scenarios[0].params.count("n_max") == 0);

    // namespace-style override lands on every scenario
    config::apply_override(cfg, "walks.M=1000");
    CHECK(std::get<int64_t>(cfg.scenarios[0].params.at("M")) == 1000);
    CHECK(std::get<int64_t>(cfg.scenarios[1].params.at("M")) == 1000);

    CHECK_THROWS_AS(config::apply_override(cfg, "nonsense"), ConfigError);
}

TEST_CASE("default config covers every scenario") {
    const Config cfg = config::default_config();
    CHECK(cfg.scenarios.size() == experiments::scenario_names().size());
    for (size_t i = 0; i < cfg.scenarios.size(); ++i)
        CHECK(cfg.scenarios[i].name == experiments::scenario_names()[i]);
}
