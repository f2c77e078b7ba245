#include <doctest.h>

#include <string>

#include "dzofl/config.hpp"
#include "dzofl/errors.hpp"

using namespace dzofl;

TEST_CASE("serialize/parse round-trips every preset exactly") {
    for (const std::string& name : preset_names()) {
        RunConfig cfg = make_preset(name);
        CHECK_NOTHROW(validate(cfg));
        RunConfig back = parse_config(serialize_config(cfg));
        CHECK(back == cfg);
        CHECK(config_hash(back) == config_hash(cfg));
    }
    CHECK(!preset_names().empty());
    CHECK_THROWS_AS(make_preset("no-such-preset"), ConfigError);
}

TEST_CASE("an empty document yields the defaults") {
    RunConfig parsed = parse_config("{}");
    CHECK(parsed == RunConfig{});
}

TEST_CASE("unknown keys are rejected by name") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"methd": "dzofl"})"),
                         doctest::Contains("methd"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"task": {"dims": 4}})"),
                         doctest::Contains("dims"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"schedule": {"alpha_0": 0.1}})"),
                         doctest::Contains("alpha_0"), ConfigError);
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
}

TEST_CASE("partial documents override only the named fields") {
    RunConfig parsed = parse_config(R"({"horizon": 42, "task": {"dim": 3}})");
    CHECK(parsed.horizon == 42);
    CHECK(parsed.task.dim == 3);
    CHECK(parsed.task.kind == RunConfig{}.task.kind);
    CHECK(parsed.method == "dzofl");
}

TEST_CASE("validation names the violated constraint") {
    RunConfig cfg = make_preset(preset_names().front());

    RunConfig bad = cfg;
    bad.schedule.upsilon1 = 0.25;
    bad.schedule.upsilon2 = 0.25;
    CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("upsilon1+3*upsilon2 > 1"),
                         ConfigError);

    bad = cfg;
    bad.channel.p = 0.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);

    bad = cfg;
    bad.method = "sgd";
    CHECK_THROWS_AS(validate(bad), ConfigError);

    bad = cfg;
    bad.task.kind = "cubic";
    CHECK_THROWS_AS(validate(bad), ConfigError);

    bad = cfg;
    bad.task.dim = 0;
    CHECK_THROWS_AS(validate(bad), ConfigError);

    bad = cfg;
    bad.uplink.kind = "stochastic_mantissa";
    bad.uplink.payload_bits = 8; // wire layout needs sign + 7 exponent bits + mantissa
    CHECK_THROWS_AS(validate(bad), ConfigError);

    bad = cfg;
    bad.replication_seeds.clear();
    CHECK_THROWS_AS(validate(bad), ConfigError);

    bad = cfg;
    bad.baseline_round_ratio = 0.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);

    bad = cfg;
    bad.cost.mac_exponent = 2.5;
    CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("config hash separates configs and survives reserialization") {
    RunConfig a = make_preset(preset_names().front());
    RunConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    b.horizon += 1;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.seeds.xi += 1;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("objective factory dispatches on the task kind") {
    TaskConfig t;
    t.kind = "quadratic";
    t.dim = 5;
    t.num_devices = 2;
    auto q = build_objective(t);
    CHECK(q.kind == "quadratic");
    CHECK(q.dim() == 5);
    CHECK(q.num_devices() == 2);
    CHECK(q.known_minimum.has_value());

    t.kind = "nonconvex";
    auto n = build_objective(t);
    CHECK(n.kind == "nonconvex");
    CHECK(!n.known_minimum.has_value());

    t.kind = "logistic";
    t.samples_per_device = 32;
    auto l = build_objective(t);
    CHECK(l.kind == "logistic");
    CHECK(l.num_devices() == 2);

    t.kind = "cubic";
    CHECK_THROWS_AS(build_objective(t), ConfigError);
}

TEST_CASE("quantizer factory dispatches on kind") {
    QuantizerConfig qc;
    qc.kind = "identity";
    qc.payload_bits = 64;
    CHECK(build_quantizer(qc).kind == QuantizerKind::identity);
    qc.kind = "stochastic_mantissa";
    qc.payload_bits = 16;
    QuantizerSpec spec = build_quantizer(qc);
    CHECK(spec.kind == QuantizerKind::stochastic_mantissa);
    CHECK(spec.payload_bits == 16);
    qc.kind = "uniform";
    CHECK_THROWS_AS(build_quantizer(qc), ConfigError);
}

TEST_CASE("engine wiring differentiates replications but shares the objective") {
    RunConfig cfg = make_preset(preset_names().front());
    GlobalObjective obj = build_objective(cfg.task);

    EngineConfig a = build_engine_config(cfg, obj, 1);
    EngineConfig b = build_engine_config(cfg, obj, 2);
    CHECK_NOTHROW(validate(a));
    CHECK(a.objective == &obj);
    CHECK(a.channel.p == cfg.channel.p);
    CHECK(a.schedule.alpha0 == cfg.schedule.alpha0);
    // different replication seeds must decorrelate every stream
    CHECK(a.perturbation.seed != b.perturbation.seed);
    CHECK(a.channel.seed != b.channel.seed);
    CHECK(a.xi.seed != b.xi.seed);
    CHECK(a.quantizer_seed != b.quantizer_seed);
    // same replication seed reproduces the same wiring
    EngineConfig a2 = build_engine_config(cfg, obj, 1);
    CHECK(a2.perturbation.seed == a.perturbation.seed);
    CHECK(a2.xi.seed == a.xi.seed);
}
