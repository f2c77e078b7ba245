#include "dzofl/runner.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dzofl/errors.hpp"
#include "dzofl/rng.hpp"
#include "dzofl/theory.hpp"

namespace dzofl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw TaskError("cannot write " + path);
    out << text;
    if (!out) throw TaskError("write failed for " + path);
}

json quantizer_layout(const QuantizerSpec& q) {
    if (q.kind == QuantizerKind::identity)
        return json{{"kind", "identity"}, {"payload_bits", q.payload_bits}, {"sigma", 0.0}};
    return json{{"kind", "stochastic_mantissa"},
                {"payload_bits", q.payload_bits},
                {"sign_bits", 1},
                {"exponent_bits", 7},
                {"mantissa_bits", q.mantissa_bits()},
                {"sigma", q.sigma()},
                {"max_magnitude", q.max_magnitude()},
                {"min_magnitude", q.min_magnitude()}};
}

json constants_json(const TheoryConstants& tc) {
    return json{{"p", tc.p},
                {"num_devices", tc.num_devices},
                {"alpha1", tc.alpha1},
                {"alpha2", tc.alpha2},
                {"alpha3", tc.alpha3},
                {"sigma", tc.sigma},
                {"smoothness", tc.smoothness},
                {"loss_lipschitz_sq", tc.loss_lipschitz_sq},
                {"q", tc.q},
                {"c1", tc.c1},
                {"c2", tc.c2},
                {"c3", tc.c3}};
}

json cost_comparison_to_json(const CostComparison& c) {
    return json{{"dzofl",
                 json{{"rounds", c.dzofl_rounds},
                      {"fleet_energy_j", c.dzofl_fleet_energy_j},
                      {"device_energy_j", c.dzofl_device_energy_j},
                      {"time_s", c.dzofl_time_s},
                      {"device_uplink_bits", c.dzofl_device_uplink_bits}}},
                {"baseline",
                 json{{"rounds", c.baseline_rounds},
                      {"fleet_energy_j", c.baseline_fleet_energy_j},
                      {"device_energy_j", c.baseline_device_energy_j},
                      {"time_s", c.baseline_time_s},
                      {"device_uplink_bits", c.baseline_device_uplink_bits}}}};
}

struct ReplicationError {
    bool failed = false;
    std::string message;
};

ReplicationOutcome run_one_replication(const RunConfig& cfg, const GlobalObjective& obj,
                                       std::uint64_t rep_seed, const std::string& out_dir) {
    EngineConfig ec = build_engine_config(cfg, obj, rep_seed);
    const Method method = cfg.method == "baseline" ? Method::baseline : Method::dzofl;
    TrainState st = make_initial_state(ec);

    const std::string csv_name = "rep_" + std::to_string(rep_seed) + ".csv";
    const std::string tmp_path = out_dir + "/" + csv_name + ".tmp";
    std::ofstream out(tmp_path);
    if (!out) throw TaskError("cannot write " + tmp_path);
    out << csv_header() << "\n";

    ReplicationOutcome res;
    res.replication_seed = rep_seed;
    res.csv_file = csv_name;
    res.rounds = cfg.horizon + 1; // records k = 0..horizon

    double num = 0.0, den = 0.0;
    double final_grad = std::numeric_limits<double>::quiet_NaN();
    RoundRecord last;
    run_rounds(ec, method, st, res.rounds, [&](const RoundRecord& rec) {
        out << csv_row(rec) << "\n";
        if (std::isfinite(rec.grad_norm_sq)) {
            double w = alpha(cfg.schedule, rec.k) * gamma(cfg.schedule, rec.k);
            num += w * rec.grad_norm_sq;
            den += w;
            final_grad = rec.grad_norm_sq;
        }
        last = rec;
        if (cfg.checkpoint_every > 0 && (rec.k + 1) % cfg.checkpoint_every == 0)
            write_text_file(out_dir + "/checkpoint_rep_" + std::to_string(rep_seed) + ".json",
                            serialize_state(st));
    });
    out.close();
    if (!out) throw TaskError("write failed for " + tmp_path);
    fs::rename(tmp_path, out_dir + "/" + csv_name);

    res.weighted_grad_mean = den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
    res.final_grad_norm_sq = final_grad;
    res.saturation_count = st.saturation_count;
    res.cum_uplink_bits = st.cum_uplink_bits;
    res.cum_uplink_bits_attempted = st.cum_uplink_bits_attempted;
    res.cum_downlink_bits = st.cum_downlink_bits;
    res.cum_energy_j = last.cum_energy_j;
    res.cum_time_s = last.cum_time_s;
    return res;
}

} // namespace

std::string csv_header() {
    return "k,received_count,delta_f,g_norm_sq,grad_norm_sq,uplink_bits,"
           "uplink_bits_attempted,downlink_bits,cum_uplink_bits,"
           "cum_uplink_bits_attempted,cum_downlink_bits,cum_energy_j,cum_time_s";
}

std::string csv_row(const RoundRecord& rec) {
    std::string row = std::to_string(rec.k);
    row += ',';
    row += std::to_string(rec.received_count);
    row += ',';
    row += g17(rec.delta_f);
    row += ',';
    row += g17(rec.g_norm_sq);
    row += ',';
    row += g17(rec.grad_norm_sq);
    row += ',';
    row += std::to_string(rec.uplink_bits);
    row += ',';
    row += std::to_string(rec.uplink_bits_attempted);
    row += ',';
    row += std::to_string(rec.downlink_bits);
    row += ',';
    row += std::to_string(rec.cum_uplink_bits);
    row += ',';
    row += std::to_string(rec.cum_uplink_bits_attempted);
    row += ',';
    row += std::to_string(rec.cum_downlink_bits);
    row += ',';
    row += g17(rec.cum_energy_j);
    row += ',';
    row += g17(rec.cum_time_s);
    return row;
}

CostComparison compare_costs(const RunConfig& cfg) {
    validate(cfg);
    const CostParams& cp = cfg.cost;
    const int n = cfg.task.num_devices;
    const int d = cfg.task.dim;
    const int m = cfg.uplink.payload_bits;

    CostComparison c;
    c.dzofl_rounds = static_cast<double>(cfg.horizon + 1);
    c.baseline_rounds = c.dzofl_rounds / cfg.baseline_round_ratio;

    c.dzofl_device_uplink_bits =
        uplink_bits_total(Method::dzofl, c.dzofl_rounds, 1, m, d);
    c.baseline_device_uplink_bits =
        uplink_bits_total(Method::baseline, c.baseline_rounds, 1, m, d);

    c.dzofl_device_energy_j =
        total_energy(Method::dzofl, c.dzofl_rounds, cp, c.dzofl_device_uplink_bits);
    c.baseline_device_energy_j =
        total_energy(Method::baseline, c.baseline_rounds, cp, c.baseline_device_uplink_bits);
    // radio energy is linear in bits and every device pays the same compute,
    // so the fleet total is just n times the per-device total
    c.dzofl_fleet_energy_j = static_cast<double>(n) * c.dzofl_device_energy_j;
    c.baseline_fleet_energy_j = static_cast<double>(n) * c.baseline_device_energy_j;

    c.dzofl_time_s = convergence_time(Method::dzofl, c.dzofl_rounds, cp, m);
    c.baseline_time_s = convergence_time(Method::baseline, c.baseline_rounds, cp,
                                         static_cast<double>(m) * static_cast<double>(d));
    return c;
}

std::string cost_comparison_json(const RunConfig& cfg, const CostComparison& c) {
    json j = cost_comparison_to_json(c);
    j["config_hash"] = hash_hex(config_hash(cfg));
    j["version"] = kCodeVersion;
    j["dzofl_cheaper"] = c.dzofl_fleet_energy_j < c.baseline_fleet_energy_j;
    return j.dump(2) + "\n";
}

ExperimentResult run_experiment(const RunConfig& cfg, const std::string& out_dir,
                                int workers) {
    validate(cfg);
    fs::create_directories(out_dir);

    GlobalObjective obj = build_objective(cfg.task);
    EngineConfig probe = build_engine_config(cfg, obj, cfg.replication_seeds.front());
    validate(probe);
    TheoryConstants tc = make_constants(obj, probe.channel, probe.uplink, probe.perturbation);

    ExperimentResult result;
    result.costs = compare_costs(cfg);
    if (obj.known_minimum) {
        double delta0 = obj.value(obj.initial_point) - *obj.known_minimum;
        result.rate_bound_available = true;
        result.rate_bound_value = rate_bound(tc, cfg.schedule, delta0, cfg.horizon);
    }

    // the manifest goes in first so even a failed run leaves an identifiable
    // artifact directory
    json manifest{
        {"version", kCodeVersion},
        {"config_hash", hash_hex(config_hash(cfg))},
        {"config", json::parse(serialize_config(cfg))},
        {"seeds",
         json{{"perturbation", cfg.seeds.perturbation},
              {"channel", cfg.seeds.channel},
              {"quantizer", cfg.seeds.quantizer},
              {"xi", cfg.seeds.xi},
              {"replications", cfg.replication_seeds}}},
        {"quantizers", json{{"uplink", quantizer_layout(probe.uplink)},
                            {"downlink", quantizer_layout(probe.downlink)}}},
        {"theory_constants", constants_json(tc)},
        {"notes",
         json{{"quantizer",
               "stochastic mantissa rounding with certified relative variance "
               "2^-2m is an implementation choice; any unbiased quantizer with "
               "relative distortion would do"},
              {"units", "sram_bits holds the on-chip buffer size in bits (8 MiB); "
                        "all storage comparisons are in bits"}}}};
    write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");

    const std::size_t reps = cfg.replication_seeds.size();
    std::vector<ReplicationOutcome> outcomes(reps);
    std::vector<ReplicationError> errors(reps);

    auto run_slot = [&](std::size_t i) {
        try {
            outcomes[i] = run_one_replication(cfg, obj, cfg.replication_seeds[i], out_dir);
        } catch (const std::exception& e) {
            errors[i].failed = true;
            errors[i].message = e.what();
        }
    };

    int pool = workers > 0 ? workers
                           : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    pool = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(pool), reps));
    if (pool <= 1) {
        for (std::size_t i = 0; i < reps; ++i) run_slot(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(pool));
        for (int t = 0; t < pool; ++t)
            threads.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < reps; i = next.fetch_add(1))
                    run_slot(i);
            });
        for (auto& th : threads) th.join();
    }

    for (std::size_t i = 0; i < reps; ++i) {
        if (!errors[i].failed) continue;
        json err{{"error", errors[i].message},
                 {"replication_seed", cfg.replication_seeds[i]},
                 {"config_hash", hash_hex(config_hash(cfg))}};
        json done = json::array();
        for (std::size_t j = 0; j < reps; ++j)
            if (!errors[j].failed) done.push_back(cfg.replication_seeds[j]);
        err["completed_replications"] = done;
        write_text_file(out_dir + "/error.json", err.dump(2) + "\n");
        throw TaskError("replication " + std::to_string(cfg.replication_seeds[i]) +
                        " failed: " + errors[i].message);
    }

    result.replications = outcomes;
    double sum = 0.0;
    std::uint64_t saturations = 0;
    json reps_json = json::array();
    for (const auto& r : outcomes) {
        sum += r.weighted_grad_mean;
        saturations += r.saturation_count;
        reps_json.push_back(json{{"replication_seed", r.replication_seed},
                                 {"csv_file", r.csv_file},
                                 {"rounds", r.rounds},
                                 {"weighted_grad_mean", finite_or_null(r.weighted_grad_mean)},
                                 {"final_grad_norm_sq", finite_or_null(r.final_grad_norm_sq)},
                                 {"saturation_count", r.saturation_count},
                                 {"cum_uplink_bits", r.cum_uplink_bits},
                                 {"cum_uplink_bits_attempted", r.cum_uplink_bits_attempted},
                                 {"cum_downlink_bits", r.cum_downlink_bits},
                                 {"cum_energy_j", r.cum_energy_j},
                                 {"cum_time_s", r.cum_time_s}});
    }
    result.weighted_grad_mean = sum / static_cast<double>(reps);

    json summary{{"version", kCodeVersion},
                 {"config_hash", hash_hex(config_hash(cfg))},
                 {"method", cfg.method},
                 {"weighted_grad_mean", finite_or_null(result.weighted_grad_mean)},
                 {"rate_bound", result.rate_bound_available ? json(result.rate_bound_value)
                                                            : json("unavailable")},
                 {"saturation_total", saturations},
                 {"costs", cost_comparison_to_json(result.costs)},
                 {"replications", reps_json}};
    // summary.json is the success marker and completes the directory
    write_text_file(out_dir + "/summary.json", summary.dump(2) + "\n");
    return result;
}

std::vector<CheckResult> run_validators(const RunConfig& cfg) {
    validate(cfg);
    std::vector<CheckResult> results;

    results.push_back(check_aggregation_mean(cfg.channel.p, cfg.task.num_devices, 200000,
                                             rng::mix(cfg.seeds.channel, 77)));

    // unbiasedness and second moment on a quadratic ensemble of the
    // configured size (zero estimator bias makes the mean check exact)
    RunConfig quad_cfg = cfg;
    quad_cfg.task.kind = "quadratic";
    GlobalObjective quad = build_objective(quad_cfg.task);
    EngineConfig quad_ec = build_engine_config(quad_cfg, quad, cfg.replication_seeds.front());
    results.push_back(check_estimator_mean(quad_ec, 0.1, 20000));
    results.push_back(check_second_moment(quad_ec, {0.2, 0.1, 0.05}, 2000));

    // exact bias enumeration needs low dimension; probe a nonconvex ensemble
    // with the configured device count
    RunConfig bias_cfg = cfg;
    bias_cfg.task.kind = "nonconvex";
    bias_cfg.task.dim = std::min(cfg.task.dim, 10);
    GlobalObjective noncvx = build_objective(bias_cfg.task);
    EngineConfig bias_ec = build_engine_config(bias_cfg, noncvx, cfg.replication_seeds.front());
    results.push_back(check_bias_bound(bias_ec, {0.2, 0.1, 0.05}, 10, 4242));

    std::uint64_t horizon = std::min<std::uint64_t>(cfg.horizon, 1000);
    results.push_back(check_rate_bound(quad_ec, {horizon}, 3));

    return results;
}

std::string validator_report_json(const RunConfig& cfg,
                                  const std::vector<CheckResult>& results) {
    json checks = json::array();
    for (const auto& r : results) {
        double observed = std::isfinite(r.observed) ? r.observed : 0.0;
        double threshold = std::isfinite(r.threshold) ? r.threshold : 0.0;
        double se = std::isfinite(r.stat_error) ? r.stat_error : 0.0;
        checks.push_back(json{{"name", r.name},
                              {"pass", r.pass},
                              {"applicable", r.applicable},
                              {"observed", observed},
                              {"threshold", threshold},
                              {"stat_error", se},
                              {"detail", r.detail}});
    }
    json report{{"version", kCodeVersion},
                {"config_hash", hash_hex(config_hash(cfg))},
                {"checks", checks}};
    return report.dump(2) + "\n";
}

namespace {

bool type_matches(const std::string& type, const json& node) {
    if (type == "object") return node.is_object();
    if (type == "array") return node.is_array();
    if (type == "string") return node.is_string();
    if (type == "number") return node.is_number();
    if (type == "integer") return node.is_number_integer() || node.is_number_unsigned();
    if (type == "boolean") return node.is_boolean();
    throw ConfigError("report schema: unsupported type '" + type + "'");
}

void check_schema_node(const json& schema, const json& node, const std::string& path) {
    if (schema.contains("type")) {
        std::string type = schema.at("type").get<std::string>();
        if (!type_matches(type, node))
            throw ConfigError("report schema violation at " + path + ": expected " + type);
    }
    if (schema.contains("required")) {
        if (!node.is_object())
            throw ConfigError("report schema violation at " + path + ": expected object");
        for (const auto& key : schema.at("required"))
            if (!node.contains(key.get<std::string>()))
                throw ConfigError("report schema violation at " + path + ": missing key '" +
                                  key.get<std::string>() + "'");
    }
    if (schema.contains("properties") && node.is_object()) {
        for (auto it = schema.at("properties").begin(); it != schema.at("properties").end();
             ++it)
            if (node.contains(it.key()))
                check_schema_node(it.value(), node.at(it.key()), path + "." + it.key());
    }
    if (schema.contains("items") && node.is_array()) {
        std::size_t idx = 0;
        for (const auto& item : node)
            check_schema_node(schema.at("items"), item, path + "[" + std::to_string(idx++) + "]");
    }
}

} // namespace

void check_report_schema(const std::string& report_json, const std::string& schema_json) {
    json report, schema;
    try {
        report = json::parse(report_json);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report is not valid JSON: ") + e.what());
    }
    try {
        schema = json::parse(schema_json);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("schema is not valid JSON: ") + e.what());
    }
    check_schema_node(schema, report, "$");
}

std::string format_report(const std::string& artifact_dir) {
    json manifest = json::parse(read_text_file(artifact_dir + "/manifest.json"));
    json summary = json::parse(read_text_file(artifact_dir + "/summary.json"));

    std::ostringstream os;
    const json& cfg = manifest.at("config");
    os << "artifact " << artifact_dir << " (version " << manifest.at("version").get<std::string>()
       << ", config " << manifest.at("config_hash").get<std::string>() << ")\n";
    os << "method " << cfg.at("method").get<std::string>() << ", task "
       << cfg.at("task").at("kind").get<std::string>() << " d=" << cfg.at("task").at("dim")
       << " N=" << cfg.at("task").at("num_devices") << ", p=" << cfg.at("channel").at("p")
       << ", horizon=" << cfg.at("horizon") << ", replications "
       << summary.at("replications").size() << "\n";
    os << "weighted gradient mean: " << summary.at("weighted_grad_mean") << "\n";
    os << "rate bound: " << summary.at("rate_bound") << "\n";
    os << "saturations: " << summary.at("saturation_total") << "\n";
    const json& c = summary.at("costs");
    os << "costs (fleet): dzofl " << c.at("dzofl").at("fleet_energy_j") << " J / "
       << c.at("dzofl").at("time_s") << " s over " << c.at("dzofl").at("rounds")
       << " rounds; baseline " << c.at("baseline").at("fleet_energy_j") << " J / "
       << c.at("baseline").at("time_s") << " s over " << c.at("baseline").at("rounds")
       << " rounds\n";
    for (const auto& r : summary.at("replications"))
        os << "  rep " << r.at("replication_seed") << ": weighted grad mean "
           << r.at("weighted_grad_mean") << ", final ||grad||^2 " << r.at("final_grad_norm_sq")
           << ", file " << r.at("csv_file").get<std::string>() << "\n";
    return os.str();
}

std::string serialize_state(const TrainState& state) {
    std::vector<std::uint64_t> bits(static_cast<std::size_t>(state.theta.size()));
    for (Eigen::Index i = 0; i < state.theta.size(); ++i)
        bits[static_cast<std::size_t>(i)] = std::bit_cast<std::uint64_t>(state.theta[i]);
    json j{{"k", state.k},
           {"saturation_count", state.saturation_count},
           {"cum_uplink_bits", state.cum_uplink_bits},
           {"cum_uplink_bits_attempted", state.cum_uplink_bits_attempted},
           {"cum_downlink_bits", state.cum_downlink_bits},
           {"theta_bits", bits}};
    return j.dump(2) + "\n";
}

TrainState parse_state(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    for (const char* key : {"k", "saturation_count", "cum_uplink_bits",
                            "cum_uplink_bits_attempted", "cum_downlink_bits", "theta_bits"})
        if (!j.contains(key)) throw ConfigError(std::string("checkpoint missing key ") + key);
    TrainState st;
    st.k = j.at("k").get<std::uint64_t>();
    st.saturation_count = j.at("saturation_count").get<std::uint64_t>();
    st.cum_uplink_bits = j.at("cum_uplink_bits").get<std::uint64_t>();
    st.cum_uplink_bits_attempted = j.at("cum_uplink_bits_attempted").get<std::uint64_t>();
    st.cum_downlink_bits = j.at("cum_downlink_bits").get<std::uint64_t>();
    auto bits = j.at("theta_bits").get<std::vector<std::uint64_t>>();
    st.theta = Vector(static_cast<Eigen::Index>(bits.size()));
    for (std::size_t i = 0; i < bits.size(); ++i)
        st.theta[static_cast<Eigen::Index>(i)] = std::bit_cast<double>(bits[i]);
    return st;
}

} // namespace dzofl
