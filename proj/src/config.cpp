#include "dzofl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dzofl/errors.hpp"
#include "dzofl/rng.hpp"

namespace dzofl {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return; // missing fields keep their defaults
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

json task_to_json(const TaskConfig& t) {
    return json{{"kind", t.kind},
                {"dim", t.dim},
                {"num_devices", t.num_devices},
                {"samples_per_device", t.samples_per_device},
                {"seed", t.seed}};
}

TaskConfig task_from_json(const json& j) {
    reject_unknown_keys(j, {"kind", "dim", "num_devices", "samples_per_device", "seed"},
                        "task");
    TaskConfig t;
    read(j, "kind", t.kind);
    read(j, "dim", t.dim);
    read(j, "num_devices", t.num_devices);
    read(j, "samples_per_device", t.samples_per_device);
    read(j, "seed", t.seed);
    return t;
}

json quant_to_json(const QuantizerConfig& q) {
    return json{{"kind", q.kind}, {"payload_bits", q.payload_bits}};
}

QuantizerConfig quant_from_json(const json& j, const std::string& where) {
    reject_unknown_keys(j, {"kind", "payload_bits"}, where);
    QuantizerConfig q;
    read(j, "kind", q.kind);
    read(j, "payload_bits", q.payload_bits);
    return q;
}

json schedule_to_json(const StepSchedule& s) {
    return json{{"alpha0", s.alpha0},
                {"gamma0", s.gamma0},
                {"upsilon1", s.upsilon1},
                {"upsilon2", s.upsilon2}};
}

StepSchedule schedule_from_json(const json& j) {
    reject_unknown_keys(j, {"alpha0", "gamma0", "upsilon1", "upsilon2"}, "schedule");
    StepSchedule s;
    read(j, "alpha0", s.alpha0);
    read(j, "gamma0", s.gamma0);
    read(j, "upsilon1", s.upsilon1);
    read(j, "upsilon2", s.upsilon2);
    return s;
}

json cost_to_json(const CostParams& c) {
    return json{{"mac_energy_j", c.mac_energy_j},
                {"mac_exponent", c.mac_exponent},
                {"precision_bits", c.precision_bits},
                {"max_precision_bits", c.max_precision_bits},
                {"mac_count", c.mac_count},
                {"activation_count", c.activation_count},
                {"param_count", c.param_count},
                {"dram_factor", c.dram_factor},
                {"mac_units", c.mac_units},
                {"sram_bits", c.sram_bits},
                {"input_size", c.input_size},
                {"bit_rate", c.bit_rate},
                {"slot_seconds", c.slot_seconds},
                {"cpu_rate", c.cpu_rate},
                {"tx_power_watts", c.tx_power_watts},
                {"ops_per_round", c.ops_per_round}};
}

CostParams cost_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"mac_energy_j", "mac_exponent", "precision_bits",
                         "max_precision_bits", "mac_count", "activation_count",
                         "param_count", "dram_factor", "mac_units", "sram_bits",
                         "input_size", "bit_rate", "slot_seconds", "cpu_rate",
                         "tx_power_watts", "ops_per_round"},
                        "cost");
    CostParams c;
    read(j, "mac_energy_j", c.mac_energy_j);
    read(j, "mac_exponent", c.mac_exponent);
    read(j, "precision_bits", c.precision_bits);
    read(j, "max_precision_bits", c.max_precision_bits);
    read(j, "mac_count", c.mac_count);
    read(j, "activation_count", c.activation_count);
    read(j, "param_count", c.param_count);
    read(j, "dram_factor", c.dram_factor);
    read(j, "mac_units", c.mac_units);
    read(j, "sram_bits", c.sram_bits);
    read(j, "input_size", c.input_size);
    read(j, "bit_rate", c.bit_rate);
    read(j, "slot_seconds", c.slot_seconds);
    read(j, "cpu_rate", c.cpu_rate);
    read(j, "tx_power_watts", c.tx_power_watts);
    read(j, "ops_per_round", c.ops_per_round);
    return c;
}

json seeds_to_json(const SeedsConfig& s) {
    return json{{"perturbation", s.perturbation},
                {"channel", s.channel},
                {"quantizer", s.quantizer},
                {"xi", s.xi}};
}

SeedsConfig seeds_from_json(const json& j) {
    reject_unknown_keys(j, {"perturbation", "channel", "quantizer", "xi"}, "seeds");
    SeedsConfig s;
    read(j, "perturbation", s.perturbation);
    read(j, "channel", s.channel);
    read(j, "quantizer", s.quantizer);
    read(j, "xi", s.xi);
    return s;
}

} // namespace

std::string serialize_config(const RunConfig& cfg) {
    json j{{"method", cfg.method},
           {"task", task_to_json(cfg.task)},
           {"channel", json{{"p", cfg.channel.p}}},
           {"uplink", quant_to_json(cfg.uplink)},
           {"downlink", quant_to_json(cfg.downlink)},
           {"schedule", schedule_to_json(cfg.schedule)},
           {"horizon", cfg.horizon},
           {"replication_seeds", cfg.replication_seeds},
           {"seeds", seeds_to_json(cfg.seeds)},
           {"cost", cost_to_json(cfg.cost)},
           {"grad_log_every", cfg.grad_log_every},
           {"checkpoint_every", cfg.checkpoint_every},
           {"baseline_round_ratio", cfg.baseline_round_ratio}};
    return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    reject_unknown_keys(j,
                        {"method", "task", "channel", "uplink", "downlink", "schedule",
                         "horizon", "replication_seeds", "seeds", "cost", "grad_log_every",
                         "checkpoint_every", "baseline_round_ratio"},
                        "top level");
    RunConfig cfg;
    read(j, "method", cfg.method);
    if (j.contains("task")) cfg.task = task_from_json(j.at("task"));
    if (j.contains("channel")) {
        reject_unknown_keys(j.at("channel"), {"p"}, "channel");
        read(j.at("channel"), "p", cfg.channel.p);
    }
    if (j.contains("uplink")) cfg.uplink = quant_from_json(j.at("uplink"), "uplink");
    if (j.contains("downlink")) cfg.downlink = quant_from_json(j.at("downlink"), "downlink");
    if (j.contains("schedule")) cfg.schedule = schedule_from_json(j.at("schedule"));
    read(j, "horizon", cfg.horizon);
    read(j, "replication_seeds", cfg.replication_seeds);
    if (j.contains("seeds")) cfg.seeds = seeds_from_json(j.at("seeds"));
    if (j.contains("cost")) cfg.cost = cost_from_json(j.at("cost"));
    read(j, "grad_log_every", cfg.grad_log_every);
    read(j, "checkpoint_every", cfg.checkpoint_every);
    read(j, "baseline_round_ratio", cfg.baseline_round_ratio);
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void save_config_file(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("config: cannot write file " + path);
    out << serialize_config(cfg);
}

bool RunConfig::operator==(const RunConfig& other) const {
    return serialize_config(*this) == serialize_config(other);
}

void validate(const RunConfig& cfg) {
    if (cfg.method != "dzofl" && cfg.method != "baseline")
        throw ConfigError("config: method must be 'dzofl' or 'baseline', got '" +
                          cfg.method + "'");
    if (cfg.task.kind != "quadratic" && cfg.task.kind != "nonconvex" &&
        cfg.task.kind != "logistic")
        throw ConfigError("config: task.kind must be quadratic, nonconvex or logistic, got '" +
                          cfg.task.kind + "'");
    if (cfg.task.dim < 1) throw ConfigError("config: task.dim must be >= 1");
    if (cfg.task.num_devices < 1) throw ConfigError("config: task.num_devices must be >= 1");
    if (cfg.task.kind == "logistic" && cfg.task.samples_per_device < 1)
        throw ConfigError("config: task.samples_per_device must be >= 1 for logistic");
    if (!(cfg.channel.p > 0.0 && cfg.channel.p <= 1.0))
        throw ConfigError("config: channel.p must be in (0, 1]");
    for (const auto* q : {&cfg.uplink, &cfg.downlink}) {
        if (q->kind == "stochastic_mantissa") {
            stochastic_quantizer(q->payload_bits); // throws on bad width
        } else if (q->kind == "identity") {
            if (q->payload_bits < 1)
                throw ConfigError("config: identity quantizer payload_bits must be >= 1");
        } else {
            throw ConfigError("config: unknown quantizer kind '" + q->kind + "'");
        }
    }
    validate(cfg.schedule); // throws naming the violated exponent constraints
    if (cfg.replication_seeds.empty())
        throw ConfigError("config: replication_seeds must not be empty");
    if (cfg.grad_log_every < 0) throw ConfigError("config: grad_log_every must be >= 0");
    if (!(cfg.baseline_round_ratio > 0.0))
        throw ConfigError("config: baseline_round_ratio must be positive");
    validate(cfg.cost);
}

std::uint64_t config_hash(const RunConfig& cfg) {
    std::string text = serialize_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a 64
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> preset_names() {
    return {"quadratic-small", "quadratic-rate", "nonconvex-desk", "logistic-small"};
}

RunConfig make_preset(const std::string& name) {
    RunConfig cfg;
    if (name == "quadratic-small") {
        // noiseless channel, no quantization: the cleanest convergence demo
        cfg.task = TaskConfig{"quadratic", 10, 5, 64, 2024};
        cfg.channel.p = 1.0;
        cfg.uplink = QuantizerConfig{"identity", 64};
        cfg.downlink = QuantizerConfig{"identity", 64};
        cfg.horizon = 20000;
        cfg.replication_seeds = {11, 12, 13, 14};
    } else if (name == "quadratic-rate") {
        // quadratic ensemble whose analytic minimum feeds the rate bound
        cfg.task = TaskConfig{"quadratic", 8, 4, 64, 2024};
        cfg.channel.p = 0.8;
        cfg.uplink = QuantizerConfig{"stochastic_mantissa", 16};
        cfg.downlink = QuantizerConfig{"stochastic_mantissa", 16};
        cfg.horizon = 10000;
        cfg.replication_seeds = {21, 22, 23, 24, 25, 26, 27, 28, 29, 30};
    } else if (name == "nonconvex-desk") {
        cfg.task = TaskConfig{"nonconvex", 20, 10, 64, 2024};
        cfg.channel.p = 0.9;
        cfg.uplink = QuantizerConfig{"stochastic_mantissa", 16};
        cfg.downlink = QuantizerConfig{"stochastic_mantissa", 16};
        cfg.horizon = 50000;
        cfg.replication_seeds = {31, 32, 33, 34, 35, 36, 37, 38, 39, 40};
    } else if (name == "logistic-small") {
        cfg.task = TaskConfig{"logistic", 5, 4, 48, 2024};
        cfg.channel.p = 0.9;
        cfg.uplink = QuantizerConfig{"stochastic_mantissa", 16};
        cfg.downlink = QuantizerConfig{"stochastic_mantissa", 16};
        cfg.horizon = 2000;
        cfg.replication_seeds = {41, 42, 43, 44};
    } else {
        throw ConfigError("config: unknown preset '" + name + "'");
    }
    return cfg;
}

GlobalObjective build_objective(const TaskConfig& task) {
    if (task.kind == "quadratic")
        return make_quadratic_task(task.dim, task.num_devices, task.seed);
    if (task.kind == "nonconvex")
        return make_nonconvex_task(task.dim, task.num_devices, task.seed);
    if (task.kind == "logistic")
        return make_logistic_task(task.dim, task.num_devices, task.samples_per_device,
                                  task.seed);
    throw ConfigError("config: unknown task kind '" + task.kind + "'");
}

QuantizerSpec build_quantizer(const QuantizerConfig& q) {
    if (q.kind == "identity") return identity_quantizer(q.payload_bits);
    if (q.kind == "stochastic_mantissa") return stochastic_quantizer(q.payload_bits);
    throw ConfigError("config: unknown quantizer kind '" + q.kind + "'");
}

EngineConfig build_engine_config(const RunConfig& cfg, const GlobalObjective& obj,
                                 std::uint64_t replication_seed) {
    EngineConfig ec;
    ec.objective = &obj;
    ec.perturbation = make_perturbation_stream(
        rng::mix(cfg.seeds.perturbation, replication_seed), obj.dim());
    ec.channel = make_channel(cfg.channel.p, obj.num_devices(),
                              rng::mix(cfg.seeds.channel, replication_seed));
    ec.uplink = build_quantizer(cfg.uplink);
    ec.downlink = build_quantizer(cfg.downlink);
    ec.schedule = cfg.schedule;
    ec.cost = cfg.cost;
    ec.xi = XiStream{rng::mix(cfg.seeds.xi, replication_seed)};
    ec.quantizer_seed = rng::mix(cfg.seeds.quantizer, replication_seed);
    ec.grad_log_every = cfg.grad_log_every;
    return ec;
}

} // namespace dzofl
