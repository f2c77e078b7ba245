#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dzofl/costmodel.hpp"
#include "dzofl/engine.hpp"
#include "dzofl/schedule.hpp"
#include "dzofl/tasks.hpp"

namespace dzofl {

struct TaskConfig {
    std::string kind = "quadratic"; // quadratic | nonconvex | logistic
    int dim = 8;
    int num_devices = 4;
    int samples_per_device = 64; // logistic only
    std::uint64_t seed = 2024;
};

struct ChannelConfig {
    double p = 1.0;
};

struct QuantizerConfig {
    std::string kind = "stochastic_mantissa"; // or "identity"
    int payload_bits = 16;
};

struct SeedsConfig {
    std::uint64_t perturbation = 101;
    std::uint64_t channel = 202;
    std::uint64_t quantizer = 303;
    std::uint64_t xi = 404;
};

// Complete description of an experiment. Serializes to a single JSON file;
// parse(serialize(c)) reproduces c exactly.
struct RunConfig {
    std::string method = "dzofl"; // dzofl | baseline
    TaskConfig task;
    ChannelConfig channel;
    QuantizerConfig uplink;
    QuantizerConfig downlink;
    StepSchedule schedule;
    std::uint64_t horizon = 1000; // rounds k = 0..horizon inclusive
    std::vector<std::uint64_t> replication_seeds = {1};
    SeedsConfig seeds;
    CostParams cost;
    int grad_log_every = 0;         // 0 = auto cadence
    std::uint64_t checkpoint_every = 0; // 0 = no checkpoints
    double baseline_round_ratio = 10.0; // rounds ratio used by cost comparisons

    bool operator==(const RunConfig& other) const;
};

std::string serialize_config(const RunConfig& cfg); // pretty JSON text
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);
void save_config_file(const RunConfig& cfg, const std::string& path);

// Structural and semantic validation; throws ConfigError naming every
// violated constraint (schedule exponent rules included).
void validate(const RunConfig& cfg);

// FNV-1a over the canonical serialization; recorded in run manifests so
// artifacts can be matched to the exact configuration that produced them.
std::uint64_t config_hash(const RunConfig& cfg);

std::vector<std::string> preset_names();
RunConfig make_preset(const std::string& name);

// Instantiate the problem and the per-replication engine wiring.
GlobalObjective build_objective(const TaskConfig& task);
QuantizerSpec build_quantizer(const QuantizerConfig& q);
EngineConfig build_engine_config(const RunConfig& cfg, const GlobalObjective& obj,
                                 std::uint64_t replication_seed);

} // namespace dzofl
