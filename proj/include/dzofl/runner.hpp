#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dzofl/config.hpp"
#include "dzofl/validators.hpp"

namespace dzofl {

inline constexpr const char* kCodeVersion = "1.0.0";

// Frozen CSV schema. Column order never changes; floats are written with 17
// significant digits so identical runs produce byte-identical files.
// grad_norm_sq is "nan" on rounds the gradient oracle was not queried.
std::string csv_header();
std::string csv_row(const RoundRecord& rec);

struct ReplicationOutcome {
    std::uint64_t replication_seed = 0;
    std::string csv_file;
    double weighted_grad_mean = 0.0; // sum a_k g_k ||grad||^2 / sum a_k g_k, logged rounds
    double final_grad_norm_sq = 0.0;
    std::uint64_t saturation_count = 0;
    std::uint64_t rounds = 0;
    std::uint64_t cum_uplink_bits = 0;
    std::uint64_t cum_uplink_bits_attempted = 0;
    std::uint64_t cum_downlink_bits = 0;
    double cum_energy_j = 0.0;
    double cum_time_s = 0.0;
};

// Projected totals for the configured workload under both methods, with the
// first-order reference granted a baseline_round_ratio-fold smaller round
// count (it converges in fewer rounds but pays backprop and a full model
// upload per round).
struct CostComparison {
    double dzofl_rounds = 0.0;
    double baseline_rounds = 0.0;
    double dzofl_fleet_energy_j = 0.0;
    double baseline_fleet_energy_j = 0.0;
    double dzofl_device_energy_j = 0.0;
    double baseline_device_energy_j = 0.0;
    double dzofl_time_s = 0.0;
    double baseline_time_s = 0.0;
    double dzofl_device_uplink_bits = 0.0;
    double baseline_device_uplink_bits = 0.0;
};

struct ExperimentResult {
    std::vector<ReplicationOutcome> replications;
    double weighted_grad_mean = 0.0; // averaged over replications
    bool rate_bound_available = false;
    double rate_bound_value = 0.0;
    CostComparison costs;
};

// Validates cfg, creates out_dir, writes manifest.json up front, runs every
// replication on a worker pool (each writes rep_<seed>.csv, renamed into
// place on completion), then writes summary.json as the success marker.
// A failing replication leaves partial artifacts plus error.json and throws.
// workers <= 0 means one per hardware thread.
ExperimentResult run_experiment(const RunConfig& cfg, const std::string& out_dir,
                                int workers = 0);

// Statistical/analytic checks sized for interactive use, auto-instantiated
// from cfg's dimensions: aggregation unbiasedness on the configured channel,
// estimator mean and second moment on a quadratic ensemble, exact bias
// enumeration on a low-dimensional nonconvex ensemble, and the weighted
// gradient rate bound on the quadratic ensemble.
std::vector<CheckResult> run_validators(const RunConfig& cfg);

std::string validator_report_json(const RunConfig& cfg,
                                  const std::vector<CheckResult>& results);

// Structural validation of a report document against the committed schema
// (supports the subset of JSON Schema the schema file uses: type, required,
// properties, items). Throws ConfigError naming the offending path.
void check_report_schema(const std::string& report_json, const std::string& schema_json);

CostComparison compare_costs(const RunConfig& cfg);
std::string cost_comparison_json(const RunConfig& cfg, const CostComparison& c);

// Human-readable digest of a completed artifact directory.
std::string format_report(const std::string& artifact_dir);

// Bit-exact snapshot of a training state: theta is stored as IEEE-754 bit
// patterns, so parse_state(serialize_state(s)) resumes the exact trajectory.
std::string serialize_state(const TrainState& state);
TrainState parse_state(const std::string& text);

} // namespace dzofl
