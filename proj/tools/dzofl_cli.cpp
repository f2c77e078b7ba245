// Command-line front end: run experiments, execute the validator suite,
// compare projected costs, and summarize finished artifact directories.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dzofl/config.hpp"
#include "dzofl/errors.hpp"
#include "dzofl/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTask = 3;

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir = "artifact";
    int replications = 0;   // 0 = keep the config's seed list
    int seed_offset = 0;
    int workers = 0;
};

void add_config_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "path to a run configuration JSON file");
    cmd->add_option("--preset", opts.preset,
                    "built-in configuration: quadratic-small, quadratic-rate, "
                    "nonconvex-desk, logistic-small");
    cmd->add_option("--replications", opts.replications,
                    "override the replication count (seeds become offset+1..offset+n)");
    cmd->add_option("--seed-offset", opts.seed_offset,
                    "offset applied when --replications regenerates the seed list");
}

dzofl::RunConfig resolve_config(const CommonOpts& opts) {
    if (opts.config_path.empty() == opts.preset.empty())
        throw dzofl::ConfigError("exactly one of --config or --preset is required");
    dzofl::RunConfig cfg = opts.config_path.empty()
                               ? dzofl::make_preset(opts.preset)
                               : dzofl::load_config_file(opts.config_path);
    if (opts.replications > 0) {
        cfg.replication_seeds.clear();
        for (int i = 1; i <= opts.replications; ++i)
            cfg.replication_seeds.push_back(
                static_cast<std::uint64_t>(opts.seed_offset + i));
    } else if (opts.seed_offset != 0) {
        for (auto& s : cfg.replication_seeds)
            s += static_cast<std::uint64_t>(opts.seed_offset);
    }
    dzofl::validate(cfg);
    return cfg;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw dzofl::TaskError("cannot write " + path);
    out << text;
}

int run_cmd(const CommonOpts& opts) {
    dzofl::RunConfig cfg = resolve_config(opts);
    dzofl::ExperimentResult res = dzofl::run_experiment(cfg, opts.out_dir, opts.workers);
    std::cout << "wrote " << res.replications.size() << " replication(s) to " << opts.out_dir
              << "\n";
    std::cout << "weighted gradient mean: " << res.weighted_grad_mean << "\n";
    if (res.rate_bound_available)
        std::cout << "rate bound at K=" << cfg.horizon << ": " << res.rate_bound_value << "\n";
    else
        std::cout << "rate bound: unavailable (no analytic minimum)\n";
    return kExitOk;
}

int validate_cmd(const CommonOpts& opts) {
    dzofl::RunConfig cfg = resolve_config(opts);
    std::vector<dzofl::CheckResult> results = dzofl::run_validators(cfg);
    std::string report = dzofl::validator_report_json(cfg, results);
    std::filesystem::create_directories(opts.out_dir);
    write_file(opts.out_dir + "/validator_report.json", report);

    bool all_pass = true;
    for (const auto& r : results) {
        const char* verdict = !r.applicable ? "SKIP" : (r.pass ? "PASS" : "FAIL");
        std::printf("%-4s %-32s %s\n", verdict, r.name.c_str(), r.detail.c_str());
        if (r.applicable && !r.pass) all_pass = false;
    }
    std::cout << "report: " << opts.out_dir << "/validator_report.json\n";
    return all_pass ? kExitOk : kExitError;
}

int compare_cmd(const CommonOpts& opts) {
    dzofl::RunConfig cfg = resolve_config(opts);
    dzofl::CostComparison c = dzofl::compare_costs(cfg);
    std::filesystem::create_directories(opts.out_dir);
    write_file(opts.out_dir + "/cost_comparison.json", dzofl::cost_comparison_json(cfg, c));
    std::printf("dzofl:    %.6g rounds, fleet %.6g J, %.6g s, %.6g uplink bits/device\n",
                c.dzofl_rounds, c.dzofl_fleet_energy_j, c.dzofl_time_s,
                c.dzofl_device_uplink_bits);
    std::printf("baseline: %.6g rounds, fleet %.6g J, %.6g s, %.6g uplink bits/device\n",
                c.baseline_rounds, c.baseline_fleet_energy_j, c.baseline_time_s,
                c.baseline_device_uplink_bits);
    std::printf("dzofl uses %.4g%% of the baseline fleet energy\n",
                100.0 * c.dzofl_fleet_energy_j / c.baseline_fleet_energy_j);
    return kExitOk;
}

int report_cmd(const std::string& artifact_dir) {
    std::cout << dzofl::format_report(artifact_dir);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic zero-order federated optimization toolkit"};
    app.require_subcommand(1);

    CommonOpts run_opts, validate_opts, compare_opts;
    std::string report_dir;

    CLI::App* run = app.add_subcommand("run", "execute a replication sweep and write artifacts");
    add_config_flags(run, run_opts);
    run->add_option("--out", run_opts.out_dir, "artifact output directory");
    run->add_option("--workers", run_opts.workers, "worker threads (default: hardware)");

    CLI::App* val = app.add_subcommand("validate", "run the statistical validator suite");
    add_config_flags(val, validate_opts);
    val->add_option("--out", validate_opts.out_dir, "report output directory");

    CLI::App* cmp = app.add_subcommand("compare", "project energy/time/bit costs for both methods");
    add_config_flags(cmp, compare_opts);
    cmp->add_option("--out", compare_opts.out_dir, "report output directory");

    CLI::App* rep = app.add_subcommand("report", "summarize a finished artifact directory");
    rep->add_option("--out", report_dir, "artifact directory to summarize")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return run_cmd(run_opts);
        if (val->parsed()) return validate_cmd(validate_opts);
        if (cmp->parsed()) return compare_cmd(compare_opts);
        if (rep->parsed()) return report_cmd(report_dir);
    } catch (const dzofl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const dzofl::TaskError& e) {
        std::cerr << "task error: " << e.what() << "\n";
        return kExitTask;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitConfig;
}
