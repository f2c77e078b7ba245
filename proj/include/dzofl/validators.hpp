#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dzofl/engine.hpp"

namespace dzofl {

// Outcome of one analysis check. `observed` and `threshold` carry the
// headline comparison; `stat_error` is the Monte Carlo standard error when
// the check is statistical (0 for deterministic inequalities). A check that
// cannot run on the given problem (e.g. no analytic minimum) reports
// applicable = false instead of inventing a verdict.
struct CheckResult {
    std::string name;
    bool pass = false;
    bool applicable = true;
    double observed = 0.0;
    double threshold = 0.0;
    double stat_error = 0.0;
    std::string detail;
};

// Monte Carlo mean of the erasure-rescaled aggregate of fixed device scalars
// against its closed-form expectation q * sum(v). Pass: within 4 standard
// errors.
CheckResult check_aggregation_mean(double p, int num_devices, std::uint64_t rounds,
                                   std::uint64_t seed);

// Mean of the update direction against c1 * gamma * grad F(theta) at the
// task's initial point. Exact on ensembles with zero estimator bias
// (quadratics); statistical tolerance 4 standard errors on the vector norm.
CheckResult check_estimator_mean(const EngineConfig& cfg, double gamma_val,
                                 std::uint64_t reps);

// Empirical E||g||^2 at the initial point against the certified bound
// c2 * gamma^2, for each gamma in the grid. Deterministic inequality.
CheckResult check_second_moment(const EngineConfig& cfg, const std::vector<double>& gammas,
                                std::uint64_t reps);

// Exact enumeration of the estimator bias on a low-dimensional task:
// ||bias(theta, gamma)|| <= c3 * gamma at every (theta, gamma) on the grid,
// plus the gamma-scaling of the bias norm. For twice-differentiable
// objectives with bounded third derivatives the two-sided estimator's bias
// shrinks quadratically, so the norm ratio across consecutive gamma halvings
// is ~4; the check requires it within 25%.
CheckResult check_bias_bound(const EngineConfig& cfg, const std::vector<double>& gammas,
                             int num_thetas, std::uint64_t theta_seed);

// Full training runs: replication-averaged weighted mean
//   sum_k alpha_k gamma_k ||grad F(theta_k)||^2 / sum_k alpha_k gamma_k
// compared against the closed-form finite-horizon bound at each requested
// horizon, plus a numeric sandwich of the schedule partial sums against
// their closed-form bounds. Needs the task's analytic minimum.
CheckResult check_rate_bound(const EngineConfig& cfg, const std::vector<std::uint64_t>& horizons,
                             std::uint64_t reps);

// Full training runs: replication-averaged trailing-window mean of
// ||grad F||^2 must fall below target_ratio times its round-0 value.
CheckResult check_training_decay(const EngineConfig& cfg, std::uint64_t horizon,
                                 std::uint64_t reps, double window_frac, double target_ratio);

} // namespace dzofl
