#pragma once

#include <cstdint>
#include <functional>

#include "dzofl/channel.hpp"
#include "dzofl/costmodel.hpp"
#include "dzofl/perturbation.hpp"
#include "dzofl/quantizer.hpp"
#include "dzofl/schedule.hpp"
#include "dzofl/tasks.hpp"
#include "dzofl/types.hpp"

namespace dzofl {

// Everything one training run needs, fully assembled. The objective is
// borrowed (not owned); all randomness is counter-based off the seeds inside
// the stream/channel structs plus quantizer_seed, so two runs with equal
// EngineConfig and equal starting state produce bit-identical trajectories.
struct EngineConfig {
    const GlobalObjective* objective = nullptr;
    PerturbationStream perturbation;
    ErasureChannel channel;
    QuantizerSpec uplink = stochastic_quantizer(16);
    QuantizerSpec downlink = stochastic_quantizer(16);
    StepSchedule schedule;
    CostParams cost;
    XiStream xi;
    std::uint64_t quantizer_seed = 0;
    // gradient-oracle logging cadence; 0 resolves to every round for
    // dim <= 1000 and every 10th round above that
    int grad_log_every = 0;
};

void validate(const EngineConfig& cfg); // dimension/device-count consistency

struct RoundRecord {
    std::uint64_t k = 0;
    int received_count = 0;
    double delta_f = 0.0;     // rescaled aggregate of the device scalars
    double g_norm_sq = 0.0;   // squared norm of the applied update direction
    double grad_norm_sq = 0.0; // oracle ||grad F||^2, NaN on unlogged rounds
    std::uint64_t uplink_bits = 0;           // delivered this round
    std::uint64_t uplink_bits_attempted = 0; // transmitted this round
    std::uint64_t downlink_bits = 0;
    std::uint64_t cum_uplink_bits = 0;
    std::uint64_t cum_uplink_bits_attempted = 0;
    std::uint64_t cum_downlink_bits = 0;
    double cum_energy_j = 0.0;
    double cum_time_s = 0.0;
};

struct TrainState {
    Vector theta;
    std::uint64_t k = 0; // next round to execute
    std::uint64_t saturation_count = 0;
    std::uint64_t cum_uplink_bits = 0;
    std::uint64_t cum_uplink_bits_attempted = 0;
    std::uint64_t cum_downlink_bits = 0;
};

TrainState make_initial_state(const EngineConfig& cfg);

// One round of the zero-order method: shared perturbation, per-device
// two-point loss difference on a common xi, quantized scalar uplink through
// the erasure channel, rescaled aggregation, quantized scalar broadcast,
// model step. A round with no surviving uplink packets aggregates to zero
// and leaves theta unchanged through the ordinary code path.
RoundRecord dzofl_round(const EngineConfig& cfg, TrainState& state);

// One round of the first-order reference: each device uploads its quantized
// stochastic gradient (model_dim scalars) through the same erasure channel,
// the server applies the same rescaled averaging and broadcasts the update.
RoundRecord baseline_round(const EngineConfig& cfg, TrainState& state);

// Difference of the two loss queries a device computes in one round,
// f_i(theta + gamma Phi, xi) - f_i(theta - gamma Phi, xi).
// Throws TaskError (with device/round context) on non-finite values.
double device_delta(const DeviceTask& task, const Vector& theta, double gamma_val,
                    const Vector& direction, const XiSample& xi);

// One full draw of the zero-order update direction at a fixed model point
// and explicit perturbation radius, without advancing any state. This is the
// exact pipeline dzofl_round applies (perturbation, per-device two-point
// difference, uplink quantization, erasure, rescaled aggregation, downlink
// quantization); the statistical validators average it.
struct EstimatorDraw {
    Vector g;
    double aggregate = 0.0;
    int received_count = 0;
    int saturations = 0;
};

EstimatorDraw estimator_draw(const EngineConfig& cfg, const Vector& theta,
                             double gamma_val, std::uint64_t k);

// Executes `rounds` consecutive rounds of the chosen method, invoking the
// sink after each one. Useful for streaming records to CSV without holding
// the whole trajectory.
void run_rounds(const EngineConfig& cfg, Method method, TrainState& state,
                std::uint64_t rounds, const std::function<void(const RoundRecord&)>& sink);

} // namespace dzofl
