#include "dzofl/engine.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "dzofl/errors.hpp"
#include "dzofl/rng.hpp"

namespace dzofl {

namespace {

// quantizer noise-word tags: device ids 1..N for uplink scalars, 0 for the
// downlink broadcast; the baseline additionally mixes in the component index
std::uint64_t quant_word(std::uint64_t seed, std::uint64_t k, int device) {
    return rng::mix(seed, k, static_cast<std::uint64_t>(device));
}
std::uint64_t quant_word(std::uint64_t seed, std::uint64_t k, int device, int component) {
    return rng::mix(seed, k, static_cast<std::uint64_t>(device),
                    static_cast<std::uint64_t>(component));
}

int resolve_grad_cadence(const EngineConfig& cfg) {
    if (cfg.grad_log_every > 0) return cfg.grad_log_every;
    return cfg.objective->dim() <= 1000 ? 1 : 10;
}

struct PerRoundCost {
    double energy_j = 0.0;
    double time_s = 0.0;
};

// Per-round fleet costs are constants of the configuration, so cumulative
// ledger values are round_count * per_round, an exact identity rather than
// an accumulated sum.
PerRoundCost per_round_cost(const EngineConfig& cfg, Method method) {
    const double n = static_cast<double>(cfg.channel.num_devices);
    const double d = static_cast<double>(cfg.objective->dim());
    const double up_bits = (method == Method::dzofl)
                               ? static_cast<double>(cfg.uplink.payload_bits)
                               : static_cast<double>(cfg.uplink.payload_bits) * d;
    PerRoundCost c;
    double per_device = (method == Method::dzofl) ? e_fp(cfg.cost)
                                                  : e_fp(cfg.cost) + e_bp(cfg.cost);
    c.energy_j = n * per_device + tx_energy(cfg.cost, n * up_bits);
    c.time_s = convergence_time(method, 1.0, cfg.cost, up_bits);
    return c;
}

void fill_common(RoundRecord& rec, const EngineConfig& cfg, const TrainState& state,
                 Method method, std::uint64_t k) {
    const PerRoundCost cost = per_round_cost(cfg, method);
    const double done = static_cast<double>(k + 1);
    rec.cum_energy_j = done * cost.energy_j;
    rec.cum_time_s = done * cost.time_s;
    rec.cum_uplink_bits = state.cum_uplink_bits;
    rec.cum_uplink_bits_attempted = state.cum_uplink_bits_attempted;
    rec.cum_downlink_bits = state.cum_downlink_bits;
}

double oracle_grad_norm_sq(const EngineConfig& cfg, const Vector& theta, std::uint64_t k) {
    if (k % static_cast<std::uint64_t>(resolve_grad_cadence(cfg)) == 0)
        return true_gradient_norm_sq(*cfg.objective, theta);
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

void validate(const EngineConfig& cfg) {
    if (cfg.objective == nullptr) throw ConfigError("engine: objective is not set");
    if (cfg.perturbation.dim != cfg.objective->dim())
        throw ConfigError("engine: perturbation dim " + std::to_string(cfg.perturbation.dim) +
                          " does not match task dim " + std::to_string(cfg.objective->dim()));
    if (cfg.channel.num_devices != cfg.objective->num_devices())
        throw ConfigError("engine: channel device count " +
                          std::to_string(cfg.channel.num_devices) + " does not match task's " +
                          std::to_string(cfg.objective->num_devices()));
    validate(cfg.schedule);
}

TrainState make_initial_state(const EngineConfig& cfg) {
    validate(cfg);
    TrainState st;
    st.theta = cfg.objective->initial_point;
    return st;
}

double device_delta(const DeviceTask& task, const Vector& theta, double gamma_val,
                    const Vector& direction, const XiSample& xi) {
    double up = task.loss(theta + gamma_val * direction, xi);
    double down = task.loss(theta - gamma_val * direction, xi);
    double delta = up - down;
    if (!std::isfinite(delta))
        throw TaskError("device " + std::to_string(task.device_id()) +
                        ": non-finite two-point loss difference (|theta| = " +
                        std::to_string(theta.norm()) + ", gamma = " +
                        std::to_string(gamma_val) + ")");
    return delta;
}

EstimatorDraw estimator_draw(const EngineConfig& cfg, const Vector& theta,
                             double gamma_val, std::uint64_t k) {
    const GlobalObjective& obj = *cfg.objective;
    const int n = cfg.channel.num_devices;
    const Vector dir = phi(cfg.perturbation, k);

    // every device evaluates both probes on its own xi draw and uplinks one
    // quantized scalar
    std::map<int, double> uplinked;
    int saturations = 0;
    for (int i = 1; i <= n; ++i) {
        const DeviceTask& task = *obj.devices[static_cast<std::size_t>(i - 1)];
        XiSample xi = xi_sample(cfg.xi, k, i);
        double delta = device_delta(task, theta, gamma_val, dir, xi);
        QuantizeResult q = quantize(cfg.uplink, delta, quant_word(cfg.quantizer_seed, k, i));
        if (q.saturated) ++saturations;
        uplinked.emplace(i, q.value);
    }

    // erasure channel decides which scalars the server sees
    std::map<int, double> received;
    const std::vector<int> survivors = sample_received_set(cfg.channel, k);
    for (int id : survivors) received.emplace(id, uplinked.at(id));

    const double agg = aggregate(received, n);
    QuantizeResult down = quantize(cfg.downlink, agg, quant_word(cfg.quantizer_seed, k, 0));
    if (down.saturated) ++saturations;

    EstimatorDraw out;
    out.g = down.value * dir;
    out.aggregate = agg;
    out.received_count = static_cast<int>(received.size());
    out.saturations = saturations;
    return out;
}

RoundRecord dzofl_round(const EngineConfig& cfg, TrainState& state) {
    const std::uint64_t k = state.k;
    const int n = cfg.channel.num_devices;
    const int m_up = cfg.uplink.payload_bits;
    const int m_down = cfg.downlink.payload_bits;

    const double gam = gamma(cfg.schedule, k);
    const double alp = alpha(cfg.schedule, k);

    EstimatorDraw draw = estimator_draw(cfg, state.theta, gam, k);
    state.saturation_count += static_cast<std::uint64_t>(draw.saturations);

    // every device forms the same update from the broadcast scalar; the
    // simulator keeps one canonical model and asserts the equivalence
    const Vector next = state.theta - alp * draw.g;
#ifndef NDEBUG
    const Vector replica = state.theta - alp * draw.g;
    assert((replica.array() == next.array()).all() && "device model replicas diverged");
#endif

    RoundRecord rec;
    rec.k = k;
    rec.received_count = draw.received_count;
    rec.delta_f = draw.aggregate;
    rec.g_norm_sq = draw.g.squaredNorm();
    rec.grad_norm_sq = oracle_grad_norm_sq(cfg, state.theta, k);
    rec.uplink_bits = static_cast<std::uint64_t>(draw.received_count) *
                      static_cast<std::uint64_t>(m_up);
    rec.uplink_bits_attempted = static_cast<std::uint64_t>(n) *
                                static_cast<std::uint64_t>(m_up);
    rec.downlink_bits = static_cast<std::uint64_t>(m_down);

    state.theta = next;
    state.cum_uplink_bits += rec.uplink_bits;
    state.cum_uplink_bits_attempted += rec.uplink_bits_attempted;
    state.cum_downlink_bits += rec.downlink_bits;
    state.k = k + 1;
    fill_common(rec, cfg, state, Method::dzofl, k);
    return rec;
}

RoundRecord baseline_round(const EngineConfig& cfg, TrainState& state) {
    const GlobalObjective& obj = *cfg.objective;
    const std::uint64_t k = state.k;
    const int n = cfg.channel.num_devices;
    const int d = obj.dim();
    const double alp = alpha(cfg.schedule, k);

    std::vector<Vector> uplinked(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        const DeviceTask& task = *obj.devices[static_cast<std::size_t>(i - 1)];
        XiSample xi = xi_sample(cfg.xi, k, i);
        Vector grad = task.stochastic_gradient(state.theta, xi);
        if (!grad.allFinite())
            throw TaskError("device " + std::to_string(i) +
                            ": non-finite stochastic gradient in round " + std::to_string(k));
        for (int j = 0; j < d; ++j) {
            QuantizeResult q =
                quantize(cfg.uplink, grad[j], quant_word(cfg.quantizer_seed, k, i, j));
            if (q.saturated) ++state.saturation_count;
            grad[j] = q.value;
        }
        uplinked[static_cast<std::size_t>(i - 1)] = std::move(grad);
    }

    const std::vector<int> survivors = sample_received_set(cfg.channel, k);
    Vector agg = Vector::Zero(d);
    for (int id : survivors) agg += uplinked[static_cast<std::size_t>(id - 1)];
    if (!survivors.empty())
        agg *= static_cast<double>(n) / static_cast<double>(survivors.size());

    const std::uint64_t vec_bits = static_cast<std::uint64_t>(cfg.uplink.payload_bits) *
                                   static_cast<std::uint64_t>(d);

    RoundRecord rec;
    rec.k = k;
    rec.received_count = static_cast<int>(survivors.size());
    rec.delta_f = std::numeric_limits<double>::quiet_NaN(); // scalar aggregate is dzofl-only
    rec.g_norm_sq = agg.squaredNorm();
    rec.grad_norm_sq = oracle_grad_norm_sq(cfg, state.theta, k);
    rec.uplink_bits = static_cast<std::uint64_t>(survivors.size()) * vec_bits;
    rec.uplink_bits_attempted = static_cast<std::uint64_t>(n) * vec_bits;
    rec.downlink_bits = static_cast<std::uint64_t>(cfg.downlink.payload_bits) *
                        static_cast<std::uint64_t>(d);

    state.theta -= alp * agg;
    state.cum_uplink_bits += rec.uplink_bits;
    state.cum_uplink_bits_attempted += rec.uplink_bits_attempted;
    state.cum_downlink_bits += rec.downlink_bits;
    state.k = k + 1;
    fill_common(rec, cfg, state, Method::baseline, k);
    return rec;
}

void run_rounds(const EngineConfig& cfg, Method method, TrainState& state,
                std::uint64_t rounds, const std::function<void(const RoundRecord&)>& sink) {
    validate(cfg);
    for (std::uint64_t t = 0; t < rounds; ++t) {
        RoundRecord rec =
            (method == Method::dzofl) ? dzofl_round(cfg, state) : baseline_round(cfg, state);
        if (sink) sink(rec);
    }
}

} // namespace dzofl
