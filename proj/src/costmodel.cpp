#include "dzofl/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dzofl/errors.hpp"

namespace dzofl {

namespace {
void check_params(const CostParams& cp);
} // namespace

void validate(const CostParams& cp) { check_params(cp); }

namespace {
void check_params(const CostParams& cp) {
    if (!(cp.mac_exponent > 1.0 && cp.mac_exponent < 2.0))
        throw ConfigError("cost model: mac_exponent must lie in (1, 2), got " +
                          std::to_string(cp.mac_exponent));
    if (cp.mac_energy_j <= 0.0) throw ConfigError("cost model: mac_energy_j must be positive");
    if (cp.max_precision_bits < 1 || cp.precision_bits < 1 ||
        cp.precision_bits > cp.max_precision_bits)
        throw ConfigError("cost model: need 1 <= precision_bits <= max_precision_bits");
    if (cp.mac_units <= 0.0) throw ConfigError("cost model: mac_units must be positive");
    if (cp.bit_rate <= 0.0) throw ConfigError("cost model: bit_rate must be positive");
    if (cp.cpu_rate <= 0.0) throw ConfigError("cost model: cpu_rate must be positive");
}
} // namespace

double e_mac(const CostParams& cp, int precision_bits) {
    check_params(cp);
    if (precision_bits < 1 || precision_bits > cp.max_precision_bits)
        throw ConfigError("e_mac: precision_bits outside [1, max_precision_bits]");
    double ratio = static_cast<double>(precision_bits) /
                   static_cast<double>(cp.max_precision_bits);
    return cp.mac_energy_j * std::pow(ratio, cp.mac_exponent);
}

double e_fp(const CostParams& cp) {
    check_params(cp);
    const double em = e_mac(cp, cp.precision_bits);
    const double em_full = e_mac(cp, cp.max_precision_bits);
    const double m = cp.precision_bits, mmax = cp.max_precision_bits;

    double computing = em * cp.mac_count + 3.0 * cp.activation_count * em_full;
    double fetch = em * cp.mac_count * std::sqrt(m / (cp.mac_units * mmax));
    double weights = 2.0 * em * cp.param_count + fetch;
    double activations = 2.0 * em * cp.activation_count + fetch;
    double spill_bits =
        std::max(cp.param_count * m + cp.activation_count * m - cp.sram_bits, 0.0);
    double dram = cp.dram_factor * em_full * cp.input_size +
                  2.0 * cp.dram_factor * em * spill_bits;
    return computing + weights + activations + dram;
}

double e_bp(const CostParams& cp) {
    check_params(cp);
    const double em_full = e_mac(cp, cp.max_precision_bits);
    const double mmax = cp.max_precision_bits;
    double spill_bits = std::max(
        cp.param_count * mmax + cp.activation_count * mmax - cp.sram_bits, 0.0);
    return 2.0 * cp.mac_count * em_full + 2.0 * cp.activation_count * em_full +
           cp.param_count * em_full +
           2.0 * cp.mac_count * em_full * std::sqrt(1.0 / cp.mac_units) +
           2.0 * cp.dram_factor * em_full * spill_bits;
}

double uplink_bits_total(Method method, double rounds, int num_devices,
                         int payload_bits, int model_dim) {
    if (rounds < 0.0) throw ConfigError("uplink_bits_total: rounds must be >= 0");
    if (num_devices < 1) throw ConfigError("uplink_bits_total: num_devices must be >= 1");
    double per_device_per_round = static_cast<double>(payload_bits);
    if (method == Method::baseline)
        per_device_per_round *= static_cast<double>(model_dim);
    return rounds * static_cast<double>(num_devices) * per_device_per_round;
}

double convergence_time(Method method, double rounds, const CostParams& cp,
                        double per_round_payload_bits) {
    check_params(cp);
    double compute = cp.ops_per_round / cp.cpu_rate;
    double upload = (method == Method::dzofl) ? cp.slot_seconds
                                              : per_round_payload_bits / cp.bit_rate;
    return rounds * (upload + compute);
}

double tx_energy(const CostParams& cp, double bits) {
    check_params(cp);
    return cp.tx_power_watts * (bits / cp.bit_rate);
}

double total_energy(Method method, double rounds, const CostParams& cp,
                    double total_tx_bits) {
    double per_round = (method == Method::dzofl) ? e_fp(cp) : e_fp(cp) + e_bp(cp);
    return rounds * per_round + tx_energy(cp, total_tx_bits);
}

} // namespace dzofl
