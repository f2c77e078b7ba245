#pragma once

namespace dzofl {

// Device-side cost parameters. Energy is in joules, time in seconds, rates
// in bits/s and ops/s, sram_bits in bits. Defaults reproduce the reference
// CNN workload the comparisons are calibrated on.
struct CostParams {
    double mac_energy_j = 3.7e-12;  // full-precision energy per MAC
    double mac_exponent = 1.25;     // precision scaling exponent, in (1, 2)
    int precision_bits = 16;        // M, forward-pass arithmetic width
    int max_precision_bits = 32;    // M_max, full-precision width
    double mac_count = 10.56e6;     // MACs per forward pass
    double activation_count = 250420.0;
    double param_count = 45362.0;   // model size in scalars
    double dram_factor = 150.0;     // DRAM access cost multiplier
    double mac_units = 64.0;        // parallel MAC units
    double sram_bits = 67108864.0;  // on-chip buffer size (8 MiB)
    double input_size = 784.0;      // input scalars per example
    double bit_rate = 1e7;          // uplink rate per device
    double slot_seconds = 0.125e-3; // scalar-upload slot length
    double cpu_rate = 4e9;          // device compute rate
    double tx_power_watts = 0.2;    // radio transmit power
    double ops_per_round = 16e6;    // per-round compute for timing
};

// Field checks (exponent range, positive rates); throws ConfigError.
void validate(const CostParams& cp);

// Energy of one multiply-accumulate at the given arithmetic width:
//   e_mac(M) = mac_energy_j * (M / M_max)^mac_exponent.
double e_mac(const CostParams& cp, int precision_bits);

// Forward-pass energy: MAC arithmetic at width M plus activation handling at
// full width, weight and activation buffer traffic (with a sqrt(M/(pu*Mmax))
// parallel-fetch term), and DRAM accesses for the input and for whatever
// part of the model and activations exceeds the on-chip buffer.
double e_fp(const CostParams& cp);

// Backward-pass energy at full width; the zero-order method never pays this.
double e_bp(const CostParams& cp);

enum class Method { dzofl, baseline };

// Total uplink bits over `rounds` rounds, all devices together: one scalar
// payload per device per round for dzofl, a full model per device per round
// for the first-order baseline.
double uplink_bits_total(Method method, double rounds, int num_devices,
                         int payload_bits, int model_dim);

// Wall-clock for `rounds` rounds. dzofl uploads fit in one TDMA slot per
// round; the baseline's upload time is its per-device payload over the
// per-device bit rate. Both add ops_per_round / cpu_rate of compute.
double convergence_time(Method method, double rounds, const CostParams& cp,
                        double per_round_payload_bits);

double tx_energy(const CostParams& cp, double bits);

// Device energy for `rounds` rounds plus radio energy for total_tx_bits:
// forward passes only for dzofl, forward+backward for the baseline.
double total_energy(Method method, double rounds, const CostParams& cp,
                    double total_tx_bits);

} // namespace dzofl
