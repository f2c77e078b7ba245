#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace dzofl {

// Per-device i.i.d. packet erasure on the uplink: in round k the server
// receives device i's scalar with probability p, independently across
// devices and rounds. The sampled outcome is a pure function of
// (seed, k, i). The downlink broadcast is error-free.
struct ErasureChannel {
    double p = 1.0;
    int num_devices = 1;
    std::uint64_t seed = 0;
};

// Validates p in (0, 1] and num_devices >= 1; throws ConfigError otherwise.
ErasureChannel make_channel(double p, int num_devices, std::uint64_t seed);

// Device ids of the round-k survivors, ascending, ids in 1..num_devices.
std::vector<int> sample_received_set(const ErasureChannel& ch, std::uint64_t k);

// Probability that at least one device's packet arrives: 1 - (1-p)^N.
double q_success(double p, int num_devices);

// Inverse-participation rescaled sum of the received scalars:
//   (N / |S|) * sum of values, or exactly 0 when nothing arrived.
// Throws DomainError if a device id is out of range.
double aggregate(const std::map<int, double>& received, int num_devices);

} // namespace dzofl
