#include "dzofl/channel.hpp"

#include <cmath>
#include <string>

#include "dzofl/errors.hpp"
#include "dzofl/rng.hpp"

namespace dzofl {

ErasureChannel make_channel(double p, int num_devices, std::uint64_t seed) {
    if (!(p > 0.0 && p <= 1.0))
        throw ConfigError("channel p must be in (0, 1], got " + std::to_string(p));
    if (num_devices < 1)
        throw ConfigError("channel num_devices must be >= 1, got " +
                          std::to_string(num_devices));
    return ErasureChannel{p, num_devices, seed};
}

std::vector<int> sample_received_set(const ErasureChannel& ch, std::uint64_t k) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(ch.num_devices));
    for (int i = 1; i <= ch.num_devices; ++i) {
        std::uint64_t h = rng::mix(ch.seed, k, static_cast<std::uint64_t>(i));
        if (rng::to_unit(h) < ch.p) out.push_back(i);
    }
    return out;
}

double q_success(double p, int num_devices) {
    if (!(p > 0.0 && p <= 1.0))
        throw ConfigError("q_success: p must be in (0, 1], got " + std::to_string(p));
    if (num_devices < 1)
        throw ConfigError("q_success: num_devices must be >= 1");
    // 1 - (1-p)^N, the chance the round is not voided entirely
    return 1.0 - std::pow(1.0 - p, num_devices);
}

double aggregate(const std::map<int, double>& received, int num_devices) {
    if (received.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [id, value] : received) {
        if (id < 1 || id > num_devices)
            throw DomainError("aggregate: device id " + std::to_string(id) +
                              " outside 1.." + std::to_string(num_devices));
        sum += value;
    }
    return (static_cast<double>(num_devices) / static_cast<double>(received.size())) * sum;
}

} // namespace dzofl
