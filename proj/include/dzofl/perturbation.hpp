#pragma once

#include <cstdint>

#include "dzofl/errors.hpp"
#include "dzofl/rng.hpp"
#include "dzofl/types.hpp"

namespace dzofl {

// Shared perturbation direction Phi_k. Components are i.i.d. signs scaled to
// +-1/sqrt(d), so ||Phi_k|| = 1 for every draw. The stream is a stateless
// function of (seed, round, component); all devices and the server reproduce
// the same vector without communicating it.
struct PerturbationStream {
    std::uint64_t seed = 0;
    int dim = 0;
};

// Second and third absolute moment parameters of the perturbation
// distribution used throughout the analysis:
//   alpha2 = E[phi_j^2]  = 1/d (per component; E[Phi Phi^T] = I/d)
//   alpha3 = E[||Phi||^3] = 1  (unit norm, deterministic)
struct PerturbationMoments {
    double alpha2 = 0.0;
    double alpha3 = 1.0;
};

inline PerturbationStream make_perturbation_stream(std::uint64_t seed, int dim) {
    if (dim < 1) throw ConfigError("perturbation dim must be >= 1");
    return PerturbationStream{seed, dim};
}

inline Vector phi(const PerturbationStream& s, std::uint64_t k) {
    Vector v(s.dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(s.dim));
    for (int j = 0; j < s.dim; ++j) {
        std::uint64_t h = rng::mix(s.seed, k, static_cast<std::uint64_t>(j));
        v[j] = (h >> 63) ? scale : -scale;
    }
    return v;
}

inline PerturbationMoments moments(const PerturbationStream& s) {
    return PerturbationMoments{1.0 / static_cast<double>(s.dim), 1.0};
}

} // namespace dzofl
