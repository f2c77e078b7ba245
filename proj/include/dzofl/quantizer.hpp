#pragma once

#include <cstdint>

#include "dzofl/errors.hpp"

namespace dzofl {

enum class QuantizerKind { identity, stochastic_mantissa };

// Scalar quantizer for the uplink/downlink payloads.
//
// The stochastic_mantissa kind writes x = sign * 2^e * (1+f), f in [0,1),
// and rounds f to m = payload_bits - 8 fractional bits, up or down with
// probability proportional to the remainder. Rounding is therefore unbiased:
// E[Q(x) | x] = x for every in-range x. The wire layout is
//   1 sign bit | 7 exponent bits | m mantissa bits
// with exponents e in [-63, 63] (raw codes 0..126) and raw code 127 reserved
// for exact zero. Worst-case relative variance of the rounding is
//   Var[Q(x)]/x^2 <= (ulp/2)^2 / x^2 <= 2^(-2m),
// which is the certified distortion bound sigma() below.
struct QuantizerSpec {
    QuantizerKind kind = QuantizerKind::stochastic_mantissa;
    int payload_bits = 16;

    int mantissa_bits() const { return payload_bits - 8; }
    double sigma() const;         // certified relative second-moment bound
    double max_magnitude() const; // largest representable |x|
    double min_magnitude() const; // smallest nonzero representable |x|
};

QuantizerSpec identity_quantizer(int payload_bits = 64);
QuantizerSpec stochastic_quantizer(int payload_bits);

struct QuantizeResult {
    double value = 0.0;
    bool saturated = false; // nonzero input collapsed to zero (below range)
};

// noise_word supplies the rounding randomness (one counter-derived 64-bit
// word per quantization). Identity kind ignores it. Throws DomainError for
// non-finite input or |x| above the representable range.
QuantizeResult quantize(const QuantizerSpec& spec, double x, std::uint64_t noise_word);

// Wire encoding for stochastic_mantissa grid values; proves every quantized
// scalar fits in payload_bits bits. decode(encode(v)) == v exactly.
std::uint64_t encode(const QuantizerSpec& spec, double grid_value);
double decode(const QuantizerSpec& spec, std::uint64_t payload);

} // namespace dzofl
