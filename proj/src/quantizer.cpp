#include "dzofl/quantizer.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dzofl/rng.hpp"

namespace dzofl {

namespace {
constexpr int kExponentBits = 7;
constexpr int kExpMax = 63;   // e in [-63, 63], raw = e + 63 in [0, 126]
constexpr int kExpMin = -63;
constexpr int kZeroCode = 127; // spare raw exponent code marks exact zero

void check_spec(const QuantizerSpec& spec) {
    if (spec.kind == QuantizerKind::identity) return;
    // need at least 1 mantissa bit; cap at 52 so mantissa arithmetic stays
    // exact in double precision
    if (spec.payload_bits < 9 || spec.payload_bits > 60)
        throw ConfigError("stochastic quantizer payload_bits must be in [9, 60], got " +
                          std::to_string(spec.payload_bits));
}
} // namespace

double QuantizerSpec::sigma() const {
    if (kind == QuantizerKind::identity) return 0.0;
    return std::ldexp(1.0, -2 * mantissa_bits());
}

double QuantizerSpec::max_magnitude() const {
    if (kind == QuantizerKind::identity) return std::numeric_limits<double>::max();
    return std::ldexp(2.0 - std::ldexp(1.0, -mantissa_bits()), kExpMax);
}

double QuantizerSpec::min_magnitude() const {
    if (kind == QuantizerKind::identity) return 0.0;
    return std::ldexp(1.0, kExpMin);
}

QuantizerSpec identity_quantizer(int payload_bits) {
    return QuantizerSpec{QuantizerKind::identity, payload_bits};
}

QuantizerSpec stochastic_quantizer(int payload_bits) {
    QuantizerSpec spec{QuantizerKind::stochastic_mantissa, payload_bits};
    check_spec(spec);
    return spec;
}

QuantizeResult quantize(const QuantizerSpec& spec, double x, std::uint64_t noise_word) {
    if (!std::isfinite(x)) throw DomainError("quantize: input is not finite");
    if (spec.kind == QuantizerKind::identity) return {x, false};
    check_spec(spec);
    if (x == 0.0) return {0.0, false};

    double ax = std::fabs(x);
    if (ax > spec.max_magnitude())
        throw DomainError("quantize: |x| exceeds representable range of " +
                          std::to_string(spec.payload_bits) + "-bit payload");
    if (ax < spec.min_magnitude()) return {0.0, true}; // saturates to zero

    const int m = spec.mantissa_bits();
    int bexp = 0;
    double mant = std::frexp(ax, &bexp); // ax = mant * 2^bexp, mant in [0.5, 1)
    int e = bexp - 1;                    // ax = 2^e * (1 + f)
    double f = 2.0 * mant - 1.0;         // f in [0, 1)

    // split f*2^m into integer grid index and remainder; both are exact
    // because the scaling is by a power of two and m <= 52
    double scaled = std::ldexp(f, m);
    double lo = std::floor(scaled);
    double frac = scaled - lo;
    double grid = lo;
    if (frac > 0.0 && rng::to_unit(noise_word) < frac) grid += 1.0;

    // grid == 2^m bumps the exponent; e < kExpMax is guaranteed here because
    // inputs that could overflow past the top grid point were rejected above
    double q = std::ldexp(1.0 + std::ldexp(grid, -m), e);
    return {std::copysign(q, x), false};
}

std::uint64_t encode(const QuantizerSpec& spec, double grid_value) {
    if (spec.kind != QuantizerKind::stochastic_mantissa)
        throw DomainError("encode: only stochastic_mantissa payloads have a wire format");
    check_spec(spec);
    const int m = spec.mantissa_bits();
    std::uint64_t sign = std::signbit(grid_value) ? 1 : 0;
    std::uint64_t word = 0;
    if (grid_value == 0.0) {
        word = (sign << (kExponentBits + m)) |
               (static_cast<std::uint64_t>(kZeroCode) << m);
        return word;
    }
    double ax = std::fabs(grid_value);
    int bexp = 0;
    double mant = std::frexp(ax, &bexp);
    int e = bexp - 1;
    if (e < kExpMin || e > kExpMax)
        throw DomainError("encode: value outside representable exponent range");
    double scaled = std::ldexp(2.0 * mant - 1.0, m);
    double idx = std::floor(scaled);
    if (idx != scaled)
        throw DomainError("encode: value is not on the quantizer grid");
    word = (sign << (kExponentBits + m)) |
           (static_cast<std::uint64_t>(e + kExpMax) << m) |
           static_cast<std::uint64_t>(idx);
    return word;
}

double decode(const QuantizerSpec& spec, std::uint64_t payload) {
    if (spec.kind != QuantizerKind::stochastic_mantissa)
        throw DomainError("decode: only stochastic_mantissa payloads have a wire format");
    check_spec(spec);
    const int m = spec.mantissa_bits();
    if (payload >> spec.payload_bits)
        throw DomainError("decode: payload wider than payload_bits");
    std::uint64_t sign = (payload >> (kExponentBits + m)) & 1;
    int raw_exp = static_cast<int>((payload >> m) & 0x7f);
    std::uint64_t idx = payload & ((std::uint64_t{1} << m) - 1);
    if (raw_exp == kZeroCode) {
        if (idx != 0) throw DomainError("decode: nonzero mantissa under zero marker");
        return 0.0;
    }
    double v = std::ldexp(1.0 + std::ldexp(static_cast<double>(idx), -m),
                          raw_exp - kExpMax);
    return sign ? -v : v;
}

} // namespace dzofl
