#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "dzofl/errors.hpp"
#include "dzofl/quantizer.hpp"
#include "dzofl/rng.hpp"

using namespace dzofl;

TEST_CASE("payload width validation") {
    CHECK_NOTHROW(stochastic_quantizer(9));
    CHECK_NOTHROW(stochastic_quantizer(16));
    CHECK_NOTHROW(stochastic_quantizer(60));
    CHECK_THROWS_AS(stochastic_quantizer(8), ConfigError);
    CHECK_THROWS_AS(stochastic_quantizer(61), ConfigError);
    CHECK_THROWS_AS(stochastic_quantizer(0), ConfigError);
}

TEST_CASE("identity quantizer is a passthrough with zero distortion") {
    auto q = identity_quantizer();
    CHECK(q.sigma() == 0.0);
    for (double x : {0.0, 1.0, -3.25, 1e-300, 7.77e200}) {
        auto r = quantize(q, x, 12345);
        CHECK(r.value == x);
        CHECK_FALSE(r.saturated);
    }
}

TEST_CASE("certified constants of the 16-bit layout") {
    auto q = stochastic_quantizer(16);
    CHECK(q.mantissa_bits() == 8);
    CHECK(q.sigma() == std::ldexp(1.0, -16));
    CHECK(q.min_magnitude() == std::ldexp(1.0, -63));
    CHECK(q.max_magnitude() == std::ldexp(2.0 - std::ldexp(1.0, -8), 63));
}

TEST_CASE("zero is exact and on-grid values are fixed points") {
    auto q = stochastic_quantizer(16);
    auto r = quantize(q, 0.0, 999);
    CHECK(r.value == 0.0);
    CHECK_FALSE(r.saturated);

    // grid values: 2^e * (1 + i/2^m); rounding must leave them untouched for
    // every noise word
    for (double g : {1.0, 1.5, -2.0, 0.75, 3.0, std::ldexp(1.0 + 37.0 / 256.0, -20)}) {
        for (std::uint64_t w : {0ULL, 1ULL, ~0ULL, 0xdeadbeefULL}) {
            CHECK(quantize(q, g, w).value == g);
        }
    }
}

TEST_CASE("rounding moves to one of the two neighboring grid points") {
    auto q = stochastic_quantizer(12); // m = 4, coarse grid
    double x = 1.3;
    double lo = 1.0 + std::floor((x - 1.0) * 16.0) / 16.0;
    double hi = lo + 1.0 / 16.0;
    for (std::uint64_t t = 0; t < 200; ++t) {
        double v = quantize(q, x, rng::mix(5, t)).value;
        CHECK((v == lo || v == hi));
    }
}

TEST_CASE("stochastic rounding is unbiased and meets the variance certificate") {
    auto q = stochastic_quantizer(16);
    const int draws = 20000;
    const double sigma = q.sigma();
    for (double mag : {3.7e-8, 2.2e-3, 0.137, 1.618, 4096.3, 8.1e12}) {
        for (double sign : {1.0, -1.0}) {
            double x = sign * mag;
            double sum = 0.0, sum_sq = 0.0;
            for (int t = 0; t < draws; ++t) {
                double v = quantize(q, x, rng::mix(777, static_cast<std::uint64_t>(t))).value;
                sum += v;
                sum_sq += v * v;
            }
            double mean = sum / draws;
            double var = sum_sq / draws - mean * mean;
            double se = std::sqrt(var / draws);
            CHECK(std::fabs(mean - x) <= 4.0 * se + 1e-300);
            CHECK(var <= sigma * x * x);
        }
    }
}

TEST_CASE("below-range magnitudes saturate to zero and report it") {
    auto q = stochastic_quantizer(16);
    auto r = quantize(q, std::ldexp(1.0, -70), 5);
    CHECK(r.value == 0.0);
    CHECK(r.saturated);
    auto r2 = quantize(q, -std::ldexp(1.0, -64), 5);
    CHECK(r2.value == 0.0);
    CHECK(r2.saturated);
    // the smallest representable magnitude itself survives
    auto r3 = quantize(q, std::ldexp(1.0, -63), 5);
    CHECK(r3.value == std::ldexp(1.0, -63));
    CHECK_FALSE(r3.saturated);
}

TEST_CASE("out-of-range and non-finite inputs are rejected") {
    auto q = stochastic_quantizer(16);
    CHECK_THROWS_AS(quantize(q, std::ldexp(1.0, 64), 1), DomainError);
    CHECK_THROWS_AS(quantize(q, -std::ldexp(1.0, 64), 1), DomainError);
    CHECK_THROWS_AS(quantize(q, std::numeric_limits<double>::infinity(), 1), DomainError);
    CHECK_THROWS_AS(quantize(q, std::numeric_limits<double>::quiet_NaN(), 1), DomainError);
    // the largest grid point is still accepted
    CHECK_NOTHROW(quantize(q, q.max_magnitude(), 1));
}

TEST_CASE("wire encoding round-trips and fits the payload width") {
    auto q = stochastic_quantizer(16);
    CHECK(decode(q, encode(q, 0.0)) == 0.0);
    for (std::uint64_t t = 0; t < 500; ++t) {
        double x = (rng::to_unit(rng::mix(31, t)) - 0.5) * 1e6;
        double v = quantize(q, x, rng::mix(32, t)).value;
        std::uint64_t w = encode(q, v);
        CHECK(w < (std::uint64_t{1} << q.payload_bits));
        CHECK(decode(q, w) == v);
    }
    // off-grid values have no encoding
    CHECK_THROWS_AS(encode(q, 1.0 + 1.0 / 512.0), DomainError);
    CHECK_THROWS_AS(decode(q, std::uint64_t{1} << 16), DomainError);
    CHECK_THROWS_AS(encode(identity_quantizer(), 1.0), DomainError);
}
