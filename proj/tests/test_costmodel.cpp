#include <doctest.h>

#include <cmath>

#include "dzofl/costmodel.hpp"
#include "dzofl/errors.hpp"

using namespace dzofl;

TEST_CASE("per-mac energy follows the precision power law") {
    CostParams cp;
    CHECK(e_mac(cp, 32) == 3.7e-12);
    CHECK(e_mac(cp, 16) == doctest::Approx(1.5556583682193718e-12).epsilon(1e-12));
    CHECK(e_mac(cp, 8) < e_mac(cp, 16));
    CHECK_THROWS_AS(e_mac(cp, 0), ConfigError);
    CHECK_THROWS_AS(e_mac(cp, 33), ConfigError);
}

TEST_CASE("forward and backward pass energies on the reference workload") {
    CostParams cp;
    CHECK(e_fp(cp) == doctest::Approx(2.346684963017054e-05).epsilon(1e-12));
    CHECK(e_bp(cp) == doctest::Approx(8.993294740000001e-05).epsilon(1e-12));
    // the backward pass always runs at full width and dominates
    CHECK(e_bp(cp) > e_fp(cp));

    // once model + activations exceed the on-chip buffer, spill traffic
    // makes the pass strictly more expensive
    CostParams tiny_sram = cp;
    tiny_sram.sram_bits = 1.0;
    CHECK(e_fp(tiny_sram) > e_fp(cp));
    CHECK(e_bp(tiny_sram) > e_bp(cp));
}

TEST_CASE("uplink traffic: scalar payloads versus full model uploads") {
    // one 16-bit scalar per device per round
    CHECK(uplink_bits_total(Method::dzofl, 1000.0, 1, 16, 400000) == 16e3);
    CHECK(uplink_bits_total(Method::dzofl, 1000.0, 7, 16, 400000) == 7.0 * 16e3);
    // the first-order baseline ships all d scalars every round
    CHECK(uplink_bits_total(Method::baseline, 100.0, 1, 16, 400000) == 64e7);
    CHECK_THROWS_AS(uplink_bits_total(Method::dzofl, -1.0, 1, 16, 4), ConfigError);
    CHECK_THROWS_AS(uplink_bits_total(Method::dzofl, 1.0, 0, 16, 4), ConfigError);
}

TEST_CASE("wall clock: TDMA slot per round versus model upload per round") {
    CostParams cp;
    cp.ops_per_round = 0.0; // isolate the communication time
    // model upload per round: 16 bits x 4e5 params over 10 Mbit/s
    CHECK(convergence_time(Method::baseline, 1.0, cp, 6.4e6) == 0.64);
    CHECK(convergence_time(Method::baseline, 100.0, cp, 6.4e6) == 64.0);
    // scalar upload fits one 0.125 ms slot regardless of model size
    CHECK(convergence_time(Method::dzofl, 1e4, cp, 6.4e6) == 1.25);
    CHECK(convergence_time(Method::dzofl, 1e4, cp, 1.0) == 1.25);

    CostParams with_compute = cp;
    with_compute.ops_per_round = 16e6;
    CHECK(convergence_time(Method::dzofl, 10.0, with_compute, 1.0) ==
          doctest::Approx(10.0 * (0.125e-3 + 16e6 / 4e9)).epsilon(1e-15));
}

TEST_CASE("device energy comparison on the reference workload") {
    CostParams cp;
    double dz_bits = uplink_bits_total(Method::dzofl, 1000.0, 1, 16, 45362);
    double bl_bits = uplink_bits_total(Method::baseline, 100.0, 1, 16, 45362);
    double dz = total_energy(Method::dzofl, 1000.0, cp, dz_bits);
    double bl = total_energy(Method::baseline, 100.0, cp, bl_bits);
    CHECK(dz == doctest::Approx(0.02378684963017054).epsilon(1e-12));
    CHECK(bl == doctest::Approx(1.4629239797030174).epsilon(1e-12));
    // 10x the rounds, still over an order of magnitude cheaper
    CHECK(dz < bl);
    CHECK(bl / dz > 10.0);
}

TEST_CASE("radio energy is power times airtime") {
    CostParams cp;
    CHECK(tx_energy(cp, 1e7) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(tx_energy(cp, 0.0) == 0.0);
}

TEST_CASE("parameter validation") {
    CostParams cp;
    CHECK_NOTHROW(validate(cp));

    CostParams bad = cp;
    bad.mac_exponent = 2.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad.mac_exponent = 1.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);

    bad = cp;
    bad.precision_bits = 64;
    CHECK_THROWS_AS(validate(bad), ConfigError);

    bad = cp;
    bad.bit_rate = 0.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);

    bad = cp;
    bad.mac_energy_j = -1.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
}
