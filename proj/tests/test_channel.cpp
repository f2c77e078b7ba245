#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "dzofl/channel.hpp"
#include "dzofl/errors.hpp"

using namespace dzofl;

namespace {

// probability that at least one of N independent p-packets arrives, computed
// by summing the exact probability of every nonempty outcome
double enumerate_q(double p, int n) {
    double total = 0.0;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        double prob = 1.0;
        for (int i = 0; i < n; ++i) prob *= (mask >> i) & 1u ? p : (1.0 - p);
        total += prob;
    }
    return total;
}

} // namespace

TEST_CASE("q_success equals exhaustive outcome enumeration") {
    for (int n = 1; n <= 4; ++n)
        for (double p : {0.1, 0.5, 0.9})
            CHECK(q_success(p, n) == doctest::Approx(enumerate_q(p, n)).epsilon(1e-14));
    CHECK(q_success(1.0, 3) == 1.0);
}

TEST_CASE("channel construction validates its parameters") {
    CHECK_NOTHROW(make_channel(0.5, 3, 1));
    CHECK_NOTHROW(make_channel(1.0, 1, 1));
    CHECK_THROWS_AS(make_channel(0.0, 3, 1), ConfigError);
    CHECK_THROWS_AS(make_channel(-0.1, 3, 1), ConfigError);
    CHECK_THROWS_AS(make_channel(1.5, 3, 1), ConfigError);
    CHECK_THROWS_AS(make_channel(0.5, 0, 1), ConfigError);
    CHECK_THROWS_AS(q_success(0.0, 3), ConfigError);
    CHECK_THROWS_AS(q_success(0.5, 0), ConfigError);
}

TEST_CASE("received sets are deterministic, sorted, and marginally fair") {
    auto ch = make_channel(0.7, 5, 424242);
    auto a = sample_received_set(ch, 3);
    auto b = sample_received_set(ch, 3);
    CHECK(a == b);
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1] < a[i]);

    // per-device arrival frequency within 4 standard errors of p, and no
    // device systematically luckier than another (exchangeability)
    const int rounds = 50000;
    std::vector<int> hits(5, 0);
    for (int k = 0; k < rounds; ++k)
        for (int id : sample_received_set(ch, static_cast<std::uint64_t>(k))) ++hits[id - 1];
    double se = std::sqrt(0.7 * 0.3 / rounds);
    for (int i = 0; i < 5; ++i)
        CHECK(std::fabs(hits[i] / static_cast<double>(rounds) - 0.7) < 4.0 * se);
}

TEST_CASE("p = 1 always delivers everything") {
    auto ch = make_channel(1.0, 4, 9);
    for (std::uint64_t k = 0; k < 100; ++k)
        CHECK(sample_received_set(ch, k).size() == 4);
}

TEST_CASE("aggregation rescales by inverse participation") {
    std::map<int, double> two{{1, 2.0}, {3, 4.0}};
    CHECK(aggregate(two, 4) == (4.0 / 2.0) * 6.0);
    std::map<int, double> all{{1, 1.0}, {2, 1.0}, {3, 1.0}};
    CHECK(aggregate(all, 3) == 3.0);

    std::map<int, double> none;
    CHECK(aggregate(none, 5) == 0.0); // a voided round contributes exactly zero

    std::map<int, double> bad{{7, 1.0}};
    CHECK_THROWS_AS(aggregate(bad, 4), DomainError);
    std::map<int, double> zero_id{{0, 1.0}};
    CHECK_THROWS_AS(aggregate(zero_id, 4), DomainError);
}
