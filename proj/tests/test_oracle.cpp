#include <catch2/catch_amalgamated.hpp>

#include "channelwave/oracle.hpp"
#include "channelwave/rng.hpp"

#include <cmath>

using namespace channelwave;

TEST_CASE("exactly-one and exactly-zero probabilities on small vectors") {
    CHECK(prob_exactly_one({{0.5, 0.5}}) == Catch::Approx(0.5).margin(1e-12));
    CHECK(prob_exactly_one({{0.5}}) == Catch::Approx(0.5).margin(1e-12));
    CHECK(prob_exactly_one({{}}) == 0.0);
    CHECK(prob_exactly_zero({{0.5, 0.5}}) == Catch::Approx(0.25).margin(1e-12));
    CHECK(prob_exactly_zero({{}}) == 1.0);
    CHECK(prob_exactly_zero({{0.25, 0.1}}) == Catch::Approx(0.75 * 0.9).margin(1e-12));
    // A long product must not underflow to zero prematurely.
    BernoulliVector v;
    for (int i = 0; i < 500; ++i) v.p.push_back(0.5);
    CHECK(prob_exactly_zero(v) > 0.0);
    CHECK(prob_exactly_zero(v) == Catch::Approx(std::pow(2.0, -500.0)).epsilon(1e-9));
}

TEST_CASE("entries outside [0, 1/2] are rejected") {
    CHECK_THROWS_AS(prob_exactly_zero({{0.6}}), std::invalid_argument);
    CHECK_THROWS_AS(prob_exactly_one({{-0.1}}), std::invalid_argument);
}

TEST_CASE("lower bounds hold on random vectors") {
    Stream rng(RngPlan{0xabcULL}, StreamKind::Engine, 0);
    for (int iter = 0; iter < 2000; ++iter) {
        BernoulliVector v;
        const std::size_t len = 1 + rng.below(32);
        double mean = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            v.p.push_back(0.5 * rng.uniform01());
            mean += v.p.back();
        }
        const double p0 = prob_exactly_zero(v);
        const double p1 = prob_exactly_one(v);
        REQUIRE(p0 >= std::pow(2.0, -2.0 * mean) - 1e-12);
        REQUIRE(p1 >= 0.125 * std::min(mean, std::pow(2.0, -2.0 * mean)) - 1e-12);
        REQUIRE(p0 + p1 <= 1.0 + 1e-12);
    }
}

TEST_CASE("backoff attempt counts over a finite window") {
    // Two full epochs (4,16] and (16,64] fit under 64 slots: 4 + 4 slots.
    const BackoffAttemptCounts at64 = expected_backoff_attempts(4, 64);
    CHECK(at64.max_attempts == 8);
    CHECK(at64.expected_attempts == Catch::Approx(8.0));
    CHECK(at64.lemma_bound == Catch::Approx(12.0)); // c log_c 64
    CHECK(double(at64.max_attempts) <= at64.lemma_bound);

    // Before epoch 1's range there is nothing.
    CHECK(expected_backoff_attempts(4, 4).max_attempts == 0);
    CHECK(expected_backoff_attempts(4, 1).expected_attempts == 0.0);

    // A partially entered epoch contributes proportionally in expectation.
    const BackoffAttemptCounts at32 = expected_backoff_attempts(4, 32);
    CHECK(at32.max_attempts == 8);
    CHECK(at32.expected_attempts == Catch::Approx(4.0 + 4.0 * 16.0 / 48.0));

    // Monotone in the window length.
    double prev = 0.0;
    for (std::uint64_t T = 1; T <= 300; ++T) {
        const double e = expected_backoff_attempts(4, T).expected_attempts;
        REQUIRE(e >= prev - 1e-12);
        prev = e;
    }
}

TEST_CASE("expected attempt count matches enumerated schedules") {
    // Empirical mean of scheduled-slot counts within the window against the
    // closed form, window cutting epoch 2 in half.
    const std::uint64_t T = 32;
    const double expected = expected_backoff_attempts(4, T).expected_attempts;
    Stream seeds(RngPlan{0x77ULL}, StreamKind::Engine, 1);
    const int trials = 20000;
    double total = 0;
    for (int k = 0; k < trials; ++k) {
        BackoffState st = make_backoff(4, 0);
        Stream rng(seeds.next_u64());
        for (std::uint64_t tau = 1; tau <= T; ++tau) {
            if (backoff_decide(st, tau, rng)) total += 1.0;
        }
    }
    const double mean = total / trials;
    CHECK(std::abs(mean - expected) < 0.03);
}

TEST_CASE("monte carlo from protocol primitives converges to the oracle") {
    // Pr[exactly one fires] and Pr[none fires] for four independent
    // primitives, estimated at 10^5 draws, within 4 sigma of the oracle.
    BernoulliVector v;
    v.p = {batch_probability(10), jam_probability(2, 20), exp_backoff_probability(100),
           poly_backoff_probability(16, 0.5)};
    const double p1 = prob_exactly_one(v);
    const double p0 = prob_exactly_zero(v);

    Stream rng(RngPlan{0x91ULL}, StreamKind::Engine, 2);
    const int samples = 100000;
    int ones = 0, zeros = 0;
    for (int i = 0; i < samples; ++i) {
        int count = 0;
        count += batch_decide(BatchState{10, ChannelId::A}, rng) ? 1 : 0;
        count += jam_decide(JamState{20, 2, ChannelId::A}, rng) ? 1 : 0;
        count += exp_backoff_decide(100, rng) ? 1 : 0;
        count += poly_backoff_decide(16, 0.5, rng) ? 1 : 0;
        if (count == 1) ++ones;
        if (count == 0) ++zeros;
    }
    const double est1 = double(ones) / samples;
    const double est0 = double(zeros) / samples;
    CHECK(std::abs(est1 - p1) < 4 * std::sqrt(p1 * (1 - p1) / samples));
    CHECK(std::abs(est0 - p0) < 4 * std::sqrt(p0 * (1 - p0) / samples));
}
