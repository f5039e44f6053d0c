#include <catch2/catch_amalgamated.hpp>

#include "channelwave/protocols.hpp"
#include "channelwave/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

using namespace channelwave;

namespace {
Stream test_stream(std::uint64_t salt) {
    return Stream(RngPlan{0x5eedULL}, StreamKind::Player, salt);
}
} // namespace

TEST_CASE("backoff marginal probability formula") {
    // k = ceil(log_4 16) = 2 gives 1 / (4^1 - 4^0) = 1/3.
    CHECK(backoff_probability(4, 16) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(backoff_probability(4, 4) == 0.0);  // at or before offset c
    CHECK(backoff_probability(4, 1) == 0.0);
    CHECK(backoff_probability(4, 5) == Catch::Approx(1.0 / 3.0)); // epoch 1 spans (4, 16]
    CHECK(backoff_probability(4, 17) == Catch::Approx(4.0 / 48.0)); // epoch 2 spans (16, 64]
}

TEST_CASE("backoff probability bracket holds analytically") {
    // 1/tau <= p(tau) <= 2c/tau for every offset inside some epoch.
    for (std::uint32_t c : {4u, 9u, 16u}) {
        const std::uint64_t limit = detail::pow_sat(c, 5);
        for (std::uint64_t tau = c + 1; tau <= limit; ++tau) {
            const double p = backoff_probability(c, tau);
            const double t = static_cast<double>(tau);
            REQUIRE(p >= 1.0 / t - 1e-15);
            REQUIRE(p <= 2.0 * c / t + 1e-15);
        }
    }
}

TEST_CASE("backoff schedule stays inside epoch ranges and caps broadcasts") {
    for (int trial = 0; trial < 50; ++trial) {
        BackoffState st = make_backoff(4, 0);
        Stream rng = test_stream(100 + trial);
        std::uint64_t count = 0;
        std::uint64_t count_by_16 = 0;
        for (std::uint64_t tau = 1; tau <= 64; ++tau) {
            if (backoff_decide(st, tau, rng)) {
                ++count;
                if (tau <= 16) ++count_by_16;
                CHECK(tau > 4); // nothing before epoch 1's range
            }
        }
        // Epochs (4,16] and (16,64] are fully inside the window, c slots each.
        CHECK(count == 8);
        CHECK(count_by_16 == 4);
        CHECK(count <= 4 * 3); // the coarse c log_c tau cap at tau = 64
    }
}

TEST_CASE("backoff broadcast count obeys the log cap at every prefix") {
    for (int trial = 0; trial < 50; ++trial) {
        BackoffState st = make_backoff(4, 0);
        Stream rng = test_stream(400 + trial);
        std::uint64_t count = 0;
        for (std::uint64_t tau = 1; tau <= 1024; ++tau) {
            if (backoff_decide(st, tau, rng)) ++count;
            if (tau > 4) {
                const double cap = 4.0 * std::log(double(tau)) / std::log(4.0);
                REQUIRE(double(count) <= cap + 1e-9);
            }
        }
    }
}

TEST_CASE("backoff empirical marginal matches the formula at offset 16") {
    // Fresh state per sample; the marginal at offset 16 is exactly 1/3
    // because each epoch draws c distinct slots from its range.
    const int samples = 1000000;
    int hits = 0;
    for (int i = 0; i < samples; ++i) {
        BackoffState st = make_backoff(4, 0);
        Stream rng = test_stream(1000000 + i);
        if (backoff_decide(st, 16, rng)) ++hits;
    }
    const double est = double(hits) / samples;
    const double expect = 1.0 / 3.0;
    const double sigma = std::sqrt(expect * (1 - expect) / samples);
    CHECK(std::abs(est - expect) < 4 * sigma);
    CHECK(est > 1.0 / 16.0);
    CHECK(est < 8.0 / 16.0);
}

TEST_CASE("backoff schedules draw lazily in epoch order") {
    BackoffState st = make_backoff(4, 0);
    Stream rng = test_stream(7);
    CHECK(st.next_epoch == 1);
    CHECK_FALSE(backoff_decide(st, 3, rng));
    CHECK(st.next_epoch == 1); // still before epoch 1's range
    backoff_decide(st, 5, rng);
    CHECK(st.next_epoch == 2); // epoch 1 materialized on entry
    backoff_decide(st, 17, rng);
    CHECK(st.next_epoch == 3);
}

TEST_CASE("backoff rejects a clock moving backwards") {
    BackoffState st = make_backoff(4, 0);
    Stream rng = test_stream(8);
    backoff_decide(st, 10, rng);
    CHECK_NOTHROW(backoff_decide(st, 10, rng)); // repeated query is fine
    CHECK_THROWS_AS(backoff_decide(st, 9, rng), std::logic_error);
}

TEST_CASE("next-broadcast walk agrees with per-slot decisions") {
    // The engine consumes schedules through backoff_next_broadcast; both
    // paths draw epochs in order from the same stream, so the broadcast
    // sets must be identical.
    for (int trial = 0; trial < 20; ++trial) {
        BackoffState by_slot = make_backoff(3, 0);
        Stream rng_a = test_stream(9000 + trial);
        std::vector<std::uint64_t> slots_a;
        for (std::uint64_t tau = 1; tau <= 2000; ++tau) {
            if (backoff_decide(by_slot, tau, rng_a)) slots_a.push_back(tau);
        }
        BackoffState by_event = make_backoff(3, 0);
        Stream rng_b = test_stream(9000 + trial);
        std::vector<std::uint64_t> slots_b;
        std::uint64_t at = 0;
        while (auto next = backoff_next_broadcast(by_event, at, 2000, rng_b)) {
            slots_b.push_back(*next);
            at = *next;
        }
        REQUIRE(slots_a == slots_b);
    }
}

TEST_CASE("backoff respects a nonzero local start") {
    BackoffState st = make_backoff(4, 100);
    Stream rng = test_stream(77);
    for (std::uint64_t slot = 100; slot <= 104; ++slot) {
        CHECK_FALSE(backoff_decide(st, slot, rng)); // offsets <= c
    }
    std::uint64_t count = 0;
    for (std::uint64_t slot = 105; slot <= 116; ++slot) {
        if (backoff_decide(st, slot, rng)) ++count;
    }
    CHECK(count == 4); // epoch 1 fully covered: offsets (4, 16]
}
