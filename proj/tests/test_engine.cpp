#include <catch2/catch_amalgamated.hpp>

#include "channelwave/engine.hpp"
#include "channelwave/io.hpp"
#include "channelwave/metrics.hpp"
#include "channelwave/verify.hpp"

#include <set>
#include <sstream>

using namespace channelwave;

TEST_CASE("zero horizon gives an empty trace") {
    SimConfig cfg;
    cfg.adversary = BurstPolicy{4, 0};
    cfg.horizon = 0;
    SimTrace t = run(cfg);
    CHECK(t.rows.empty());
    CHECK(t.successes.empty());
    CHECK(t.episodes.empty());
}

TEST_CASE("a lone player wins at its first scheduled broadcast") {
    SimConfig cfg;
    cfg.protocol = Protocol::Main;
    cfg.adversary = BurstPolicy{1, 0};
    cfg.phase1 = Phase1Choice::AlwaysA;
    cfg.horizon = 4096;
    cfg.seed = 99;
    SimTrace t = run(cfg);
    REQUIRE(t.total_successes() == 1);
    CHECK(t.successes[0].winner == 0);

    // Reconstruct the player's schedule from its stream: arrival during slot
    // 1, channel A anchored at slot 3, first scheduled offset mapped to
    // 3 + 2 (s - 1).
    RngPlan plan{cfg.seed};
    Stream stream(plan, StreamKind::Player, 0);
    BackoffState ref = make_backoff(cfg.c, 0);
    auto first = backoff_next_broadcast(ref, 0, 4096, stream);
    REQUIRE(first.has_value());
    CHECK(t.successes[0].step == 3 + 2 * (*first - 1));
    CHECK(t.row(t.successes[0].step).broadcasters == 1);
    // Nothing broadcasts before epoch 1's range opens.
    for (std::uint64_t g = 1; g <= 9; ++g) CHECK(t.row(g).broadcasters == 0);
}

TEST_CASE("main-protocol burst clears every player") {
    SimConfig cfg;
    cfg.adversary = BurstPolicy{64, 0};
    cfg.horizon = 64 * 64;
    cfg.seed = 5;
    SimTrace t = run(cfg);
    CHECK(t.total_successes() == 64);
    CHECK(t.players.size() == 64);
    for (const PlayerRecord& p : t.players) CHECK(p.success_step != 0);
    // Winners are unique: nobody succeeds twice.
    std::set<std::uint32_t> winners;
    for (const SuccessRecord& s : t.successes) winners.insert(s.winner);
    CHECK(winners.size() == t.successes.size());
}

TEST_CASE("population bookkeeping balances step by step") {
    SimConfig cfg;
    cfg.adversary = AdaptiveReactivePolicy{96, 0.5, 2};
    cfg.horizon = 4096;
    cfg.seed = 21;
    SimTrace t = run(cfg);
    std::uint64_t pop = 0;
    for (std::uint64_t g = 1; g <= t.horizon; ++g) {
        const TraceRow& r = t.row(g);
        REQUIRE(r.population_before == pop);
        pop += r.arrivals;
        if (r.kind == SlotKind::Success) pop -= 1;
    }
    CHECK(t.total_arrivals() == t.players.size());
    std::uint64_t alive = 0;
    for (const PlayerRecord& p : t.players) alive += p.success_step == 0 ? 1 : 0;
    CHECK(alive == t.total_arrivals() - t.total_successes());
}

TEST_CASE("same seed reruns are byte-identical; neighboring seeds differ") {
    SimConfig cfg;
    cfg.adversary = BurstPolicy{32, 0};
    cfg.horizon = 2048;
    cfg.record_broadcasters = true;

    cfg.seed = 1234;
    std::ostringstream a, b;
    write_trace_csv(a, run(cfg));
    write_trace_csv(b, run(cfg));
    CHECK(a.str() == b.str());

    int differing = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        cfg.seed = 1000 + s;
        SimTrace x = run(cfg);
        cfg.seed = 1001 + s;
        SimTrace y = run(cfg);
        for (std::uint64_t g = 1; g <= cfg.horizon; ++g) {
            const TraceRow& rx = x.row(g);
            const TraceRow& ry = y.row(g);
            if (rx.kind != ry.kind || rx.broadcasters != ry.broadcasters) {
                ++differing;
                break;
            }
        }
    }
    CHECK(differing == 100);
}

TEST_CASE("truncated horizon reproduces the trace prefix") {
    SimConfig cfg;
    cfg.adversary = PoissonPolicy{0.05, 0};
    cfg.horizon = 4096;
    cfg.seed = 77;
    SimTrace full = run(cfg);
    cfg.horizon = 2048;
    SimTrace half = run(cfg);
    for (std::uint64_t g = 1; g <= half.horizon; ++g) {
        const TraceRow& x = full.row(g);
        const TraceRow& y = half.row(g);
        REQUIRE(x.kind == y.kind);
        REQUIRE(x.winner == y.winner);
        REQUIRE(x.arrivals == y.arrivals);
        REQUIRE(x.population_before == y.population_before);
        REQUIRE(x.broadcasters == y.broadcasters);
    }
}

TEST_CASE("sweep keeps input order and isolates failures") {
    SimConfig good;
    good.adversary = BurstPolicy{8, 0};
    good.horizon = 512;
    good.seed = 3;
    SimConfig bad = good;
    bad.c = 1; // invalid
    std::vector<SimConfig> cfgs{good, bad, good};
    auto results = sweep(cfgs, 2);
    REQUIRE(results.size() == 3);
    CHECK(results[0].ok());
    CHECK_FALSE(results[1].ok());
    CHECK(!results[1].error.empty());
    CHECK(results[2].ok());

    // One-config sweep is the same run.
    auto lone = sweep(std::vector<SimConfig>{good}, 1);
    std::ostringstream a, b;
    write_trace_csv(a, *lone[0].trace);
    write_trace_csv(b, run(good));
    CHECK(a.str() == b.str());

    // Order independence: swapping inputs swaps outputs, nothing else.
    std::vector<SimConfig> swapped{bad, good, good};
    auto results2 = sweep(swapped, 2);
    CHECK_FALSE(results2[0].ok());
    std::ostringstream c, d;
    write_trace_csv(c, *results[0].trace);
    write_trace_csv(d, *results2[1].trace);
    CHECK(c.str() == d.str());
}

TEST_CASE("config validation rejects bad parameters before running") {
    SimConfig cfg;
    cfg.adversary = BurstPolicy{4, 0};
    cfg.horizon = 64;

    SimConfig c1 = cfg;
    c1.c = 1;
    CHECK_THROWS_AS(run(c1), ConfigError);
    SimConfig c2 = cfg;
    c2.c2 = 0;
    CHECK_THROWS_AS(run(c2), ConfigError);
    SimConfig c3 = cfg;
    c3.checkpoints = {32, 16};
    CHECK_THROWS_AS(run(c3), ConfigError);
    SimConfig c4 = cfg;
    c4.checkpoints = {128};
    CHECK_THROWS_AS(run(c4), ConfigError);
    SimConfig c5 = cfg;
    c5.protocol = Protocol::ExpBackoff;
    c5.synthetic_batch = 8;
    CHECK_THROWS_AS(run(c5), ConfigError);
    SimConfig c6 = cfg;
    c6.adversary = SpreadPolicy{8, 0};
    CHECK_THROWS_AS(run(c6), ConfigError);
    SimConfig c7 = cfg;
    c7.adversary = JammingLowerBoundPolicy{4, 4}; // n < 2c
    CHECK_THROWS_AS(run(c7), ConfigError);
}

TEST_CASE("synthetic batch players open with sure broadcasts on both channels") {
    SimConfig cfg;
    cfg.synthetic_batch = 4;
    cfg.adversary = BurstPolicy{0, 0};
    cfg.horizon = 512;
    cfg.seed = 8;
    SimTrace t = run(cfg);
    // Batch step one on channel A (slot 1) and jam step one on channel B
    // (slot 2) both broadcast with probability one.
    CHECK(t.row(1).broadcasters == 4);
    CHECK(t.row(2).broadcasters == 4);
    CHECK(t.row(1).kind == SlotKind::Collision);
    REQUIRE_FALSE(t.episodes.empty());
    CHECK(t.episodes[0].trigger_step == 0);
    CHECK(t.episodes[0].participants == 4);
    CHECK(t.episodes[0].channel == ChannelId::A);
    // A small synchronized batch resolves completely.
    CHECK(t.total_successes() == 4);
}

TEST_CASE("baseline players all open at age one") {
    SimConfig cfg;
    cfg.protocol = Protocol::ExpBackoff;
    cfg.adversary = BurstPolicy{16, 0};
    cfg.horizon = 2048;
    cfg.seed = 9;
    SimTrace t = run(cfg);
    // Ages 1 and 2 broadcast with probability one: slots 2 and 3 carry all 16.
    CHECK(t.row(2).broadcasters == 16);
    CHECK(t.row(3).broadcasters == 16);
    CHECK(t.row(2).kind == SlotKind::Collision);
    CHECK(t.episodes.empty()); // baselines have no batch bookkeeping
}

TEST_CASE("jamming schedule forces early failures") {
    SimConfig cfg;
    cfg.protocol = Protocol::ExpBackoff;
    cfg.adversary = JammingLowerBoundPolicy{256, 4};
    cfg.horizon = 256;
    cfg.seed = 10;
    SimTrace t = run(cfg);
    // The prefix 1..32 is always jammed.
    for (std::uint64_t g = 1; g <= 32; ++g) CHECK(t.row(g).kind == SlotKind::Jammed);
    std::uint64_t jammed = 0;
    for (std::uint64_t g = 1; g <= 256; ++g) jammed += t.row(g).kind == SlotKind::Jammed ? 1 : 0;
    CHECK(jammed <= 64); // never more than n/c
    CHECK(t.players.size() == 64); // n/c arrivals
}

TEST_CASE("batch episode structure holds on live traces") {
    std::ostringstream why;
    for (std::uint64_t seed : {31ull, 32ull}) {
        SimConfig cfg;
        cfg.adversary = AdaptiveReactivePolicy{128, 0.5, 1};
        cfg.horizon = 8192;
        cfg.seed = seed;
        cfg.record_broadcasters = true;
        SimTrace t = run(cfg);
        // Episodes are disjoint and ordered.
        for (std::size_t i = 1; i < t.episodes.size(); ++i) {
            REQUIRE(t.episodes[i].start_step() > t.episodes[i - 1].end_step);
        }
        REQUIRE(trace_batch_properties(t, why));
    }
    INFO(why.str());
}

TEST_CASE("episode success counts match the trace") {
    SimConfig cfg;
    cfg.adversary = BurstPolicy{64, 0};
    cfg.horizon = 4096;
    cfg.seed = 12;
    SimTrace t = run(cfg);
    REQUIRE_FALSE(t.episodes.empty());
    for (const BatchEpisode& ep : t.episodes) {
        std::uint64_t successes = 0;
        for (const SuccessRecord& s : t.successes) {
            if (s.step >= ep.start_step() && s.step <= ep.end_step) ++successes;
        }
        CHECK(successes == ep.successes);
        if (ep.end_reason == EpisodeEnd::OppositeSuccess) {
            // The ending success lies on the other channel and inside the span.
            CHECK(channel_of_step(ep.end_step) == other(ep.channel));
            CHECK(t.row(ep.end_step).kind == SlotKind::Success);
        }
    }
}
