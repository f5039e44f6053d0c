#ifndef CHANNELWAVE_VERIFY_HPP
#define CHANNELWAVE_VERIFY_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "channelwave/engine.hpp"
#include "channelwave/io.hpp"
#include "channelwave/metrics.hpp"
#include "channelwave/oracle.hpp"

// The statistical acceptance harness: seed-swept checks of the throughput,
// energy, first-success, batch, tail, oracle, jamming, and determinism
// claims, each with its thresholds pinned here. The `verify` subcommand and
// the acceptance test binary both run these.

namespace channelwave {

struct CriterionResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    std::vector<CriterionResult> criteria;
    std::vector<std::string> notes;

    bool pass() const {
        for (const auto& c : criteria) {
            if (!c.pass) return false;
        }
        return true;
    }
};

struct VerifyOptions {
    std::uint64_t base_seed = 1;
    unsigned parallelism = 0;  // 0 = hardware concurrency
    std::uint64_t seeds = 0;   // 0 = suite default; smaller values are underpowered
    std::ostream* log = nullptr;
};

namespace verify_detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::string fmt(double v, int prec = 4) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << std::fixed << v;
    return ss.str();
}

inline void log_line(const VerifyOptions& opts, const std::string& line) {
    if (opts.log) (*opts.log) << line << '\n';
}

inline std::uint64_t suite_seeds(const VerifyOptions& opts, std::uint64_t dflt,
                                 SuiteResult& result) {
    if (opts.seeds == 0) return dflt;
    if (opts.seeds < dflt) {
        result.notes.push_back("warning: running with " + std::to_string(opts.seeds) +
                               " seeds instead of the default " + std::to_string(dflt) +
                               "; the check is underpowered");
    }
    return opts.seeds;
}

struct ThroughputEnergyData {
    std::vector<std::uint64_t> ns;
    std::vector<std::vector<double>> active_ratio; // active_slots / n per run
    std::vector<std::vector<double>> energy_ratio; // attempts / (n log2^2 n) per run
};

inline ThroughputEnergyData collect_throughput_energy(const VerifyOptions& opts,
                                                      std::uint64_t seeds) {
    ThroughputEnergyData data;
    data.ns = {1u << 8, 1u << 10, 1u << 12, 1u << 14};
    for (std::uint64_t n : data.ns) {
        std::vector<SimConfig> cfgs;
        for (std::uint64_t s = 0; s < seeds; ++s) {
            SimConfig cfg;
            cfg.protocol = Protocol::Main;
            cfg.adversary = BurstPolicy{n, 0};
            cfg.horizon = 64 * n;
            cfg.seed = opts.base_seed + s;
            cfgs.push_back(cfg);
        }
        auto results = sweep(cfgs, opts.parallelism);
        std::vector<double> active, energy;
        const double l2n = std::log2(static_cast<double>(n));
        for (const auto& r : results) {
            if (!r.ok()) throw std::runtime_error("run failed: " + r.error);
            TraceMetrics m(*r.trace);
            active.push_back(static_cast<double>(m.active_slots(r.trace->horizon)) /
                             static_cast<double>(n));
            energy.push_back(static_cast<double>(r.trace->total_attempts()) /
                             (static_cast<double>(n) * l2n * l2n));
        }
        data.active_ratio.push_back(std::move(active));
        data.energy_ratio.push_back(std::move(energy));
    }
    return data;
}

} // namespace verify_detail

// Criterion 1: constant implicit throughput. Median active_slots/n may not
// grow more than 25% from n = 2^8 to n = 2^14, and one constant K <= 64 must
// bound active_slots/n over every run.
inline SuiteResult verify_throughput_flatness_from(
    const verify_detail::ThroughputEnergyData& data, SuiteResult result) {
    using namespace verify_detail;
    std::vector<double> medians;
    double worst = 0.0;
    for (std::size_t i = 0; i < data.ns.size(); ++i) {
        medians.push_back(median(data.active_ratio[i]));
        for (double v : data.active_ratio[i]) worst = std::max(worst, v);
    }
    const double k_const = std::ceil(worst);
    {
        CriterionResult c;
        c.name = "active-slot flatness";
        c.pass = medians.back() <= 1.25 * medians.front();
        c.detail = "median active/n: ";
        for (std::size_t i = 0; i < medians.size(); ++i) {
            c.detail += "n=2^" + std::to_string(8 + 2 * i) + ":" + fmt(medians[i], 3) + " ";
        }
        c.detail += "(2^14 vs 2^8 growth limit 25%)";
        result.criteria.push_back(c);
    }
    {
        CriterionResult c;
        c.name = "linear active-slot bound";
        c.pass = k_const <= 64.0;
        c.detail = "K = " + fmt(k_const, 0) + " bounds active_slots <= K n over all runs (need K <= 64)";
        result.criteria.push_back(c);
    }
    return result;
}

inline SuiteResult verify_throughput_flatness(const VerifyOptions& opts) {
    SuiteResult result;
    result.suite = "throughput-flatness";
    const std::uint64_t seeds = verify_detail::suite_seeds(opts, 50, result);
    auto data = verify_detail::collect_throughput_energy(opts, seeds);
    return verify_throughput_flatness_from(data, std::move(result));
}

// Criterion 3: energy. attempts / (n log2^2 n) bounded by one constant across
// n, median growth from 2^8 to 2^14 at most 25%.
inline SuiteResult verify_energy_from(const verify_detail::ThroughputEnergyData& data,
                                      SuiteResult result) {
    using namespace verify_detail;
    std::vector<double> medians;
    double worst = 0.0;
    for (std::size_t i = 0; i < data.ns.size(); ++i) {
        medians.push_back(median(data.energy_ratio[i]));
        for (double v : data.energy_ratio[i]) worst = std::max(worst, v);
    }
    CriterionResult c;
    c.name = "broadcast-attempt scaling";
    c.pass = medians.back() <= 1.25 * medians.front();
    c.detail = "median attempts/(n log2^2 n): ";
    for (std::size_t i = 0; i < medians.size(); ++i) {
        c.detail += "n=2^" + std::to_string(8 + 2 * i) + ":" + fmt(medians[i], 3) + " ";
    }
    c.detail += "bounding constant " + fmt(worst, 3) + " (growth limit 25%)";
    result.criteria.push_back(c);
    return result;
}

inline SuiteResult verify_energy(const VerifyOptions& opts) {
    SuiteResult result;
    result.suite = "energy";
    const std::uint64_t seeds = verify_detail::suite_seeds(opts, 50, result);
    auto data = verify_detail::collect_throughput_energy(opts, seeds);
    return verify_energy_from(data, std::move(result));
}

// Criterion 2: exponential backoff degrades under the adaptive adversary.
// Medians weakly decreasing in n and throughput(2^14) <= 0.5 throughput(2^8).
inline SuiteResult verify_exp_degradation(const VerifyOptions& opts) {
    using namespace verify_detail;
    SuiteResult result;
    result.suite = "exp-degradation";
    const std::uint64_t seeds = suite_seeds(opts, 50, result);
    const std::vector<std::uint64_t> ns = {1u << 8, 1u << 10, 1u << 12, 1u << 14};
    std::vector<double> medians;
    for (std::uint64_t n : ns) {
        std::vector<SimConfig> cfgs;
        for (std::uint64_t s = 0; s < seeds; ++s) {
            SimConfig cfg;
            cfg.protocol = Protocol::ExpBackoff;
            cfg.adversary = AdaptiveReactivePolicy{n, 0.5, 1};
            cfg.horizon = 64 * n;
            cfg.seed = opts.base_seed + s;
            cfgs.push_back(cfg);
        }
        auto results = sweep(cfgs, opts.parallelism);
        std::vector<double> ratios;
        for (const auto& r : results) {
            TraceMetrics m(*r.trace);
            ratios.push_back(m.implicit_throughput(r.trace->horizon).ratio);
        }
        medians.push_back(median(ratios));
        log_line(opts, "exp n=" + std::to_string(n) + " median throughput " + fmt(medians.back(), 5));
    }
    {
        CriterionResult c;
        c.name = "throughput decreases with n";
        c.pass = true;
        for (std::size_t i = 1; i < medians.size(); ++i) {
            if (medians[i] > medians[i - 1] + 1e-12) c.pass = false;
        }
        c.detail = "medians: ";
        for (std::size_t i = 0; i < medians.size(); ++i) {
            c.detail += "n=2^" + std::to_string(8 + 2 * i) + ":" + fmt(medians[i], 5) + " ";
        }
        result.criteria.push_back(c);
    }
    {
        CriterionResult c;
        c.name = "throughput at 2^14 at most half of 2^8";
        c.pass = medians.back() <= 0.5 * medians.front();
        c.detail = "ratio " + fmt(medians.back() / medians.front(), 3) + " (need <= 0.5)";
        result.criteria.push_back(c);
    }
    return result;
}

// Criterion 4: first success of c-backoff (sqrt(c) successes in the window
// (tau/c^2, tau] for c = 4, k = 3). Pure c-backoff population on a single
// channel; arrivals spread over tau steps.
inline SuiteResult verify_first_success(const VerifyOptions& opts) {
    using namespace verify_detail;
    SuiteResult result;
    result.suite = "first-success";
    const std::uint64_t seeds = suite_seeds(opts, 1000, result);
    const std::uint32_t c = 4;
    const std::uint64_t tau = 1024; // c^(k+2) with k = 3
    const std::uint64_t n = 64;     // c^k

    std::uint64_t pass_count = 0;
    for (std::uint64_t s = 0; s < seeds; ++s) {
        RngPlan plan{opts.base_seed + s};
        Adversary adv(SpreadPolicy{n, tau}, Stream(plan, StreamKind::Adversary, 0), tau);
        std::vector<SuccessRecord> successes;
        struct Runner {
            BackoffState backoff;
            std::uint64_t arrival;
            Stream stream;
        };
        std::vector<Runner> players;
        std::uint64_t in_window = 0;
        for (std::uint64_t t = 1; t <= tau; ++t) {
            VisibleHistory h(successes, t);
            const std::uint32_t arr = adv.next_arrivals(h);
            for (std::uint32_t k = 0; k < arr; ++k) {
                players.push_back(
                    {make_backoff(c, 0), t, Stream(plan, StreamKind::Player, players.size())});
            }
            std::uint32_t bc = 0;
            for (auto& p : players) {
                if (t <= p.arrival) continue;
                if (backoff_decide(p.backoff, t - p.arrival, p.stream)) ++bc;
            }
            if (bc == 1) {
                successes.push_back({t, ChannelId::A, 0});
                if (t > tau / (c * c)) ++in_window;
            }
        }
        if (in_window >= 2) ++pass_count; // sqrt(c) = 2
    }
    const double rate = static_cast<double>(pass_count) / static_cast<double>(seeds);
    CriterionResult c4;
    c4.name = "sqrt(c) successes in (tau/c^2, tau]";
    c4.pass = rate >= 0.99;
    c4.detail = "pass rate " + fmt(rate, 4) + " over " + std::to_string(seeds) +
                " seeds (need >= 0.99)";
    result.criteria.push_back(c4);
    return result;
}

// Criterion 5: batch successes. n synchronized players in batch execution
// with at most n/c1 injected arrivals reach n/10 successes within the first
// c1 n batch-channel steps.
inline SuiteResult verify_batch_successes(const VerifyOptions& opts) {
    using namespace verify_detail;
    SuiteResult result;
    result.suite = "batch-successes";
    const std::uint64_t seeds = suite_seeds(opts, 500, result);
    const std::uint32_t c1 = 16;
    for (std::uint64_t n : {std::uint64_t{256}, std::uint64_t{1024}}) {
        const std::uint64_t horizon = 2 * c1 * n; // c1 n steps of the batch channel
        std::vector<SimConfig> cfgs;
        for (std::uint64_t s = 0; s < seeds; ++s) {
            SimConfig cfg;
            cfg.protocol = Protocol::Main;
            cfg.synthetic_batch = static_cast<std::uint32_t>(n);
            cfg.adversary = SpreadPolicy{n / c1, horizon};
            cfg.horizon = horizon;
            cfg.seed = opts.base_seed + s;
            cfgs.push_back(cfg);
        }
        auto results = sweep(cfgs, opts.parallelism);
        std::uint64_t ok = 0;
        for (const auto& r : results) {
            std::uint64_t batch_channel_successes = 0;
            for (const SuccessRecord& srec : r.trace->successes) {
                if (srec.channel == ChannelId::A) ++batch_channel_successes;
            }
            if (batch_channel_successes >= n / 10) ++ok;
        }
        const double rate = static_cast<double>(ok) / static_cast<double>(seeds);
        CriterionResult c;
        c.name = "n/10 successes within c1 n batch steps (n=" + std::to_string(n) + ")";
        c.pass = rate >= 0.99;
        c.detail = "pass rate " + fmt(rate, 4) + " over " + std::to_string(seeds) + " seeds";
        result.criteria.push_back(c);
    }
    return result;
}

// Criterion 6: truncated batch-length tail. Over full-protocol runs with
// mixed adversaries, the survival function of truncated lengths on a log-log
// grid has fitted slope <= -1 over t in [32, 1024]. A tail with no measurable
// mass in that range satisfies every 1/poly(t) envelope and passes vacuously.
inline SuiteResult verify_batch_tail(const VerifyOptions& opts) {
    using namespace verify_detail;
    SuiteResult result;
    result.suite = "batch-tail";
    const std::uint64_t runs = suite_seeds(opts, 2000, result);
    const std::uint64_t n = 1024;
    const std::uint32_t c1 = 16;
    const double theta = 1.0 / (4.0 * c1);

    std::vector<SimConfig> cfgs;
    for (std::uint64_t s = 0; s < runs; ++s) {
        SimConfig cfg;
        cfg.protocol = Protocol::Main;
        cfg.horizon = 64 * n;
        cfg.seed = opts.base_seed + s;
        switch (s % 4) {
            case 0: cfg.adversary = BurstPolicy{n, 0}; break;
            case 1: cfg.adversary = SpreadPolicy{n, 4 * n}; break;
            case 2: cfg.adversary = AdaptiveReactivePolicy{n, 0.5, 1}; break;
            default: cfg.adversary = PoissonPolicy{1.0 / 64.0, 0}; break;
        }
        cfgs.push_back(cfg);
    }
    auto results = sweep(cfgs, opts.parallelism);
    std::vector<std::uint64_t> lengths;
    for (const auto& r : results) {
        for (const BatchEpisode& ep : r.trace->episodes) {
            if (ep.end_reason == EpisodeEnd::Horizon) continue; // censored
            lengths.push_back(truncated_batch_length(ep, theta));
        }
    }
    CriterionResult c;
    c.name = "truncated-length tail slope";
    if (lengths.empty()) {
        c.pass = false;
        c.detail = "no completed batch episodes observed";
        result.criteria.push_back(c);
        return result;
    }
    auto tail = survival_tail(lengths);
    std::ostringstream detail;
    detail << lengths.size() << " episodes; ";
    for (const TailPoint& pt : tail) {
        if (pt.t < 32 || pt.t > 1024) continue;
        detail << "S(" << pt.t << ")=" << fmt(pt.survival, 6) << "[" << fmt(pt.ci.lo, 6) << ","
               << fmt(pt.ci.hi, 6) << "] ";
    }
    double slope = 0.0;
    if (tail_slope(tail, 32, 1024, slope)) {
        c.pass = slope <= -1.0;
        detail << "fitted slope " << fmt(slope, 3) << " (need <= -1)";
    } else {
        c.pass = true;
        detail << "fewer than two grid points with positive mass in [32, 1024]; "
                  "tail lies below every 1/poly envelope";
    }
    c.detail = detail.str();
    result.criteria.push_back(c);
    return result;
}

// Criterion 7: oracle equivalence. Exact prob_exactly_one / prob_exactly_zero
// respect the lower bounds (constant 1/8) on random vectors, and Monte Carlo
// estimates from the protocol primitives match the oracles within 3 sigma.
inline SuiteResult verify_oracle_consistency(const VerifyOptions& opts) {
    using namespace verify_detail;
    SuiteResult result;
    result.suite = "oracle-consistency";
    Stream rng(RngPlan{opts.base_seed}, StreamKind::Engine, 99);

    {
        CriterionResult c;
        c.name = "lower bounds on 10^4 random vectors";
        c.pass = true;
        double worst_margin = 1e9;
        for (int iter = 0; iter < 10000; ++iter) {
            BernoulliVector v;
            const std::size_t len = 1 + rng.below(32);
            for (std::size_t i = 0; i < len; ++i) v.p.push_back(0.5 * rng.uniform01());
            double mean = 0.0;
            for (double pi : v.p) mean += pi;
            const double p0 = prob_exactly_zero(v);
            const double p1 = prob_exactly_one(v);
            const double bound0 = std::pow(2.0, -2.0 * mean);
            const double bound1 = 0.125 * std::min(mean, std::pow(2.0, -2.0 * mean));
            if (p0 < bound0 || p1 < bound1) c.pass = false;
            if (bound1 > 0) worst_margin = std::min(worst_margin, p1 / bound1);
        }
        c.detail = "smallest Pr[X=1] margin over the 1/8 bound: " + fmt(worst_margin, 3);
        result.criteria.push_back(c);
    }

    {
        CriterionResult c;
        c.name = "Monte Carlo matches oracles within 3 sigma";
        c.pass = true;
        std::ostringstream detail;
        const std::uint64_t samples = 1000000;
        auto check = [&](const std::string& name, double expected,
                         const std::function<bool()>& draw) {
            std::uint64_t hits = 0;
            for (std::uint64_t i = 0; i < samples; ++i) hits += draw() ? 1 : 0;
            const double est = static_cast<double>(hits) / static_cast<double>(samples);
            const double sigma =
                std::sqrt(expected * (1.0 - expected) / static_cast<double>(samples));
            const double dev = std::abs(est - expected);
            if (dev > 3.0 * sigma) {
                c.pass = false;
                detail << name << " off by " << fmt(dev / sigma, 2) << " sigma; ";
            }
        };
        check("batch(i=10)", batch_probability(10),
              [&] { return batch_decide(BatchState{10, ChannelId::A}, rng); });
        check("jam(i=20,c2=2)", jam_probability(2, 20),
              [&] { return jam_decide(JamState{20, 2, ChannelId::A}, rng); });
        check("exp(t=100)", exp_backoff_probability(100),
              [&] { return exp_backoff_decide(100, rng); });
        check("poly(t=16,g=0.5)", poly_backoff_probability(16, 0.5),
              [&] { return poly_backoff_decide(16, 0.5, rng); });
        // Pr[exactly one of four primitives fires] against the exact oracle.
        {
            BernoulliVector v;
            v.p = {batch_probability(10), jam_probability(2, 20), exp_backoff_probability(100),
                   poly_backoff_probability(16, 0.5)};
            check("exactly-one composite", prob_exactly_one(v), [&] {
                int count = 0;
                count += batch_decide(BatchState{10, ChannelId::A}, rng) ? 1 : 0;
                count += jam_decide(JamState{20, 2, ChannelId::A}, rng) ? 1 : 0;
                count += exp_backoff_decide(100, rng) ? 1 : 0;
                count += poly_backoff_decide(16, 0.5, rng) ? 1 : 0;
                return count == 1;
            });
        }
        if (c.pass) detail << "all estimates within 3 sigma at 10^6 samples";
        c.detail = detail.str();
        result.criteria.push_back(c);
    }
    return result;
}

// Criterion 8: jamming demonstration. Under the two-stage jamming adversary,
// the probability of zero successes within the first n steps stays >= 0.05.
inline SuiteResult verify_jamming_demo(const VerifyOptions& opts) {
    using namespace verify_detail;
    SuiteResult result;
    result.suite = "jamming-demo";
    const std::uint64_t seeds = suite_seeds(opts, 500, result);
    for (Protocol proto : {Protocol::Main, Protocol::ExpBackoff}) {
        for (std::uint64_t n : {std::uint64_t{256}, std::uint64_t{1024}, std::uint64_t{4096}}) {
            std::vector<SimConfig> cfgs;
            for (std::uint64_t s = 0; s < seeds; ++s) {
                SimConfig cfg;
                cfg.protocol = proto;
                cfg.adversary = JammingLowerBoundPolicy{n, 4};
                cfg.horizon = n;
                cfg.seed = opts.base_seed + s;
                cfgs.push_back(cfg);
            }
            auto results = sweep(cfgs, opts.parallelism);
            std::uint64_t zero = 0;
            for (const auto& r : results) {
                if (r.trace->total_successes() == 0) ++zero;
            }
            const double rate = static_cast<double>(zero) / static_cast<double>(seeds);
            CriterionResult c;
            c.name = std::string("zero-success probability (") + protocol_name(proto) +
                     ", n=" + std::to_string(n) + ")";
            c.pass = rate >= 0.05;
            c.detail = "Pr[no success in first n steps] = " + fmt(rate, 4) + " (need >= 0.05)";
            result.criteria.push_back(c);
        }
    }
    return result;
}

// Properties 2 and 3 checked against a detailed trace: during an episode on
// channel x, every broadcaster on x is a participant or a phase-1 player that
// arrived after the trigger; and every player alive at the trigger either
// joined the cohort or entered batch-sync on the other channel right then.
inline bool trace_batch_properties(const SimTrace& trace, std::ostringstream& why) {
    if (!trace.detailed) {
        why << "trace lacks broadcaster detail; ";
        return false;
    }
    bool ok = true;
    for (const BatchEpisode& ep : trace.episodes) {
        // Cohort and phase-2 entries at the trigger.
        std::vector<std::uint32_t> cohort;
        std::vector<bool> synced_at_trigger(trace.players.size(), false);
        std::vector<bool> in_cohort(trace.players.size(), false);
        for (const PhaseTransition& tr : trace.transitions) {
            if (tr.step != ep.trigger_step) continue;
            if (tr.to == Phase::BatchExec && tr.channel == ep.channel) {
                cohort.push_back(tr.player);
                in_cohort[tr.player] = true;
            }
            if (tr.to == Phase::BatchSync && tr.channel == other(ep.channel)) {
                synced_at_trigger[tr.player] = true;
            }
        }
        if (ep.trigger_step == 0) {
            // Synthetic start: the first `participants` players form the cohort.
            for (std::uint32_t p = 0; p < ep.participants; ++p) {
                cohort.push_back(p);
                in_cohort[p] = true;
            }
        }
        if (cohort.size() != ep.participants) {
            ok = false;
            why << "episode participant count mismatch; ";
        }
        // Property 3 at formation.
        for (std::size_t p = 0; p < trace.players.size(); ++p) {
            const PlayerRecord& rec = trace.players[p];
            const bool alive_at_trigger =
                rec.arrival_step <= ep.trigger_step &&
                (rec.success_step == 0 || rec.success_step > ep.trigger_step);
            if (!alive_at_trigger || in_cohort[p]) continue;
            if (!synced_at_trigger[p]) {
                ok = false;
                why << "player " << p << " alive at trigger " << ep.trigger_step
                    << " neither in cohort nor synced; ";
            }
        }
        // Property 2 over the episode's batch-channel slots.
        for (std::uint64_t g = ep.start_step(); g <= ep.end_step && g <= trace.rows.size(); ++g) {
            if (channel_of_step(g) != ep.channel) continue;
            const std::uint64_t lo = trace.broadcaster_offsets[g - 1];
            const std::uint64_t hi = trace.broadcaster_offsets[g];
            for (std::uint64_t k = lo; k < hi; ++k) {
                const std::uint32_t p = trace.broadcaster_ids[k];
                if (in_cohort[p]) continue;
                // Must be a phase-1 player that arrived during the episode:
                // no transitions at or before this slot, arrival after trigger.
                bool transitioned = false;
                for (const PhaseTransition& tr : trace.transitions) {
                    if (tr.player == p && tr.step < g) {
                        transitioned = true;
                        break;
                    }
                }
                if (transitioned || trace.players[p].arrival_step <= ep.trigger_step) {
                    ok = false;
                    why << "non-cohort broadcaster " << p << " on the batch channel at step "
                        << g << "; ";
                }
            }
        }
    }
    return ok;
}

// Criterion 9: determinism and module invariants.
inline SuiteResult verify_determinism_properties(const VerifyOptions& opts) {
    using namespace verify_detail;
    SuiteResult result;
    result.suite = "determinism";
    const auto started = std::chrono::steady_clock::now();

    {
        CriterionResult c;
        c.name = "same-seed reruns byte-identical";
        SimConfig cfg;
        cfg.protocol = Protocol::Main;
        cfg.adversary = AdaptiveReactivePolicy{512, 0.5, 1};
        cfg.horizon = 1 << 15;
        cfg.seed = opts.base_seed + 7;
        cfg.record_broadcasters = true;
        std::ostringstream a, b;
        write_trace_csv(a, run(cfg));
        write_trace_csv(b, run(cfg));
        c.pass = a.str() == b.str();
        c.detail = c.pass ? "traces identical after serialization" : "trace bytes diverged";
        result.criteria.push_back(c);
    }
    {
        CriterionResult c;
        c.name = "trace prefix reproduced under truncated horizon";
        SimConfig cfg;
        cfg.protocol = Protocol::Main;
        cfg.adversary = SpreadPolicy{256, 2048};
        cfg.horizon = 1 << 14;
        cfg.seed = opts.base_seed + 11;
        SimTrace full = run(cfg);
        cfg.horizon = 1 << 13;
        SimTrace half = run(cfg);
        c.pass = true;
        for (std::uint64_t g = 1; g <= half.horizon; ++g) {
            const TraceRow& x = full.row(g);
            const TraceRow& y = half.row(g);
            if (x.kind != y.kind || x.winner != y.winner || x.arrivals != y.arrivals ||
                x.population_before != y.population_before || x.broadcasters != y.broadcasters) {
                c.pass = false;
                break;
            }
        }
        c.detail = "first 2^13 rows of a 2^14 run vs a 2^13 run";
        result.criteria.push_back(c);
    }
    {
        CriterionResult c;
        c.name = "backoff attempt cap (per-player broadcast count)";
        c.pass = true;
        Stream rng(RngPlan{opts.base_seed}, StreamKind::Engine, 5);
        for (int trial = 0; trial < 200 && c.pass; ++trial) {
            BackoffState st = make_backoff(4, 0);
            Stream stream(rng.next_u64());
            std::uint64_t count = 0;
            for (std::uint64_t tau = 1; tau <= 1024; ++tau) {
                if (backoff_decide(st, tau, stream)) ++count;
                const double bound =
                    tau > 4 ? 4.0 * std::log2(static_cast<double>(tau)) / 2.0 : 0.0;
                if (static_cast<double>(count) > bound) c.pass = false;
            }
        }
        c.detail = "count <= c log_c tau over 200 schedules, c = 4, tau <= 4^5";
        result.criteria.push_back(c);
    }
    {
        CriterionResult c;
        c.name = "backoff probability bracket (analytic)";
        c.pass = true;
        for (std::uint32_t c_param : {4u, 9u, 16u}) {
            const std::uint64_t lim =
                detail::pow_sat(c_param, 4); // tau <= c^4
            for (std::uint64_t tau = c_param + 1; tau <= lim; ++tau) {
                const double p = backoff_probability(c_param, tau);
                const double t = static_cast<double>(tau);
                if (p < 1.0 / t - 1e-15 || p > 2.0 * c_param / t + 1e-15) {
                    c.pass = false;
                    break;
                }
            }
        }
        c.detail = "1/tau <= p <= 2c/tau for c in {4, 9, 16}, tau in (c, c^4]";
        result.criteria.push_back(c);
    }
    {
        CriterionResult c;
        c.name = "observation indistinguishability";
        c.pass = true;
        for (SlotKind kind : {SlotKind::Silent, SlotKind::Collision, SlotKind::Jammed}) {
            SlotOutcome o;
            o.kind = kind;
            o.global_step = 33;
            o.channel = channel_of_step(33);
            for (std::uint32_t pid : {0u, 1u, 17u}) {
                if (observe(o, PlayerId{pid}).kind != ObsKind::NoSuccess) c.pass = false;
            }
        }
        c.detail = "silent, collision, and jammed all observe as no-success";
        result.criteria.push_back(c);
    }
    {
        CriterionResult c;
        c.name = "batch-episode structural properties";
        c.pass = true;
        std::ostringstream why;
        std::vector<SimConfig> cfgs;
        for (int k = 0; k < 3; ++k) {
            SimConfig cfg;
            cfg.protocol = Protocol::Main;
            cfg.horizon = 1 << 14;
            cfg.seed = opts.base_seed + 100 + k;
            cfg.record_broadcasters = true;
            if (k == 0) cfg.adversary = BurstPolicy{256, 0};
            if (k == 1) cfg.adversary = AdaptiveReactivePolicy{256, 0.5, 1};
            if (k == 2) cfg.adversary = PoissonPolicy{0.02, 0};
            cfgs.push_back(cfg);
        }
        for (const auto& r : sweep(cfgs, opts.parallelism)) {
            const SimTrace& tr = *r.trace;
            // Property 1: episodes are disjoint in time.
            for (std::size_t i = 1; i < tr.episodes.size(); ++i) {
                if (tr.episodes[i].start_step() <= tr.episodes[i - 1].end_step) {
                    c.pass = false;
                    why << "episodes overlap; ";
                }
            }
            // Properties 2 and 3 from the transition log.
            if (!trace_batch_properties(tr, why)) c.pass = false;
        }
        c.detail = c.pass ? "properties 1-3 hold on burst, adaptive, and poisson traces"
                          : why.str();
        result.criteria.push_back(c);
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    {
        CriterionResult c;
        c.name = "property suite runtime";
        c.pass = elapsed < 60.0;
        c.detail = fmt(elapsed, 1) + "s (limit 60s)";
        result.criteria.push_back(c);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Suite registry.
// ---------------------------------------------------------------------------

using SuiteFn = std::function<SuiteResult(const VerifyOptions&)>;

inline const std::map<std::string, SuiteFn>& suite_registry() {
    static const std::map<std::string, SuiteFn> registry = {
        {"throughput-flatness", verify_throughput_flatness},
        {"exp-degradation", verify_exp_degradation},
        {"energy", verify_energy},
        {"first-success", verify_first_success},
        {"batch-successes", verify_batch_successes},
        {"batch-tail", verify_batch_tail},
        {"oracle-consistency", verify_oracle_consistency},
        {"jamming-demo", verify_jamming_demo},
        {"determinism", verify_determinism_properties},
    };
    return registry;
}

} // namespace channelwave

#endif // CHANNELWAVE_VERIFY_HPP
