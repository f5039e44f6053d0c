#ifndef CHANNELWAVE_ADVERSARY_HPP
#define CHANNELWAVE_ADVERSARY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "channelwave/channel.hpp"
#include "channelwave/rng.hpp"

// Arrival-pattern generators, including an adaptive success-observing
// adversary, plus the two-stage jamming construction. An adversary sees the
// success history (slots and winners) and nothing else: not silence versus
// collision, not player state, not player randomness.

namespace channelwave {

struct SuccessRecord {
    std::uint64_t step = 0;
    ChannelId channel = ChannelId::A;
    std::uint32_t winner = PlayerId::kNone;
};

// What an adversary may observe when deciding the arrivals for `now`: the
// successes of slots strictly before `now`.
class VisibleHistory {
public:
    VisibleHistory(const std::vector<SuccessRecord>& successes, std::uint64_t now)
        : successes_(&successes), now_(now) {}

    std::uint64_t now() const { return now_; }
    std::size_t success_count() const { return successes_->size(); }
    const SuccessRecord& success(std::size_t i) const { return (*successes_)[i]; }
    bool success_at(std::uint64_t step) const {
        return !successes_->empty() && successes_->back().step == step;
    }

private:
    const std::vector<SuccessRecord>* successes_;
    std::uint64_t now_;
};

// n players in one lump at `at_step` (0 means before the first slot).
struct BurstPolicy {
    std::uint64_t n = 0;
    std::uint64_t at_step = 0;
};

// n players spread evenly over the first `over_steps` slots.
struct SpreadPolicy {
    std::uint64_t n = 0;
    std::uint64_t over_steps = 1;
};

// An initial burst, then a clump of arrivals released immediately after each
// observed success, until the budget n is spent. With no successes to react
// to this is just a burst.
struct AdaptiveReactivePolicy {
    std::uint64_t n = 0;
    double burst_fraction = 0.5;
    std::uint32_t clump = 1;
};

// Poisson(rate) arrivals per slot, up to `until` (0 = whole run). Rate-driven,
// so the total is not fixed.
struct PoissonPolicy {
    double rate = 0.0;
    std::uint64_t until = 0;
};

// The two-stage jamming construction: arrivals from second_stage_arrivals and
// a jam schedule from jam_schedule, both of scale n with resilience constant c.
struct JammingLowerBoundPolicy {
    std::uint64_t n = 0;
    std::uint32_t c = 4;
};

using AdversaryPolicy = std::variant<BurstPolicy, SpreadPolicy, AdaptiveReactivePolicy,
                                     PoissonPolicy, JammingLowerBoundPolicy>;

// Jammed steps: the prefix {1, ..., ceil(n/2c)} plus ceil(n/2c) steps drawn
// uniformly (with replacement) from [1, n], collapsed to a set. Never more
// than n/c jammed steps in total.
inline std::vector<std::uint64_t> jam_schedule(std::uint64_t n, std::uint32_t c, Stream& rng) {
    if (c < 1) throw std::invalid_argument("jam_schedule requires c >= 1");
    if (n < 2ull * c) throw std::invalid_argument("jam_schedule requires n >= 2c");
    const std::uint64_t half = (n + 2ull * c - 1) / (2ull * c); // ceil(n / 2c)
    std::vector<std::uint64_t> steps;
    steps.reserve(2 * half);
    for (std::uint64_t s = 1; s <= half; ++s) steps.push_back(s);
    for (std::uint64_t i = 0; i < half; ++i) steps.push_back(1 + rng.below(n));
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    return steps;
}

// Arrival steps for the second stage: one player before step one, plus
// n/c - 1 players at independent uniform steps in [1, n]. Sorted, duplicates
// kept (several players may share a step).
inline std::vector<std::uint64_t> second_stage_arrivals(std::uint64_t n, std::uint32_t c,
                                                        Stream& rng) {
    if (c < 1 || n < c) throw std::invalid_argument("second_stage_arrivals requires n >= c");
    const std::uint64_t count = n / c;
    std::vector<std::uint64_t> steps;
    steps.reserve(count);
    steps.push_back(1);
    for (std::uint64_t i = 1; i < count; ++i) steps.push_back(1 + rng.below(n));
    std::sort(steps.begin(), steps.end());
    return steps;
}

// Engine-side driver for a policy. next_arrivals must be called exactly once
// per slot, in slot order; each call sees only history strictly before that
// slot plus the adversary's own stream.
class Adversary {
public:
    Adversary(const AdversaryPolicy& policy, Stream stream, std::uint64_t horizon)
        : policy_(policy), stream_(stream), horizon_(horizon) {
        if (const auto* jam = std::get_if<JammingLowerBoundPolicy>(&policy_)) {
            arrivals_ = second_stage_arrivals(jam->n, jam->c, stream_);
        }
    }

    std::uint32_t next_arrivals(const VisibleHistory& history) {
        const std::uint64_t slot = next_slot_++;
        if (history.now() != slot) {
            throw std::logic_error("adversary called out of slot order");
        }
        std::uint64_t count = 0;
        if (const auto* burst = std::get_if<BurstPolicy>(&policy_)) {
            if (slot == std::max<std::uint64_t>(burst->at_step, 1)) count = burst->n;
        } else if (const auto* spread = std::get_if<SpreadPolicy>(&policy_)) {
            if (slot <= spread->over_steps) {
                count = spread->n * slot / spread->over_steps -
                        spread->n * (slot - 1) / spread->over_steps;
            }
        } else if (const auto* adaptive = std::get_if<AdaptiveReactivePolicy>(&policy_)) {
            if (slot == 1) {
                count = std::min<std::uint64_t>(
                    adaptive->n,
                    static_cast<std::uint64_t>(std::ceil(adaptive->burst_fraction *
                                                         static_cast<double>(adaptive->n))));
            } else if (history.success_at(slot - 1)) {
                count = std::min<std::uint64_t>(adaptive->clump, adaptive->n - emitted_);
            }
        } else if (const auto* poisson = std::get_if<PoissonPolicy>(&policy_)) {
            const std::uint64_t until = poisson->until == 0 ? horizon_ : poisson->until;
            if (slot <= until) count = poisson_sample(poisson->rate, stream_.uniform01_at(slot));
        } else if (std::holds_alternative<JammingLowerBoundPolicy>(policy_)) {
            while (arrival_cursor_ < arrivals_.size() && arrivals_[arrival_cursor_] == slot) {
                ++count;
                ++arrival_cursor_;
            }
        }
        emitted_ += count;
        return static_cast<std::uint32_t>(count);
    }

    std::uint64_t emitted() const { return emitted_; }
    const AdversaryPolicy& policy() const { return policy_; }

private:
    // Poisson by CDF inversion from a single uniform: deterministic and
    // platform-independent.
    static std::uint64_t poisson_sample(double rate, double u) {
        if (rate <= 0.0) return 0;
        double p = std::exp(-rate);
        double cdf = p;
        std::uint64_t k = 0;
        while (u > cdf && k < 1024) {
            ++k;
            p *= rate / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    AdversaryPolicy policy_;
    Stream stream_;
    std::uint64_t horizon_;
    std::uint64_t next_slot_ = 1;
    std::uint64_t emitted_ = 0;
    std::vector<std::uint64_t> arrivals_;
    std::size_t arrival_cursor_ = 0;
};

} // namespace channelwave

#endif // CHANNELWAVE_ADVERSARY_HPP
