#ifndef CHANNELWAVE_PROTOCOLS_HPP
#define CHANNELWAVE_PROTOCOLS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "channelwave/channel.hpp"
#include "channelwave/rng.hpp"

// Player-side behavior: c-backoff, the batch protocol, probabilistic jamming,
// the composed three-phase protocol, and the exponential/polynomial backoff
// baselines. All state is value-semantic; the engine owns it single-threaded
// within a run.

namespace channelwave {

// ---------------------------------------------------------------------------
// c-backoff
//
// A player starting at channel-local slot `local_start` picks, for every epoch
// l >= 1, c distinct slots uniformly from (local_start + c^l, local_start +
// c^(l+1)] and broadcasts exactly on those. Drawing without replacement keeps
// the per-slot marginal at exactly c / |range|, which is what
// backoff_probability returns and what the statistical tests pin down.
// ---------------------------------------------------------------------------

struct BackoffState {
    std::uint32_t c = 4;
    std::uint64_t local_start = 0;
    std::uint32_t next_epoch = 1;        // first epoch not yet materialized
    std::vector<std::uint64_t> schedule; // materialized broadcast slots, sorted
    std::size_t cursor = 0;              // first schedule entry not yet passed
    std::uint64_t last_query = 0;
};

inline BackoffState make_backoff(std::uint32_t c, std::uint64_t local_start) {
    if (c < 2) throw std::invalid_argument("c-backoff requires c >= 2");
    BackoffState s;
    s.c = c;
    s.local_start = local_start;
    return s;
}

namespace detail {

// c^e, saturating so epoch-range arithmetic cannot overflow.
inline std::uint64_t pow_sat(std::uint64_t c, std::uint32_t e) {
    std::uint64_t r = 1;
    const std::uint64_t cap = std::uint64_t(1) << 62;
    for (std::uint32_t i = 0; i < e; ++i) {
        if (r > cap / c) return cap;
        r *= c;
    }
    return r;
}

// Floyd's sampling of k distinct values from [0, size), then sorted.
inline void sample_distinct(std::uint64_t size, std::uint32_t k, Stream& rng,
                            std::vector<std::uint64_t>& out) {
    out.clear();
    for (std::uint64_t j = size - k; j < size; ++j) {
        std::uint64_t t = rng.below(j + 1);
        if (std::find(out.begin(), out.end(), t) != out.end()) {
            out.push_back(j);
        } else {
            out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end());
}

// Materializes backoff epochs, in order, until epoch `upto` is drawn. Epochs
// are always drawn in sequence so the stream consumption is independent of
// the query pattern.
inline void backoff_ensure_epoch(BackoffState& s, std::uint32_t upto, Stream& rng) {
    static thread_local std::vector<std::uint64_t> scratch;
    while (s.next_epoch <= upto) {
        const std::uint64_t lo = pow_sat(s.c, s.next_epoch);
        const std::uint64_t hi = pow_sat(s.c, s.next_epoch + 1);
        if (hi <= lo) { s.next_epoch = upto + 1; return; } // saturated; out of range
        sample_distinct(hi - lo, s.c, rng, scratch);
        for (std::uint64_t off : scratch) {
            s.schedule.push_back(s.local_start + lo + 1 + off);
        }
        ++s.next_epoch;
    }
}

// Epoch containing offset tau (tau > c): the l >= 1 with c^l < tau <= c^(l+1).
inline std::uint32_t backoff_epoch_of(std::uint32_t c, std::uint64_t tau) {
    std::uint32_t l = 1;
    while (pow_sat(c, l + 1) < tau) ++l;
    return l;
}

} // namespace detail

// True iff the player's schedule broadcasts at `local_slot`. Queries must not
// move backwards (that would be an engine bug); repeating the same slot is
// allowed and idempotent.
inline bool backoff_decide(BackoffState& s, std::uint64_t local_slot, Stream& rng) {
    if (local_slot < s.last_query) {
        throw std::logic_error("backoff_decide: local slot moved backwards");
    }
    s.last_query = local_slot;
    if (local_slot <= s.local_start + s.c) return false; // before epoch 1's range
    const std::uint64_t tau = local_slot - s.local_start;
    detail::backoff_ensure_epoch(s, detail::backoff_epoch_of(s.c, tau), rng);
    while (s.cursor < s.schedule.size() && s.schedule[s.cursor] < local_slot) ++s.cursor;
    return s.cursor < s.schedule.size() && s.schedule[s.cursor] == local_slot;
}

// Exact marginal probability that a fresh c-backoff broadcasts at offset tau:
// 1 / (c^(k-1) - c^(k-2)) with k = ceil(log_c tau); zero at or before offset c.
inline double backoff_probability(std::uint32_t c, std::uint64_t tau) {
    if (tau <= c) return 0.0;
    const std::uint32_t l = detail::backoff_epoch_of(c, tau);
    const double range = static_cast<double>(detail::pow_sat(c, l + 1) - detail::pow_sat(c, l));
    return static_cast<double>(c) / range;
}

// Next scheduled broadcast strictly after `local_slot`, or nullopt if none
// exists at or below `local_limit`. This is the engine's event source; it
// draws epochs in the same order backoff_decide would.
inline std::optional<std::uint64_t> backoff_next_broadcast(BackoffState& s,
                                                           std::uint64_t local_slot,
                                                           std::uint64_t local_limit,
                                                           Stream& rng) {
    while (true) {
        while (s.cursor < s.schedule.size() && s.schedule[s.cursor] <= local_slot) ++s.cursor;
        if (s.cursor < s.schedule.size()) {
            const std::uint64_t slot = s.schedule[s.cursor];
            if (slot > local_limit) return std::nullopt;
            return slot;
        }
        // Need another epoch. If its range begins past the limit, give up.
        const std::uint64_t lo = detail::pow_sat(s.c, s.next_epoch);
        if (s.local_start + lo + 1 > local_limit || lo >= (std::uint64_t(1) << 62)) {
            return std::nullopt;
        }
        detail::backoff_ensure_epoch(s, s.next_epoch, rng);
    }
}

// ---------------------------------------------------------------------------
// Batch protocol: at its i-th channel step, broadcast with probability 1/i.
// ---------------------------------------------------------------------------

struct BatchState {
    std::uint64_t i = 1; // step index within the batch, >= 1
    ChannelId channel = ChannelId::A;
};

inline double batch_probability(std::uint64_t i) { return 1.0 / static_cast<double>(i); }

inline bool batch_decide(const BatchState& s, Stream& rng) {
    if (s.i < 1) throw std::invalid_argument("batch step index must be >= 1");
    return s.i == 1 || rng.bernoulli(batch_probability(s.i));
}

// Next broadcasting step strictly after i, sampled exactly: the survival
// probability of the thinned process is P[next > b] = i/b.
inline std::uint64_t batch_next_broadcast(std::uint64_t i, Stream& rng) {
    const double v = rng.uniform01_open_closed();
    const double a = static_cast<double>(i);
    std::uint64_t b = static_cast<std::uint64_t>(std::ceil(a / v));
    if (b <= i) b = i + 1;
    while (static_cast<double>(b) * v < a) ++b;                       // ensure i/b <= v
    while (b > i + 1 && static_cast<double>(b - 1) * v >= a) --b;     // smallest such b
    return b;
}

// ---------------------------------------------------------------------------
// c2-jamming protocol: at its i-th channel step, broadcast with probability
// min(1, c2 * (1 + ln i) / i). The literal c2 * log(1)/1 would leave the
// first step open; the 1 + ln i form keeps the Theta((log i)/i) decay while
// jamming the early steps with probability one.
// ---------------------------------------------------------------------------

struct JamState {
    std::uint64_t i = 1;
    std::uint32_t c2 = 4;
    ChannelId channel = ChannelId::B;
};

inline double jam_probability(std::uint32_t c2, std::uint64_t i) {
    if (i < 1) throw std::invalid_argument("jam step index must be >= 1");
    const double x = static_cast<double>(i);
    return std::min(1.0, c2 * (1.0 + std::log(x)) / x);
}

inline bool jam_decide(const JamState& s, Stream& rng) {
    if (s.c2 < 1) throw std::invalid_argument("jamming requires c2 >= 1");
    const double p = jam_probability(s.c2, s.i);
    return p >= 1.0 || rng.bernoulli(p);
}

// Cumulative-hazard table for the jamming sequence, shared within a run. For
// i <= sure_until() the probability is exactly 1; beyond that, next-broadcast
// steps are sampled by racing an Exp(1) variate against the cumulative
// hazard sum -ln(1 - q_i), which reproduces the per-step Bernoulli process
// exactly.
class JamSampler {
public:
    explicit JamSampler(std::uint32_t c2) : c2_(c2) {
        if (c2 < 1) throw std::invalid_argument("jamming requires c2 >= 1");
        std::uint64_t i = 1;
        while (jam_probability(c2_, i) >= 1.0) ++i;
        sure_until_ = i - 1;
        hazard_.push_back(0.0); // hazard_[k] = sum over steps (sure_until, sure_until + k]
    }

    std::uint64_t sure_until() const { return sure_until_; }

    std::uint64_t next_broadcast(std::uint64_t i, Stream& rng) {
        if (i < sure_until_) return i + 1;
        const double target = hazard_at(i) + rng.exponential();
        // Galloping search for the first index with cumulative hazard >= target.
        std::uint64_t lo = i + 1, hi = std::max<std::uint64_t>(i * 2, i + 2);
        while (hazard_at(hi) < target) {
            lo = hi + 1;
            hi *= 2;
            if (hi > (std::uint64_t(1) << 40)) return hi; // effectively never
        }
        while (lo < hi) {
            const std::uint64_t mid = lo + (hi - lo) / 2;
            if (hazard_at(mid) < target) lo = mid + 1; else hi = mid;
        }
        return lo;
    }

private:
    double hazard_at(std::uint64_t i) {
        if (i <= sure_until_) return 0.0;
        const std::uint64_t k = i - sure_until_;
        while (hazard_.size() <= k) {
            const std::uint64_t step = sure_until_ + hazard_.size();
            hazard_.push_back(hazard_.back() - std::log1p(-jam_probability(c2_, step)));
        }
        return hazard_[k];
    }

    std::uint32_t c2_;
    std::uint64_t sure_until_;
    std::vector<double> hazard_;
};

// ---------------------------------------------------------------------------
// Baselines.
//
// Exponential backoff in mean-field form: a player of age t broadcasts with
// probability min(1, 2/t), independently across slots. Polynomial backoff
// uses min(1, t^-gamma).
// ---------------------------------------------------------------------------

inline double exp_backoff_probability(std::uint64_t age) {
    if (age < 1) throw std::invalid_argument("age must be >= 1");
    return std::min(1.0, 2.0 / static_cast<double>(age));
}

inline bool exp_backoff_decide(std::uint64_t age, Stream& rng) {
    const double p = exp_backoff_probability(age);
    return p >= 1.0 || rng.bernoulli(p);
}

inline double poly_backoff_probability(std::uint64_t age, double gamma) {
    if (age < 1) throw std::invalid_argument("age must be >= 1");
    if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
    return std::min(1.0, std::pow(static_cast<double>(age), -gamma));
}

inline bool poly_backoff_decide(std::uint64_t age, double gamma, Stream& rng) {
    const double p = poly_backoff_probability(age, gamma);
    return p >= 1.0 || rng.bernoulli(p);
}

// Next broadcasting age strictly after `age` for the exponential baseline.
// Ages 1 and 2 broadcast surely; beyond, the survival product telescopes to
// P[next > b] = (a-1)a / ((b-1)b), which inverts in closed form.
inline std::uint64_t exp_next_broadcast(std::uint64_t age, Stream& rng) {
    if (age < 2) return age + 1;
    const double v = rng.uniform01_open_closed();
    const double a = static_cast<double>(age - 1) * static_cast<double>(age);
    std::uint64_t b = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 4.0 * a / v)) / 2.0);
    if (b <= age) b = age + 1;
    auto surv_ok = [&](std::uint64_t x) {
        return static_cast<double>(x - 1) * static_cast<double>(x) * v >= a;
    };
    while (!surv_ok(b)) ++b;
    while (b > age + 1 && surv_ok(b - 1)) --b;
    return b;
}

// Hazard-table sampler for the polynomial baseline (no closed form).
class PolySampler {
public:
    explicit PolySampler(double gamma) : gamma_(gamma) {
        if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
        hazard_.push_back(0.0); // hazard_[k] = sum over ages (1, 1 + k]
    }

    // Ages >= 2 only; age 1 broadcasts surely and is handled by the caller.
    std::uint64_t next_broadcast(std::uint64_t age, Stream& rng) {
        if (age < 1) throw std::invalid_argument("age must be >= 1");
        const double target = hazard_at(age) + rng.exponential();
        std::uint64_t lo = age + 1, hi = std::max<std::uint64_t>(age * 2, age + 2);
        while (hazard_at(hi) < target) {
            lo = hi + 1;
            hi *= 2;
            if (hi > (std::uint64_t(1) << 40)) return hi;
        }
        while (lo < hi) {
            const std::uint64_t mid = lo + (hi - lo) / 2;
            if (hazard_at(mid) < target) lo = mid + 1; else hi = mid;
        }
        return lo;
    }

private:
    double hazard_at(std::uint64_t age) {
        if (age <= 1) return 0.0;
        const std::uint64_t k = age - 1;
        while (hazard_.size() <= k) {
            const std::uint64_t a = 1 + hazard_.size();
            hazard_.push_back(hazard_.back() - std::log1p(-poly_backoff_probability(a, gamma_)));
        }
        return hazard_[k];
    }

    double gamma_;
    std::vector<double> hazard_;
};

// ---------------------------------------------------------------------------
// The three-phase player.
// ---------------------------------------------------------------------------

enum class Phase : std::uint8_t { ChannelChoosing = 0, BatchSync = 1, BatchExec = 2, Done = 3 };

constexpr const char* phase_name(Phase p) {
    switch (p) {
        case Phase::ChannelChoosing: return "channel_choosing";
        case Phase::BatchSync: return "batch_sync";
        case Phase::BatchExec: return "batch_exec";
        case Phase::Done: return "done";
    }
    return "?";
}

struct PlayerState {
    PlayerId id{};
    Phase phase = Phase::ChannelChoosing;
    ChannelId phase_channel = ChannelId::A; // phase 1: chosen; phase 2: sync channel
    BackoffState backoff{};                 // phases 1-2
    BatchState batch{};                     // phase 3 (jam runs on other(batch.channel))
    JamState jam{};                         // phase 3
    std::uint64_t attempts = 0;
    std::uint64_t local_clock[2] = {0, 0};  // per-channel slots since arrival

    std::uint64_t& clock(ChannelId ch) { return local_clock[static_cast<int>(ch)]; }
    std::uint64_t clock(ChannelId ch) const { return local_clock[static_cast<int>(ch)]; }
};

inline PlayerState make_player(PlayerId id, ChannelId chosen, std::uint32_t c, std::uint32_t c2) {
    PlayerState p;
    p.id = id;
    p.phase = Phase::ChannelChoosing;
    p.phase_channel = chosen;
    p.backoff = make_backoff(c, 0);
    p.jam.c2 = c2;
    return p;
}

namespace detail {

inline void apply_observation(PlayerState& p, const PlayerObservation& obs,
                              std::uint32_t c, std::uint32_t c2) {
    if (p.phase == Phase::Done) return;
    if (obs.kind == ObsKind::MySuccess) {
        p.phase = Phase::Done;
        return;
    }
    if (obs.kind != ObsKind::OtherSuccess) return;
    const ChannelId alpha = obs.channel;
    switch (p.phase) {
        case Phase::ChannelChoosing:
            // Switch to the channel on which the success did not occur and
            // queue there with a fresh backoff.
            p.phase = Phase::BatchSync;
            p.phase_channel = other(alpha);
            p.backoff = make_backoff(c, p.clock(p.phase_channel));
            break;
        case Phase::BatchSync:
            if (alpha == p.phase_channel) {
                p.phase = Phase::BatchExec;
                p.batch = BatchState{1, alpha};
                p.jam = JamState{1, c2, other(alpha)};
            }
            break;
        case Phase::BatchExec:
            if (alpha == p.jam.channel) {
                // Jamming failed: the batch restarts on the formerly silent
                // channel, both step counters back to one.
                p.batch = BatchState{1, alpha};
                p.jam = JamState{1, c2, other(alpha)};
            }
            break;
        case Phase::Done:
            break;
    }
}

} // namespace detail

// One slot of the three-phase protocol: apply the newly delivered
// observations in order, then decide whether to broadcast on the current
// slot's channel. The engine delivers each slot's observation exactly once,
// before the next slot, and never for slots the player predates.
inline bool step_player(PlayerState& p, std::span<const PlayerObservation> delta,
                        ChannelId slot_channel, Stream& rng,
                        std::uint32_t c, std::uint32_t c2) {
    for (const PlayerObservation& obs : delta) {
        detail::apply_observation(p, obs, c, c2);
    }
    if (p.phase == Phase::Done) return false;

    p.clock(slot_channel) += 1;
    bool broadcast = false;
    switch (p.phase) {
        case Phase::ChannelChoosing:
        case Phase::BatchSync:
            if (slot_channel == p.phase_channel) {
                broadcast = backoff_decide(p.backoff, p.clock(slot_channel), rng);
            }
            break;
        case Phase::BatchExec:
            if (slot_channel == p.batch.channel) {
                broadcast = batch_decide(p.batch, rng);
                p.batch.i += 1;
            } else {
                broadcast = jam_decide(p.jam, rng);
                p.jam.i += 1;
            }
            break;
        case Phase::Done:
            break;
    }
    if (broadcast) p.attempts += 1;
    return broadcast;
}

// ---------------------------------------------------------------------------
// Balanced-execution checker (population size m_s and per-player broadcast
// probability q_s per step, indexed from s = 0). Thresholds use log base 2.
// ---------------------------------------------------------------------------

struct BalancePoint {
    std::uint64_t players = 0; // m_s
    double prob = 0.0;         // q_s
};

struct BalanceReport {
    bool monotone_size = true;
    bool monotone_prob = true;
    bool lower_ok = true; // for s > tau: m_s q_s <= log2(tau) / d
    bool upper_ok = true; // for s <= d^6 tau: m_s q_s >= d log2(tau) / tau
    bool all() const { return monotone_size && monotone_prob && lower_ok && upper_ok; }
};

inline BalanceReport check_balanced(std::span<const BalancePoint> trace,
                                    std::uint64_t d, std::uint64_t tau) {
    if (d <= 1) throw std::invalid_argument("balance requires d > 1");
    if (tau < 1) throw std::invalid_argument("balance requires tau >= 1");
    BalanceReport rep;
    if (trace.empty()) return rep; // vacuously balanced

    const double log_tau = std::log2(static_cast<double>(tau));
    const double lower_threshold = log_tau / static_cast<double>(d);
    const double upper_threshold = static_cast<double>(d) * log_tau / static_cast<double>(tau);
    const double d6tau = std::pow(static_cast<double>(d), 6.0) * static_cast<double>(tau);

    for (std::size_t s = 0; s < trace.size(); ++s) {
        const auto& pt = trace[s];
        if (s > 0) {
            if (pt.players > trace[s - 1].players) rep.monotone_size = false;
            if (pt.prob > trace[s - 1].prob) rep.monotone_prob = false;
        }
        const double mq = static_cast<double>(pt.players) * pt.prob;
        if (static_cast<double>(s) > static_cast<double>(tau) && mq > lower_threshold) {
            rep.lower_ok = false;
        }
        if (static_cast<double>(s) <= d6tau && mq < upper_threshold) {
            rep.upper_ok = false;
        }
    }
    return rep;
}

} // namespace channelwave

#endif // CHANNELWAVE_PROTOCOLS_HPP
