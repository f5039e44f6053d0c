#ifndef CHANNELWAVE_ENGINE_HPP
#define CHANNELWAVE_ENGINE_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "channelwave/adversary.hpp"
#include "channelwave/channel.hpp"
#include "channelwave/protocols.hpp"
#include "channelwave/rng.hpp"
#include "channelwave/trace.hpp"

// The deterministic slot-by-slot simulation loop. Broadcast decisions are
// materialized as scheduled events: each player samples the next slot on
// which it will transmit by exact inversion of the per-slot Bernoulli
// survival probabilities, so a slot costs work proportional to the events
// due, not to the population. Identical config gives a bit-identical trace.

namespace channelwave {

enum class Protocol : std::uint8_t { Main = 0, ExpBackoff = 1, PolyBackoff = 2 };

constexpr const char* protocol_name(Protocol p) {
    switch (p) {
        case Protocol::Main: return "main";
        case Protocol::ExpBackoff: return "exp";
        case Protocol::PolyBackoff: return "poly";
    }
    return "?";
}

enum class Phase1Choice : std::uint8_t { FairCoin = 0, AlwaysA = 1 };

struct JamSpec {
    std::uint64_t n = 0;
    std::uint32_t c = 4;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    Protocol protocol = Protocol::Main;
    double poly_gamma = 0.5;
    std::uint32_t c = 4;
    std::uint32_t c1 = 16;
    std::uint32_t c2 = 4;
    AdversaryPolicy adversary = BurstPolicy{16, 0};
    std::optional<JamSpec> jamming; // explicit jam schedule, or implied by the policy
    std::uint64_t horizon = 4096;
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> checkpoints;
    Phase1Choice phase1 = Phase1Choice::FairCoin;
    std::uint32_t synthetic_batch = 0; // players starting directly in batch execution
    bool record_broadcasters = false;

    // Jam schedule in effect: an explicit spec wins; the jamming lower-bound
    // arrival policy carries its own schedule.
    std::optional<JamSpec> effective_jamming() const {
        if (jamming) return jamming;
        if (const auto* j = std::get_if<JammingLowerBoundPolicy>(&adversary)) {
            return JamSpec{j->n, j->c};
        }
        return std::nullopt;
    }

    void validate() const {
        if (c < 2) throw ConfigError("c must be >= 2");
        if (c1 < 1) throw ConfigError("c1 must be >= 1");
        if (c2 < 1) throw ConfigError("c2 must be >= 1");
        if (protocol == Protocol::PolyBackoff && poly_gamma <= 0.0) {
            throw ConfigError("poly exponent must be positive");
        }
        for (std::size_t i = 0; i < checkpoints.size(); ++i) {
            if (checkpoints[i] < 1 || checkpoints[i] > horizon) {
                throw ConfigError("checkpoints must lie in [1, horizon]");
            }
            if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
                throw ConfigError("checkpoints must be strictly ascending");
            }
        }
        if (synthetic_batch > 0 && protocol != Protocol::Main) {
            throw ConfigError("synthetic batch start requires the main protocol");
        }
        if (const auto* spread = std::get_if<SpreadPolicy>(&adversary)) {
            if (spread->over_steps < 1) throw ConfigError("spread requires over_steps >= 1");
        }
        if (const auto* adaptive = std::get_if<AdaptiveReactivePolicy>(&adversary)) {
            if (adaptive->burst_fraction < 0.0 || adaptive->burst_fraction > 1.0) {
                throw ConfigError("adaptive burst fraction must lie in [0, 1]");
            }
        }
        if (const auto* poisson = std::get_if<PoissonPolicy>(&adversary)) {
            if (poisson->rate < 0.0 || poisson->rate > 64.0) {
                throw ConfigError("poisson rate must lie in [0, 64]");
            }
        }
        if (const auto* jl = std::get_if<JammingLowerBoundPolicy>(&adversary)) {
            if (jl->c < 1 || jl->n < 2ull * jl->c) {
                throw ConfigError("jamming lower bound requires n >= 2c");
            }
        }
        if (jamming && (jamming->c < 1 || jamming->n < 2ull * jamming->c)) {
            throw ConfigError("jam schedule requires n >= 2c");
        }
    }
};

namespace engine_detail {

enum class Role : std::uint8_t { Backoff = 0, Batch = 1, Jam = 2, Baseline = 3 };

struct Event {
    std::uint64_t step;
    std::uint32_t player;
    std::uint32_t gen;
    Role role;
};

struct EventLater {
    bool operator()(const Event& a, const Event& b) const { return a.step > b.step; }
};

// First slot of channel `ch` strictly after `step`.
inline std::uint64_t first_channel_slot_after(std::uint64_t step, ChannelId ch) {
    return channel_of_step(step + 1) == ch ? step + 1 : step + 2;
}

struct EnginePlayer {
    std::uint64_t arrival_step = 0;
    std::uint32_t gen = 0;
    Phase phase = Phase::ChannelChoosing;
    ChannelId pchan = ChannelId::A; // phase 1: chosen; phase 2: sync; phase 3: batch channel
    BackoffState backoff{};
    Stream stream{};
    std::uint32_t set_pos = 0;
    std::uint64_t attempts = 0;
    std::uint64_t success_step = 0;

    // Channel-local clock value at global step g (slots of `ch` since arrival).
    std::uint64_t local_clock_at(ChannelId ch, std::uint64_t g) const {
        const std::uint64_t anchor = first_channel_slot_after(arrival_step, ch);
        if (g < anchor) return 0;
        const std::uint64_t last = channel_of_step(g) == ch ? g : g - 1;
        if (last < anchor) return 0;
        return (last - anchor) / 2 + 1;
    }

    std::uint64_t global_of_local(ChannelId ch, std::uint64_t local) const {
        const std::uint64_t anchor = first_channel_slot_after(arrival_step, ch);
        return anchor + 2 * (local - 1);
    }
};

class Engine {
public:
    explicit Engine(const SimConfig& cfg)
        : cfg_(cfg),
          plan_{cfg.seed},
          adversary_(cfg.adversary, Stream(plan_, StreamKind::Adversary, 0), cfg.horizon),
          jam_sampler_(cfg.c2),
          poly_sampler_(cfg.poly_gamma > 0 ? cfg.poly_gamma : 0.5) {
        cfg_.validate();
        if (auto jam = cfg_.effective_jamming()) {
            Stream jam_stream(plan_, StreamKind::Adversary, 1);
            jam_steps_ = jam_schedule(jam->n, jam->c, jam_stream);
        }
        trace_.horizon = cfg_.horizon;
        trace_.seed = cfg_.seed;
        trace_.rows.reserve(cfg_.horizon);
        trace_.detailed = cfg_.record_broadcasters;
        if (trace_.detailed) trace_.broadcaster_offsets.push_back(0);
    }

    SimTrace run() {
        if (cfg_.synthetic_batch > 0) seed_synthetic_batch();
        for (std::uint64_t g = 1; g <= cfg_.horizon; ++g) step(g);
        finish();
        return std::move(trace_);
    }

private:
    void step(std::uint64_t g) {
        const std::uint32_t pop_before = static_cast<std::uint32_t>(population_);

        // (1) arrivals for this slot, decided from history strictly before it
        VisibleHistory history(trace_.successes, g);
        const std::uint32_t arrivals = adversary_.next_arrivals(history);
        for (std::uint32_t k = 0; k < arrivals; ++k) spawn_player(g);
        population_ += arrivals;
        if (episode_active_) current_episode_.arrivals += arrivals;

        // (2) jam flag
        while (jam_cursor_ < jam_steps_.size() && jam_steps_[jam_cursor_] < g) ++jam_cursor_;
        const bool jammed = jam_cursor_ < jam_steps_.size() && jam_steps_[jam_cursor_] == g;

        // (3) collect the broadcasters whose scheduled events are due
        fired_.clear();
        broadcasters_.clear();
        while (!queue_.empty() && queue_.top().step == g) {
            const Event ev = queue_.top();
            queue_.pop();
            if (ev.gen != players_[ev.player].gen) continue; // cancelled by a transition
            players_[ev.player].attempts += 1;
            broadcasters_.push_back(PlayerId{ev.player});
            fired_.push_back(ev);
        }

        // (4) resolve and record
        const SlotOutcome outcome = resolve_slot(broadcasters_, jammed, g);
        TraceRow row;
        row.kind = outcome.kind;
        row.winner = outcome.kind == SlotKind::Success ? outcome.winner.value : PlayerId::kNone;
        row.arrivals = arrivals;
        row.population_before = pop_before;
        row.broadcasters = static_cast<std::uint32_t>(broadcasters_.size());
        trace_.rows.push_back(row);
        if (trace_.detailed) {
            for (PlayerId p : broadcasters_) trace_.broadcaster_ids.push_back(p.value);
            trace_.broadcaster_offsets.push_back(trace_.broadcaster_ids.size());
        }

        // (5) observations and transitions; only successes change anything
        if (outcome.kind == SlotKind::Success) handle_success(g, outcome);

        // (6) reschedule the events that fired and were not invalidated
        for (const Event& ev : fired_) {
            if (ev.gen == players_[ev.player].gen) reschedule(ev, g);
        }
    }

    void spawn_player(std::uint64_t g) {
        const std::uint32_t id = static_cast<std::uint32_t>(players_.size());
        EnginePlayer p;
        p.arrival_step = g;
        p.stream = Stream(plan_, StreamKind::Player, id);
        if (cfg_.protocol == Protocol::Main) {
            p.phase = Phase::ChannelChoosing;
            p.pchan = cfg_.phase1 == Phase1Choice::AlwaysA
                          ? ChannelId::A
                          : (p.stream.next_u64() & 1 ? ChannelId::B : ChannelId::A);
            p.backoff = make_backoff(cfg_.c, 0);
            players_.push_back(std::move(p));
            add_to_set(set_phase1_, id);
            schedule_backoff(id, g);
        } else {
            players_.push_back(std::move(p));
            // Baselines broadcast with probability one at age 1.
            push_event(g + 1, id, Role::Baseline);
        }
    }

    void seed_synthetic_batch() {
        const std::uint32_t count = cfg_.synthetic_batch;
        for (std::uint32_t k = 0; k < count; ++k) {
            const std::uint32_t id = static_cast<std::uint32_t>(players_.size());
            EnginePlayer p;
            p.arrival_step = 0;
            p.stream = Stream(plan_, StreamKind::Player, id);
            p.phase = Phase::BatchExec;
            p.pchan = ChannelId::A;
            players_.push_back(std::move(p));
            add_to_set(cohort_, id);
        }
        population_ = count;
        cohort_channel_ = ChannelId::A;
        cohort_trigger_ = 0;
        begin_episode(0, ChannelId::A, count);
        for (std::uint32_t id : cohort_) {
            push_event(first_channel_slot_after(0, ChannelId::A), id, Role::Batch);
            push_event(first_channel_slot_after(0, ChannelId::B), id, Role::Jam);
        }
    }

    void handle_success(std::uint64_t g, const SlotOutcome& outcome) {
        const ChannelId x = outcome.channel;
        const std::uint32_t w = outcome.winner.value;
        trace_.successes.push_back({g, x, w});
        if (episode_active_) current_episode_.successes += 1;

        const bool flip = episode_active_ && x == other(cohort_channel_);
        if (flip) end_episode(g, EpisodeEnd::OppositeSuccess);

        // The winner leaves the system at the end of its success slot.
        if (cfg_.protocol == Protocol::Main) remove_from_current_set(w);
        players_[w].phase = Phase::Done;
        players_[w].gen += 1;
        players_[w].success_step = g;
        population_ -= 1;
        log_transition(g, w, Phase::Done, x);

        if (cfg_.protocol == Protocol::Main) {
            // Every channel-choosing player treats x as the batch channel and
            // queues on the other one with a fresh backoff.
            for (std::uint32_t id : set_phase1_) {
                EnginePlayer& p = players_[id];
                p.gen += 1;
                p.phase = Phase::BatchSync;
                p.pchan = other(x);
                p.backoff = make_backoff(cfg_.c, p.local_clock_at(other(x), g));
                log_transition(g, id, Phase::BatchSync, other(x));
            }
            std::vector<std::uint32_t> moved;
            moved.swap(set_phase1_);
            for (std::uint32_t id : moved) add_to_set(phase2_set(other(x)), id);
            for (std::uint32_t id : moved) schedule_backoff(id, g);

            // A success on x releases the phase-2 queue on x into batch
            // execution; a flipping cohort joins them on the same channel.
            std::vector<std::uint32_t> recruits;
            recruits.swap(phase2_set(x));
            if (flip) {
                for (std::uint32_t id : cohort_) recruits.push_back(id);
                cohort_.clear();
            }
            if (!recruits.empty()) {
                for (std::uint32_t id : recruits) {
                    EnginePlayer& p = players_[id];
                    p.gen += 1;
                    p.phase = Phase::BatchExec;
                    p.pchan = x;
                    log_transition(g, id, Phase::BatchExec, x);
                }
                cohort_ = std::move(recruits);
                for (std::size_t i = 0; i < cohort_.size(); ++i) {
                    players_[cohort_[i]].set_pos = static_cast<std::uint32_t>(i);
                }
                cohort_channel_ = x;
                cohort_trigger_ = g;
                begin_episode(g, x, static_cast<std::uint32_t>(cohort_.size()));
                const std::uint64_t batch_first = first_channel_slot_after(g, x);
                const std::uint64_t jam_first = first_channel_slot_after(g, other(x));
                for (std::uint32_t id : cohort_) {
                    push_event(batch_first, id, Role::Batch);
                    push_event(jam_first, id, Role::Jam);
                }
            }
        }

        if (population_ == 0 && episode_active_) end_episode(g, EpisodeEnd::SystemEmpty);
    }

    void reschedule(const Event& ev, std::uint64_t g) {
        EnginePlayer& p = players_[ev.player];
        switch (ev.role) {
            case Role::Backoff: {
                schedule_backoff(ev.player, g);
                break;
            }
            case Role::Batch: {
                const std::uint64_t first = first_channel_slot_after(cohort_trigger_, p.pchan);
                const std::uint64_t i = (g - first) / 2 + 1;
                const std::uint64_t next = batch_next_broadcast(i, p.stream);
                push_event(first + 2 * (next - 1), ev.player, Role::Batch);
                break;
            }
            case Role::Jam: {
                const ChannelId jam_ch = other(p.pchan);
                const std::uint64_t first = first_channel_slot_after(cohort_trigger_, jam_ch);
                const std::uint64_t i = (g - first) / 2 + 1;
                const std::uint64_t next = jam_sampler_.next_broadcast(i, p.stream);
                push_event(first + 2 * (next - 1), ev.player, Role::Jam);
                break;
            }
            case Role::Baseline: {
                const std::uint64_t age = g - p.arrival_step;
                std::uint64_t next_age;
                if (cfg_.protocol == Protocol::ExpBackoff) {
                    next_age = age < 2 ? age + 1 : exp_next_broadcast(age, p.stream);
                } else {
                    next_age = poly_sampler_.next_broadcast(age, p.stream);
                }
                push_event(p.arrival_step + next_age, ev.player, Role::Baseline);
                break;
            }
        }
    }

    void schedule_backoff(std::uint32_t id, std::uint64_t g) {
        EnginePlayer& p = players_[id];
        const ChannelId ch = p.pchan;
        const std::uint64_t local_now = p.local_clock_at(ch, g);
        const std::uint64_t local_limit = p.local_clock_at(ch, cfg_.horizon);
        if (local_limit == 0) return;
        auto next = backoff_next_broadcast(p.backoff, local_now, local_limit, p.stream);
        if (next) push_event(p.global_of_local(ch, *next), id, Role::Backoff);
    }

    void push_event(std::uint64_t step, std::uint32_t id, Role role) {
        if (step < 1 || step > cfg_.horizon) return;
        queue_.push(Event{step, id, players_[id].gen, role});
    }

    std::vector<std::uint32_t>& phase2_set(ChannelId ch) {
        return set_phase2_[static_cast<int>(ch)];
    }

    void add_to_set(std::vector<std::uint32_t>& set, std::uint32_t id) {
        players_[id].set_pos = static_cast<std::uint32_t>(set.size());
        set.push_back(id);
    }

    std::vector<std::uint32_t>* current_set(std::uint32_t id) {
        switch (players_[id].phase) {
            case Phase::ChannelChoosing: return &set_phase1_;
            case Phase::BatchSync: return &phase2_set(players_[id].pchan);
            case Phase::BatchExec: return &cohort_;
            case Phase::Done: return nullptr;
        }
        return nullptr;
    }

    void remove_from_current_set(std::uint32_t id) {
        std::vector<std::uint32_t>* set = current_set(id);
        if (!set) return;
        const std::uint32_t pos = players_[id].set_pos;
        if (pos >= set->size() || (*set)[pos] != id) {
            throw std::logic_error("engine set bookkeeping corrupted");
        }
        (*set)[pos] = set->back();
        players_[(*set)[pos]].set_pos = pos;
        set->pop_back();
    }

    void begin_episode(std::uint64_t trigger, ChannelId ch, std::uint32_t participants) {
        // At most one batch operation at a time.
        if (episode_active_) throw std::logic_error("overlapping batch episodes");
        current_episode_ = BatchEpisode{};
        current_episode_.trigger_step = trigger;
        current_episode_.channel = ch;
        current_episode_.participants = participants;
        episode_active_ = true;
    }

    void end_episode(std::uint64_t g, EpisodeEnd reason) {
        current_episode_.end_step = g;
        current_episode_.end_reason = reason;
        trace_.episodes.push_back(current_episode_);
        episode_active_ = false;
    }

    void log_transition(std::uint64_t g, std::uint32_t id, Phase to, ChannelId ch) {
        trace_.transitions.push_back({g, id, to, ch});
    }

    void finish() {
        if (episode_active_) end_episode(cfg_.horizon, EpisodeEnd::Horizon);
        trace_.players.reserve(players_.size());
        for (const EnginePlayer& p : players_) {
            trace_.players.push_back({p.arrival_step, p.success_step, p.attempts});
        }
    }

    SimConfig cfg_;
    RngPlan plan_;
    Adversary adversary_;
    JamSampler jam_sampler_;
    PolySampler poly_sampler_;
    std::vector<std::uint64_t> jam_steps_;
    std::size_t jam_cursor_ = 0;

    std::vector<EnginePlayer> players_;
    std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
    std::vector<std::uint32_t> set_phase1_;
    std::vector<std::uint32_t> set_phase2_[2];
    std::vector<std::uint32_t> cohort_;
    ChannelId cohort_channel_ = ChannelId::A;
    std::uint64_t cohort_trigger_ = 0;
    bool episode_active_ = false;
    BatchEpisode current_episode_{};
    std::uint64_t population_ = 0;

    std::vector<PlayerId> broadcasters_;
    std::vector<Event> fired_;
    SimTrace trace_;
};

} // namespace engine_detail

inline SimTrace run(const SimConfig& cfg) {
    cfg.validate(); // config failures surface before any slot executes
    engine_detail::Engine engine(cfg);
    return engine.run();
}

struct RunResult {
    std::optional<SimTrace> trace;
    std::string error;
    bool ok() const { return trace.has_value(); }
};

// Runs each config independently; results come back in input order and one
// failing run does not abort its siblings.
inline std::vector<RunResult> sweep(std::span<const SimConfig> configs,
                                    unsigned parallelism = 0) {
    std::vector<RunResult> results(configs.size());
    if (configs.empty()) return results;
    unsigned workers = parallelism != 0 ? parallelism : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(configs.size())));

    std::atomic<std::size_t> cursor{0};
    auto work = [&] {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= configs.size()) break;
            try {
                results[i].trace = run(configs[i]);
            } catch (const std::exception& e) {
                results[i].error = e.what();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) threads.emplace_back(work);
        for (std::thread& t : threads) t.join();
    }
    return results;
}

} // namespace channelwave

#endif // CHANNELWAVE_ENGINE_HPP
