#ifndef CHANNELWAVE_TRACE_HPP
#define CHANNELWAVE_TRACE_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "channelwave/adversary.hpp"
#include "channelwave/channel.hpp"
#include "channelwave/protocols.hpp"

// The per-slot record stream a run produces. Everything the metrics layer
// reports is derived from this.

namespace channelwave {

struct TraceRow {
    SlotKind kind = SlotKind::Silent;
    std::uint32_t winner = PlayerId::kNone;
    std::uint32_t arrivals = 0;          // players entering before this slot
    std::uint32_t population_before = 0; // live players before this slot's arrivals
    std::uint32_t broadcasters = 0;
};

enum class EpisodeEnd : std::uint8_t {
    OppositeSuccess = 0, // a success on the silent channel ended the batch
    SystemEmpty = 1,     // every player left the system
    Horizon = 2,         // the run ended mid-batch (censored)
};

// One batch operation. The triggering success is not part of the episode;
// the ending success (when there is one) is.
struct BatchEpisode {
    std::uint64_t trigger_step = 0; // success that started the batch (0 = synthetic start)
    std::uint64_t end_step = 0;     // last step of the episode
    ChannelId channel = ChannelId::A;
    std::uint32_t participants = 0; // cohort size at formation
    std::uint64_t successes = 0;    // successes during (trigger, end]
    std::uint64_t arrivals = 0;     // arrivals during (trigger, end]
    EpisodeEnd end_reason = EpisodeEnd::Horizon;

    std::uint64_t start_step() const { return trigger_step + 1; }

    // Length in batch-channel steps.
    std::uint64_t length() const {
        if (end_step < start_step()) return 0;
        const std::uint64_t first =
            channel_of_step(start_step()) == channel ? start_step() : start_step() + 1;
        if (end_step < first) return 0;
        return (end_step - first) / 2 + 1;
    }
};

struct PlayerRecord {
    std::uint64_t arrival_step = 0; // slot during which the player appeared
    std::uint64_t success_step = 0; // 0 = never succeeded
    std::uint64_t attempts = 0;
};

struct PhaseTransition {
    std::uint64_t step = 0; // the success slot that triggered the transition
    std::uint32_t player = PlayerId::kNone;
    Phase to = Phase::ChannelChoosing;
    ChannelId channel = ChannelId::A; // phase 1-2: protocol channel; phase 3: batch channel
};

struct SimTrace {
    std::uint64_t horizon = 0;
    std::uint64_t seed = 0;
    std::vector<TraceRow> rows; // rows[g - 1] describes global step g
    std::vector<SuccessRecord> successes;
    std::vector<BatchEpisode> episodes;
    std::vector<PlayerRecord> players;
    std::vector<PhaseTransition> transitions;

    // Broadcaster identities per slot, recorded when the run was configured
    // with detail enabled (offsets has rows.size() + 1 entries then).
    bool detailed = false;
    std::vector<std::uint32_t> broadcaster_ids;
    std::vector<std::uint64_t> broadcaster_offsets;

    const TraceRow& row(std::uint64_t step) const {
        if (step < 1 || step > rows.size()) throw std::out_of_range("trace row");
        return rows[step - 1];
    }

    std::uint64_t total_arrivals() const {
        std::uint64_t n = 0;
        for (const TraceRow& r : rows) n += r.arrivals;
        return n;
    }

    std::uint64_t total_successes() const { return successes.size(); }

    std::uint64_t total_attempts() const {
        std::uint64_t n = 0;
        for (const TraceRow& r : rows) n += r.broadcasters;
        return n;
    }
};

} // namespace channelwave

#endif // CHANNELWAVE_TRACE_HPP
