#ifndef CHANNELWAVE_CHANNEL_HPP
#define CHANNELWAVE_CHANNEL_HPP

#include <cstdint>
#include <limits>
#include <span>

// The slotted multiple access channel. Global steps are split by parity into
// two virtual channels; a slot carries at most one success, and listeners
// cannot tell silence, collision, and jamming apart.

namespace channelwave {

enum class ChannelId : std::uint8_t { A = 0, B = 1 };

constexpr ChannelId other(ChannelId ch) {
    return ch == ChannelId::A ? ChannelId::B : ChannelId::A;
}

// Odd global steps are channel A, even are channel B. Players never see the
// convention; only the engine and the trace reader do.
constexpr ChannelId channel_of_step(std::uint64_t global_step) {
    return (global_step & 1) ? ChannelId::A : ChannelId::B;
}

constexpr const char* channel_name(ChannelId ch) {
    return ch == ChannelId::A ? "A" : "B";
}

struct PlayerId {
    std::uint32_t value = kNone;

    static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

    constexpr bool valid() const { return value != kNone; }
    friend constexpr bool operator==(PlayerId a, PlayerId b) { return a.value == b.value; }
    friend constexpr bool operator!=(PlayerId a, PlayerId b) { return a.value != b.value; }
};

enum class SlotKind : std::uint8_t { Silent = 0, Success = 1, Collision = 2, Jammed = 3 };

constexpr const char* slot_kind_name(SlotKind k) {
    switch (k) {
        case SlotKind::Silent: return "silent";
        case SlotKind::Success: return "success";
        case SlotKind::Collision: return "collision";
        case SlotKind::Jammed: return "jammed";
    }
    return "?";
}

struct SlotOutcome {
    SlotKind kind = SlotKind::Silent;
    PlayerId winner{};          // valid iff kind == Success
    std::uint64_t global_step = 0;
    ChannelId channel = ChannelId::A;
};

// Resolves one slot. `broadcasters` is the exact set of players transmitting
// (the engine collapses duplicate schedule entries before calling). A jammed
// slot fails unconditionally, whatever was transmitted.
inline SlotOutcome resolve_slot(std::span<const PlayerId> broadcasters, bool jammed,
                                std::uint64_t global_step) {
    SlotOutcome out;
    out.global_step = global_step;
    out.channel = channel_of_step(global_step);
    if (jammed) {
        out.kind = SlotKind::Jammed;
    } else if (broadcasters.empty()) {
        out.kind = SlotKind::Silent;
    } else if (broadcasters.size() == 1) {
        out.kind = SlotKind::Success;
        out.winner = broadcasters[0];
    } else {
        out.kind = SlotKind::Collision;
    }
    return out;
}

// What a player may legally learn from a slot. Silence, collisions, and
// jammed slots are indistinguishable; only successes are audible, and only
// the winner learns that the success was its own.
enum class ObsKind : std::uint8_t { MySuccess = 0, OtherSuccess = 1, NoSuccess = 2 };

struct PlayerObservation {
    ObsKind kind = ObsKind::NoSuccess;
    ChannelId channel = ChannelId::A;
};

inline PlayerObservation observe(const SlotOutcome& outcome, PlayerId observer) {
    PlayerObservation obs;
    obs.channel = outcome.channel;
    if (outcome.kind == SlotKind::Success) {
        obs.kind = outcome.winner == observer ? ObsKind::MySuccess : ObsKind::OtherSuccess;
    } else {
        obs.kind = ObsKind::NoSuccess;
    }
    return obs;
}

} // namespace channelwave

#endif // CHANNELWAVE_CHANNEL_HPP
