#ifndef CHANNELWAVE_RNG_HPP
#define CHANNELWAVE_RNG_HPP

#include <cstdint>
#include <cmath>

// Counter-based random streams. Every consumer in a simulation (the engine,
// the adversary, each player) owns a private stream derived from the master
// seed and a stream id, so the draws one consumer makes can never shift the
// draws seen by another. A stream output is a pure function of
// (master seed, stream id, counter), which is what makes replay and
// trace-prefix reproduction exact.

namespace channelwave {

namespace detail {

// splitmix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

} // namespace detail

// Stream id tags. Player streams are keyed by birth index, which is itself a
// deterministic function of the configuration, so the id space is stable.
enum class StreamKind : std::uint64_t {
    Engine = 1,
    Adversary = 2,
    Player = 3,
};

struct RngPlan {
    std::uint64_t master_seed = 0;

    static std::uint64_t stream_id(StreamKind kind, std::uint64_t index = 0) {
        return (static_cast<std::uint64_t>(kind) << 56) | index;
    }

    std::uint64_t stream_key(StreamKind kind, std::uint64_t index = 0) const {
        std::uint64_t id = stream_id(kind, index);
        return detail::mix64(detail::mix64(master_seed ^ detail::kGolden) ^
                             detail::mix64(id * detail::kGolden + 1));
    }
};

class Stream {
public:
    Stream() = default;
    Stream(const RngPlan& plan, StreamKind kind, std::uint64_t index = 0)
        : key_(plan.stream_key(kind, index)) {}

    explicit Stream(std::uint64_t raw_key) : key_(raw_key) {}

    std::uint64_t next_u64() { return at(counter_++); }

    // Output for an explicit counter position, without advancing the stream.
    // Adversary policies index their draws by slot number through this, which
    // makes causality (decisions at slot t ignore randomness of slots > t)
    // auditable by construction.
    std::uint64_t at(std::uint64_t counter) const {
        return detail::mix64(key_ + counter * detail::kGolden);
    }

    double uniform01() { return to_unit(next_u64()); }
    double uniform01_at(std::uint64_t counter) const { return to_unit(at(counter)); }

    // Uniform in (0, 1]; safe as a survival-probability target.
    double uniform01_open_closed() { return 1.0 - uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform integer in [0, bound). Multiply-shift; bias is far below
    // anything observable at the sample sizes used here.
    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // Exponential(1) variate, for racing against cumulative hazard tables.
    double exponential() { return -std::log(uniform01_open_closed()); }

    std::uint64_t counter() const { return counter_; }

private:
    static double to_unit(std::uint64_t x) {
        return static_cast<double>(x >> 11) * 0x1.0p-53;
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace channelwave

#endif // CHANNELWAVE_RNG_HPP
