#ifndef CHANNELWAVE_IO_HPP
#define CHANNELWAVE_IO_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>

#include <json.hpp>

#include "channelwave/engine.hpp"
#include "channelwave/metrics.hpp"

// Trace and metrics serialization. Column sets and orders are fixed per
// schema version, with the schema named in the first comment line, and
// decimals use the shortest round-trip representation so downstream plotting
// reproduces runs bit-for-bit.

namespace channelwave {

inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

// Schema channelwave.trace.v1:
//   step, channel, outcome, arrivals, population, attempts_cum, successes_cum
// `population` counts players present during the slot (before departures).
inline void write_trace_csv(std::ostream& out, const SimTrace& trace) {
    out << "# schema: channelwave.trace.v1\n";
    out << "step,channel,outcome,arrivals,population,attempts_cum,successes_cum\n";
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    for (std::uint64_t g = 1; g <= trace.rows.size(); ++g) {
        const TraceRow& r = trace.row(g);
        attempts += r.broadcasters;
        if (r.kind == SlotKind::Success) ++successes;
        out << g << ',' << channel_name(channel_of_step(g)) << ',' << slot_kind_name(r.kind)
            << ',' << r.arrivals << ',' << (r.population_before + r.arrivals) << ',' << attempts
            << ',' << successes << '\n';
    }
}

inline nlohmann::ordered_json throughput_json(const ThroughputPoint& pt) {
    nlohmann::ordered_json j;
    j["t"] = pt.t;
    j["n_t"] = pt.arrivals;
    j["s_t"] = pt.active_slots;
    if (pt.defined) {
        j["ratio"] = pt.ratio;
    } else {
        j["ratio"] = nullptr; // no active slot yet
    }
    return j;
}

// Schema channelwave.metrics.v1.
inline nlohmann::ordered_json metrics_json(const SimConfig& cfg, const SimTrace& trace) {
    TraceMetrics m(trace);
    nlohmann::ordered_json j;
    j["schema"] = "channelwave.metrics.v1";
    j["protocol"] = protocol_name(cfg.protocol);
    j["seed"] = trace.seed;
    j["horizon"] = trace.horizon;
    j["checkpoints"] = nlohmann::ordered_json::array();
    std::vector<std::uint64_t> ts = cfg.checkpoints;
    if (ts.empty() && trace.horizon > 0) ts.push_back(trace.horizon);
    for (std::uint64_t t : ts) j["checkpoints"].push_back(throughput_json(m.implicit_throughput(t)));
    const AttemptsSummary att = m.attempts_summary(trace.horizon);
    j["attempts"]["total"] = att.total;
    if (att.defined) {
        j["attempts"]["per_arrival"] = att.per_arrival;
    } else {
        j["attempts"]["per_arrival"] = nullptr;
    }
    j["successes"] = trace.total_successes();
    j["batch_episodes"] = trace.episodes.size();
    return j;
}

// Schema channelwave.compare.v1:
//   protocol, n, seed, throughput, attempts_per_player, max_sojourn
struct CompareRow {
    std::string protocol;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    double throughput = 0.0;
    double attempts_per_player = 0.0;
    std::uint64_t max_sojourn = 0;
};

inline void write_compare_header(std::ostream& out) {
    out << "# schema: channelwave.compare.v1\n";
    out << "protocol,n,seed,throughput,attempts_per_player,max_sojourn\n";
}

inline void write_compare_row(std::ostream& out, const CompareRow& row) {
    out << row.protocol << ',' << row.n << ',' << row.seed << ','
        << format_double(row.throughput) << ',' << format_double(row.attempts_per_player) << ','
        << row.max_sojourn << '\n';
}

// Schema channelwave.sweep.v1: one row per run.
inline void write_sweep_header(std::ostream& out) {
    out << "# schema: channelwave.sweep.v1\n";
    out << "name,n,seed,n_t,s_t,throughput,attempts_total,attempts_per_arrival,successes\n";
}

inline void write_sweep_row(std::ostream& out, const std::string& name, std::uint64_t n,
                            const SimTrace& trace) {
    TraceMetrics m(trace);
    const ThroughputPoint tp = m.implicit_throughput(trace.horizon);
    const AttemptsSummary att = m.attempts_summary(trace.horizon);
    out << name << ',' << n << ',' << trace.seed << ',' << tp.arrivals << ',' << tp.active_slots
        << ',' << format_double(tp.ratio) << ',' << att.total << ','
        << format_double(att.per_arrival) << ',' << trace.total_successes() << '\n';
}

// Largest sojourn (arrival slot through success slot, or through the horizon
// for players that never succeeded).
inline std::uint64_t max_sojourn(const SimTrace& trace) {
    std::uint64_t best = 0;
    for (const PlayerRecord& p : trace.players) {
        const std::uint64_t exit = p.success_step != 0 ? p.success_step : trace.horizon;
        if (exit > p.arrival_step) best = std::max(best, exit - p.arrival_step);
    }
    return best;
}

} // namespace channelwave

#endif // CHANNELWAVE_IO_HPP
