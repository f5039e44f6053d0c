#ifndef CHANNELWAVE_CONFIG_HPP
#define CHANNELWAVE_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "channelwave/engine.hpp"

// Run configuration as a flat key-value text format with dotted keys:
//
//   # comment
//   protocol = main
//   horizon = 65536
//   adversary = burst
//   adversary.n = 4096
//
// The parser is strict: unknown keys, bad values, and duplicate keys are
// errors with line diagnostics, so a config cannot silently drift.

namespace channelwave {

struct ConfigParseError : ConfigError {
    ConfigParseError(int line, const std::string& msg)
        : ConfigError("config line " + std::to_string(line) + ": " + msg), line_no(line) {}
    int line_no;
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

struct RawConfig {
    // key -> (value, line)
    std::map<std::string, std::pair<std::string, int>> kv;

    std::optional<std::string> take(const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second.first;
        kv.erase(it);
        return v;
    }

    int line_of(const std::string& key) const {
        auto it = kv.find(key);
        return it == kv.end() ? 0 : it->second.second;
    }
};

inline RawConfig parse_raw(std::istream& in) {
    RawConfig raw;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        const std::size_t eq = sv.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigParseError(line_no, "expected 'key = value'");
        }
        std::string key(trim(sv.substr(0, eq)));
        std::string value(trim(sv.substr(eq + 1)));
        if (key.empty()) throw ConfigParseError(line_no, "empty key");
        if (raw.kv.count(key)) throw ConfigParseError(line_no, "duplicate key '" + key + "'");
        raw.kv.emplace(key, std::make_pair(value, line_no));
    }
    return raw;
}

inline std::uint64_t parse_u64(const std::string& v, int line, const std::string& key) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigParseError(line, "key '" + key + "': expected an unsigned integer, got '" + v + "'");
    }
    return out;
}

inline double parse_double(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigParseError(line, "key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigParseError(line, "key '" + key + "': expected true/false, got '" + v + "'");
}

inline std::vector<std::uint64_t> parse_u64_list(const std::string& v, int line,
                                                 const std::string& key) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::string t(trim(item));
        if (t.empty()) continue;
        out.push_back(parse_u64(t, line, key));
    }
    return out;
}

} // namespace config_detail

// Sweep/compare experiment description layered on top of a base SimConfig.
struct ExperimentSpec {
    std::string name = "experiment";
    SimConfig base;
    std::vector<std::uint64_t> sweep_n; // burst sizes per sweep point
    std::uint64_t seeds = 1;            // seeds per sweep point
    std::vector<Protocol> protocols;    // compare subcommand
};

namespace config_detail {

inline AdversaryPolicy parse_adversary(RawConfig& raw, const std::string& kind, int kind_line) {
    auto need_u64 = [&](const std::string& key, std::optional<std::uint64_t> fallback =
                                                    std::nullopt) -> std::uint64_t {
        int line = raw.line_of(key);
        if (auto v = raw.take(key)) return parse_u64(*v, line, key);
        if (fallback) return *fallback;
        throw ConfigParseError(kind_line, "adversary '" + kind + "' requires key '" + key + "'");
    };
    if (kind == "burst") {
        const std::uint64_t n = need_u64("adversary.n");
        return BurstPolicy{n, need_u64("adversary.at_step", 0)};
    }
    if (kind == "spread") {
        const std::uint64_t n = need_u64("adversary.n");
        return SpreadPolicy{n, need_u64("adversary.over_steps", std::max<std::uint64_t>(n, 1))};
    }
    if (kind == "adaptive") {
        AdaptiveReactivePolicy p;
        p.n = need_u64("adversary.n");
        int line = raw.line_of("adversary.burst_fraction");
        if (auto v = raw.take("adversary.burst_fraction")) {
            p.burst_fraction = parse_double(*v, line, "adversary.burst_fraction");
        }
        p.clump = static_cast<std::uint32_t>(need_u64("adversary.clump", p.clump));
        return p;
    }
    if (kind == "poisson") {
        PoissonPolicy p;
        int line = raw.line_of("adversary.rate");
        if (auto v = raw.take("adversary.rate")) {
            p.rate = parse_double(*v, line, "adversary.rate");
        } else {
            throw ConfigParseError(kind_line, "adversary 'poisson' requires key 'adversary.rate'");
        }
        p.until = need_u64("adversary.until", 0);
        return p;
    }
    if (kind == "jamming") {
        JammingLowerBoundPolicy p;
        p.n = need_u64("adversary.n");
        p.c = static_cast<std::uint32_t>(need_u64("adversary.c", 4));
        return p;
    }
    throw ConfigParseError(kind_line, "unknown adversary kind '" + kind + "'");
}

} // namespace config_detail

inline ExperimentSpec parse_experiment(std::istream& in) {
    using namespace config_detail;
    RawConfig raw = parse_raw(in);
    ExperimentSpec spec;
    SimConfig& cfg = spec.base;

    if (auto v = raw.take("name")) spec.name = *v;

    if (auto v = raw.take("protocol")) {
        if (*v == "main") cfg.protocol = Protocol::Main;
        else if (*v == "exp") cfg.protocol = Protocol::ExpBackoff;
        else if (*v == "poly") cfg.protocol = Protocol::PolyBackoff;
        else throw ConfigParseError(raw.line_of("protocol"),
                                    "unknown protocol '" + *v + "' (main|exp|poly)");
    }
    {
        int line = raw.line_of("gamma");
        if (auto v = raw.take("gamma")) cfg.poly_gamma = parse_double(*v, line, "gamma");
    }
    auto take_u64 = [&](const char* key, auto& field) {
        int line = raw.line_of(key);
        if (auto v = raw.take(key)) {
            field = static_cast<std::decay_t<decltype(field)>>(parse_u64(*v, line, key));
        }
    };
    take_u64("c", cfg.c);
    take_u64("c1", cfg.c1);
    take_u64("c2", cfg.c2);
    take_u64("horizon", cfg.horizon);
    take_u64("seed", cfg.seed);
    take_u64("synthetic_batch", cfg.synthetic_batch);
    {
        int line = raw.line_of("checkpoints");
        if (auto v = raw.take("checkpoints")) {
            cfg.checkpoints = parse_u64_list(*v, line, "checkpoints");
        }
    }
    if (auto v = raw.take("phase1")) {
        if (*v == "coin") cfg.phase1 = Phase1Choice::FairCoin;
        else if (*v == "always_a") cfg.phase1 = Phase1Choice::AlwaysA;
        else throw ConfigParseError(raw.line_of("phase1"),
                                    "unknown phase1 choice '" + *v + "' (coin|always_a)");
    }
    {
        int line = raw.line_of("detail");
        if (auto v = raw.take("detail")) {
            cfg.record_broadcasters = parse_bool(*v, line, "detail");
        }
    }

    if (auto kind = raw.take("adversary")) {
        cfg.adversary = config_detail::parse_adversary(raw, *kind, 0);
    }

    bool jam_on = false;
    {
        int line = raw.line_of("jamming");
        if (auto v = raw.take("jamming")) jam_on = parse_bool(*v, line, "jamming");
    }
    if (jam_on) {
        JamSpec jam;
        int line_n = raw.line_of("jamming.n");
        auto n = raw.take("jamming.n");
        if (!n) throw ConfigParseError(0, "jamming = on requires key 'jamming.n'");
        jam.n = parse_u64(*n, line_n, "jamming.n");
        int line_c = raw.line_of("jamming.c");
        if (auto v = raw.take("jamming.c")) {
            jam.c = static_cast<std::uint32_t>(parse_u64(*v, line_c, "jamming.c"));
        }
        cfg.jamming = jam;
    } else {
        raw.take("jamming.n");
        raw.take("jamming.c");
    }

    {
        int line = raw.line_of("sweep.n");
        if (auto v = raw.take("sweep.n")) spec.sweep_n = parse_u64_list(*v, line, "sweep.n");
    }
    take_u64("sweep.seeds", spec.seeds);
    if (auto v = raw.take("sweep.protocols")) {
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::string t(config_detail::trim(item));
            if (t == "main") spec.protocols.push_back(Protocol::Main);
            else if (t == "exp") spec.protocols.push_back(Protocol::ExpBackoff);
            else if (t == "poly") spec.protocols.push_back(Protocol::PolyBackoff);
            else if (!t.empty())
                throw ConfigParseError(raw.line_of("sweep.protocols"),
                                       "unknown protocol '" + t + "'");
        }
    }

    if (!raw.kv.empty()) {
        const auto& [key, vp] = *raw.kv.begin();
        throw ConfigParseError(vp.second, "unknown key '" + key + "'");
    }

    cfg.validate();
    return spec;
}

inline SimConfig parse_sim_config(std::istream& in) { return parse_experiment(in).base; }

} // namespace channelwave

#endif // CHANNELWAVE_CONFIG_HPP
