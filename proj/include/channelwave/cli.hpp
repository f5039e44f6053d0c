#ifndef CHANNELWAVE_CLI_HPP
#define CHANNELWAVE_CLI_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "channelwave/config.hpp"
#include "channelwave/engine.hpp"
#include "channelwave/io.hpp"
#include "channelwave/verify.hpp"

// Subcommand implementations for the channelwave tool. Exit codes: 0 on
// success, 1 on failed verification, 2 on config/usage errors, 3 on I/O
// failures. All randomness flows from the config seed (or CHANNELWAVE_SEED);
// nothing consults the clock or OS entropy.

namespace channelwave::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

inline std::optional<std::uint64_t> env_seed_override() {
    const char* v = std::getenv("CHANNELWAVE_SEED");
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0') return std::nullopt;
    return static_cast<std::uint64_t>(parsed);
}

inline bool load_experiment(const std::string& path, ExperimentSpec& spec, std::ostream& err) {
    std::ifstream in(path);
    if (!in) {
        err << "error: cannot open config '" << path << "'\n";
        return false;
    }
    spec = parse_experiment(in);
    if (auto seed = env_seed_override()) spec.base.seed = *seed;
    return true;
}

inline bool write_file(const std::filesystem::path& path, const std::string& contents,
                       std::ostream& err) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        err << "error: cannot open '" << path.string() << "' for writing\n";
        return false;
    }
    out << contents;
    out.flush();
    if (!out.good()) {
        err << "error: short write to '" << path.string() << "'\n";
        return false;
    }
    return true;
}

inline int cmd_run(const std::string& config_path, const std::string& out_dir,
                   std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    ExperimentSpec spec;
    try {
        if (!load_experiment(config_path, spec, err)) return kExitConfig;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    SimTrace trace;
    try {
        trace = run(spec.base);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    std::ostringstream csv;
    write_trace_csv(csv, trace);
    const std::string json = metrics_json(spec.base, trace).dump(2) + "\n";

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        err << "error: cannot create output directory '" << out_dir << "'\n";
        return kExitIo;
    }
    const std::filesystem::path dir(out_dir);
    if (!write_file(dir / "trace.csv", csv.str(), err)) return kExitIo;
    if (!write_file(dir / "metrics.json", json, err)) return kExitIo;

    TraceMetrics m(trace);
    const ThroughputPoint tp = m.implicit_throughput(trace.horizon);
    out << "run '" << spec.name << "': horizon " << trace.horizon << ", arrivals " << tp.arrivals
        << ", successes " << trace.total_successes() << ", throughput "
        << format_double(tp.ratio) << '\n';
    out << "wrote " << (dir / "trace.csv").string() << " and " << (dir / "metrics.json").string()
        << '\n';
    return kExitOk;
}

// Re-targets an arrival policy at population n (used by sweep/compare axes).
inline AdversaryPolicy with_population(const AdversaryPolicy& policy, std::uint64_t n) {
    AdversaryPolicy out = policy;
    if (auto* burst = std::get_if<BurstPolicy>(&out)) burst->n = n;
    if (auto* spread = std::get_if<SpreadPolicy>(&out)) spread->n = n;
    if (auto* adaptive = std::get_if<AdaptiveReactivePolicy>(&out)) adaptive->n = n;
    if (auto* jam = std::get_if<JammingLowerBoundPolicy>(&out)) jam->n = n;
    return out;
}

inline int cmd_sweep(const std::string& config_path, const std::string& out_dir,
                     std::uint64_t seeds_override, unsigned parallelism,
                     std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    ExperimentSpec spec;
    try {
        if (!load_experiment(config_path, spec, err)) return kExitConfig;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (seeds_override > 0) spec.seeds = seeds_override;
    if (spec.sweep_n.empty()) spec.sweep_n = {0}; // seed-only sweep of the base config

    std::vector<SimConfig> cfgs;
    std::vector<std::uint64_t> point_n;
    for (std::uint64_t n : spec.sweep_n) {
        for (std::uint64_t s = 0; s < std::max<std::uint64_t>(spec.seeds, 1); ++s) {
            SimConfig cfg = spec.base;
            if (n > 0) {
                cfg.adversary = with_population(cfg.adversary, n);
                cfg.horizon = 64 * n;
                cfg.checkpoints.clear();
            }
            cfg.seed = spec.base.seed + s;
            try {
                cfg.validate();
            } catch (const ConfigError& e) {
                err << "error: sweep point n=" << n << ": " << e.what() << '\n';
                return kExitConfig;
            }
            cfgs.push_back(cfg);
            point_n.push_back(n > 0 ? n : 0);
        }
    }

    auto results = sweep(cfgs, parallelism);

    std::ostringstream csv;
    write_sweep_header(csv);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].ok()) {
            ++failures;
            err << "run " << i << " failed: " << results[i].error << '\n';
            continue;
        }
        write_sweep_row(csv, spec.name, point_n[i], *results[i].trace);
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        err << "error: cannot create output directory '" << out_dir << "'\n";
        return kExitIo;
    }
    const auto path = std::filesystem::path(out_dir) / "sweep.csv";
    if (!write_file(path, csv.str(), err)) return kExitIo;
    out << "sweep '" << spec.name << "': " << results.size() - failures << "/" << results.size()
        << " runs ok, wrote " << path.string() << '\n';
    return failures == 0 ? kExitOk : kExitIo;
}

inline void print_suite(std::ostream& out, const SuiteResult& result) {
    for (const std::string& note : result.notes) out << "  " << note << '\n';
    for (const CriterionResult& c : result.criteria) {
        out << (c.pass ? "[PASS] " : "[FAIL] ") << result.suite << " :: " << c.name;
        if (!c.detail.empty()) out << " — " << c.detail;
        out << '\n';
    }
}

inline int cmd_verify(const std::string& suite, const VerifyOptions& opts,
                      std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<std::string> names;
    if (suite == "all") {
        // Criterion order rather than alphabetical.
        names = {"throughput-flatness", "exp-degradation",  "energy",
                 "first-success",       "batch-successes",  "batch-tail",
                 "oracle-consistency",  "jamming-demo",     "determinism"};
    } else if (suite_registry().count(suite)) {
        names = {suite};
    } else {
        err << "error: unknown suite '" << suite << "'; known suites:";
        for (const auto& [name, fn] : suite_registry()) err << ' ' << name;
        err << " all\n";
        return kExitConfig;
    }

    bool all_pass = true;
    for (const std::string& name : names) {
        const SuiteResult result = suite_registry().at(name)(opts);
        print_suite(out, result);
        if (!result.pass()) all_pass = false;
    }
    return all_pass ? kExitOk : kExitVerifyFailed;
}

inline int cmd_compare(const std::vector<std::string>& protocols,
                       const std::vector<std::uint64_t>& ns, std::uint64_t seeds,
                       const std::string& out_dir, const std::string& config_path,
                       unsigned parallelism, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
    if (protocols.empty() || ns.empty() || seeds == 0) {
        err << "error: compare needs at least one protocol, one n, and one seed\n";
        return kExitConfig;
    }
    ExperimentSpec spec;
    if (!config_path.empty()) {
        try {
            if (!load_experiment(config_path, spec, err)) return kExitConfig;
        } catch (const ConfigError& e) {
            err << "error: " << e.what() << '\n';
            return kExitConfig;
        }
    }

    std::vector<SimConfig> cfgs;
    std::vector<CompareRow> rows;
    for (const std::string& pname : protocols) {
        Protocol proto;
        if (pname == "main") proto = Protocol::Main;
        else if (pname == "exp") proto = Protocol::ExpBackoff;
        else if (pname == "poly") proto = Protocol::PolyBackoff;
        else {
            err << "error: unknown protocol '" << pname << "' (main|exp|poly)\n";
            return kExitConfig;
        }
        for (std::uint64_t n : ns) {
            for (std::uint64_t s = 0; s < seeds; ++s) {
                SimConfig cfg = spec.base;
                cfg.protocol = proto;
                // The stress pattern the comparison is about: a burst of n/2
                // followed by success-reactive arrivals.
                cfg.adversary = AdaptiveReactivePolicy{n, 0.5, 1};
                cfg.horizon = 64 * n;
                cfg.checkpoints.clear();
                cfg.seed = spec.base.seed + s;
                cfgs.push_back(cfg);
                rows.push_back(CompareRow{pname, n, cfg.seed, 0.0, 0.0, 0});
            }
        }
    }

    auto results = sweep(cfgs, parallelism);
    std::ostringstream csv;
    write_compare_header(csv);
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].ok()) {
            err << "run " << i << " failed: " << results[i].error << '\n';
            return kExitIo;
        }
        const SimTrace& trace = *results[i].trace;
        TraceMetrics m(trace);
        CompareRow row = rows[i];
        row.throughput = m.implicit_throughput(trace.horizon).ratio;
        const AttemptsSummary att = m.attempts_summary(trace.horizon);
        row.attempts_per_player = att.per_arrival;
        row.max_sojourn = max_sojourn(trace);
        write_compare_row(csv, row);
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        err << "error: cannot create output directory '" << out_dir << "'\n";
        return kExitIo;
    }
    const auto path = std::filesystem::path(out_dir) / "compare.csv";
    if (!write_file(path, csv.str(), err)) return kExitIo;
    out << "compare: " << results.size() << " runs, wrote " << path.string() << '\n';
    return kExitOk;
}

} // namespace channelwave::cli

#endif // CHANNELWAVE_CLI_HPP
