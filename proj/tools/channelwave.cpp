// channelwave — contention-resolution simulator for a slotted multiple
// access channel without collision detection.
//
//   channelwave run --config run.cfg --out results/
//   channelwave sweep --config sweep.cfg --out results/ [--seeds K] [--parallel P]
//   channelwave verify --suite all [--seeds K] [--parallel P] [--seed S]
//   channelwave compare --protocols main,exp --n 256,4096 --seeds 10 --out results/
//
// Exit codes: 0 success, 1 verification failed, 2 config error, 3 I/O error.

#include <string>
#include <vector>

#include <CLI11.hpp>

#include "channelwave/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"contention-resolution simulator on a no-collision-detection channel"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string suite = "all";
    std::string protocols_csv = "main,exp";
    std::string n_csv = "256,4096";
    std::uint64_t seeds = 0;
    std::uint64_t base_seed = 1;
    unsigned parallel = 0;
    bool verbose = false;

    CLI::App* run_cmd = app.add_subcommand("run", "one simulation; trace CSV + metrics JSON");
    run_cmd->add_option("--config", config_path, "run config file")->required();
    run_cmd->add_option("--out", out_dir, "output directory");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "seed/size sweep; one CSV row per run");
    sweep_cmd->add_option("--config", config_path, "experiment config file")->required();
    sweep_cmd->add_option("--out", out_dir, "output directory");
    sweep_cmd->add_option("--seeds", seeds, "seeds per sweep point (overrides config)");
    sweep_cmd->add_option("--parallel", parallel, "worker threads (0 = hardware)");

    CLI::App* verify_cmd = app.add_subcommand("verify", "statistical acceptance suites");
    verify_cmd->add_option("--suite", suite, "suite name or 'all'");
    verify_cmd->add_option("--seeds", seeds, "seeds per check (defaults per suite)");
    verify_cmd->add_option("--seed", base_seed, "base seed");
    verify_cmd->add_option("--parallel", parallel, "worker threads (0 = hardware)");
    verify_cmd->add_flag("--verbose", verbose, "log per-point measurements");

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "throughput vs n per protocol under the burst-then-react adversary");
    compare_cmd->add_option("--protocols", protocols_csv, "comma list: main,exp,poly");
    compare_cmd->add_option("--n", n_csv, "comma list of population sizes");
    compare_cmd->add_option("--seeds", seeds, "seeds per point")->required();
    compare_cmd->add_option("--out", out_dir, "output directory");
    compare_cmd->add_option("--config", config_path, "optional base config file");
    compare_cmd->add_option("--parallel", parallel, "worker threads (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    using namespace channelwave;

    if (run_cmd->parsed()) return cli::cmd_run(config_path, out_dir);
    if (sweep_cmd->parsed()) return cli::cmd_sweep(config_path, out_dir, seeds, parallel);
    if (verify_cmd->parsed()) {
        VerifyOptions opts;
        opts.base_seed = base_seed;
        opts.parallelism = parallel;
        opts.seeds = seeds;
        if (verbose) opts.log = &std::cout;
        if (auto env = cli::env_seed_override()) opts.base_seed = *env;
        return cli::cmd_verify(suite, opts);
    }
    if (compare_cmd->parsed()) {
        auto split = [](const std::string& csv) {
            std::vector<std::string> out;
            std::stringstream ss(csv);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) out.push_back(item);
            }
            return out;
        };
        std::vector<std::uint64_t> ns;
        for (const std::string& s : split(n_csv)) {
            try {
                ns.push_back(std::stoull(s));
            } catch (const std::exception&) {
                std::cerr << "error: bad n value '" << s << "'\n";
                return cli::kExitConfig;
            }
        }
        return cli::cmd_compare(split(protocols_csv), ns, seeds, out_dir, config_path, parallel);
    }
    return cli::kExitConfig;
}
