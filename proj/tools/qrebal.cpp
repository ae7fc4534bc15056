// qrebal command-line front end.
//
//   qrebal run --config data/golden.cfg --out out/
//   qrebal select|weights|schedule|backtest --config <file> [--seed N] [--out DIR]
//   qrebal replay --manifest out/manifest.json --out replay/
//   qrebal synth --out prices.csv [--seed N] [--blocks 10 --per-block 3 --rows 1006]
//
// Exit codes: 0 success, 1 invalid configuration or input, 2 runtime failure.

#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "qrebal/io.hpp"
#include "qrebal/pipeline.hpp"

namespace {

struct StageFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_stage_flags(CLI::App* cmd, StageFlags& flags) {
    cmd->add_option("--config", flags.config, "key = value config file")->required();
    cmd->add_option("--seed", flags.seed, "override the master seed");
    cmd->add_option("--out", flags.out, "override the output directory");
}

qrebal::RunConfig resolve(const StageFlags& flags) {
    auto cfg = qrebal::load_config(flags.config);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.out) cfg.out = *flags.out;
    return cfg;
}

void print_metrics(const std::vector<qrebal::BacktestReport>& reports) {
    qrebal::io::write_metrics_csv(reports, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-assisted portfolio rebalancing pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", QREBAL_VERSION);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "only print warnings and errors");

    StageFlags flags;
    auto* select = app.add_subcommand("select", "cluster the universe and pick one asset per cluster");
    auto* weights = app.add_subcommand("weights", "GA, MinVar, Equal and Ensemble weights");
    auto* schedule = app.add_subcommand("schedule", "walk-forward QAOA rebalancing schedules");
    auto* backtest = app.add_subcommand("backtest", "net-of-cost backtest of the strategy grid");
    auto* run = app.add_subcommand("run", "all four stages in order");
    for (auto* cmd : {select, weights, schedule, backtest, run}) add_stage_flags(cmd, flags);

    std::string manifest;
    std::string replay_out = "replay";
    auto* replay = app.add_subcommand("replay", "rerun a recorded manifest and compare metrics");
    replay->add_option("--manifest", manifest, "manifest.json from a previous run")->required();
    replay->add_option("--out", replay_out, "output directory for the rerun");

    std::string synth_out;
    std::uint64_t synth_seed = 7;
    int blocks = 10;
    int per_block = 3;
    int rows = 1006;
    double intra = 0.8;
    double inter = 0.1;
    auto* synth = app.add_subcommand("synth", "write a seeded block-correlated price panel");
    synth->add_option("--out", synth_out, "CSV path")->required();
    synth->add_option("--seed", synth_seed);
    synth->add_option("--blocks", blocks)->check(CLI::PositiveNumber);
    synth->add_option("--per-block", per_block)->check(CLI::PositiveNumber);
    synth->add_option("--rows", rows)->check(CLI::Range(3, 1 << 20));
    synth->add_option("--intra", intra)->check(CLI::Range(-1.0, 1.0));
    synth->add_option("--inter", inter)->check(CLI::Range(-1.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);
    spdlog::set_pattern("%^%l%$: %v");

    try {
        if (*select) qrebal::cmd_select(resolve(flags));
        if (*weights) qrebal::cmd_weights(resolve(flags));
        if (*schedule) qrebal::cmd_schedule(resolve(flags));
        if (*backtest) print_metrics(qrebal::cmd_backtest(resolve(flags)));
        if (*run) print_metrics(qrebal::cmd_run(resolve(flags)));
        if (*replay) {
            if (!qrebal::cmd_replay(manifest, replay_out)) {
                spdlog::error("replayed metrics.csv differs from the manifest");
                return 2;
            }
            spdlog::info("replay reproduced metrics.csv exactly");
        }
        if (*synth) {
            using qrebal::Index;
            const Index m = static_cast<Index>(blocks) * per_block;
            const auto corr = qrebal::block_correlation(blocks, per_block, intra, inter);
            qrebal::Vector vol(m);
            qrebal::Vector drift(m);
            for (Index j = 0; j < m; ++j) {
                vol(j) = 0.15 + 0.01 * static_cast<double>(j % 7);
                drift(j) = 0.02 + 0.01 * static_cast<double>(j % 5);
            }
            try {
                qrebal::write_csv(qrebal::synth_panel(synth_seed, rows, m, corr, vol, drift), synth_out);
            } catch (const std::invalid_argument& e) {
                throw qrebal::ValidationError(e.what());
            }
        }
    } catch (const qrebal::ValidationError& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return EXIT_SUCCESS;
}
