// Command-line front end: simulators, estimators and the experiment
// harness behind subcommands.  Exit codes: 0 success, 1 usage error,
// 2 configuration or data error, 3 a checked bound failed beyond the
// Monte Carlo slack.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "rset/config.hpp"
#include "rset/harness.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    int threads = 1;
    bool quiet = false;
    CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* sub, CommonArgs& args, bool needs_config) {
    auto* cfg = sub->add_option("--config", args.config_path,
                                "model and plan configuration file");
    if (needs_config) cfg->required();
    sub->add_option("--out", args.out_dir, "output directory")->required();
    args.seed_opt =
        sub->add_option("--seed", args.seed, "override run.seed from the config");
    sub->add_option("--threads", args.threads, "worker threads")
        ->check(CLI::Range(1, 4096));
    sub->add_flag("--quiet", args.quiet, "suppress progress lines");
}

int effective_threads(int flag_value) {
    const char* env = std::getenv("RSET_THREADS");
    if (env == nullptr || *env == '\0') return flag_value;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096)
        throw rset::ConfigError(std::string("RSET_THREADS: not a thread count: \"") +
                                env + "\"");
    return int(v);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean shapes of random closed sets: Boolean-model simulation, "
                 "volume-matched estimation, oracle-checked experiments"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string masks_dir;
    int mesh_level = -1;

    CLI::App* simulate = app.add_subcommand(
        "simulate", "draw replicate masks from the configured model");
    add_common(simulate, args, true);

    CLI::App* estimate = app.add_subcommand(
        "estimate", "estimate the mean shape from a directory of masks");
    add_common(estimate, args, false);
    estimate->add_option("--masks", masks_dir, "directory of .vrbm replicate masks")
        ->required();
    estimate->add_option("--mesh-level", mesh_level,
                         "level of the coarse estimation grid (default: the "
                         "masks' own level)");

    CLI::App* fcurve = app.add_subcommand(
        "fcurve", "empirical coverage survival curve with the oracle overlay");
    add_common(fcurve, args, true);

    CLI::App* boxdim = app.add_subcommand(
        "boxdim", "box-count the boundary of one replicate");
    add_common(boxdim, args, true);

    CLI::App* converge = app.add_subcommand(
        "converge", "joint n and mesh refinement of the mean-shape estimators "
                    "against the analytic oracle");
    add_common(converge, args, true);

    CLI::App* rate = app.add_subcommand(
        "rate", "check the level-set error bound over the (n, mesh) grid");
    add_common(rate, args, true);

    CLI::App* bracket = app.add_subcommand(
        "bracket", "locate the empirical thresholds against the oracle bracket");
    add_common(bracket, args, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }

    try {
        rset::RunOptions opt;
        opt.out_dir = args.out_dir;
        opt.threads = effective_threads(args.threads);
        opt.quiet = args.quiet;

        if (estimate->parsed())
            return rset::run_estimate(masks_dir, mesh_level, opt);

        rset::ParsedConfig cfg = rset::load_config(args.config_path);
        if (args.seed_opt->count() > 0) cfg.model.seed = args.seed;

        if (simulate->parsed()) return rset::run_simulate(cfg, opt);
        if (fcurve->parsed()) return rset::run_fcurve(cfg, opt);
        if (boxdim->parsed()) return rset::run_boxdim(cfg, opt);
        if (converge->parsed()) return rset::run_consistency(cfg, opt);
        if (rate->parsed()) return rset::run_rate_check(cfg, opt);
        if (bracket->parsed()) return rset::run_bracket(cfg, opt);
        std::cerr << "usage error: no subcommand\n";
        return 1;
    } catch (const rset::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
