#include "mmreach/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Mixed-monotone reachability: boxes, parallelotopes, intersections and unions"};
    app.require_subcommand(1);

    mmreach::CliOptions opts;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::string out;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config, "Problem config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Override the sampling seed");
        sub->add_option("--dt", dt, "Override the integration step")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "Output directory");
        sub->add_flag("--quiet", opts.quiet, "Only report errors");
    };
    auto* check = app.add_subcommand("check", "Validate a config without running it");
    auto* reach = app.add_subcommand("reach", "Compute the over-approximation and write result files");
    auto* verify = app.add_subcommand("verify", "Audit the over-approximation against sampled trajectories");
    for (auto* sub : {check, reach, verify})
        add_common(sub);
    verify->add_option("--debug-scale", opts.debug_scale, "Scale computed sets before auditing")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mmreach::kExitError;
    }
    for (auto* sub : {check, reach, verify}) {
        if (sub->count("--seed"))
            opts.seed = seed;
        if (sub->count("--dt"))
            opts.dt = dt;
        if (sub->count("--out"))
            opts.out = out;
    }

    if (*check)
        return mmreach::cmd_check(opts, std::cout, std::cerr);
    if (*reach)
        return mmreach::cmd_reach(opts, std::cout, std::cerr);
    return mmreach::cmd_verify(opts, std::cout, std::cerr);
}
