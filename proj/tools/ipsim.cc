//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ipsim.cc
//! Command-line driver: simulate, verify, emit-plotdata.
//---------------------------------------------------------------------------//
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ips/commands.hh"

namespace
{
std::vector<std::string> split_commas(std::vector<std::string> const& items)
{
    std::vector<std::string> result;
    for (auto const& item : items)
    {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ','))
        {
            if (!part.empty())
                result.push_back(part);
        }
    }
    return result;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Birth-and-death particle systems with interacting spins"};
    app.set_version_flag("--version", std::string("ipsim ") + ips::tool_version);
    app.require_subcommand(1);

    ips::CommandOptions opts;
    std::uint64_t seed = 0;
    int replicas = 1;
    std::vector<std::string> suites;
    std::string observables;

    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config, "Run configuration (JSON)")
            ->required();
        cmd->add_option("--seed", seed, "Override the configured seed");
        cmd->add_option("--replicas", replicas, "Override the replica count")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--threads", opts.threads,
                        "Worker threads (SIM_THREADS overrides)")
            ->check(CLI::NonNegativeNumber);
    };

    auto* simulate = app.add_subcommand("simulate", "Run seeded simulations");
    add_run_flags(simulate);
    simulate->add_option("--out", opts.out, "Output directory")->required();

    auto* verify = app.add_subcommand("verify", "Run verification suites");
    add_run_flags(verify);
    verify->add_option("--suite", suites,
                       "Suites: domination,gronwall,cutoff,moments,cadlag,"
                       "bounds (default: all)")
        ->delimiter(',');
    verify->add_option("--out", opts.out, "Directory for verify.json");

    auto* emit = app.add_subcommand("emit-plotdata",
                                    "Observable time series from artifacts");
    emit->add_option("--artifacts", opts.artifacts,
                     "Output directory of a simulate run")
        ->required();
    emit->add_option("--observables", observables, "Observables spec (JSON)");
    emit->add_option("--out", opts.out, "Output directory");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::CallForVersion const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        app.exit(e);
        return ips::exit_usage;
    }

    for (auto* cmd : {simulate, verify})
    {
        if (cmd->count("--seed"))
            opts.seed = seed;
        if (cmd->count("--replicas"))
            opts.replicas = replicas;
    }
    opts.suites = split_commas(suites);
    if (!observables.empty())
        opts.observables = observables;

    ips::CommandStreams io{std::cout, std::cerr};
    if (*simulate)
        return ips::cmd_simulate(opts, io);
    if (*verify)
        return ips::cmd_verify(opts, io);
    return ips::cmd_emit_plotdata(opts, io);
}
