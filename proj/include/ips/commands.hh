//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ips/commands.hh
//! Subcommands of the ipsim tool.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ips
{
//---------------------------------------------------------------------------//
inline constexpr char const tool_version[] = "0.1.0";

enum ExitCode : int
{
    exit_pass = 0,
    exit_check_failure = 1,
    exit_usage = 2,
};

struct CommandOptions
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicas;
    std::string out;
    std::vector<std::string> suites;
    std::string artifacts;
    std::optional<std::string> observables;
    //! Worker threads for replicas; 0 selects the default
    int threads{0};
};

struct CommandStreams
{
    std::ostream& out;
    std::ostream& err;
};

// Names accepted by --suite
std::vector<std::string> const& verify_suite_names();

// Thread count: SIM_THREADS, else the requested value, else hardware cores.
// Throws std::invalid_argument for a malformed SIM_THREADS.
int resolve_threads(int requested);

// Run fn(i) for i in [0, n) on up to `threads` workers. Rethrows the
// exception of the lowest failing index.
void parallel_for(std::size_t n,
                  int threads,
                  std::function<void(std::size_t)> const& fn);

int cmd_simulate(CommandOptions const& opts, CommandStreams io);
int cmd_verify(CommandOptions const& opts, CommandStreams io);
int cmd_emit_plotdata(CommandOptions const& opts, CommandStreams io);

//---------------------------------------------------------------------------//
}  // namespace ips
