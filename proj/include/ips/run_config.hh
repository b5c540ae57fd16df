//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ips/run_config.hh
//! Run configuration file (JSON, schema "ipsim.run/1").
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "birth_death.hh"
#include "geometry.hh"
#include "scales.hh"
#include "spin_sde.hh"

namespace ips
{
//---------------------------------------------------------------------------//
inline constexpr char const run_schema_id[] = "ipsim.run/1";

//! Invalid configuration; the message starts with the offending field
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

struct DominationSuite
{
    int time_steps{16};
    int random_boxes{32};
};

struct GronwallSuite
{
    double B{0.2};
    double k{1};
    double b{1};
    double rho{1};
};

struct CutoffSuite
{
    //! Half-widths of nested boxes centered at the anchor
    std::vector<double> half_widths;
    int seeds{20};
};

struct MomentSuite
{
    int paths{20};
    double C1{1};
    double C2{1};
};

struct CadlagSuite
{
    int observables{20};
    //! Resolution; defaults to the integrator step
    std::optional<double> epsilon;
};

struct BoundsSuite
{
    std::size_t samples{10000};
};

struct RunConfig
{
    Window window{2, 1.0, BoundaryMode::periodic};
    BirthRateKernel kernel;
    double m{0};
    double T{1};
    CoefficientSet coefficients;
    InitialMarkPolicy initial_marks;
    IntegratorConfig integrator;
    ScaleParams scale;
    std::size_t output_stride{1};
    std::uint64_t seed{0};
    int replicas{1};

    // Initial configuration: explicit list or Poisson intensity
    bool poisson_initial{false};
    double initial_intensity{0};
    std::vector<Point> initial_points;

    DominationSuite domination;
    GronwallSuite gronwall;
    CutoffSuite cutoff;
    MomentSuite moments;
    CadlagSuite cadlag;
    BoundsSuite bounds;

    //! Fully resolved configuration (every constant, defaults filled in)
    nlohmann::json to_json() const;
};

// Parse and validate; throws ConfigError naming the field
RunConfig parse_run_config(nlohmann::json const& j);
RunConfig load_run_config(std::string const& path);

// Seed of replica r: split from the run seed
std::uint64_t replica_seed(std::uint64_t seed, int replica);

// gamma_0 for a replica (Poisson sample uses the replica seed)
Configuration initial_configuration(RunConfig const& cfg,
                                    std::uint64_t replica_seed);

//---------------------------------------------------------------------------//
}  // namespace ips
