//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file run_config.cc
//---------------------------------------------------------------------------//
#include "ips/run_config.hh"

#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "ips/rng.hh"

namespace ips
{
namespace
{
//---------------------------------------------------------------------------//
using nlohmann::json;

[[noreturn]] void fail(std::string const& field, std::string const& what)
{
    throw ConfigError(field + ": " + what);
}

void check_keys(json const& obj,
                std::string const& path,
                std::set<std::string> const& allowed)
{
    if (!obj.is_object())
        fail(path.empty() ? "config" : path, "must be an object");
    for (auto const& [key, value] : obj.items())
    {
        if (!allowed.count(key))
            fail(path.empty() ? key : path + "." + key, "unknown field");
    }
}

double number(json const& obj,
              char const* key,
              std::string const& path,
              double fallback)
{
    if (!obj.contains(key))
        return fallback;
    auto const& v = obj.at(key);
    if (!v.is_number())
        fail(path + key, "must be a number");
    double const x = v.get<double>();
    if (!std::isfinite(x))
        fail(path + key, "must be finite");
    return x;
}

long long integer(json const& obj,
                  char const* key,
                  std::string const& path,
                  long long fallback)
{
    if (!obj.contains(key))
        return fallback;
    auto const& v = obj.at(key);
    if (!v.is_number_integer())
        fail(path + key, "must be an integer");
    return v.get<long long>();
}

// Run a sub-parser, prefixing its errors with the field name
template<class F>
auto parse_field(std::string const& field, F&& f) -> decltype(f())
{
    try
    {
        return f();
    }
    catch (ConfigError const&)
    {
        throw;
    }
    catch (std::exception const& e)
    {
        fail(field, e.what());
    }
}

}  // namespace

//---------------------------------------------------------------------------//
RunConfig parse_run_config(json const& j)
{
    check_keys(j,
               "",
               {"schema", "window", "kernel", "m", "T", "coefficients",
                "initial", "initial_marks", "integrator", "scale", "output",
                "seed", "replicas", "verify"});
    if (!j.contains("schema"))
        fail("schema", "missing (expected \"" + std::string(run_schema_id)
                           + "\")");
    if (!j.at("schema").is_string()
        || j.at("schema").get<std::string>() != run_schema_id)
        fail("schema", "unsupported (expected \"" + std::string(run_schema_id)
                           + "\")");

    RunConfig cfg;
    if (!j.contains("window"))
        fail("window", "missing");
    cfg.window = parse_field("window", [&] {
        check_keys(j.at("window"), "window", {"dim", "side", "boundary", "anchor"});
        return window_from_json(j.at("window"));
    });
    int const dim = cfg.window.dim();

    if (!j.contains("kernel"))
        fail("kernel", "missing");
    cfg.kernel = parse_field(
        "kernel", [&] { return birth_kernel_from_json(j.at("kernel"), dim); });
    if (!(cfg.kernel.b_max >= 0) || !std::isfinite(cfg.kernel.b_max))
        fail("kernel", "birth-rate bound must be finite and nonnegative");

    cfg.m = number(j, "m", "", 0.0);
    if (!(cfg.m >= 0))
        fail("m", "must be nonnegative");
    cfg.T = number(j, "T", "", 1.0);
    if (!(cfg.T > 0))
        fail("T", "must be positive");

    if (j.contains("coefficients"))
    {
        cfg.coefficients = parse_field("coefficients", [&] {
            check_keys(j.at("coefficients"), "coefficients",
                       {"single", "pair_drift", "pair_diffusion", "rho",
                        "declared"});
            return coefficient_set_from_json(j.at("coefficients"));
        });
    }
    auto const& declared = cfg.coefficients.declared;
    for (double v : {declared.a_bar, declared.b_diss, declared.c, declared.M})
    {
        if (!(v >= 0) || !std::isfinite(v))
            fail("coefficients.declared", "constants must be finite and >= 0");
    }
    if (!(declared.R_growth >= 2))
        fail("coefficients.declared.R_growth", "must be at least 2");

    if (j.contains("initial_marks"))
    {
        cfg.initial_marks = parse_field("initial_marks", [&] {
            return initial_mark_policy_from_json(j.at("initial_marks"), dim);
        });
    }
    if (j.contains("integrator"))
    {
        cfg.integrator = parse_field("integrator", [&] {
            check_keys(j.at("integrator"), "integrator",
                       {"dt", "scheme", "noise", "brownian_levels"});
            return integrator_config_from_json(j.at("integrator"));
        });
    }
    if (j.contains("scale"))
    {
        cfg.scale = parse_field("scale", [&] {
            check_keys(j.at("scale"), "scale",
                       {"alpha_star", "alpha_sup", "alpha", "beta", "p", "q"});
            return scale_params_from_json(j.at("scale"));
        });
    }
    parse_field("scale", [&] { cfg.scale.validate(); });

    if (j.contains("output"))
    {
        auto const& o = j.at("output");
        check_keys(o, "output", {"stride"});
        auto const stride = integer(o, "stride", "output.", 1);
        if (stride < 1)
            fail("output.stride", "must be at least 1");
        cfg.output_stride = static_cast<std::size_t>(stride);
    }

    if (j.contains("seed"))
    {
        if (!j.at("seed").is_number_unsigned()
            && !(j.at("seed").is_number_integer()
                 && j.at("seed").get<long long>() >= 0))
            fail("seed", "must be a nonnegative integer");
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    auto const replicas = integer(j, "replicas", "", 1);
    if (replicas < 1 || replicas > 1000000)
        fail("replicas", "must be in [1, 1000000]");
    cfg.replicas = static_cast<int>(replicas);

    if (j.contains("initial"))
    {
        auto const& init = j.at("initial");
        check_keys(init, "initial", {"type", "points", "intensity"});
        auto const type = init.value("type", std::string{"explicit"});
        if (type == "poisson")
        {
            cfg.poisson_initial = true;
            cfg.initial_intensity = number(init, "intensity", "initial.", 0);
            if (!(cfg.initial_intensity >= 0))
                fail("initial.intensity", "must be nonnegative");
        }
        else if (type == "explicit")
        {
            if (init.contains("points"))
            {
                auto const& pts = init.at("points");
                if (!pts.is_array())
                    fail("initial.points", "must be an array");
                Configuration check(cfg.window);
                for (std::size_t i = 0; i < pts.size(); ++i)
                {
                    std::string const field
                        = "initial.points[" + std::to_string(i) + "]";
                    parse_field(field, [&] {
                        auto const& p = pts[i];
                        check_keys(p, field, {"id", "position", "mark"});
                        Point point{p.at("id").get<PointId>(),
                                    position_from_json(p.at("position"), dim)};
                        check.insert(point);
                        cfg.initial_points.push_back(point);
                        if (p.contains("mark"))
                            cfg.initial_marks.explicit_marks[point.id]
                                = p.at("mark").get<double>();
                    });
                }
            }
        }
        else
        {
            fail("initial.type", "unknown '" + type + "'");
        }
    }

    if (j.contains("verify"))
    {
        auto const& v = j.at("verify");
        check_keys(v, "verify",
                   {"domination", "gronwall", "cutoff", "moments", "cadlag",
                    "bounds"});
        if (v.contains("domination"))
        {
            auto const& d = v.at("domination");
            check_keys(d, "verify.domination", {"time_steps", "random_boxes"});
            cfg.domination.time_steps = static_cast<int>(
                integer(d, "time_steps", "verify.domination.", 16));
            cfg.domination.random_boxes = static_cast<int>(
                integer(d, "random_boxes", "verify.domination.", 32));
            if (cfg.domination.time_steps < 1 || cfg.domination.random_boxes < 0)
                fail("verify.domination", "counts must be positive");
        }
        if (v.contains("gronwall"))
        {
            auto const& g = v.at("gronwall");
            std::string const p = "verify.gronwall.";
            check_keys(g, "verify.gronwall", {"B", "k", "b", "rho"});
            cfg.gronwall.B = number(g, "B", p, 0.2);
            cfg.gronwall.k = number(g, "k", p, 1);
            cfg.gronwall.b = number(g, "b", p, 1);
            cfg.gronwall.rho = number(g, "rho", p, 1);
            if (!(cfg.gronwall.B >= 0))
                fail(p + "B", "must be nonnegative");
            if (!(cfg.gronwall.k >= 1))
                fail(p + "k", "must be at least 1");
            if (!(cfg.gronwall.b >= 0))
                fail(p + "b", "must be nonnegative");
            if (!(cfg.gronwall.rho >= 0))
                fail(p + "rho", "must be nonnegative");
        }
        if (v.contains("cutoff"))
        {
            auto const& c = v.at("cutoff");
            check_keys(c, "verify.cutoff", {"half_widths", "seeds"});
            if (c.contains("half_widths"))
            {
                for (auto const& h : c.at("half_widths"))
                {
                    if (!h.is_number() || !(h.get<double>() >= 0))
                        fail("verify.cutoff.half_widths",
                             "entries must be nonnegative numbers");
                    cfg.cutoff.half_widths.push_back(h.get<double>());
                }
            }
            cfg.cutoff.seeds
                = static_cast<int>(integer(c, "seeds", "verify.cutoff.", 20));
            if (cfg.cutoff.seeds < 1)
                fail("verify.cutoff.seeds", "must be at least 1");
        }
        if (v.contains("moments"))
        {
            auto const& mo = v.at("moments");
            std::string const p = "verify.moments.";
            check_keys(mo, "verify.moments", {"paths", "C1", "C2"});
            cfg.moments.paths = static_cast<int>(integer(mo, "paths", p, 20));
            cfg.moments.C1 = number(mo, "C1", p, 1);
            cfg.moments.C2 = number(mo, "C2", p, 1);
            if (cfg.moments.paths < 1)
                fail(p + "paths", "must be at least 1");
            if (!(cfg.moments.C1 > 0))
                fail(p + "C1", "must be positive");
            if (!(cfg.moments.C2 >= 0))
                fail(p + "C2", "must be nonnegative");
        }
        if (v.contains("cadlag"))
        {
            auto const& c = v.at("cadlag");
            check_keys(c, "verify.cadlag", {"observables", "epsilon"});
            cfg.cadlag.observables = static_cast<int>(
                integer(c, "observables", "verify.cadlag.", 20));
            if (cfg.cadlag.observables < 0)
                fail("verify.cadlag.observables", "must be nonnegative");
            if (c.contains("epsilon"))
            {
                cfg.cadlag.epsilon = number(c, "epsilon", "verify.cadlag.", 0);
                if (!(*cfg.cadlag.epsilon > 0))
                    fail("verify.cadlag.epsilon", "must be positive");
            }
        }
        if (v.contains("bounds"))
        {
            auto const& b = v.at("bounds");
            check_keys(b, "verify.bounds", {"samples"});
            auto const samples = integer(b, "samples", "verify.bounds.", 10000);
            if (samples < 1)
                fail("verify.bounds.samples", "must be at least 1");
            cfg.bounds.samples = static_cast<std::size_t>(samples);
        }
    }
    if (cfg.cutoff.half_widths.empty())
    {
        double const s = cfg.window.side();
        cfg.cutoff.half_widths = {s / 8, s / 4, 3 * s / 8, s / 2};
    }
    return cfg;
}

RunConfig load_run_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        fail("--config", "cannot open '" + path + "'");
    json j;
    try
    {
        in >> j;
    }
    catch (json::parse_error const& e)
    {
        fail("--config", std::string("invalid JSON: ") + e.what());
    }
    return parse_run_config(j);
}

//---------------------------------------------------------------------------//
nlohmann::json RunConfig::to_json() const
{
    int const dim = window.dim();
    json initial;
    if (poisson_initial)
    {
        initial = {{"type", "poisson"}, {"intensity", initial_intensity}};
    }
    else
    {
        auto pts = json::array();
        for (auto const& p : initial_points)
            pts.push_back(
                {{"id", p.id}, {"position", position_to_json(p.position, dim)}});
        initial = {{"type", "explicit"}, {"points", std::move(pts)}};
    }
    return {{"schema", run_schema_id},
            {"window", ips::to_json(window)},
            {"kernel", ips::to_json(kernel)},
            {"m", m},
            {"T", T},
            {"coefficients", ips::to_json(coefficients)},
            {"initial", std::move(initial)},
            {"initial_marks", ips::to_json(initial_marks, dim)},
            {"integrator", ips::to_json(integrator)},
            {"scale", ips::to_json(scale)},
            {"output", {{"stride", output_stride}}},
            {"seed", seed},
            {"replicas", replicas},
            {"verify",
             {{"domination",
               {{"time_steps", domination.time_steps},
                {"random_boxes", domination.random_boxes}}},
              {"gronwall",
               {{"B", gronwall.B},
                {"k", gronwall.k},
                {"b", gronwall.b},
                {"rho", gronwall.rho}}},
              {"cutoff",
               {{"half_widths", cutoff.half_widths}, {"seeds", cutoff.seeds}}},
              {"moments",
               {{"paths", moments.paths},
                {"C1", moments.C1},
                {"C2", moments.C2}}},
              {"cadlag",
               {{"observables", cadlag.observables},
                {"epsilon", cadlag.epsilon.value_or(integrator.dt)}}},
              {"bounds", {{"samples", bounds.samples}}}}}};
}

std::uint64_t replica_seed(std::uint64_t seed, int replica)
{
    return derive_key(derive_key(seed, StreamTag::replica),
                      static_cast<std::uint64_t>(replica));
}

Configuration initial_configuration(RunConfig const& cfg,
                                    std::uint64_t replica_seed)
{
    Configuration config(cfg.window);
    if (!cfg.poisson_initial)
    {
        for (auto const& p : cfg.initial_points)
            config.insert(p);
        return config;
    }
    StreamRng rng(derive_key(replica_seed, StreamTag::initial_config));
    auto const n = sample_poisson(rng, cfg.initial_intensity * cfg.window.volume());
    for (std::uint64_t i = 0; i < n; ++i)
    {
        Position x{};
        for (int d = 0; d < cfg.window.dim(); ++d)
            x[d] = rng.uniform(0, cfg.window.side());
        config.insert({static_cast<PointId>(i), x});
    }
    return config;
}

//---------------------------------------------------------------------------//
}  // namespace ips
