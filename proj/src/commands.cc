//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file commands.cc
//---------------------------------------------------------------------------//
#include "ips/commands.hh"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <regex>
#include <thread>

#include <nlohmann/json.hpp>

#include "ips/birth_death.hh"
#include "ips/format.hh"
#include "ips/marked_process.hh"
#include "ips/rng.hh"
#include "ips/run_config.hh"
#include "ips/scales.hh"
#include "ips/spin_sde.hh"
#include "ips/statistics.hh"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ips
{
namespace
{
//---------------------------------------------------------------------------//
std::string replica_dir_name(std::size_t r)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "replica_%04zu", r);
    return buf;
}

std::ofstream open_output(fs::path const& p)
{
    std::ofstream os(p, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write '" + p.string() + "'");
    return os;
}

void write_json_file(fs::path const& p, json const& j)
{
    auto os = open_output(p);
    os << j.dump(2) << '\n';
}

RunConfig load_with_overrides(CommandOptions const& opts)
{
    if (opts.config.empty())
        throw ConfigError("--config: required");
    RunConfig cfg = load_run_config(opts.config);
    if (opts.seed)
        cfg.seed = *opts.seed;
    if (opts.replicas)
    {
        if (*opts.replicas < 1)
            throw ConfigError("--replicas: must be at least 1");
        cfg.replicas = *opts.replicas;
    }
    return cfg;
}

//! Everything produced for one replica
struct ReplicaRun
{
    std::uint64_t seed{0};
    std::optional<Trajectory> traj;
    std::optional<MarkPath> marks;
};

ReplicaRun run_replica(RunConfig const& cfg, std::size_t r, bool with_marks)
{
    ReplicaRun run;
    run.seed = replica_seed(cfg.seed, static_cast<int>(r));
    auto const gamma0 = initial_configuration(cfg, run.seed);
    run.traj = simulate(gamma0, cfg.kernel, cfg.m, cfg.T, run.seed);
    if (with_marks)
    {
        run.marks = integrate_marks(*run.traj, cfg.coefficients,
                                    cfg.initial_marks, cfg.integrator,
                                    run.seed);
    }
    return run;
}

void require_moment_order(RunConfig const& cfg)
{
    if (cfg.scale.p < cfg.coefficients.declared.R_growth)
        throw ConfigError("scale.p: must be >= R_growth ("
                          + format_double(cfg.coefficients.declared.R_growth)
                          + ") when norms are requested");
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index)
{
    return derive_key(derive_key(seed, StreamTag::sampling), index);
}

// Run body, mapping exceptions onto exit codes
int guarded(CommandStreams io, std::function<int()> const& body)
{
    try
    {
        return body();
    }
    catch (ConfigError const& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    catch (std::exception const& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_check_failure;
    }
}

}  // namespace

//---------------------------------------------------------------------------//
std::vector<std::string> const& verify_suite_names()
{
    static std::vector<std::string> const names{
        "domination", "gronwall", "cutoff", "moments", "cadlag", "bounds"};
    return names;
}

int resolve_threads(int requested)
{
    if (char const* env = std::getenv("SIM_THREADS"))
    {
        char* end = nullptr;
        long const v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1 || v > 4096)
            throw ConfigError("SIM_THREADS: must be a positive integer");
        return static_cast<int>(v);
    }
    if (requested > 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n,
                  int threads,
                  std::function<void(std::size_t)> const& fn)
{
    std::size_t const workers
        = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex lock;
    std::size_t failed_index = n;
    std::exception_ptr failure;
    auto work = [&] {
        while (true)
        {
            std::size_t const i = next.fetch_add(1);
            if (i >= n)
                return;
            try
            {
                fn(i);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> guard(lock);
                if (i < failed_index)
                {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back(work);
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

//---------------------------------------------------------------------------//
// SIMULATE
//---------------------------------------------------------------------------//
int cmd_simulate(CommandOptions const& opts, CommandStreams io)
{
    return guarded(io, [&] {
        RunConfig const cfg = load_with_overrides(opts);
        if (opts.out.empty())
            throw ConfigError("--out: required");
        int const threads = resolve_threads(opts.threads);
        fs::path const out(opts.out);
        fs::create_directories(out);

        auto const n = static_cast<std::size_t>(cfg.replicas);
        std::vector<json> summaries(n);
        parallel_for(n, threads, [&](std::size_t r) {
            ReplicaRun const run = run_replica(cfg, r, true);
            fs::path const dir = out / replica_dir_name(r);
            fs::create_directories(dir);
            {
                auto os = open_output(dir / "events.jsonl");
                write_event_log(os, *run.traj);
            }
            {
                auto os = open_output(dir / "driving.jsonl");
                write_driving_log(os, *run.traj);
            }
            auto const steps = stride_steps(*run.marks, cfg.integrator.dt,
                                            cfg.output_stride);
            {
                auto os = open_output(dir / "marks.csv");
                write_mark_csv(os, *run.marks, cfg.integrator.dt,
                               cfg.output_stride);
            }
            auto const mt = combine(*run.traj, *run.marks);
            {
                auto os = open_output(dir / "snapshots.jsonl");
                write_snapshots(os, mt, steps);
            }
            json summary{{"index", r},
                         {"dir", replica_dir_name(r)},
                         {"seed", run.seed},
                         {"initial_points", run.traj->gamma0().size()},
                         {"driving_points", run.traj->driving().size()},
                         {"births", run.traj->birth_count()},
                         {"deaths", run.traj->death_count()},
                         {"phantom_points", run.traj->phantom().size()},
                         {"grid_points", run.marks->steps()},
                         {"output_steps", steps.size()}};
            json manifest{{"schema", "ipsim.manifest/1"},
                          {"tool", "ipsim"},
                          {"version", tool_version},
                          {"config", cfg.to_json()},
                          {"replica", summary}};
            write_json_file(dir / "manifest.json", manifest);
            summaries[r] = std::move(summary);
        });

        json manifest{{"schema", "ipsim.manifest/1"},
                      {"tool", "ipsim"},
                      {"version", tool_version},
                      {"command", "simulate"},
                      {"config", cfg.to_json()},
                      {"replicas", summaries}};
        write_json_file(out / "manifest.json", manifest);
        io.out << "simulated " << n << " replica(s) into " << out.string()
               << '\n';
        return static_cast<int>(exit_pass);
    });
}

//---------------------------------------------------------------------------//
// VERIFY
//---------------------------------------------------------------------------//
int cmd_verify(CommandOptions const& opts, CommandStreams io)
{
    return guarded(io, [&] {
        std::vector<std::string> suites = opts.suites;
        if (suites.empty())
            suites = verify_suite_names();
        for (auto const& s : suites)
        {
            auto const& names = verify_suite_names();
            if (std::find(names.begin(), names.end(), s) == names.end())
                throw ConfigError("--suite: unknown suite '" + s + "'");
        }
        RunConfig const cfg = load_with_overrides(opts);
        int const threads = resolve_threads(opts.threads);
        auto has = [&](char const* name) {
            return std::find(suites.begin(), suites.end(), name)
                   != suites.end();
        };
        if (has("cutoff") || has("moments"))
            require_moment_order(cfg);

        auto const n = static_cast<std::size_t>(cfg.replicas);
        bool const need_marks = has("cadlag");
        std::map<std::string, std::vector<json>> results;
        std::map<std::string, bool> passed;
        for (auto const& s : suites)
        {
            results[s].resize(n);
            passed[s] = true;
        }
        std::mutex lock;
        auto record = [&](std::string const& suite,
                          std::size_t r,
                          bool ok,
                          json j) {
            j["passed"] = ok;
            std::lock_guard<std::mutex> guard(lock);
            results[suite][r] = std::move(j);
            if (!ok)
                passed[suite] = false;
        };

        bool const per_replica = std::any_of(
            suites.begin(), suites.end(), [](auto const& s) { return s != "bounds"; });
        if (per_replica)
        {
            parallel_for(n, threads, [&](std::size_t r) {
                ReplicaRun const run = run_replica(cfg, r, need_marks);
                Trajectory const& traj = *run.traj;
                json base{{"replica", r}, {"seed", run.seed}};

                if (has("domination"))
                {
                    auto const rep = verify_domination(
                        traj, cfg.domination.time_steps,
                        cfg.domination.random_boxes, sub_seed(run.seed, 0));
                    json j = base;
                    j["checks"] = rep.checks;
                    j["violations"] = rep.violations.size();
                    j["unmatched_births"] = rep.unmatched_births;
                    if (!rep.violations.empty())
                    {
                        auto const& v = rep.violations.front();
                        int const dim = traj.window().dim();
                        j["witness"] = {{"t", v.t},
                                        {"lo", position_to_json(v.box.lo, dim)},
                                        {"hi", position_to_json(v.box.hi, dim)},
                                        {"phantom_count", v.phantom_count},
                                        {"bound", v.bound}};
                    }
                    record("domination", r, rep.passed(), j);
                }
                if (has("gronwall"))
                {
                    json j = base;
                    auto const& phantom = traj.phantom();
                    if (phantom.empty())
                    {
                        j["note"] = "empty phantom configuration";
                        record("gronwall", r, true, j);
                    }
                    else
                    {
                        std::vector<double> b(phantom.size(), cfg.gronwall.b);
                        auto const rep = check_gronwall_lemma(
                            phantom, cfg.gronwall.B, cfg.gronwall.k, b, cfg.T,
                            cfg.scale, cfg.gronwall.rho);
                        j["report"] = rep.to_json();
                        record("gronwall", r, rep.holds, j);
                    }
                }
                if (has("cutoff"))
                {
                    std::vector<Box> boxes;
                    for (double h : cfg.cutoff.half_widths)
                        boxes.push_back(traj.window().centered_box(h));
                    std::vector<std::uint64_t> seeds;
                    for (int i = 0; i < cfg.cutoff.seeds; ++i)
                        seeds.push_back(sub_seed(run.seed, 100 + i));
                    auto const study = cutoff_convergence_study(
                        traj, cfg.coefficients, cfg.initial_marks,
                        cfg.integrator, boxes, cfg.scale, seeds);
                    json j = base;
                    j["study"] = study.to_json();
                    record("cutoff", r, study.nonincreasing, j);
                }
                if (has("moments"))
                {
                    std::vector<MarkPath> paths;
                    for (int i = 0; i < cfg.moments.paths; ++i)
                    {
                        paths.push_back(integrate_marks(
                            traj, cfg.coefficients, cfg.initial_marks,
                            cfg.integrator, sub_seed(run.seed, 10000 + i)));
                    }
                    auto const sample = moment_sample(traj, paths, cfg.scale);
                    MomentBoundInputs in;
                    in.phantom = &traj.phantom();
                    in.scale = cfg.scale;
                    in.rho = cfg.coefficients.rho;
                    in.T = cfg.T;
                    in.C1 = cfg.moments.C1;
                    in.C2 = cfg.moments.C2;
                    auto const rep = check_moment_growth(sample, in);
                    json j = base;
                    j["report"] = rep.to_json();
                    record("moments", r, rep.holds, j);
                }
                if (has("cadlag"))
                {
                    auto const mt = combine(traj, *run.marks);
                    double const eps
                        = cfg.cadlag.epsilon.value_or(cfg.integrator.dt);
                    bool ok = true;
                    auto reports = json::array();
                    for (int i = 0; i < cfg.cadlag.observables; ++i)
                    {
                        auto const g = random_observable(
                            traj.window(), sub_seed(run.seed, 20000 + i),
                            "g" + std::to_string(i));
                        auto const rep = cadlag_check(mt, g, eps);
                        ok = ok && rep.passed();
                        reports.push_back(rep.to_json());
                    }
                    json j = base;
                    j["observables"] = std::move(reports);
                    record("cadlag", r, ok, j);
                }
            });
        }
        if (has("bounds"))
        {
            auto const rep = check_drift_diffusion_bounds(
                cfg.coefficients, cfg.bounds.samples, sub_seed(cfg.seed, 0));
            results["bounds"].assign(1, rep.to_json());
            passed["bounds"] = rep.passed();
        }

        bool all = true;
        json report{{"schema", "ipsim.verify/1"},
                    {"tool", "ipsim"},
                    {"version", tool_version},
                    {"config", cfg.to_json()}};
        json suites_json = json::object();
        for (auto const& s : suites)
        {
            suites_json[s] = {{"passed", passed[s]}, {"results", results[s]}};
            all = all && passed[s];
            io.out << (passed[s] ? "PASS " : "FAIL ") << s << '\n';
            if (!passed[s])
            {
                for (auto const& entry : results[s])
                {
                    if (entry.contains("passed") && !entry["passed"].get<bool>())
                    {
                        io.err << s << " failure: " << entry.dump() << '\n';
                        break;
                    }
                    if (s == "bounds")
                        io.err << s << " failure: " << entry.dump() << '\n';
                }
            }
        }
        report["suites"] = std::move(suites_json);
        report["passed"] = all;
        if (!opts.out.empty())
        {
            fs::create_directories(opts.out);
            write_json_file(fs::path(opts.out) / "verify.json", report);
        }
        return static_cast<int>(all ? exit_pass : exit_check_failure);
    });
}

//---------------------------------------------------------------------------//
// EMIT-PLOTDATA
//---------------------------------------------------------------------------//
namespace
{
json read_json_file(fs::path const& p)
{
    std::ifstream in(p);
    if (!in)
        throw ConfigError("--artifacts: missing '" + p.string() + "'");
    try
    {
        return json::parse(in);
    }
    catch (json::parse_error const& e)
    {
        throw ConfigError("--artifacts: unreadable '" + p.string()
                          + "': " + e.what());
    }
}

std::vector<MarkedConfiguration> read_snapshots(fs::path const& p, int dim)
{
    std::ifstream in(p);
    if (!in)
        throw ConfigError("--artifacts: missing '" + p.string() + "'");
    std::vector<MarkedConfiguration> result;
    std::string line;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        auto const j = json::parse(line);
        MarkedConfiguration mc;
        mc.time = j.at("t").get<double>();
        for (auto const& pt : j.at("points"))
        {
            mc.pairs.push_back({{pt.at("id").get<PointId>(),
                                 position_from_json(pt.at("position"), dim)},
                                pt.at("mark").get<double>()});
        }
        result.push_back(std::move(mc));
    }
    return result;
}
}  // namespace

int cmd_emit_plotdata(CommandOptions const& opts, CommandStreams io)
{
    return guarded(io, [&] {
        if (opts.artifacts.empty())
            throw ConfigError("--artifacts: required");
        fs::path const art(opts.artifacts);
        json const manifest = read_json_file(art / "manifest.json");
        if (!manifest.contains("config") || !manifest.contains("replicas"))
            throw ConfigError("--artifacts: manifest lacks config or replicas");
        int const dim = manifest.at("config").at("window").at("dim").get<int>();

        std::vector<Observable> observables;
        if (opts.observables)
        {
            std::ifstream in(*opts.observables);
            if (!in)
                throw ConfigError("--observables: cannot open '"
                                  + *opts.observables + "'");
            json spec;
            try
            {
                spec = json::parse(in);
            }
            catch (json::parse_error const& e)
            {
                throw ConfigError(std::string("--observables: invalid JSON: ")
                                  + e.what());
            }
            if (spec.is_object() && spec.contains("observables"))
                spec = spec.at("observables");
            if (!spec.is_array())
                throw ConfigError("--observables: expected an array");
            std::regex const name_re("[A-Za-z0-9_-]+");
            for (std::size_t i = 0; i < spec.size(); ++i)
            {
                std::string const field
                    = "--observables[" + std::to_string(i) + "]";
                try
                {
                    observables.push_back(observable_from_json(spec[i], dim));
                }
                catch (std::exception const& e)
                {
                    throw ConfigError(field + ": " + e.what());
                }
                if (!std::regex_match(observables.back().name, name_re))
                    throw ConfigError(field
                                      + ".name: use letters, digits, '_' or '-'");
            }
        }

        fs::path const out = opts.out.empty() ? art / "plotdata"
                                              : fs::path(opts.out);
        fs::create_directories(out);
        if (observables.empty())
        {
            io.out << "no observables requested\n";
            return static_cast<int>(exit_pass);
        }

        std::vector<std::vector<MarkedConfiguration>> replicas;
        for (auto const& r : manifest.at("replicas"))
        {
            replicas.push_back(read_snapshots(
                art / r.at("dir").get<std::string>() / "snapshots.jsonl", dim));
        }
        std::size_t const steps = replicas.empty() ? 0 : replicas.front().size();
        for (auto const& rep : replicas)
        {
            if (rep.size() != steps)
                throw ConfigError("--artifacts: replicas have different grids");
            for (std::size_t s = 0; s < steps; ++s)
            {
                if (rep[s].time != replicas.front()[s].time)
                    throw ConfigError(
                        "--artifacts: replicas have different grids");
            }
        }

        for (auto const& g : observables)
        {
            auto series = open_output(out / (g.name + ".csv"));
            auto summary = open_output(out / (g.name + "_summary.csv"));
            series << "t,replica,value\n";
            summary << "t,mean,stderr,n\n";
            std::vector<double> values(replicas.size());
            for (std::size_t s = 0; s < steps; ++s)
            {
                std::string const ts = format_double(replicas.front()[s].time);
                for (std::size_t r = 0; r < replicas.size(); ++r)
                {
                    values[r] = observable(replicas[r][s], g, dim);
                    series << ts << ',' << r << ',' << format_double(values[r])
                           << '\n';
                }
                summary << ts << ',' << format_double(mean(values)) << ','
                        << format_double(standard_error(values)) << ','
                        << values.size() << '\n';
            }
        }
        io.out << "wrote " << observables.size() << " observable(s) to "
               << out.string() << '\n';
        return static_cast<int>(exit_pass);
    });
}

//---------------------------------------------------------------------------//
}  // namespace ips
