//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file test_birth_death.cc
//---------------------------------------------------------------------------//
#include "ips/birth_death.hh"

#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "ips/rng.hh"

using namespace ips;

namespace
{
Configuration poisson_config(Window const& w, double intensity,
                             std::uint64_t key)
{
    StreamRng rng(key);
    auto const n = sample_poisson(rng, intensity * w.volume());
    Configuration c(w);
    for (std::uint64_t i = 0; i < n; ++i)
    {
        Position x{};
        for (int d = 0; d < w.dim(); ++d)
            x[d] = rng.uniform(0, w.side());
        c.insert({static_cast<PointId>(i), x});
    }
    return c;
}

// Glauber rate by direct summation
double brute_glauber(double z, double height, double radius, Window const& w,
                     Position const& x, std::map<PointId, Position> const& pts)
{
    double e = 0;
    for (auto const& [id, y] : pts)
    {
        double const d = w.distance(x, y);
        if (d > 0 && d <= radius)
            e += height;
    }
    return z * std::exp(-e);
}

struct SimpleEvent
{
    double t;
    bool birth;
    PointId id;
};

// Thinning replay from the recorded driving process and lifetimes
std::vector<SimpleEvent> replay(Trajectory const& traj, double z,
                                double height, double radius)
{
    Window const& w = traj.window();
    double const m = traj.death_rate();
    std::map<PointId, Position> alive = traj.gamma0().by_id();
    std::multimap<double, PointId> deaths;
    for (auto const& l : traj.initial_lifetimes())
    {
        if (m > 0 && l.s / m <= traj.horizon())
            deaths.emplace(l.s / m, l.id);
    }
    std::vector<SimpleEvent> out;
    PointId next = traj.gamma0().next_id();
    auto flush = [&](double t) {
        while (!deaths.empty() && deaths.begin()->first <= t)
        {
            out.push_back({deaths.begin()->first, false,
                           deaths.begin()->second});
            alive.erase(deaths.begin()->second);
            deaths.erase(deaths.begin());
        }
    };
    for (auto const& c : traj.driving())
    {
        flush(c.s);
        if (c.u <= brute_glauber(z, height, radius, w, c.x, alive))
        {
            alive[next] = c.x;
            out.push_back({c.s, true, next});
            if (m > 0 && c.s + c.r / m <= traj.horizon())
                deaths.emplace(c.s + c.r / m, next);
            ++next;
        }
    }
    flush(traj.horizon());
    return out;
}
}  // namespace

TEST_CASE("birth rate evaluation")
{
    Window w(2, 10, BoundaryMode::periodic);
    auto const c = poisson_config(w, 1.0, 3);
    auto const k = BirthRateKernel::glauber(2.0, RadialKernel::step(0.7, 1.2));
    CHECK(k.b_max == 2.0);
    StreamRng rng(8);
    for (int i = 0; i < 100; ++i)
    {
        Position x{rng.uniform(0, 10), rng.uniform(0, 10), 0};
        CHECK(evaluate_birth_rate(k, x, c)
              == doctest::Approx(brute_glauber(2, 0.7, 1.2, w, x, c.by_id())));
    }

    auto f = BirthRateKernel::fecundity(RadialKernel::step(1, 1),
                                        RadialKernel::zero(),
                                        RadialKernel::zero(), 0.5);
    Configuration dense(w);
    dense.insert({0, {5, 5, 0}});
    dense.insert({1, {5.1, 5, 0}});
    CHECK_THROWS_WITH_AS(evaluate_birth_rate(f, {5, 5.2, 0}, dense),
                         doctest::Contains("bound violation"),
                         std::domain_error);
}

TEST_CASE("driving process intensity")
{
    Window w(2, 5, BoundaryMode::open);
    double total = 0;
    int const reps = 400;
    for (int r = 0; r < reps; ++r)
    {
        auto const d = sample_driving_process(w, 1.0, 2.0, 1000 + r);
        total += static_cast<double>(d.size());
        for (std::size_t i = 1; i < d.size(); ++i)
            CHECK(d[i - 1].s <= d[i].s);
        for (auto const& c : d)
        {
            CHECK(c.u >= 0);
            CHECK(c.u <= 2.0);
            CHECK(w.contains(c.x));
        }
    }
    // Poisson(50): standard error of the mean is sqrt(50/400)
    CHECK(std::abs(total / reps - 50) < 4 * std::sqrt(50.0 / reps));
}

TEST_CASE("simulation replays exactly from its driving process")
{
    Window w(2, 6, BoundaryMode::periodic);
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
        auto const g0 = poisson_config(w, 0.8, seed * 7);
        auto const k
            = BirthRateKernel::glauber(1.5, RadialKernel::step(0.9, 0.8));
        auto const traj = simulate(g0, k, 0.7, 2.0, seed);
        auto const expect = replay(traj, 1.5, 0.9, 0.8);
        auto const& ev = traj.events();
        REQUIRE(ev.size() == expect.size());
        for (std::size_t i = 0; i < ev.size(); ++i)
        {
            CHECK(ev[i].time == expect[i].t);
            CHECK((ev[i].kind == EventKind::birth) == expect[i].birth);
            CHECK(ev[i].point.id == expect[i].id);
        }
        auto const dom = verify_domination(traj, 16, 32, seed);
        CHECK(dom.passed());
    }
}

TEST_CASE("presence and configurations")
{
    Window w(2, 5, BoundaryMode::open);
    auto const g0 = poisson_config(w, 1.0, 4);
    auto const traj = simulate(g0, BirthRateKernel::constant(1.0), 1.0, 1.5, 9);
    for (auto const& e : traj.events())
    {
        PointId const id = e.point.id;
        if (e.kind == EventKind::birth)
        {
            CHECK(traj.present(id, e.time));
            CHECK_FALSE(traj.present(id, e.time, Side::left));
        }
        else
        {
            CHECK_FALSE(traj.present(id, e.time));
            CHECK(traj.present(id, e.time, Side::left));
        }
    }
    CHECK(traj.config_at(0).points() == g0.points());
    CHECK(traj.phantom().size() == g0.size() + traj.birth_count());

    auto const half = traj.restricted(0.75);
    for (auto const& e : half.events())
        CHECK(e.time <= 0.75);
    for (auto const& [id, x] : half.phantom().by_id())
        CHECK(traj.phantom().contains(id));
    CHECK(half.config_at(0.5).points() == traj.config_at(0.5).points());
}

TEST_CASE("pure death has no births")
{
    Window w(1, 10, BoundaryMode::open);
    auto const g0 = poisson_config(w, 5, 2);
    auto const traj = simulate(g0, BirthRateKernel::constant(0), 1.0, 0.7, 3);
    CHECK(traj.birth_count() == 0);
    CHECK(traj.driving().empty());
    CHECK(traj.death_count() + traj.config_at(0.7).size() == g0.size());
}

TEST_CASE("event log round trip")
{
    Window w(2, 4, BoundaryMode::periodic);
    auto const g0 = poisson_config(w, 1.0, 12);
    auto const k = BirthRateKernel::glauber(1.0, RadialKernel::step(0.5, 0.5));
    auto const traj = simulate(g0, k, 0.5, 1.0, 5);
    std::stringstream ss;
    write_event_log(ss, traj);
    auto const back = read_event_log(ss);
    REQUIRE(back.events().size() == traj.events().size());
    for (std::size_t i = 0; i < traj.events().size(); ++i)
    {
        CHECK(back.events()[i].time == traj.events()[i].time);
        CHECK(back.events()[i].point == traj.events()[i].point);
    }
    CHECK(back.phantom().points() == traj.phantom().points());
    CHECK(back.gamma0().points() == traj.gamma0().points());
}

TEST_CASE("glauber lipschitz bound")
{
    Window w(2, 8, BoundaryMode::open);
    auto const k = BirthRateKernel::glauber(
        2.0, RadialKernel::tempered(0.5, 1.0, 2));
    auto const r = check_glauber_lipschitz(k, w, 0.5, 1.0, 2000, 4);
    CHECK(r.samples == 2000);
    CHECK(r.violations == 0);
    CHECK(r.max_ratio <= 1.0);
}
