//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file marked_process.cc
//---------------------------------------------------------------------------//
#include "ips/marked_process.hh"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ips/format.hh"
#include "ips/rng.hh"

namespace ips
{
namespace
{
//---------------------------------------------------------------------------//
// Oscillation (max - min) of the interpolated mark of idx over [lo, hi]
double oscillation(MarkPath const& path, std::size_t idx, double lo, double hi)
{
    PointId const id = path.ids()[idx];
    double vmin = path.interpolate(id, lo);
    double vmax = vmin;
    double const vhi = path.interpolate(id, hi);
    vmin = std::min(vmin, vhi);
    vmax = std::max(vmax, vhi);
    auto const& times = path.times();
    for (std::size_t s = path.step_at_or_after(lo);
         s < times.size() && times[s] <= hi;
         ++s)
    {
        vmin = std::min(vmin, path.value(s, idx));
        vmax = std::max(vmax, path.value(s, idx));
    }
    return vmax - vmin;
}

// Largest oscillation over [lo, hi] among the given points
double local_modulus(MarkPath const& path,
                     MarkedConfiguration const& mc,
                     double lo,
                     double hi)
{
    double result = 0;
    for (auto const& mp : mc.pairs)
    {
        result = std::max(
            result, oscillation(path, path.index_of(mp.point.id), lo, hi));
    }
    return result;
}

MarkedConfiguration restrict_to(MarkedConfiguration const& mc,
                                Box const& box,
                                int dim)
{
    MarkedConfiguration out;
    out.time = mc.time;
    for (auto const& mp : mc.pairs)
    {
        if (box.contains(mp.point.position, dim))
            out.pairs.push_back(mp);
    }
    return out;
}

bool same_points(MarkedConfiguration const& a, MarkedConfiguration const& b)
{
    if (a.pairs.size() != b.pairs.size())
        return false;
    for (std::size_t i = 0; i < a.pairs.size(); ++i)
    {
        if (!(a.pairs[i].point == b.pairs[i].point))
            return false;
    }
    return true;
}

nlohmann::json box_to_json(Box const& b, int dim)
{
    return {{"lo", position_to_json(b.lo, dim)},
            {"hi", position_to_json(b.hi, dim)}};
}

Box box_from_json(nlohmann::json const& j, int dim)
{
    return {position_from_json(j.at("lo"), dim),
            position_from_json(j.at("hi"), dim)};
}

}  // namespace

//---------------------------------------------------------------------------//
// MARKED TRAJECTORY
//---------------------------------------------------------------------------//
MarkedTrajectory::MarkedTrajectory(Trajectory base, MarkPath marks)
    : base_(std::move(base)), marks_(std::move(marks))
{
}

MarkedConfiguration
MarkedTrajectory::at_step(std::size_t step, Side side) const
{
    MarkedConfiguration mc;
    mc.time = marks_.times().at(step);
    for (auto const& [id, x] : base_.phantom().by_id())
    {
        if (base_.present(id, mc.time, side))
            mc.pairs.push_back({{id, x}, marks_.value(step, marks_.index_of(id))});
    }
    return mc;
}

MarkedConfiguration MarkedTrajectory::at(double t, Side side) const
{
    if (!(t >= 0 && t <= base_.horizon()))
        throw std::out_of_range("time outside [0, T]");
    MarkedConfiguration mc;
    mc.time = t;
    for (auto const& [id, x] : base_.phantom().by_id())
    {
        if (base_.present(id, t, side))
            mc.pairs.push_back({{id, x}, marks_.interpolate(id, t)});
    }
    return mc;
}

MarkedTrajectory combine(Trajectory const& traj, MarkPath const& marks)
{
    for (auto const& [id, x] : traj.phantom().by_id())
    {
        if (!marks.has(id))
            throw std::invalid_argument("missing mark for point "
                                        + std::to_string(id));
    }
    if (marks.times().empty() || marks.times().front() != 0
        || marks.times().back() != traj.horizon())
    {
        throw std::invalid_argument("mark path does not span [0, T]");
    }
    return MarkedTrajectory(traj, marks);
}

std::size_t count_fibre_mismatches(MarkedTrajectory const& mt)
{
    std::size_t mismatches = 0;
    for (std::size_t s = 0; s < mt.grid().size(); ++s)
    {
        auto const mc = mt.at_step(s);
        auto const config = mt.base().config_at(mc.time);
        bool ok = config.size() == mc.size();
        auto iter = config.by_id().begin();
        for (std::size_t i = 0; ok && i < mc.pairs.size(); ++i, ++iter)
        {
            auto const& mp = mc.pairs[i];
            ok = iter->first == mp.point.id && iter->second == mp.point.position
                 && mp.mark
                        == mt.marks().value(s,
                                            mt.marks().index_of(mp.point.id));
        }
        if (!ok)
            ++mismatches;
    }
    return mismatches;
}

//---------------------------------------------------------------------------//
// OBSERVABLES
//---------------------------------------------------------------------------//
Observable Observable::count(std::string name, Box support, double weight)
{
    Observable g;
    g.name = std::move(name);
    g.kind = Kind::count;
    g.support = support;
    g.weight = weight;
    return g;
}

Observable Observable::mark_sum(std::string name, Box support)
{
    Observable g;
    g.name = std::move(name);
    g.kind = Kind::mark_sum;
    g.support = support;
    return g;
}

Observable Observable::bounded(
    std::string name, Box support, double offset, double weight, double scale)
{
    Observable g;
    g.name = std::move(name);
    g.kind = Kind::bounded;
    g.support = support;
    g.offset = offset;
    g.weight = weight;
    g.scale = scale;
    return g;
}

double Observable::operator()(Position const& x, double s, int dim) const
{
    if (!support.contains(x, dim))
        return 0;
    switch (kind)
    {
        case Kind::count:
            return weight;
        case Kind::mark_sum:
            return weight * s;
        case Kind::bounded:
            return offset + weight * std::tanh(scale * s);
    }
    return 0;
}

double Observable::lipschitz() const
{
    switch (kind)
    {
        case Kind::count:
            return 0;
        case Kind::mark_sum:
            return std::abs(weight);
        case Kind::bounded:
            return std::abs(weight * scale);
    }
    return 0;
}

double observable(MarkedConfiguration const& mc, Observable const& g, int dim)
{
    double total = 0;
    for (auto const& mp : mc.pairs)
        total += g(mp.point.position, mp.mark, dim);
    return total;
}

Observable
random_observable(Window const& window, std::uint64_t key, std::string name)
{
    StreamRng rng(key);
    double const side = window.side();
    Box box;
    for (int i = 0; i < window.dim(); ++i)
    {
        box.lo[i] = rng.uniform(0, 0.7 * side);
        box.hi[i] = std::min(side, box.lo[i] + rng.uniform(0.2, 0.6) * side);
    }
    double const offset = rng.uniform(-1, 1);
    double const weight = rng.uniform(-2, 2);
    double const scale = rng.uniform(0.2, 2);
    return Observable::bounded(std::move(name), box, offset, weight, scale);
}

//---------------------------------------------------------------------------//
// CADLAG CHECK
//---------------------------------------------------------------------------//
nlohmann::json CadlagReport::to_json() const
{
    auto event_json = [](CadlagEvent const& e) {
        return nlohmann::json{{"t", e.time},
                              {"kind", to_cstring(e.kind)},
                              {"id", e.id},
                              {"epsilon", e.epsilon},
                              {"right_diff", e.right_diff},
                              {"right_bound", e.right_bound},
                              {"left_gap", e.left_gap},
                              {"left_bound", e.left_bound},
                              {"jump", e.jump},
                              {"passed", e.passed}};
    };
    nlohmann::json j{{"observable", observable},
                     {"events_checked", events_checked},
                     {"passed", passed()}};
    if (witness)
        j["witness"] = event_json(*witness);
    return j;
}

double mark_modulus(MarkPath const& path, double eps)
{
    if (!(eps >= 0))
        throw std::invalid_argument("modulus resolution must be nonnegative");
    auto const& times = path.times();
    if (times.empty())
        return 0;
    double const T = times.back();
    double result = 0;
    for (std::size_t idx = 0; idx < path.ids().size(); ++idx)
    {
        PointId const id = path.ids()[idx];
        for (std::size_t i = 0; i < times.size(); ++i)
        {
            double const fi = path.value(i, idx);
            for (std::size_t j = i + 1;
                 j < times.size() && times[j] - times[i] <= eps;
                 ++j)
            {
                result = std::max(result, std::abs(path.value(j, idx) - fi));
            }
            if (times[i] + eps <= T)
                result = std::max(
                    result, std::abs(path.interpolate(id, times[i] + eps) - fi));
            if (times[i] - eps >= 0)
                result = std::max(
                    result, std::abs(fi - path.interpolate(id, times[i] - eps)));
        }
    }
    return result;
}

CadlagReport cadlag_check(MarkedTrajectory const& mt,
                          Observable const& g,
                          double epsilon,
                          int dyadic_levels)
{
    if (!(epsilon > 0))
        throw std::invalid_argument("cadlag resolution must be positive");
    if (dyadic_levels < 1)
        throw std::invalid_argument("need at least one dyadic level");
    int const dim = mt.base().window().dim();
    double const T = mt.base().horizon();
    double const L = g.lipschitz();
    auto const& path = mt.marks();

    std::vector<Event> support_events;
    for (Event const& e : mt.base().events())
    {
        if (g.support.contains(e.point.position, dim))
            support_events.push_back(e);
    }

    CadlagReport report;
    report.observable = g.name;
    auto fail = [&](CadlagEvent& ev) {
        ev.passed = false;
        if (!report.witness)
            report.witness = ev;
    };

    for (std::size_t k = 0; k < support_events.size(); ++k)
    {
        Event const& e = support_events[k];
        double const t = e.time;
        double const next = k + 1 < support_events.size()
                                ? support_events[k + 1].time
                                : T;
        double const prev = k > 0 ? support_events[k - 1].time : 0.0;
        double eps = epsilon;
        if (next > t)
            eps = std::min(eps, 0.5 * (next - t));
        eps = std::min(eps, 0.5 * (t - prev));

        CadlagEvent ev;
        ev.time = t;
        ev.kind = e.kind;
        ev.id = e.point.id;
        ev.epsilon = eps;
        ++report.events_checked;
        if (!(eps > 0))
        {
            // Coincident events cannot be resolved on any grid
            fail(ev);
            report.events.push_back(ev);
            continue;
        }

        // Right continuity
        auto const here = restrict_to(mt.at(t), g.support, dim);
        double const value = observable(here, g, dim);
        if (t < T)
        {
            double const tr = std::min(T, t + eps);
            auto const right = restrict_to(mt.at(tr), g.support, dim);
            ev.right_diff = std::abs(observable(right, g, dim) - value);
            double const omega = local_modulus(path, here, t, tr);
            ev.right_bound = L * static_cast<double>(here.size()) * omega
                             + 1e-12 * (1 + std::abs(value));
            if (!same_points(here, right) || ev.right_diff > ev.right_bound)
                fail(ev);
        }

        // Left limit along t - eps / 2^j
        auto const left_state = restrict_to(mt.at(t, Side::left), g.support, dim);
        double const left_value = observable(left_state, g, dim);
        ev.jump = value - left_value;
        auto bound_on = [&](MarkedConfiguration const& mc, double lo) {
            return L * static_cast<double>(mc.size())
                       * local_modulus(path, mc, lo, t)
                   + 1e-12 * (1 + std::abs(left_value));
        };
        double previous = 0;
        double previous_t = t - eps;
        for (int j = 0; j <= dyadic_levels; ++j)
        {
            double const tl = t - std::ldexp(eps, -j);
            auto const before = restrict_to(mt.at(tl), g.support, dim);
            double const v = observable(before, g, dim);
            if (!same_points(before, left_state))
            {
                fail(ev);
                break;
            }
            // Successive values differ by at most the oscillation on
            // [previous_t, t]
            if (j > 0 && std::abs(v - previous) > bound_on(before, previous_t))
                fail(ev);
            previous = v;
            previous_t = tl;
            if (j == dyadic_levels)
            {
                ev.left_gap = std::abs(v - left_value);
                ev.left_bound = bound_on(before, tl);
                if (ev.left_gap > ev.left_bound)
                    fail(ev);
            }
        }
        report.events.push_back(ev);
    }
    return report;
}

//---------------------------------------------------------------------------//
// OUTPUT
//---------------------------------------------------------------------------//
void write_snapshots(std::ostream& os,
                     MarkedTrajectory const& mt,
                     std::vector<std::size_t> const& steps)
{
    int const dim = mt.base().window().dim();
    for (std::size_t s : steps)
    {
        auto const mc = mt.at_step(s);
        auto points = nlohmann::json::array();
        for (auto const& mp : mc.pairs)
        {
            points.push_back({{"id", mp.point.id},
                              {"position", position_to_json(mp.point.position, dim)},
                              {"mark", mp.mark}});
        }
        nlohmann::json line{{"t", mc.time}, {"points", std::move(points)}};
        os << line.dump() << '\n';
    }
}

void write_observable_csv(std::ostream& os,
                          MarkedTrajectory const& mt,
                          std::vector<Observable> const& observables,
                          std::vector<std::size_t> const& steps)
{
    int const dim = mt.base().window().dim();
    os << "t,observable,value\n";
    for (std::size_t s : steps)
    {
        auto const mc = mt.at_step(s);
        std::string const ts = format_double(mc.time);
        for (auto const& g : observables)
            os << ts << ',' << g.name << ','
               << format_double(observable(mc, g, dim)) << '\n';
    }
}

nlohmann::json to_json(Observable const& g, int dim)
{
    char const* kind = "count";
    if (g.kind == Observable::Kind::mark_sum)
        kind = "mark_sum";
    else if (g.kind == Observable::Kind::bounded)
        kind = "bounded";
    return {{"name", g.name},
            {"type", kind},
            {"box", box_to_json(g.support, dim)},
            {"weight", g.weight},
            {"scale", g.scale},
            {"offset", g.offset}};
}

Observable observable_from_json(nlohmann::json const& j, int dim)
{
    auto const name = j.at("name").get<std::string>();
    auto const type = j.value("type", std::string{"count"});
    Box const box = box_from_json(j.at("box"), dim);
    if (type == "count")
        return Observable::count(name, box, j.value("weight", 1.0));
    if (type == "mark_sum")
    {
        auto g = Observable::mark_sum(name, box);
        g.weight = j.value("weight", 1.0);
        return g;
    }
    if (type == "bounded")
        return Observable::bounded(name, box, j.value("offset", 0.0),
                                   j.value("weight", 1.0),
                                   j.value("scale", 1.0));
    throw std::invalid_argument("observable.type: unknown '" + type + "'");
}

//---------------------------------------------------------------------------//
}  // namespace ips
