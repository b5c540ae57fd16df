//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file birth_death.cc
//---------------------------------------------------------------------------//
#include "ips/birth_death.hh"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <tuple>

#include <nlohmann/json.hpp>

#include "ips/rng.hh"

namespace ips
{
namespace
{

// Sum of kernel(|x - y|) over y in config, skipping points at distance 0
// when exclude_self is set.
double kernel_sum(Configuration const& config,
                  Position const& x,
                  RadialKernel const& kernel,
                  bool exclude_self)
{
    if (kernel.kind == RadialKernel::Kind::zero)
        return 0;
    Window const& w = config.window();
    double sum = 0;
    auto accumulate = [&](Position const& y) {
        double const d = w.distance(x, y);
        if (exclude_self && d == 0)
            return;
        sum += kernel(d);
    };
    double const range = kernel.range();
    if (std::isfinite(range))
    {
        config.for_each_within(
            x, range, [&](Point const& p) { accumulate(p.position); });
    }
    else
    {
        for (auto const& [id, y] : config.by_id())
            accumulate(y);
    }
    return sum;
}

// Fecundity rate: sum over parents y near x
double fecundity_rate(BirthRateKernel const& k,
                      Position const& x,
                      Configuration const& config)
{
    Window const& w = config.window();
    double total = 0;
    auto parent = [&](Point const& y) {
        double const ay = k.a(w.distance(x, y.position));
        if (ay == 0)
            return;
        double csum = 0;
        double phisum = 0;
        auto other = [&](Point const& z) {
            if (z.id == y.id)
                return;
            double const d = w.distance(z.position, y.position);
            csum += k.c(d);
            phisum += k.phi(d);
        };
        double const inner = std::max(k.c.range(), k.phi.range());
        if (std::isfinite(inner))
        {
            config.for_each_within(y.position, inner, other);
        }
        else
        {
            for (auto const& [id, pos] : config.by_id())
                other(Point{id, pos});
        }
        total += ay * (1 + csum) * std::exp(-phisum);
    };
    double const range = k.a.range();
    if (std::isfinite(range))
    {
        config.for_each_within(x, range, parent);
    }
    else
    {
        for (auto const& [id, pos] : config.by_id())
            parent(Point{id, pos});
    }
    return total;
}

double grid_cell_for(BirthRateKernel const& kernel, Window const& window)
{
    double const range = kernel.interaction_range();
    if (std::isfinite(range) && range > 0)
        return range;
    return std::min(window.side(), 1.0);
}
}  // namespace

//---------------------------------------------------------------------------//
// KERNELS
//---------------------------------------------------------------------------//
RadialKernel RadialKernel::step(double height, double radius)
{
    if (!(height >= 0) || !(radius > 0))
        throw std::invalid_argument("step kernel needs height >= 0, radius > 0");
    RadialKernel k;
    k.kind = Kind::step;
    k.height = height;
    k.radius = radius;
    return k;
}

RadialKernel RadialKernel::tempered(double height, double epsilon, int dim)
{
    if (!(height >= 0) || !(epsilon > 0))
        throw std::invalid_argument(
            "tempered kernel needs height >= 0, epsilon > 0");
    RadialKernel k;
    k.kind = Kind::tempered;
    k.height = height;
    k.epsilon = epsilon;
    k.dim = dim;
    return k;
}

double RadialKernel::operator()(double r) const
{
    switch (kind)
    {
        case Kind::zero:
            return 0;
        case Kind::step:
            return r <= radius ? height : 0.0;
        case Kind::tempered:
            return height * std::pow(1.0 + r, -dim - epsilon);
    }
    return 0;
}

double RadialKernel::range() const
{
    switch (kind)
    {
        case Kind::zero:
            return 0;
        case Kind::step:
            return radius;
        case Kind::tempered:
            return std::numeric_limits<double>::infinity();
    }
    return 0;
}

BirthRateKernel BirthRateKernel::constant(double z)
{
    if (!(z >= 0))
        throw std::invalid_argument("constant birth rate must be >= 0");
    BirthRateKernel k;
    k.variant = Variant::constant;
    k.z = z;
    k.b_max = z;
    return k;
}

BirthRateKernel BirthRateKernel::glauber(double z, RadialKernel phi)
{
    if (!(z >= 0))
        throw std::invalid_argument("glauber activity must be >= 0");
    BirthRateKernel k;
    k.variant = Variant::glauber;
    k.z = z;
    k.phi = phi;
    k.b_max = z;
    return k;
}

BirthRateKernel BirthRateKernel::fecundity(RadialKernel a,
                                           RadialKernel c,
                                           RadialKernel phi,
                                           double b_max)
{
    BirthRateKernel k;
    k.variant = Variant::fecundity;
    k.a = a;
    k.c = c;
    k.phi = phi;
    k.b_max = b_max;
    return k;
}

BirthRateKernel BirthRateKernel::establishment(RadialKernel a,
                                               RadialKernel c,
                                               RadialKernel phi,
                                               double b_max)
{
    BirthRateKernel k;
    k.variant = Variant::establishment;
    k.a = a;
    k.c = c;
    k.phi = phi;
    k.b_max = b_max;
    return k;
}

double BirthRateKernel::interaction_range() const
{
    switch (variant)
    {
        case Variant::constant:
            return 0;
        case Variant::glauber:
            return phi.range();
        case Variant::establishment:
            return std::max({a.range(), c.range(), phi.range()});
        case Variant::fecundity:
            // parents within range(a), their competitors within range(c, phi)
            return a.range() + std::max(c.range(), phi.range());
    }
    return 0;
}

double evaluate_birth_rate(BirthRateKernel const& kernel,
                           Position const& x,
                           Configuration const& config)
{
    double b = 0;
    switch (kernel.variant)
    {
        case BirthRateKernel::Variant::constant:
            b = kernel.z;
            break;
        case BirthRateKernel::Variant::glauber:
            b = kernel.z * std::exp(-kernel_sum(config, x, kernel.phi, true));
            break;
        case BirthRateKernel::Variant::establishment:
            b = kernel_sum(config, x, kernel.a, false)
                * (1 + kernel_sum(config, x, kernel.c, false))
                * std::exp(-kernel_sum(config, x, kernel.phi, false));
            break;
        case BirthRateKernel::Variant::fecundity:
            b = fecundity_rate(kernel, x, config);
            break;
    }
    if (!(b >= 0) || !std::isfinite(b))
        throw std::domain_error("birth rate is negative or non-finite");
    if (b > kernel.b_max)
        throw std::domain_error("bound violation: b(x, gamma) = "
                                + std::to_string(b) + " exceeds b_max = "
                                + std::to_string(kernel.b_max));
    return b;
}

//---------------------------------------------------------------------------//
// DRIVING PROCESS
//---------------------------------------------------------------------------//
std::vector<DrivingPoint> sample_driving_process(Window const& window,
                                                 double horizon,
                                                 double b_max,
                                                 std::uint64_t seed)
{
    if (!(horizon > 0))
        throw std::invalid_argument("horizon must be positive");
    if (!(b_max >= 0))
        throw std::invalid_argument("b_max must be nonnegative");
    std::vector<DrivingPoint> result;
    if (b_max == 0)
        return result;

    // Candidate times: arrivals of a rate b_max * vol process on (0, T].
    // Marks of candidate i come from their own keyed stream.
    std::uint64_t const key = derive_key(seed, StreamTag::driving);
    StreamRng clock(derive_key(key, ~std::uint64_t{0}));
    double const rate = b_max * window.volume();
    double s = clock.exponential(rate);
    std::uint64_t index = 0;
    while (s <= horizon)
    {
        StreamRng marks(derive_key(key, index));
        DrivingPoint dp;
        dp.s = s;
        for (int i = 0; i < window.dim(); ++i)
            dp.x[i] = marks.uniform(0, window.side());
        dp.u = marks.uniform(0, b_max);
        dp.r = marks.exponential();
        result.push_back(dp);
        ++index;
        s += clock.exponential(rate);
    }
    return result;
}

//---------------------------------------------------------------------------//
// TRAJECTORY
//---------------------------------------------------------------------------//
Trajectory::Trajectory(Configuration gamma0,
                       BirthRateKernel kernel,
                       double death_rate,
                       double horizon,
                       std::uint64_t seed)
    : gamma0_(std::move(gamma0))
    , kernel_(kernel)
    , death_rate_(death_rate)
    , horizon_(horizon)
    , seed_(seed)
    , phantom_(gamma0_)
{
    if (!(horizon > 0))
        throw std::invalid_argument("horizon must be positive");
    if (!(death_rate >= 0))
        throw std::invalid_argument("death rate must be nonnegative");
    for (auto const& [id, x] : gamma0_.by_id())
        presence_[id] = Presence{0, horizon_, true, false};
}

void Trajectory::record_birth(double t, Point const& p, std::size_t candidate)
{
    events_.push_back({t, EventKind::birth, p});
    phantom_.insert(p);
    presence_[p.id] = Presence{t, horizon_, false, false};
    if (candidate != Trajectory::unknown_candidate)
        birth_candidate_[p.id] = candidate;
}

void Trajectory::record_death(double t, PointId id)
{
    auto& pres = presence_.at(id);
    pres.end = t;
    pres.died = true;
    events_.push_back({t, EventKind::death, {id, phantom_.position(id)}});
}

bool Trajectory::present(PointId id, double t, Side side) const
{
    auto iter = presence_.find(id);
    if (iter == presence_.end())
        return false;
    Presence const& p = iter->second;
    if (side == Side::right)
        return p.start <= t && (!p.died || t < p.end);
    bool const started = p.initial || p.start < t;
    return started && (!p.died || t <= p.end);
}

Configuration Trajectory::config_at(double t, Side side) const
{
    if (!(t >= 0 && t <= horizon_))
        throw std::out_of_range("time outside [0, T]");
    Configuration result(this->window(), gamma0_.cell_size());
    for (auto const& [id, x] : phantom_.by_id())
    {
        if (this->present(id, t, side))
            result.insert({id, x});
    }
    return result;
}

Trajectory Trajectory::restricted(double new_horizon) const
{
    if (!(new_horizon > 0 && new_horizon <= horizon_))
        throw std::out_of_range("restricted horizon outside (0, T]");
    Trajectory result(gamma0_, kernel_, death_rate_, new_horizon, seed_);
    std::vector<DrivingPoint> driving;
    for (auto const& dp : driving_)
    {
        if (dp.s <= new_horizon)
            driving.push_back(dp);
    }
    result.driving_ = std::move(driving);
    result.lifetimes_ = lifetimes_;
    for (auto const& e : events_)
    {
        if (e.time > new_horizon)
            break;
        if (e.kind == EventKind::birth)
        {
            auto iter = birth_candidate_.find(e.point.id);
            result.record_birth(e.time, e.point,
                                iter == birth_candidate_.end() ? Trajectory::unknown_candidate
                                                               : iter->second);
        }
        else
        {
            result.record_death(e.time, e.point.id);
        }
    }
    return result;
}

std::size_t Trajectory::birth_count() const
{
    return static_cast<std::size_t>(
        std::count_if(events_.begin(), events_.end(), [](Event const& e) {
            return e.kind == EventKind::birth;
        }));
}

std::size_t Trajectory::death_count() const
{
    return events_.size() - this->birth_count();
}

//---------------------------------------------------------------------------//
// SIMULATION
//---------------------------------------------------------------------------//
Trajectory simulate(Configuration const& gamma0,
                    BirthRateKernel const& kernel,
                    double death_rate,
                    double horizon,
                    std::uint64_t seed)
{
    Window const& window = gamma0.window();
    Trajectory traj(gamma0, kernel, death_rate, horizon, seed);
    auto driving = sample_driving_process(window, horizon, kernel.b_max, seed);

    std::vector<InitialLifetime> lifetimes;
    std::uint64_t const life_key = derive_key(seed, StreamTag::initial_lifetime);
    for (auto const& [id, x] : gamma0.by_id())
    {
        StreamRng rng(derive_key(life_key, static_cast<std::uint64_t>(id)));
        lifetimes.push_back({id, rng.exponential()});
    }

    // Pending deaths ordered by (time, sequence index). Initial points use
    // sequence indices [0, N0), candidate i uses N0 + i.
    using Pending = std::tuple<double, std::size_t, PointId>;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> deaths;
    std::size_t const n0 = lifetimes.size();
    if (death_rate > 0)
    {
        for (std::size_t j = 0; j < n0; ++j)
        {
            double const t = lifetimes[j].s / death_rate;
            if (t <= horizon)
                deaths.emplace(t, j, lifetimes[j].id);
        }
    }

    Configuration current = gamma0.reindexed(grid_cell_for(kernel, window));
    auto flush_deaths_before = [&](double t, std::size_t seq) {
        while (!deaths.empty())
        {
            auto const& [td, sd, id] = deaths.top();
            if (td > t || (td == t && sd > seq))
                break;
            current.erase(id);
            traj.record_death(td, id);
            deaths.pop();
        }
    };

    PointId next_id = gamma0.next_id();
    for (std::size_t i = 0; i < driving.size(); ++i)
    {
        DrivingPoint const& cand = driving[i];
        std::size_t const seq = n0 + i;
        flush_deaths_before(cand.s, seq);
        for (int k = 0; k < window.dim(); ++k)
        {
            if (std::isnan(cand.x[k]))
                throw std::domain_error("NaN candidate position");
        }
        double const b = evaluate_birth_rate(kernel, cand.x, current);
        if (cand.u <= b)
        {
            Point const p{next_id++, cand.x};
            current.insert(p);
            traj.record_birth(cand.s, p, i);
            if (death_rate > 0)
            {
                double const t = cand.s + cand.r / death_rate;
                if (t <= horizon)
                    deaths.emplace(t, seq, p.id);
            }
        }
    }
    flush_deaths_before(std::numeric_limits<double>::infinity(),
                        std::numeric_limits<std::size_t>::max());

    traj.set_driving(std::move(driving));
    traj.set_initial_lifetimes(std::move(lifetimes));
    return traj;
}

std::size_t event_count_in(Trajectory const& traj,
                           Box const& box,
                           double t0,
                           double t1)
{
    int const dim = traj.window().dim();
    return static_cast<std::size_t>(std::count_if(
        traj.events().begin(), traj.events().end(), [&](Event const& e) {
            return e.time >= t0 && e.time <= t1
                   && box.contains(e.point.position, dim);
        }));
}

//---------------------------------------------------------------------------//
// DOMINATION
//---------------------------------------------------------------------------//
DominationReport verify_domination(Trajectory const& traj,
                                   int time_steps,
                                   int random_boxes,
                                   std::uint64_t seed)
{
    DominationReport report;
    Window const& w = traj.window();
    int const dim = w.dim();
    auto const& driving = traj.driving();
    double const bmax = traj.kernel().b_max;

    // Every born point must coincide with its driving candidate.
    for (auto const& e : traj.events())
    {
        if (e.kind != EventKind::birth)
            continue;
        auto iter = traj.birth_candidates().find(e.point.id);
        if (iter == traj.birth_candidates().end() || iter->second >= driving.size())
        {
            report.unmatched_births.push_back(e.point.id);
            continue;
        }
        DrivingPoint const& dp = driving[iter->second];
        if (dp.s != e.time || dp.x != e.point.position || dp.u > bmax)
            report.unmatched_births.push_back(e.point.id);
    }

    // Boxes: whole window, dyadic level 1 and 2 cells, and random boxes.
    std::vector<Box> boxes{w.box()};
    for (int level = 1; level <= 2; ++level)
    {
        int const n = 1 << level;
        int total = 1;
        for (int i = 0; i < dim; ++i)
            total *= n;
        for (int cell = 0; cell < total; ++cell)
        {
            Box b;
            int rem = cell;
            for (int i = 0; i < dim; ++i)
            {
                int const c = rem % n;
                rem /= n;
                b.lo[i] = w.side() * c / n;
                b.hi[i] = w.side() * (c + 1) / n;
            }
            boxes.push_back(b);
        }
    }
    StreamRng rng(derive_key(seed, StreamTag::sampling));
    for (int k = 0; k < random_boxes; ++k)
    {
        Box b;
        for (int i = 0; i < dim; ++i)
        {
            double const a = rng.uniform(0, w.side());
            double const c = rng.uniform(0, w.side());
            b.lo[i] = std::min(a, c);
            b.hi[i] = std::max(a, c);
        }
        boxes.push_back(b);
    }

    // Check times: a uniform grid plus every birth time.
    std::vector<double> times;
    for (int j = 1; j <= time_steps; ++j)
        times.push_back(traj.horizon() * j / time_steps);
    for (auto const& e : traj.events())
    {
        if (e.kind == EventKind::birth)
            times.push_back(e.time);
    }
    std::sort(times.begin(), times.end());

    for (Box const& box : boxes)
    {
        std::size_t initial = 0;
        for (auto const& [id, x] : traj.gamma0().by_id())
            initial += box.contains(x, dim) ? 1 : 0;
        std::vector<double> cand_times;
        for (auto const& dp : driving)
        {
            if (dp.u <= bmax && box.contains(dp.x, dim))
                cand_times.push_back(dp.s);
        }
        std::vector<double> birth_times;
        for (auto const& e : traj.events())
        {
            if (e.kind == EventKind::birth && box.contains(e.point.position, dim))
                birth_times.push_back(e.time);
        }
        for (double t : times)
        {
            auto const born = static_cast<std::size_t>(
                std::upper_bound(birth_times.begin(), birth_times.end(), t)
                - birth_times.begin());
            auto const cands = static_cast<std::size_t>(
                std::upper_bound(cand_times.begin(), cand_times.end(), t)
                - cand_times.begin());
            ++report.checks;
            if (initial + born > initial + cands)
                report.violations.push_back({t, box, initial + born,
                                             initial + cands});
        }
    }
    return report;
}

//---------------------------------------------------------------------------//
GlauberLipschitzReport check_glauber_lipschitz(BirthRateKernel const& kernel,
                                               Window const& window,
                                               double bound_b,
                                               double epsilon,
                                               std::size_t samples,
                                               std::uint64_t seed)
{
    if (kernel.variant != BirthRateKernel::Variant::glauber)
        throw std::invalid_argument("Lipschitz spot-check needs a Glauber kernel");
    TemperedWeight const weight(epsilon, window.dim());
    GlauberLipschitzReport report;
    StreamRng rng(derive_key(seed, StreamTag::sampling));
    for (std::size_t k = 0; k < samples; ++k)
    {
        Configuration config(window, grid_cell_for(kernel, window));
        double const mean = rng.uniform(0, 3) * window.volume();
        auto const n = sample_poisson(rng, mean);
        for (std::uint64_t i = 0; i < n; ++i)
        {
            Position x{};
            for (int d = 0; d < window.dim(); ++d)
                x[d] = rng.uniform(0, window.side());
            config.insert({static_cast<PointId>(i), x});
        }
        Position x{}, y{};
        for (int d = 0; d < window.dim(); ++d)
        {
            x[d] = rng.uniform(0, window.side());
            y[d] = rng.uniform(0, window.side());
        }
        double const before = evaluate_birth_rate(kernel, x, config);
        config.insert({static_cast<PointId>(n), y});
        double const after = evaluate_birth_rate(kernel, x, config);
        double const lhs = std::fabs(after - before);
        double const rhs = kernel.z * bound_b * weight(window.distance(x, y));
        ++report.samples;
        double const ratio = rhs > 0 ? lhs / rhs : (lhs > 0 ? INFINITY : 0.0);
        report.max_ratio = std::max(report.max_ratio, ratio);
        if (lhs > rhs * (1 + 1e-12))
            ++report.violations;
    }
    return report;
}

//---------------------------------------------------------------------------//
// SERIALIZATION
//---------------------------------------------------------------------------//
char const* to_cstring(EventKind k)
{
    return k == EventKind::birth ? "birth" : "death";
}

nlohmann::json to_json(RadialKernel const& k)
{
    switch (k.kind)
    {
        case RadialKernel::Kind::zero:
            return {{"type", "zero"}};
        case RadialKernel::Kind::step:
            return {{"type", "step"}, {"height", k.height}, {"radius", k.radius}};
        case RadialKernel::Kind::tempered:
            return {{"type", "tempered"},
                    {"height", k.height},
                    {"epsilon", k.epsilon}};
    }
    return {};
}

RadialKernel radial_kernel_from_json(nlohmann::json const& j, int dim)
{
    auto const type = j.at("type").get<std::string>();
    if (type == "zero")
        return RadialKernel::zero();
    if (type == "step")
        return RadialKernel::step(j.at("height").get<double>(),
                                  j.at("radius").get<double>());
    if (type == "tempered")
        return RadialKernel::tempered(j.at("height").get<double>(),
                                      j.at("epsilon").get<double>(), dim);
    throw std::invalid_argument("unknown radial kernel type '" + type + "'");
}

nlohmann::json to_json(BirthRateKernel const& k)
{
    switch (k.variant)
    {
        case BirthRateKernel::Variant::constant:
            return {{"type", "constant"}, {"z", k.z}, {"b_max", k.b_max}};
        case BirthRateKernel::Variant::glauber:
            return {{"type", "glauber"},
                    {"z", k.z},
                    {"phi", to_json(k.phi)},
                    {"b_max", k.b_max}};
        case BirthRateKernel::Variant::fecundity:
        case BirthRateKernel::Variant::establishment:
            return {{"type",
                     k.variant == BirthRateKernel::Variant::fecundity
                         ? "fecundity"
                         : "establishment"},
                    {"a", to_json(k.a)},
                    {"c", to_json(k.c)},
                    {"phi", to_json(k.phi)},
                    {"b_max", k.b_max}};
    }
    return {};
}

BirthRateKernel birth_kernel_from_json(nlohmann::json const& j, int dim)
{
    auto const type = j.at("type").get<std::string>();
    if (type == "constant")
        return BirthRateKernel::constant(j.at("z").get<double>());
    if (type == "glauber")
        return BirthRateKernel::glauber(
            j.at("z").get<double>(), radial_kernel_from_json(j.at("phi"), dim));
    if (type == "fecundity" || type == "establishment")
    {
        auto a = radial_kernel_from_json(j.at("a"), dim);
        auto c = radial_kernel_from_json(j.at("c"), dim);
        auto phi = radial_kernel_from_json(j.at("phi"), dim);
        double const b_max = j.at("b_max").get<double>();
        if (!(b_max > 0))
            throw std::invalid_argument("kernel.b_max must be positive");
        return type == "fecundity"
                   ? BirthRateKernel::fecundity(a, c, phi, b_max)
                   : BirthRateKernel::establishment(a, c, phi, b_max);
    }
    throw std::invalid_argument("unknown birth kernel type '" + type + "'");
}

void write_event_log(std::ostream& os, Trajectory const& traj)
{
    int const dim = traj.window().dim();
    nlohmann::json header{{"record", "header"},
                          {"schema", "ipsim.events/1"},
                          {"seed", traj.seed()},
                          {"T", traj.horizon()},
                          {"m", traj.death_rate()},
                          {"kernel", to_json(traj.kernel())},
                          {"window", to_json(traj.window())},
                          {"gamma0", points_to_json(traj.gamma0())}};
    os << header.dump() << '\n';
    for (auto const& e : traj.events())
    {
        nlohmann::json line{{"t", e.time},
                            {"kind", to_cstring(e.kind)},
                            {"id", e.point.id},
                            {"position", position_to_json(e.point.position, dim)}};
        os << line.dump() << '\n';
    }
}

void write_driving_log(std::ostream& os, Trajectory const& traj)
{
    int const dim = traj.window().dim();
    for (auto const& dp : traj.driving())
    {
        nlohmann::json line{{"s", dp.s},
                            {"x", position_to_json(dp.x, dim)},
                            {"u", dp.u},
                            {"r", dp.r}};
        os << line.dump() << '\n';
    }
}

Trajectory read_event_log(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("event log is empty");
    auto const header = nlohmann::json::parse(line);
    if (header.value("record", std::string{}) != "header")
        throw std::invalid_argument("event log must start with a header record");
    Window const window = window_from_json(header.at("window"));
    auto kernel = birth_kernel_from_json(header.at("kernel"), window.dim());
    kernel.b_max = header.at("kernel").at("b_max").get<double>();
    Trajectory traj(configuration_from_json(window, header.at("gamma0"),
                                            grid_cell_for(kernel, window)),
                    kernel,
                    header.at("m").get<double>(),
                    header.at("T").get<double>(),
                    header.at("seed").get<std::uint64_t>());
    while (std::getline(is, line))
    {
        if (line.empty())
            continue;
        auto const j = nlohmann::json::parse(line);
        double const t = j.at("t").get<double>();
        auto const kind = j.at("kind").get<std::string>();
        PointId const id = j.at("id").get<PointId>();
        if (kind == "birth")
        {
            traj.record_birth(
                t, {id, position_from_json(j.at("position"), window.dim())},
                Trajectory::unknown_candidate);
        }
        else if (kind == "death")
        {
            traj.record_death(t, id);
        }
        else
        {
            throw std::invalid_argument("unknown event kind '" + kind + "'");
        }
    }
    return traj;
}

//---------------------------------------------------------------------------//
}  // namespace ips
