//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file spin_sde.cc
//---------------------------------------------------------------------------//
#include "ips/spin_sde.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ips/format.hh"
#include "ips/rng.hh"
#include "ips/statistics.hh"

namespace ips
{
namespace
{
//---------------------------------------------------------------------------//
// Phantom-indexed view of a trajectory used by the integrator
struct SolveSetup
{
    std::vector<PointId> ids;
    std::vector<Position> positions;
    std::vector<Presence> presence;
    std::vector<std::vector<std::size_t>> neighbors;
};

SolveSetup make_setup(Trajectory const& traj, double rho)
{
    SolveSetup s;
    auto const& phantom = traj.phantom();
    std::map<PointId, std::size_t> index;
    for (auto const& [id, x] : phantom.by_id())
    {
        index[id] = s.ids.size();
        s.ids.push_back(id);
        s.positions.push_back(x);
        s.presence.push_back(traj.presence().at(id));
    }
    s.neighbors.resize(s.ids.size());
    for (std::size_t i = 0; i < s.ids.size(); ++i)
    {
        for (Point const& y : neighbors_within(phantom, s.ids[i], rho))
            s.neighbors[i].push_back(index.at(y.id));
    }
    return s;
}

bool present_right(Presence const& p, double t)
{
    return p.start <= t && (!p.died || t < p.end);
}

[[noreturn]] void throw_blow_up(PointId id, double t)
{
    throw std::runtime_error("blow-up at (" + std::to_string(id) + ", "
                             + std::to_string(t) + ")");
}

//! lhs <= rhs up to a relative slack on the magnitude of the terms
bool exceeds(double lhs, double rhs, double scale)
{
    constexpr double slack = 1e-12;
    scale = std::max({std::abs(lhs), std::abs(rhs), scale});
    return lhs > rhs + slack * scale;
}

void record(BoundCheck& check,
            double lhs,
            double rhs,
            double scale,
            BoundWitness const& w)
{
    ++check.samples;
    if (rhs > 0)
        check.max_ratio = std::max(check.max_ratio, lhs / rhs);
    if (exceeds(lhs, rhs, scale))
    {
        ++check.violations;
        if (!check.witness)
        {
            check.witness = w;
            check.witness->lhs = lhs;
            check.witness->rhs = rhs;
        }
    }
}

}  // namespace

//---------------------------------------------------------------------------//
// COEFFICIENTS
//---------------------------------------------------------------------------//
DeclaredConstants
CoefficientSet::derive_constants(SingleDrift const& single,
                                 PairDrift const& pair_drift,
                                 PairDiffusion const& diffusion)
{
    DeclaredConstants d;
    switch (single.kind)
    {
        case SingleDrift::Kind::zero:
            d.c = 0;
            d.R_growth = 2;
            d.b_diss = 0;
            break;
        case SingleDrift::Kind::linear:
            // |lambda sigma| <= |lambda| (1 + sigma^2)
            d.c = std::abs(single.param);
            d.R_growth = 2;
            d.b_diss = std::max(-single.param, 0.0);
            break;
        case SingleDrift::Kind::cubic:
            d.c = 1 + std::abs(single.param);
            d.R_growth = 3;
            d.b_diss = std::max(single.param, 0.0);
            break;
    }
    d.a_bar = pair_drift.kind == PairDrift::Kind::zero ? 0
                                                       : std::abs(pair_drift.J);
    d.M = diffusion.kind == PairDiffusion::Kind::zero
              ? 0
              : std::abs(diffusion.kappa);
    return d;
}

CoefficientSet CoefficientSet::make(SingleDrift single,
                                    PairDrift pair_drift,
                                    PairDiffusion diffusion,
                                    double rho)
{
    if (!(rho >= 0) || !std::isfinite(rho))
        throw std::invalid_argument("interaction radius must be finite and "
                                    "nonnegative");
    CoefficientSet c;
    c.single = single;
    c.pair_drift = pair_drift;
    c.pair_diffusion = diffusion;
    c.rho = rho;
    c.declared = derive_constants(single, pair_drift, diffusion);
    return c;
}

double CoefficientSet::drift(double zx, std::span<double const> zy) const
{
    double result = single(zx);
    for (double s : zy)
        result += pair_drift(zx, s);
    return result;
}

double CoefficientSet::diffusion(double zx, std::span<double const> zy) const
{
    double result = 0;
    for (double s : zy)
        result += pair_diffusion(zx, s);
    return result;
}

std::vector<std::pair<std::string, CoefficientSet>> builtin_coefficient_sets()
{
    using SK = SingleDrift::Kind;
    using PK = PairDrift::Kind;
    using DK = PairDiffusion::Kind;
    return {
        {"linear-decay",
         CoefficientSet::make({SK::linear, 1.0}, {}, {}, 1.0)},
        {"cubic-linear-constant",
         CoefficientSet::make({SK::cubic, 1.0}, {PK::linear, 0.5},
                              {DK::constant, 0.3}, 1.0)},
        {"cubic-coupling-linear",
         CoefficientSet::make({SK::cubic, 0.5}, {PK::coupling, 0.25},
                              {DK::linear, 0.2}, 1.0)},
        {"linear-linear-bounded",
         CoefficientSet::make({SK::linear, 2.0}, {PK::linear, -0.3},
                              {DK::bounded, 0.5}, 1.5)},
        {"cubic-coupling-bounded",
         CoefficientSet::make({SK::cubic, 2.0}, {PK::coupling, 1.0},
                              {DK::bounded, 1.0}, 0.75)},
    };
}

//---------------------------------------------------------------------------//
// STATE
//---------------------------------------------------------------------------//
InitialMarkPolicy InitialMarkPolicy::constant(double v)
{
    InitialMarkPolicy p;
    p.kind = Kind::constant;
    p.value = v;
    return p;
}

InitialMarkPolicy InitialMarkPolicy::affine(double offset, Position gradient)
{
    InitialMarkPolicy p;
    p.kind = Kind::affine;
    p.value = offset;
    p.gradient = gradient;
    return p;
}

double InitialMarkPolicy::operator()(PointId id, Position const& x) const
{
    if (auto iter = explicit_marks.find(id); iter != explicit_marks.end())
        return iter->second;
    if (kind == Kind::constant)
        return value;
    double v = value;
    for (int i = 0; i < max_dim; ++i)
        v += gradient[i] * x[i];
    return v;
}

//---------------------------------------------------------------------------//
// BROWNIAN FIELD
//---------------------------------------------------------------------------//
BrownianField::BrownianField(std::uint64_t seed, int levels)
    : key_(derive_key(seed, StreamTag::brownian)), levels_(levels)
{
    if (levels < 0 || levels > 32)
        throw std::invalid_argument("brownian_levels must be in [0, 32]");
}

double BrownianField::operator()(PointId id, double t) const
{
    if (!(t >= 0) || !std::isfinite(t))
        throw std::invalid_argument("Brownian path evaluated at invalid time");
    auto const key = derive_key(key_, static_cast<std::uint64_t>(id));
    double const whole = std::floor(t);
    auto const n = static_cast<std::uint64_t>(whole);
    double const frac = t - whole;

    auto unit = [&](std::uint64_t k) {
        return keyed_normal(key,
                            {0u, 0u, static_cast<std::uint32_t>(k),
                             static_cast<std::uint32_t>(k >> 32)});
    };
    double wa = 0;
    for (std::uint64_t k = 0; k < n; ++k)
        wa += unit(k);
    if (frac == 0)
        return wa;
    double wb = wa + unit(n);

    double a = 0, b = 1;
    std::uint32_t idx = 0;
    auto const n_lo = static_cast<std::uint32_t>(n);
    auto const n_hi = static_cast<std::uint32_t>(n >> 32);
    for (int level = 1; level <= levels_; ++level)
    {
        double const mid = 0.5 * (a + b);
        double const wm
            = 0.5 * (wa + wb)
              + std::sqrt(0.25 * (b - a))
                    * keyed_normal(key,
                                   {static_cast<std::uint32_t>(level), idx,
                                    n_lo, n_hi});
        if (frac == mid)
            return wm;
        if (frac < mid)
        {
            b = mid;
            wb = wm;
            idx = 2 * idx;
        }
        else
        {
            a = mid;
            wa = wm;
            idx = 2 * idx + 1;
        }
    }
    return wa + (wb - wa) * (frac - a) / (b - a);
}

//---------------------------------------------------------------------------//
// MARK PATH
//---------------------------------------------------------------------------//
MarkPath::MarkPath(std::vector<double> times, std::vector<PointId> ids)
    : times_(std::move(times)), ids_(std::move(ids))
{
    for (std::size_t i = 0; i < ids_.size(); ++i)
        index_[ids_[i]] = i;
    values_.assign(times_.size() * ids_.size(), 0.0);
}

std::size_t MarkPath::index_of(PointId id) const
{
    auto iter = index_.find(id);
    if (iter == index_.end())
        throw std::out_of_range("unknown point " + std::to_string(id));
    return iter->second;
}

MarkState MarkPath::state(std::size_t step) const
{
    MarkState s;
    s.time = times_.at(step);
    for (std::size_t i = 0; i < ids_.size(); ++i)
        s.values[ids_[i]] = value(step, i);
    return s;
}

std::size_t MarkPath::step_at_or_after(double t) const
{
    return static_cast<std::size_t>(
        std::lower_bound(times_.begin(), times_.end(), t) - times_.begin());
}

double MarkPath::interpolate(PointId id, double t) const
{
    if (times_.empty() || t < times_.front() || t > times_.back())
        throw std::out_of_range("time outside the mark path");
    std::size_t const idx = index_of(id);
    std::size_t hi = step_at_or_after(t);
    if (times_[hi] == t)
        return value(hi, idx);
    std::size_t const lo = hi - 1;
    double const w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    return value(lo, idx) + w * (value(hi, idx) - value(lo, idx));
}

//---------------------------------------------------------------------------//
// ASSEMBLY
//---------------------------------------------------------------------------//
namespace
{
// Marks of x and of its present rho-neighbors at t (ordered by id)
bool gather(PointId x,
            double t,
            MarkState const& marks,
            Trajectory const& traj,
            double rho,
            double& zx,
            std::vector<double>& zy)
{
    if (!traj.phantom().contains(x))
        throw std::out_of_range("unknown point " + std::to_string(x));
    auto lookup = [&](PointId id) {
        auto iter = marks.values.find(id);
        if (iter == marks.values.end())
            throw std::out_of_range("unknown point " + std::to_string(id)
                                    + " in mark state");
        return iter->second;
    };
    zx = lookup(x);
    if (!traj.present(x, t))
        return false;
    zy.clear();
    for (Point const& y : neighbors_within(traj.phantom(), x, rho))
    {
        if (traj.present(y.id, t))
            zy.push_back(lookup(y.id));
    }
    return true;
}
}  // namespace

double assemble_drift(PointId x,
                      double t,
                      MarkState const& marks,
                      Trajectory const& traj,
                      CoefficientSet const& coeffs)
{
    double zx;
    std::vector<double> zy;
    if (!gather(x, t, marks, traj, coeffs.rho, zx, zy))
        return 0;
    return coeffs.drift(zx, zy);
}

double assemble_diffusion(PointId x,
                          double t,
                          MarkState const& marks,
                          Trajectory const& traj,
                          CoefficientSet const& coeffs)
{
    double zx;
    std::vector<double> zy;
    if (!gather(x, t, marks, traj, coeffs.rho, zx, zy))
        return 0;
    return coeffs.diffusion(zx, zy);
}

//---------------------------------------------------------------------------//
// INTEGRATION
//---------------------------------------------------------------------------//
std::vector<double> integration_grid(Trajectory const& traj, double dt)
{
    if (!(dt > 0) || !std::isfinite(dt))
        throw std::invalid_argument("dt must be positive");
    double const T = traj.horizon();
    if (T / dt > 1e9)
        throw std::invalid_argument("dt too small for the horizon");
    std::vector<double> grid;
    for (std::size_t j = 0;; ++j)
    {
        double const t = static_cast<double>(j) * dt;
        if (!(t < T))
            break;
        grid.push_back(t);
    }
    for (Event const& e : traj.events())
    {
        if (e.time > 0 && e.time < T)
            grid.push_back(e.time);
    }
    grid.push_back(T);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

MarkPath integrate_marks(Trajectory const& traj,
                         CoefficientSet const& coeffs,
                         InitialMarkPolicy const& init,
                         IntegratorConfig const& icfg,
                         std::uint64_t seed)
{
    return finite_volume_solve(traj, coeffs, init, icfg, std::nullopt, seed);
}

MarkPath finite_volume_solve(Trajectory const& traj,
                             CoefficientSet const& coeffs,
                             InitialMarkPolicy const& init,
                             IntegratorConfig const& icfg,
                             std::optional<Box> const& box,
                             std::uint64_t seed)
{
    SolveSetup const setup = make_setup(traj, coeffs.rho);
    std::size_t const n = setup.ids.size();
    int const dim = traj.window().dim();

    MarkPath path(integration_grid(traj, icfg.dt), setup.ids);
    auto const& times = path.times();

    std::vector<char> active(n, 1);
    if (box)
    {
        for (std::size_t i = 0; i < n; ++i)
            active[i] = box->contains(setup.positions[i], dim);
    }

    std::vector<double> cur(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        cur[i] = init(setup.ids[i], setup.positions[i]);
        if (!std::isfinite(cur[i]))
            throw std::invalid_argument("initial mark is not finite");
        path.value(0, i) = cur[i];
    }

    BrownianField const field(seed, icfg.brownian_levels);
    StreamRng seq_rng(derive_key(seed, StreamTag::sequential_noise));
    // Last evaluated W per point: (time, value)
    std::vector<double> w_time(n, -1), w_value(n, 0);
    auto brownian = [&](std::size_t i, double t) {
        if (w_time[i] == t)
            return w_value[i];
        return field(setup.ids[i], t);
    };

    std::vector<char> present(n);
    std::vector<double> next(n), seq_noise(n), zy;
    for (std::size_t step = 0; step + 1 < times.size(); ++step)
    {
        double const t = times[step];
        double const t_next = times[step + 1];
        double const h = t_next - t;
        for (std::size_t i = 0; i < n; ++i)
            present[i] = present_right(setup.presence[i], t);
        if (icfg.noise == NoiseMode::sequential)
        {
            for (std::size_t i = 0; i < n; ++i)
                seq_noise[i] = seq_rng.normal();
        }

        for (std::size_t i = 0; i < n; ++i)
        {
            if (!present[i] || !active[i])
            {
                next[i] = cur[i];
                continue;
            }
            zy.clear();
            for (std::size_t j : setup.neighbors[i])
            {
                if (present[j])
                    zy.push_back(cur[j]);
            }
            double const a = coeffs.drift(cur[i], zy);
            double const b = coeffs.diffusion(cur[i], zy);
            double value = cur[i];
            if (icfg.scheme == Scheme::tamed_euler)
                value += h * a / (1 + h * std::abs(a));
            else
                value += h * a;
            if (b != 0)
            {
                double dw;
                if (icfg.noise == NoiseMode::sequential)
                {
                    dw = std::sqrt(h) * seq_noise[i];
                }
                else
                {
                    double const w0 = brownian(i, t);
                    double const w1 = field(setup.ids[i], t_next);
                    w_time[i] = t_next;
                    w_value[i] = w1;
                    dw = w1 - w0;
                }
                value += b * dw;
            }
            if (!std::isfinite(value))
                throw_blow_up(setup.ids[i], t_next);
            next[i] = value;
        }
        cur.swap(next);
        for (std::size_t i = 0; i < n; ++i)
            path.value(step + 1, i) = cur[i];
    }
    return path;
}

//---------------------------------------------------------------------------//
// BOUNDS
//---------------------------------------------------------------------------//
bool BoundsReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](BoundCheck const& c) {
        return c.violations == 0;
    });
}

BoundCheck const& BoundsReport::check(std::string const& name) const
{
    for (auto const& c : checks)
    {
        if (c.name == name)
            return c;
    }
    throw std::out_of_range("no bound check named '" + name + "'");
}

nlohmann::json BoundsReport::to_json() const
{
    auto arr = nlohmann::json::array();
    for (auto const& c : checks)
    {
        nlohmann::json entry{{"name", c.name},
                             {"samples", c.samples},
                             {"violations", c.violations},
                             {"max_ratio", c.max_ratio}};
        if (c.witness)
        {
            entry["witness"] = {{"neighbors", c.witness->neighbors},
                                {"z1x", c.witness->zx1},
                                {"z2x", c.witness->zx2},
                                {"lhs", c.witness->lhs},
                                {"rhs", c.witness->rhs}};
        }
        arr.push_back(std::move(entry));
    }
    return {{"passed", passed()}, {"checks", std::move(arr)}};
}

BoundsReport check_drift_diffusion_bounds(CoefficientSet const& coeffs,
                                          std::size_t sample_size,
                                          std::uint64_t seed,
                                          int max_neighbors)
{
    auto const& d = coeffs.declared;
    if (!(d.R_growth >= 2))
        throw std::invalid_argument("R_growth must be at least 2");
    if (max_neighbors < 0)
        throw std::invalid_argument("max_neighbors must be nonnegative");

    BoundsReport report;
    char const* const names[] = {"pair_drift_lipschitz",
                                 "pair_drift_growth",
                                 "single_growth",
                                 "single_dissipative",
                                 "pair_diffusion_lipschitz",
                                 "diffusion_difference",
                                 "diffusion_at_zero",
                                 "drift_growth",
                                 "drift_one_sided"};
    for (char const* name : names)
        report.checks.push_back(BoundCheck{name, 0, 0, 0, std::nullopt});
    auto slot = [&](int i) -> BoundCheck& { return report.checks[i]; };

    StreamRng rng(derive_key(seed, StreamTag::sampling));
    std::vector<double> z1y, z2y, zeros;
    for (std::size_t sample = 0; sample < sample_size; ++sample)
    {
        auto const k = static_cast<std::size_t>(
            rng.uniform() * static_cast<double>(max_neighbors + 1));
        double const mag = std::pow(10.0, rng.uniform(-2, 2));
        bool const same = rng.uniform() < 0.05;
        double const z1x = rng.uniform(-mag, mag);
        double const z2x = same ? z1x : rng.uniform(-mag, mag);
        z1y.resize(k);
        z2y.resize(k);
        zeros.assign(k, 0.0);
        for (std::size_t j = 0; j < k; ++j)
        {
            z1y[j] = rng.uniform(-mag, mag);
            z2y[j] = same ? z1y[j] : rng.uniform(-mag, mag);
        }
        double const nx = static_cast<double>(k + 1);
        BoundWitness w{k, z1x, z2x, 0, 0};
        double const dx = z1x - z2x;

        // Pairwise conditions on (z1x, z1y[0]) vs (z2x, z2y[0])
        double const s1 = k > 0 ? z1y[0] : rng.uniform(-mag, mag);
        double const s2 = k > 0 ? z2y[0] : s1;
        {
            double const f1 = coeffs.pair_drift(z1x, s1);
            double const f2 = coeffs.pair_drift(z2x, s2);
            record(slot(0), std::abs(f1 - f2),
                   d.a_bar * (std::abs(dx) + std::abs(s1 - s2)),
                   std::abs(f1) + std::abs(f2), w);
            record(slot(1), std::abs(f1),
                   d.a_bar * (1 + std::abs(z1x) + std::abs(s1)), 0, w);
        }
        {
            double const p1 = coeffs.single(z1x);
            double const p2 = coeffs.single(z2x);
            record(slot(2), std::abs(p1),
                   d.c * (1 + std::pow(std::abs(z1x), d.R_growth)), 0, w);
            record(slot(3), dx * (p1 - p2), d.b_diss * dx * dx,
                   std::abs(dx) * (std::abs(p1) + std::abs(p2)), w);
        }
        {
            double const g1 = coeffs.pair_diffusion(z1x, s1);
            double const g2 = coeffs.pair_diffusion(z2x, s2);
            record(slot(4), std::abs(g1 - g2),
                   d.M * (std::abs(dx) + std::abs(s1 - s2)),
                   std::abs(g1) + std::abs(g2), w);
        }

        // Inequalities for the assembled coefficients
        double sum_abs_dy = 0, sum_dy2 = 0, sum_abs_y1 = 0;
        for (std::size_t j = 0; j < k; ++j)
        {
            double const dy = z1y[j] - z2y[j];
            sum_abs_dy += std::abs(dy);
            sum_dy2 += dy * dy;
            sum_abs_y1 += std::abs(z1y[j]);
        }
        double const psi1 = coeffs.diffusion(z1x, z1y);
        double const psi2 = coeffs.diffusion(z2x, z2y);
        double const psi0 = coeffs.diffusion(0, zeros);
        record(slot(5), std::abs(psi1 - psi2),
               d.M * (nx + 1) * std::abs(dx) + d.M * sum_abs_dy,
               std::abs(psi1) + std::abs(psi2), w);
        record(slot(6), std::abs(psi0), d.M * nx, 0, w);

        double const phi1 = coeffs.drift(z1x, z1y);
        double const phi2 = coeffs.drift(z2x, z2y);
        record(slot(7), std::abs(phi1),
               d.c * (1 + std::pow(std::abs(z1x), d.R_growth))
                   + d.a_bar * nx * (1 + 2 * std::abs(z1x))
                   + d.a_bar * sum_abs_y1,
               0, w);
        double const a2 = d.a_bar * d.a_bar;
        record(slot(8), dx * (phi1 - phi2),
               (d.b_diss + 0.5 + 4 * a2 * nx * nx) * dx * dx
                   + 0.5 * a2 * nx * sum_dy2,
               std::abs(dx) * (std::abs(phi1) + std::abs(phi2)), w);
    }
    return report;
}

//---------------------------------------------------------------------------//
// STUDIES
//---------------------------------------------------------------------------//
nlohmann::json CutoffStudy::to_json() const
{
    return {{"sup_mean_diff", sup_mean_diff},
            {"spearman", spearman},
            {"nonincreasing", nonincreasing}};
}

CutoffStudy cutoff_convergence_study(Trajectory const& traj,
                                     CoefficientSet const& coeffs,
                                     InitialMarkPolicy const& init,
                                     IntegratorConfig const& icfg,
                                     std::vector<Box> const& boxes,
                                     ScaleParams const& scale,
                                     std::vector<std::uint64_t> const& seeds)
{
    scale.validate();
    if (scale.p < coeffs.declared.R_growth)
        throw std::invalid_argument("moment order p must be >= R_growth");
    if (seeds.empty())
        throw std::invalid_argument("cutoff study needs at least one seed");

    auto const& phantom = traj.phantom();
    std::vector<double> weights;
    for (auto const& [id, x] : phantom.by_id())
        weights.push_back(std::exp(-scale.beta * traj.window().norm(x)));

    std::vector<std::vector<double>> sums(boxes.size());
    for (std::uint64_t seed : seeds)
    {
        MarkPath const full = integrate_marks(traj, coeffs, init, icfg, seed);
        for (std::size_t b = 0; b < boxes.size(); ++b)
        {
            MarkPath const cut
                = finite_volume_solve(traj, coeffs, init, icfg, boxes[b], seed);
            auto& acc = sums[b];
            acc.resize(full.steps(), 0.0);
            for (std::size_t s = 0; s < full.steps(); ++s)
            {
                auto const r1 = full.row(s);
                auto const r2 = cut.row(s);
                double total = 0;
                for (std::size_t i = 0; i < r1.size(); ++i)
                    total += weights[i] * std::pow(std::abs(r1[i] - r2[i]),
                                                   scale.p);
                acc[s] += total;
            }
        }
    }

    CutoffStudy study;
    double const inv = 1.0 / static_cast<double>(seeds.size());
    for (auto const& acc : sums)
    {
        double sup = 0;
        for (double v : acc)
            sup = std::max(sup, v * inv);
        study.sup_mean_diff.push_back(sup);
    }
    study.spearman = spearman_trend(study.sup_mean_diff);
    study.nonincreasing = std::is_sorted(study.sup_mean_diff.rbegin(),
                                         study.sup_mean_diff.rend());
    return study;
}

ProjectionReport projection_consistency(Trajectory const& traj,
                                        CoefficientSet const& coeffs,
                                        InitialMarkPolicy const& init,
                                        IntegratorConfig const& icfg,
                                        double T1,
                                        std::uint64_t seed)
{
    if (!(T1 > 0 && T1 <= traj.horizon()))
        throw std::invalid_argument("projection horizon must lie in (0, T]");
    MarkPath const full = integrate_marks(traj, coeffs, init, icfg, seed);
    MarkPath const part
        = integrate_marks(traj.restricted(T1), coeffs, init, icfg, seed);

    ProjectionReport report;
    auto const& ftimes = full.times();
    for (std::size_t s = 0; s < part.steps(); ++s)
    {
        double const t = part.times()[s];
        auto iter = std::lower_bound(ftimes.begin(), ftimes.end(), t);
        if (iter == ftimes.end() || *iter != t)
            continue;
        auto const fs = static_cast<std::size_t>(iter - ftimes.begin());
        for (std::size_t i = 0; i < part.ids().size(); ++i)
        {
            PointId const id = part.ids()[i];
            ++report.compared;
            if (full.value(fs, full.index_of(id)) != part.value(s, i))
            {
                report.equal = false;
                if (!report.witness)
                    report.witness = std::make_pair(id, t);
            }
        }
    }
    return report;
}

MomentSample moment_sample(Trajectory const& traj,
                           std::span<MarkPath const> paths,
                           ScaleParams const& scale)
{
    MomentSample sample;
    if (paths.empty())
        return sample;
    auto const& ref = paths.front();
    for (auto const& p : paths)
    {
        if (p.times() != ref.times() || p.ids() != ref.ids())
            throw std::invalid_argument("mark paths do not share a grid");
    }
    std::vector<double> norms;
    std::vector<Presence> presence;
    for (PointId id : ref.ids())
    {
        norms.push_back(traj.window().norm(traj.phantom().position(id)));
        presence.push_back(traj.presence().at(id));
    }
    double const inv = 1.0 / static_cast<double>(paths.size());
    sample.times = ref.times();
    sample.lhs.assign(ref.steps(), 0.0);
    for (auto const& p : paths)
    {
        for (std::size_t s = 0; s < p.steps(); ++s)
        {
            double const t = p.times()[s];
            double total = 0;
            for (std::size_t i = 0; i < norms.size(); ++i)
            {
                if (present_right(presence[i], t))
                    total += std::exp(-scale.beta * norms[i])
                             * std::pow(std::abs(p.value(s, i)), scale.p);
            }
            sample.lhs[s] += total * inv;
        }
        sample.initial_moment
            += lp_alpha_norm_pow(norms, p.row(0), scale.alpha, scale.p) * inv;
    }
    return sample;
}

//---------------------------------------------------------------------------//
// SERIALIZATION
//---------------------------------------------------------------------------//
nlohmann::json to_json(CoefficientSet const& c)
{
    nlohmann::json single;
    switch (c.single.kind)
    {
        case SingleDrift::Kind::zero:
            single = {{"type", "zero"}};
            break;
        case SingleDrift::Kind::linear:
            single = {{"type", "linear"}, {"lambda", c.single.param}};
            break;
        case SingleDrift::Kind::cubic:
            single = {{"type", "cubic"}, {"theta", c.single.param}};
            break;
    }
    char const* pair_type = "zero";
    if (c.pair_drift.kind == PairDrift::Kind::linear)
        pair_type = "linear";
    else if (c.pair_drift.kind == PairDrift::Kind::coupling)
        pair_type = "coupling";
    char const* diff_type = "zero";
    switch (c.pair_diffusion.kind)
    {
        case PairDiffusion::Kind::zero:
            break;
        case PairDiffusion::Kind::constant:
            diff_type = "constant";
            break;
        case PairDiffusion::Kind::linear:
            diff_type = "linear";
            break;
        case PairDiffusion::Kind::bounded:
            diff_type = "bounded";
            break;
    }
    return {{"single", single},
            {"pair_drift", {{"type", pair_type}, {"J", c.pair_drift.J}}},
            {"pair_diffusion",
             {{"type", diff_type}, {"kappa", c.pair_diffusion.kappa}}},
            {"rho", c.rho},
            {"declared",
             {{"a_bar", c.declared.a_bar},
              {"b_diss", c.declared.b_diss},
              {"c", c.declared.c},
              {"R_growth", c.declared.R_growth},
              {"M", c.declared.M}}}};
}

CoefficientSet coefficient_set_from_json(nlohmann::json const& j)
{
    SingleDrift single;
    if (j.contains("single"))
    {
        auto const& s = j.at("single");
        auto const type = s.at("type").get<std::string>();
        if (type == "zero")
            single = {SingleDrift::Kind::zero, 0};
        else if (type == "linear")
            single = {SingleDrift::Kind::linear, s.at("lambda").get<double>()};
        else if (type == "cubic")
            single = {SingleDrift::Kind::cubic, s.at("theta").get<double>()};
        else
            throw std::invalid_argument("coefficients.single.type: unknown '"
                                        + type + "'");
    }
    PairDrift pair;
    if (j.contains("pair_drift"))
    {
        auto const& s = j.at("pair_drift");
        auto const type = s.at("type").get<std::string>();
        if (type == "zero")
            pair = {PairDrift::Kind::zero, 0};
        else if (type == "linear")
            pair = {PairDrift::Kind::linear, s.at("J").get<double>()};
        else if (type == "coupling")
            pair = {PairDrift::Kind::coupling, s.at("J").get<double>()};
        else
            throw std::invalid_argument(
                "coefficients.pair_drift.type: unknown '" + type + "'");
    }
    PairDiffusion diff;
    if (j.contains("pair_diffusion"))
    {
        auto const& s = j.at("pair_diffusion");
        auto const type = s.at("type").get<std::string>();
        if (type == "zero")
            diff = {PairDiffusion::Kind::zero, 0};
        else if (type == "constant")
            diff = {PairDiffusion::Kind::constant, s.at("kappa").get<double>()};
        else if (type == "linear")
            diff = {PairDiffusion::Kind::linear, s.at("kappa").get<double>()};
        else if (type == "bounded")
            diff = {PairDiffusion::Kind::bounded, s.at("kappa").get<double>()};
        else
            throw std::invalid_argument(
                "coefficients.pair_diffusion.type: unknown '" + type + "'");
    }
    auto c = CoefficientSet::make(single, pair, diff, j.value("rho", 1.0));
    if (j.contains("declared"))
    {
        auto const& d = j.at("declared");
        c.declared.a_bar = d.value("a_bar", c.declared.a_bar);
        c.declared.b_diss = d.value("b_diss", c.declared.b_diss);
        c.declared.c = d.value("c", c.declared.c);
        c.declared.R_growth = d.value("R_growth", c.declared.R_growth);
        c.declared.M = d.value("M", c.declared.M);
    }
    return c;
}

nlohmann::json to_json(InitialMarkPolicy const& p, int dim)
{
    nlohmann::json j;
    if (p.kind == InitialMarkPolicy::Kind::constant)
        j = {{"type", "constant"}, {"value", p.value}};
    else
        j = {{"type", "affine"},
             {"offset", p.value},
             {"gradient", position_to_json(p.gradient, dim)}};
    if (!p.explicit_marks.empty())
    {
        auto arr = nlohmann::json::array();
        for (auto const& [id, v] : p.explicit_marks)
            arr.push_back({{"id", id}, {"value", v}});
        j["marks"] = std::move(arr);
    }
    return j;
}

InitialMarkPolicy initial_mark_policy_from_json(nlohmann::json const& j,
                                                int dim)
{
    auto const type = j.value("type", std::string{"constant"});
    InitialMarkPolicy p;
    if (type == "constant")
        p = InitialMarkPolicy::constant(j.value("value", 0.0));
    else if (type == "affine")
        p = InitialMarkPolicy::affine(j.value("offset", 0.0),
                                      position_from_json(j.at("gradient"), dim));
    else
        throw std::invalid_argument("initial_marks.type: unknown '" + type
                                    + "'");
    if (j.contains("marks"))
    {
        for (auto const& entry : j.at("marks"))
            p.explicit_marks[entry.at("id").get<PointId>()]
                = entry.at("value").get<double>();
    }
    return p;
}

nlohmann::json to_json(IntegratorConfig const& c)
{
    return {{"dt", c.dt},
            {"scheme",
             c.scheme == Scheme::euler_maruyama ? "euler_maruyama"
                                                : "tamed_euler"},
            {"noise", c.noise == NoiseMode::keyed ? "keyed" : "sequential"},
            {"brownian_levels", c.brownian_levels}};
}

IntegratorConfig integrator_config_from_json(nlohmann::json const& j)
{
    IntegratorConfig c;
    c.dt = j.value("dt", c.dt);
    if (!(c.dt > 0) || !std::isfinite(c.dt))
        throw std::invalid_argument("integrator.dt: must be positive");
    auto const scheme = j.value("scheme", std::string{"euler_maruyama"});
    if (scheme == "euler_maruyama")
        c.scheme = Scheme::euler_maruyama;
    else if (scheme == "tamed_euler")
        c.scheme = Scheme::tamed_euler;
    else
        throw std::invalid_argument("integrator.scheme: unknown '" + scheme
                                    + "'");
    auto const noise = j.value("noise", std::string{"keyed"});
    if (noise == "keyed")
        c.noise = NoiseMode::keyed;
    else if (noise == "sequential")
        c.noise = NoiseMode::sequential;
    else
        throw std::invalid_argument("integrator.noise: unknown '" + noise
                                    + "'");
    c.brownian_levels = j.value("brownian_levels", c.brownian_levels);
    if (c.brownian_levels < 0 || c.brownian_levels > 32)
        throw std::invalid_argument(
            "integrator.brownian_levels: must be in [0, 32]");
    return c;
}

std::vector<std::size_t>
stride_steps(MarkPath const& path, double dt, std::size_t stride)
{
    if (stride == 0)
        throw std::invalid_argument("output stride must be positive");
    if (!(dt > 0))
        throw std::invalid_argument("dt must be positive");
    std::vector<std::size_t> steps;
    for (std::size_t s = 0; s < path.steps(); ++s)
    {
        double const t = path.times()[s];
        double const j = std::round(t / dt);
        if (j * dt != t)
            continue;
        if (static_cast<std::uint64_t>(j) % stride != 0)
            continue;
        steps.push_back(s);
    }
    return steps;
}

void write_mark_csv(std::ostream& os,
                    MarkPath const& path,
                    double dt,
                    std::size_t stride)
{
    os << "t,id,value\n";
    for (std::size_t s : stride_steps(path, dt, stride))
    {
        std::string const ts = format_double(path.times()[s]);
        for (std::size_t i = 0; i < path.ids().size(); ++i)
        {
            os << ts << ',' << path.ids()[i] << ','
               << format_double(path.value(s, i)) << '\n';
        }
    }
}

//---------------------------------------------------------------------------//
}  // namespace ips
