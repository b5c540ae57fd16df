//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ips/marked_process.hh
//! Marked trajectory: positions from the jump path, marks from the SDE.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "birth_death.hh"
#include "geometry.hh"
#include "spin_sde.hh"

namespace ips
{
//---------------------------------------------------------------------------//
struct MarkedPoint
{
    Point point;
    double mark{0};
};

//! Finite marked configuration; pairs ordered by id
struct MarkedConfiguration
{
    double time{0};
    std::vector<MarkedPoint> pairs;

    std::size_t size() const { return pairs.size(); }
};

//---------------------------------------------------------------------------//
/*!
 * Jump path together with a mark path over its phantom.
 */
class MarkedTrajectory
{
  public:
    MarkedTrajectory(Trajectory base, MarkPath marks);

    Trajectory const& base() const { return base_; }
    MarkPath const& marks() const { return marks_; }
    std::vector<double> const& grid() const { return marks_.times(); }

    //! Marked configuration at a grid step (present ids only)
    MarkedConfiguration at_step(std::size_t step, Side side = Side::right) const;

    //! Marked configuration at any t in [0, T], marks interpolated
    MarkedConfiguration at(double t, Side side = Side::right) const;

  private:
    Trajectory base_;
    MarkPath marks_;
};

// Throws if a phantom id has no mark
MarkedTrajectory combine(Trajectory const& traj, MarkPath const& marks);

// Number of grid steps where positions differ from config_at or a mark
// differs from the mark path
std::size_t count_fibre_mismatches(MarkedTrajectory const& mt);

//---------------------------------------------------------------------------//
/*!
 * Bounded test function g(x, s) supported on a box.
 *
 * - count: weight
 * - mark_sum: weight * s (unbounded in s, useful for diagnostics)
 * - bounded: offset + weight * tanh(scale * s)
 */
struct Observable
{
    enum class Kind
    {
        count,
        mark_sum,
        bounded,
    };

    std::string name;
    Kind kind{Kind::count};
    Box support;
    double weight{1};
    double scale{1};
    double offset{0};

    static Observable count(std::string name, Box support, double weight = 1);
    static Observable mark_sum(std::string name, Box support);
    static Observable bounded(std::string name,
                              Box support,
                              double offset,
                              double weight,
                              double scale);

    //! g(x, s), zero outside the support
    double operator()(Position const& x, double s, int dim) const;
    //! Lipschitz constant in s
    double lipschitz() const;
};

// <g, mc>
double observable(MarkedConfiguration const& mc, Observable const& g, int dim);

// Random bounded observable on a random sub-box of the window
Observable
random_observable(Window const& window, std::uint64_t key, std::string name);

//---------------------------------------------------------------------------//
/*!
 * Grid-resolution check of right continuity and left limits of <g, .> at
 * every event in the support of g.
 */
struct CadlagEvent
{
    double time{0};
    EventKind kind{EventKind::birth};
    PointId id{0};
    double epsilon{0};
    double right_diff{0};
    double right_bound{0};
    double left_gap{0};  //!< |O(t - eps/2^J) - O(t-)|
    double left_bound{0};
    double jump{0};  //!< O(t) - O(t-)
    bool passed{true};
};

struct CadlagReport
{
    std::string observable;
    std::size_t events_checked{0};
    std::vector<CadlagEvent> events;
    std::optional<CadlagEvent> witness;

    bool passed() const { return !witness.has_value(); }
    nlohmann::json to_json() const;
};

// Largest mark increment over time separations <= eps (all ids)
double mark_modulus(MarkPath const& path, double eps);

CadlagReport cadlag_check(MarkedTrajectory const& mt,
                          Observable const& g,
                          double epsilon,
                          int dyadic_levels = 12);

//---------------------------------------------------------------------------//
// Output
//---------------------------------------------------------------------------//
// One line {t, points: [{id, position, mark}]} per step
void write_snapshots(std::ostream& os,
                     MarkedTrajectory const& mt,
                     std::vector<std::size_t> const& steps);

// CSV (t, observable, value)
void write_observable_csv(std::ostream& os,
                          MarkedTrajectory const& mt,
                          std::vector<Observable> const& observables,
                          std::vector<std::size_t> const& steps);

nlohmann::json to_json(Observable const& g, int dim);
Observable observable_from_json(nlohmann::json const& j, int dim);

//---------------------------------------------------------------------------//
}  // namespace ips
