//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ips/geometry.hh
//! Finite point configurations on a bounded window with a uniform grid index.
//---------------------------------------------------------------------------//
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ips
{
//---------------------------------------------------------------------------//
inline constexpr int max_dim = 3;

//! Stable particle identity; assigned at creation and never reused.
using PointId = std::int64_t;

//! Coordinates in R^d, d <= 3; unused trailing entries are zero.
using Position = std::array<double, max_dim>;

struct Point
{
    PointId id{};
    Position position{};

    friend bool operator==(Point const&, Point const&) = default;
};

enum class BoundaryMode
{
    periodic,
    open,
};

//! Reference point for |x| in weight and log-bound formulas.
enum class AnchorMode
{
    automatic,  //!< center when periodic, origin when open
    center,
    origin,
};

//---------------------------------------------------------------------------//
/*!
 * Axis-aligned half-open box [lo, hi) in the window's coordinates.
 */
struct Box
{
    Position lo{};
    Position hi{};

    bool contains(Position const& x, int dim) const
    {
        for (int i = 0; i < dim; ++i)
        {
            if (!(x[i] >= lo[i] && x[i] < hi[i]))
                return false;
        }
        return true;
    }
    double volume(int dim) const
    {
        double v = 1;
        for (int i = 0; i < dim; ++i)
            v *= std::max(0.0, hi[i] - lo[i]);
        return v;
    }
    bool empty(int dim) const { return volume(dim) <= 0; }
};

//---------------------------------------------------------------------------//
/*!
 * The simulation window [0, S]^d.
 */
class Window
{
  public:
    Window(int dim,
           double side,
           BoundaryMode mode,
           AnchorMode anchor = AnchorMode::automatic);

    int dim() const { return dim_; }
    double side() const { return side_; }
    BoundaryMode boundary() const { return mode_; }
    AnchorMode anchor_mode() const { return anchor_; }
    double volume() const;
    Box box() const;

    //! True if x lies in [0, S)^d
    bool contains(Position const& x) const;

    //! Distance, using the torus metric in periodic mode
    double distance(Position const& a, Position const& b) const;

    //! Anchor point for position norms
    Position anchor() const;

    //! |x - anchor| (torus distance in periodic mode)
    double norm(Position const& x) const;

    //! Box of half-width h centered at the anchor, clipped to the window
    Box centered_box(double half_width) const;

    friend bool operator==(Window const&, Window const&) = default;

  private:
    int dim_;
    double side_;
    BoundaryMode mode_;
    AnchorMode anchor_;
};

//---------------------------------------------------------------------------//
/*!
 * Finite configuration of distinct points with a uniform grid index.
 *
 * Points are kept ordered by id. Grid cells have side >= the configured cell
 * size, so a query of radius <= cell size touches at most 3^d cells.
 */
class Configuration
{
  public:
    explicit Configuration(Window window, double cell_size = 1.0);

    Window const& window() const { return window_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    bool contains(PointId id) const { return points_.count(id) != 0; }
    Position const& position(PointId id) const;
    double cell_size() const { return cell_; }

    //! Insert a new point; throws on duplicate id, duplicate position or
    //! a position outside the window.
    void insert(Point const& p);
    void erase(PointId id);

    //! All points ordered by id
    std::vector<Point> points() const;
    std::map<PointId, Position> const& by_id() const { return points_; }

    //! Visit every point with distance <= radius from x (closed ball)
    template<class F>
    void for_each_within(Position const& x, double radius, F&& fn) const;

    //! Same configuration with a new cell size
    Configuration reindexed(double cell_size) const;

    //! Largest id plus one (0 for empty)
    PointId next_id() const;

  private:
    using CellCoord = std::array<int, max_dim>;

    Window window_;
    double cell_;
    std::array<int, max_dim> ncell_{1, 1, 1};
    std::array<double, max_dim> cell_len_{};
    std::map<PointId, Position> points_;
    std::vector<std::vector<Point>> cells_;

    CellCoord cell_of(Position const& x) const;
    std::size_t flat(CellCoord const& c) const;
    // Cell index range [first, last] along one axis for a query
    void axis_range(int axis, int center, double radius, int& first,
                    int& last, bool& wrap) const;
};

//---------------------------------------------------------------------------//
template<class F>
void Configuration::for_each_within(Position const& x, double radius,
                                    F&& fn) const
{
    int const dim = window_.dim();
    CellCoord const center = cell_of(x);
    std::array<int, max_dim> first{0, 0, 0}, last{0, 0, 0};
    std::array<bool, max_dim> wrap{false, false, false};
    for (int i = 0; i < dim; ++i)
    {
        axis_range(i, center[i], radius, first[i], last[i], wrap[i]);
        if (first[i] > last[i])
            return;
    }
    CellCoord c{0, 0, 0};
    auto visit_cell = [&] {
        CellCoord w = c;
        for (int i = 0; i < dim; ++i)
        {
            if (wrap[i])
                w[i] = ((w[i] % ncell_[i]) + ncell_[i]) % ncell_[i];
        }
        for (Point const& p : cells_[flat(w)])
        {
            if (window_.distance(x, p.position) <= radius)
                fn(p);
        }
    };
    for (c[0] = first[0]; c[0] <= last[0]; ++c[0])
    {
        if (dim == 1)
        {
            visit_cell();
            continue;
        }
        for (c[1] = first[1]; c[1] <= last[1]; ++c[1])
        {
            if (dim == 2)
            {
                visit_cell();
                continue;
            }
            for (c[2] = first[2]; c[2] <= last[2]; ++c[2])
                visit_cell();
        }
    }
}

//---------------------------------------------------------------------------//
/*!
 * Tempered weight G(x) = (1 + |x|)^{-d-eps}.
 */
class TemperedWeight
{
  public:
    TemperedWeight(double epsilon, int dim);

    double operator()(double norm) const;
    double epsilon() const { return eps_; }
    int dim() const { return dim_; }

  private:
    double eps_;
    int dim_;
};

//---------------------------------------------------------------------------//
// Counting functionals
//---------------------------------------------------------------------------//

// Number of points within closed distance R of x
std::size_t
neighbor_count(Configuration const& config, Position const& x, double radius);

// Points y != x with |x - y| <= rho, ordered by id
std::vector<Point>
neighbors_within(Configuration const& config, PointId x, double rho);

// Minimal a_R with n_{x,R} <= a_R (1 + log(1 + |x|)) over all x in config
double log_bound_constant(Configuration const& config, double radius);

// Sum of f over the points of config
double tempered_pairing(Configuration const& config,
                        std::function<double(Position const&)> const& f);

// Sum over x of exp(-alpha |x|) n_{x,R}^k
double weighted_tail_sum(Configuration const& config,
                         double alpha,
                         int k,
                         double radius);

//---------------------------------------------------------------------------//
// Serialization
//---------------------------------------------------------------------------//

nlohmann::json to_json(Window const& w);
Window window_from_json(nlohmann::json const& j);

// JSON array of {id, position} ordered by id
nlohmann::json points_to_json(Configuration const& config);
Configuration configuration_from_json(Window const& window,
                                      nlohmann::json const& points,
                                      double cell_size = 1.0);

nlohmann::json position_to_json(Position const& x, int dim);
Position position_from_json(nlohmann::json const& j, int dim);

char const* to_cstring(BoundaryMode m);
char const* to_cstring(AnchorMode m);

//---------------------------------------------------------------------------//
}  // namespace ips
