//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file geometry.cc
//---------------------------------------------------------------------------//
#include "ips/geometry.hh"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace ips
{
namespace
{
constexpr int max_cells_per_axis = 512;
constexpr std::size_t max_cells_total = std::size_t{1} << 21;
}  // namespace

//---------------------------------------------------------------------------//
// WINDOW
//---------------------------------------------------------------------------//
Window::Window(int dim, double side, BoundaryMode mode, AnchorMode anchor)
    : dim_(dim), side_(side), mode_(mode), anchor_(anchor)
{
    if (dim < 1 || dim > max_dim)
        throw std::invalid_argument("window dimension must be 1, 2 or 3");
    if (!(side > 0) || !std::isfinite(side))
        throw std::invalid_argument("window side must be positive");
    if (anchor_ == AnchorMode::automatic)
    {
        anchor_ = (mode_ == BoundaryMode::periodic) ? AnchorMode::center
                                                    : AnchorMode::origin;
    }
}

double Window::volume() const
{
    return std::pow(side_, dim_);
}

Box Window::box() const
{
    Box b;
    for (int i = 0; i < dim_; ++i)
        b.hi[i] = side_;
    return b;
}

bool Window::contains(Position const& x) const
{
    return this->box().contains(x, dim_);
}

double Window::distance(Position const& a, Position const& b) const
{
    double sq = 0;
    for (int i = 0; i < dim_; ++i)
    {
        double d = std::fabs(a[i] - b[i]);
        if (mode_ == BoundaryMode::periodic)
        {
            d = std::fmod(d, side_);
            d = std::min(d, side_ - d);
        }
        sq += d * d;
    }
    return std::sqrt(sq);
}

Position Window::anchor() const
{
    Position c{};
    if (anchor_ == AnchorMode::center)
    {
        for (int i = 0; i < dim_; ++i)
            c[i] = side_ / 2;
    }
    return c;
}

double Window::norm(Position const& x) const
{
    return this->distance(x, this->anchor());
}

Box Window::centered_box(double half_width) const
{
    Box b;
    Position const c = this->anchor();
    for (int i = 0; i < dim_; ++i)
    {
        b.lo[i] = std::clamp(c[i] - half_width, 0.0, side_);
        b.hi[i] = std::clamp(c[i] + half_width, 0.0, side_);
    }
    return b;
}

//---------------------------------------------------------------------------//
// CONFIGURATION
//---------------------------------------------------------------------------//
Configuration::Configuration(Window window, double cell_size)
    : window_(window), cell_(cell_size)
{
    if (!(cell_size > 0))
        throw std::invalid_argument("grid cell size must be positive");
    std::size_t total = 1;
    for (int i = 0; i < window_.dim(); ++i)
    {
        double const n = std::floor(window_.side() / cell_size);
        ncell_[i] = static_cast<int>(
            std::clamp(n, 1.0, static_cast<double>(max_cells_per_axis)));
        total *= static_cast<std::size_t>(ncell_[i]);
    }
    while (total > max_cells_total)
    {
        total = 1;
        for (int i = 0; i < window_.dim(); ++i)
        {
            ncell_[i] = std::max(1, ncell_[i] / 2);
            total *= static_cast<std::size_t>(ncell_[i]);
        }
    }
    for (int i = 0; i < max_dim; ++i)
        cell_len_[i] = window_.side() / ncell_[i];
    cells_.resize(total);
}

Position const& Configuration::position(PointId id) const
{
    auto iter = points_.find(id);
    if (iter == points_.end())
        throw std::out_of_range("unknown point");
    return iter->second;
}

void Configuration::insert(Point const& p)
{
    for (int i = 0; i < window_.dim(); ++i)
    {
        if (!std::isfinite(p.position[i]))
            throw std::invalid_argument("non-finite position");
    }
    if (!window_.contains(p.position))
        throw std::invalid_argument("position outside window");
    if (points_.count(p.id))
        throw std::invalid_argument("duplicate point id "
                                    + std::to_string(p.id));
    bool duplicate = false;
    this->for_each_within(p.position, 0.0, [&](Point const&) {
        duplicate = true;
    });
    if (duplicate)
        throw std::invalid_argument("duplicate position");

    points_.emplace(p.id, p.position);
    cells_[flat(cell_of(p.position))].push_back(p);
}

void Configuration::erase(PointId id)
{
    auto iter = points_.find(id);
    if (iter == points_.end())
        throw std::out_of_range("unknown point");
    auto& cell = cells_[flat(cell_of(iter->second))];
    auto found = std::find_if(cell.begin(), cell.end(), [id](Point const& p) {
        return p.id == id;
    });
    *found = cell.back();
    cell.pop_back();
    points_.erase(iter);
}

std::vector<Point> Configuration::points() const
{
    std::vector<Point> result;
    result.reserve(points_.size());
    for (auto const& [id, x] : points_)
        result.push_back({id, x});
    return result;
}

Configuration Configuration::reindexed(double cell_size) const
{
    Configuration result(window_, cell_size);
    for (auto const& [id, x] : points_)
    {
        result.points_.emplace(id, x);
        result.cells_[result.flat(result.cell_of(x))].push_back({id, x});
    }
    return result;
}

PointId Configuration::next_id() const
{
    return points_.empty() ? 0 : points_.rbegin()->first + 1;
}

auto Configuration::cell_of(Position const& x) const -> CellCoord
{
    CellCoord c{0, 0, 0};
    for (int i = 0; i < window_.dim(); ++i)
    {
        double const v = std::floor(x[i] / cell_len_[i]);
        c[i] = static_cast<int>(std::clamp(v, -1e6, 1e6));
        if (window_.boundary() == BoundaryMode::periodic || window_.contains(x))
            c[i] = std::clamp(c[i], 0, ncell_[i] - 1);
    }
    return c;
}

std::size_t Configuration::flat(CellCoord const& c) const
{
    std::size_t idx = 0;
    for (int i = window_.dim() - 1; i >= 0; --i)
        idx = idx * static_cast<std::size_t>(ncell_[i])
              + static_cast<std::size_t>(c[i]);
    return idx;
}

void Configuration::axis_range(
    int axis, int center, double radius, int& first, int& last, bool& wrap) const
{
    int const n = ncell_[axis];
    double const rings = std::ceil(radius / cell_len_[axis]);
    wrap = false;
    if (window_.boundary() == BoundaryMode::periodic)
    {
        if (2 * rings + 1 >= n)
        {
            first = 0;
            last = n - 1;
        }
        else
        {
            auto r = static_cast<int>(rings);
            first = center - r;
            last = center + r;
            wrap = true;
        }
        return;
    }
    double const lo = std::max(0.0, static_cast<double>(center) - rings);
    double const hi = std::min(static_cast<double>(n - 1),
                               static_cast<double>(center) + rings);
    first = static_cast<int>(lo);
    last = static_cast<int>(hi);
    if (lo > hi)
    {
        first = 1;
        last = 0;
    }
}

//---------------------------------------------------------------------------//
// TEMPERED WEIGHT
//---------------------------------------------------------------------------//
TemperedWeight::TemperedWeight(double epsilon, int dim)
    : eps_(epsilon), dim_(dim)
{
    if (!(epsilon > 0))
        throw std::invalid_argument("tempered weight epsilon must be positive");
}

double TemperedWeight::operator()(double norm) const
{
    return std::pow(1.0 + norm, -dim_ - eps_);
}

//---------------------------------------------------------------------------//
// COUNTING FUNCTIONALS
//---------------------------------------------------------------------------//
std::size_t
neighbor_count(Configuration const& config, Position const& x, double radius)
{
    if (!(radius > 0))
        throw std::invalid_argument("radius must be positive");
    std::size_t count = 0;
    config.for_each_within(x, radius, [&count](Point const&) { ++count; });
    return count;
}

std::vector<Point>
neighbors_within(Configuration const& config, PointId x, double rho)
{
    Position const& center = config.position(x);
    std::vector<Point> result;
    config.for_each_within(center, rho, [&](Point const& p) {
        if (p.id != x)
            result.push_back(p);
    });
    std::sort(result.begin(), result.end(), [](Point const& a, Point const& b) {
        return a.id < b.id;
    });
    return result;
}

double log_bound_constant(Configuration const& config, double radius)
{
    if (config.empty())
        throw std::invalid_argument("empty configuration");
    double best = 0;
    for (auto const& [id, x] : config.by_id())
    {
        double const n = static_cast<double>(neighbor_count(config, x, radius));
        double const denom = 1 + std::log1p(config.window().norm(x));
        best = std::max(best, n / denom);
    }
    return best;
}

double tempered_pairing(Configuration const& config,
                        std::function<double(Position const&)> const& f)
{
    double sum = 0;
    for (auto const& [id, x] : config.by_id())
        sum += f(x);
    return sum;
}

double weighted_tail_sum(Configuration const& config,
                         double alpha,
                         int k,
                         double radius)
{
    if (!(alpha > 0) || k < 1)
        throw std::invalid_argument("weighted tail sum needs alpha > 0, k >= 1");
    double sum = 0;
    for (auto const& [id, x] : config.by_id())
    {
        double const n = static_cast<double>(neighbor_count(config, x, radius));
        sum += std::exp(-alpha * config.window().norm(x)) * std::pow(n, k);
    }
    return sum;
}

//---------------------------------------------------------------------------//
// SERIALIZATION
//---------------------------------------------------------------------------//
char const* to_cstring(BoundaryMode m)
{
    return m == BoundaryMode::periodic ? "periodic" : "open";
}

char const* to_cstring(AnchorMode m)
{
    switch (m)
    {
        case AnchorMode::automatic:
            return "automatic";
        case AnchorMode::center:
            return "center";
        case AnchorMode::origin:
            return "origin";
    }
    return "?";
}

nlohmann::json to_json(Window const& w)
{
    return {{"dim", w.dim()},
            {"side", w.side()},
            {"boundary", to_cstring(w.boundary())},
            {"anchor", to_cstring(w.anchor_mode())}};
}

Window window_from_json(nlohmann::json const& j)
{
    auto const boundary = j.value("boundary", std::string{"periodic"});
    BoundaryMode mode;
    if (boundary == "periodic")
        mode = BoundaryMode::periodic;
    else if (boundary == "open")
        mode = BoundaryMode::open;
    else
        throw std::invalid_argument("window.boundary: unknown mode '" + boundary
                                    + "'");
    auto const anchor = j.value("anchor", std::string{"automatic"});
    AnchorMode amode;
    if (anchor == "automatic")
        amode = AnchorMode::automatic;
    else if (anchor == "center")
        amode = AnchorMode::center;
    else if (anchor == "origin")
        amode = AnchorMode::origin;
    else
        throw std::invalid_argument("window.anchor: unknown mode '" + anchor
                                    + "'");
    return Window(j.at("dim").get<int>(), j.at("side").get<double>(), mode,
                  amode);
}

nlohmann::json position_to_json(Position const& x, int dim)
{
    auto arr = nlohmann::json::array();
    for (int i = 0; i < dim; ++i)
        arr.push_back(x[i]);
    return arr;
}

Position position_from_json(nlohmann::json const& j, int dim)
{
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw std::invalid_argument("position must have "
                                    + std::to_string(dim) + " coordinates");
    Position x{};
    for (int i = 0; i < dim; ++i)
        x[i] = j[i].get<double>();
    return x;
}

nlohmann::json points_to_json(Configuration const& config)
{
    auto arr = nlohmann::json::array();
    for (auto const& [id, x] : config.by_id())
    {
        arr.push_back(
            {{"id", id}, {"position", position_to_json(x, config.window().dim())}});
    }
    return arr;
}

Configuration configuration_from_json(Window const& window,
                                      nlohmann::json const& points,
                                      double cell_size)
{
    Configuration config(window, cell_size);
    for (auto const& entry : points)
    {
        config.insert({entry.at("id").get<PointId>(),
                       position_from_json(entry.at("position"), window.dim())});
    }
    return config;
}

//---------------------------------------------------------------------------//
}  // namespace ips
