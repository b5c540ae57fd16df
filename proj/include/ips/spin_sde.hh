//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ips/spin_sde.hh
//! Spin diffusions coupled along a frozen birth-and-death path.
//---------------------------------------------------------------------------//
#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "birth_death.hh"
#include "geometry.hh"
#include "scales.hh"

namespace ips
{
//---------------------------------------------------------------------------//
// COEFFICIENTS
//---------------------------------------------------------------------------//
//! Single-site drift phi(sigma)
struct SingleDrift
{
    enum class Kind
    {
        zero,
        linear,  //!< -lambda sigma
        cubic,  //!< -sigma^3 + theta sigma
    };
    Kind kind{Kind::zero};
    double param{0};

    double operator()(double sigma) const
    {
        switch (kind)
        {
            case Kind::zero:
                return 0;
            case Kind::linear:
                return -param * sigma;
            case Kind::cubic:
                return -sigma * sigma * sigma + param * sigma;
        }
        return 0;
    }
};

//! Pair drift phi_xy(sigma, s) for |x - y| <= rho
struct PairDrift
{
    enum class Kind
    {
        zero,
        linear,  //!< J s
        coupling,  //!< J (s - sigma)
    };
    Kind kind{Kind::zero};
    double J{0};

    double operator()(double sigma, double s) const
    {
        switch (kind)
        {
            case Kind::zero:
                return 0;
            case Kind::linear:
                return J * s;
            case Kind::coupling:
                return J * (s - sigma);
        }
        return 0;
    }
};

//! Pair diffusion psi_xy(sigma, s) for |x - y| <= rho
struct PairDiffusion
{
    enum class Kind
    {
        zero,
        constant,  //!< kappa
        linear,  //!< kappa s
        bounded,  //!< kappa tanh(s)
    };
    Kind kind{Kind::zero};
    double kappa{0};

    double operator()(double, double s) const
    {
        switch (kind)
        {
            case Kind::zero:
                return 0;
            case Kind::constant:
                return kappa;
            case Kind::linear:
                return kappa * s;
            case Kind::bounded:
                return kappa * std::tanh(s);
        }
        return 0;
    }
};

//! Constants the coefficients are declared to satisfy
struct DeclaredConstants
{
    double a_bar{0};  //!< pair drift Lipschitz / linear growth
    double b_diss{0};  //!< one-sided dissipativity of phi
    double c{0};  //!< growth |phi| <= c (1 + |sigma|^R)
    double R_growth{2};
    double M{0};  //!< pair diffusion Lipschitz
};

struct CoefficientSet
{
    SingleDrift single;
    PairDrift pair_drift;
    PairDiffusion pair_diffusion;
    double rho{1};
    DeclaredConstants declared;

    //! Set declared constants to the exact values for the built-in forms
    static DeclaredConstants derive_constants(SingleDrift const& single,
                                              PairDrift const& pair_drift,
                                              PairDiffusion const& diffusion);
    static CoefficientSet make(SingleDrift single,
                               PairDrift pair_drift,
                               PairDiffusion diffusion,
                               double rho);

    //! Drift of a site with mark zx and neighbor marks zy (ordered by id)
    double drift(double zx, std::span<double const> zy) const;
    double diffusion(double zx, std::span<double const> zy) const;
};

// Built-in coefficient library
std::vector<std::pair<std::string, CoefficientSet>> builtin_coefficient_sets();

//---------------------------------------------------------------------------//
// STATE
//---------------------------------------------------------------------------//
struct MarkState
{
    double time{0};
    std::map<PointId, double> values;
};

/*!
 * Initial marks zeta_x.
 *
 * Points of gamma_0 with an explicit mark use it; every other phantom point
 * gets the deterministic field value at its position.
 */
struct InitialMarkPolicy
{
    enum class Kind
    {
        constant,
        affine,  //!< offset + gradient . x
    };
    Kind kind{Kind::constant};
    double value{0};
    Position gradient{};
    std::map<PointId, double> explicit_marks;

    static InitialMarkPolicy constant(double v);
    static InitialMarkPolicy affine(double offset, Position gradient);

    double operator()(PointId id, Position const& x) const;
};

enum class Scheme
{
    euler_maruyama,
    tamed_euler,
};

enum class NoiseMode
{
    //! W_x is a pure function of (seed, id, t)
    keyed,
    //! One sequential stream consumed for every phantom id at every step.
    //! Exists only as a negative control for pathwise comparisons.
    sequential,
};

struct IntegratorConfig
{
    double dt{1e-2};
    Scheme scheme{Scheme::euler_maruyama};
    NoiseMode noise{NoiseMode::keyed};
    //! Dyadic refinement depth of the keyed Brownian paths within unit time
    int brownian_levels{24};
};

//---------------------------------------------------------------------------//
/*!
 * Brownian paths keyed by (seed, id), independent of any time grid.
 *
 * W(n) at integer n accumulates unit increments; inside [n, n+1] the path is
 * refined by Levy midpoint bridges to depth `levels` and linearly
 * interpolated below that.
 */
class BrownianField
{
  public:
    BrownianField(std::uint64_t seed, int levels);

    double operator()(PointId id, double t) const;

  private:
    std::uint64_t key_;
    int levels_;
};

//---------------------------------------------------------------------------//
/*!
 * Mark values for every phantom id at every grid time.
 */
class MarkPath
{
  public:
    MarkPath() = default;
    MarkPath(std::vector<double> times, std::vector<PointId> ids);

    std::vector<double> const& times() const { return times_; }
    std::vector<PointId> const& ids() const { return ids_; }
    std::size_t steps() const { return times_.size(); }

    //! Index of id in ids(); throws "unknown point"
    std::size_t index_of(PointId id) const;
    bool has(PointId id) const { return index_.count(id) != 0; }

    double value(std::size_t step, std::size_t idx) const
    {
        return values_[step * ids_.size() + idx];
    }
    double& value(std::size_t step, std::size_t idx)
    {
        return values_[step * ids_.size() + idx];
    }
    std::span<double const> row(std::size_t step) const
    {
        return {values_.data() + step * ids_.size(), ids_.size()};
    }
    MarkState state(std::size_t step) const;

    //! First grid index with time >= t
    std::size_t step_at_or_after(double t) const;
    //! Mark of id at t by linear interpolation between grid times
    double interpolate(PointId id, double t) const;

  private:
    std::vector<double> times_;
    std::vector<PointId> ids_;
    std::map<PointId, std::size_t> index_;
    std::vector<double> values_;
};

//---------------------------------------------------------------------------//
// OPERATIONS
//---------------------------------------------------------------------------//

// Phi_x at t: zero when x is absent; otherwise phi(z_x) + pair drift sum
double assemble_drift(PointId x,
                      double t,
                      MarkState const& marks,
                      Trajectory const& traj,
                      CoefficientSet const& coeffs);

// Psi_x at t: zero when x is absent; otherwise pair diffusion sum
double assemble_diffusion(PointId x,
                          double t,
                          MarkState const& marks,
                          Trajectory const& traj,
                          CoefficientSet const& coeffs);

// Time grid: multiples of dt below T, every event time, and T
std::vector<double> integration_grid(Trajectory const& traj, double dt);

// Euler-Maruyama solve along the trajectory on its phantom
MarkPath integrate_marks(Trajectory const& traj,
                         CoefficientSet const& coeffs,
                         InitialMarkPolicy const& init,
                         IntegratorConfig const& icfg,
                         std::uint64_t seed);

// As integrate_marks, with points outside the box frozen at zeta_x
MarkPath finite_volume_solve(Trajectory const& traj,
                             CoefficientSet const& coeffs,
                             InitialMarkPolicy const& init,
                             IntegratorConfig const& icfg,
                             std::optional<Box> const& box,
                             std::uint64_t seed);

//---------------------------------------------------------------------------//
/*!
 * Sampled check of the coefficient conditions and of the drift/diffusion
 * inequalities with the declared constants.
 */
struct BoundWitness
{
    std::size_t neighbors{0};
    double zx1{0};
    double zx2{0};
    double lhs{0};
    double rhs{0};
};

struct BoundCheck
{
    std::string name;
    std::size_t samples{0};
    std::size_t violations{0};
    double max_ratio{0};  //!< max lhs / rhs
    std::optional<BoundWitness> witness;
};

struct BoundsReport
{
    std::vector<BoundCheck> checks;

    bool passed() const;
    BoundCheck const& check(std::string const& name) const;
    nlohmann::json to_json() const;
};

BoundsReport check_drift_diffusion_bounds(CoefficientSet const& coeffs,
                                          std::size_t sample_size,
                                          std::uint64_t seed,
                                          int max_neighbors = 12);

//---------------------------------------------------------------------------//
/*!
 * Cutoff convergence: sup_t E ||Xi^n_t - Xi_t||^p_{l^p_beta} per box.
 */
struct CutoffStudy
{
    std::vector<double> sup_mean_diff;
    double spearman{0};
    bool nonincreasing{false};

    nlohmann::json to_json() const;
};

CutoffStudy cutoff_convergence_study(Trajectory const& traj,
                                     CoefficientSet const& coeffs,
                                     InitialMarkPolicy const& init,
                                     IntegratorConfig const& icfg,
                                     std::vector<Box> const& boxes,
                                     ScaleParams const& scale,
                                     std::vector<std::uint64_t> const& seeds);

//---------------------------------------------------------------------------//
struct ProjectionReport
{
    bool equal{true};
    std::size_t compared{0};
    std::optional<std::pair<PointId, double>> witness;
};

// Solve on [0, T1] and compare with the horizon-T solve restricted to it
ProjectionReport projection_consistency(Trajectory const& traj,
                                        CoefficientSet const& coeffs,
                                        InitialMarkPolicy const& init,
                                        IntegratorConfig const& icfg,
                                        double T1,
                                        std::uint64_t seed);

//---------------------------------------------------------------------------//
// E ||Xi_t||^p_{l^p_beta(gamma_t)} over an ensemble of solves on one path
MomentSample moment_sample(Trajectory const& traj,
                           std::span<MarkPath const> paths,
                           ScaleParams const& scale);

//---------------------------------------------------------------------------//
// Serialization
//---------------------------------------------------------------------------//
nlohmann::json to_json(CoefficientSet const& c);
CoefficientSet coefficient_set_from_json(nlohmann::json const& j);
nlohmann::json to_json(InitialMarkPolicy const& p, int dim);
InitialMarkPolicy initial_mark_policy_from_json(nlohmann::json const& j,
                                                int dim);
nlohmann::json to_json(IntegratorConfig const& c);
IntegratorConfig integrator_config_from_json(nlohmann::json const& j);

// Grid steps at every stride-th multiple of dt
std::vector<std::size_t>
stride_steps(MarkPath const& path, double dt, std::size_t stride);

// CSV (t, id, value) at stride_steps
void write_mark_csv(std::ostream& os,
                    MarkPath const& path,
                    double dt,
                    std::size_t stride);

//---------------------------------------------------------------------------//
}  // namespace ips
