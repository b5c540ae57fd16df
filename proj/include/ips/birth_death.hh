//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ips/birth_death.hh
//! Spatial birth-and-death process built pathwise from a Poisson driving
//! measure by thinning.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "geometry.hh"

namespace ips
{
//---------------------------------------------------------------------------//
/*!
 * Nonnegative radial function used as a, c or phi in the birth kernels.
 *
 * - step: height * 1{r <= radius}
 * - tempered: height * (1 + r)^{-d-epsilon}, i.e. a multiple of G
 */
struct RadialKernel
{
    enum class Kind
    {
        zero,
        step,
        tempered,
    };

    Kind kind{Kind::zero};
    double height{0};
    double radius{0};
    double epsilon{1};
    int dim{2};

    static RadialKernel zero() { return {}; }
    static RadialKernel step(double height, double radius);
    static RadialKernel tempered(double height, double epsilon, int dim);

    double operator()(double r) const;
    //! Distance beyond which the kernel vanishes (infinite if tempered)
    double range() const;
};

//---------------------------------------------------------------------------//
/*!
 * Birth rate b(x, gamma) with a declared uniform upper bound b_max.
 */
struct BirthRateKernel
{
    enum class Variant
    {
        constant,
        glauber,
        fecundity,
        establishment,
    };

    Variant variant{Variant::constant};
    double z{0};
    RadialKernel phi;
    RadialKernel a;
    RadialKernel c;
    double b_max{0};

    static BirthRateKernel constant(double z);
    static BirthRateKernel glauber(double z, RadialKernel phi);
    static BirthRateKernel fecundity(RadialKernel a,
                                     RadialKernel c,
                                     RadialKernel phi,
                                     double b_max);
    static BirthRateKernel establishment(RadialKernel a,
                                         RadialKernel c,
                                         RadialKernel phi,
                                         double b_max);

    //! Largest distance at which another point can influence the rate
    double interaction_range() const;
};

//! Evaluate b(x, config); throws "bound violation" if the value exceeds b_max
double evaluate_birth_rate(BirthRateKernel const& kernel,
                           Position const& x,
                           Configuration const& config);

//---------------------------------------------------------------------------//
//! Candidate point (s, x, u, r) of the Poisson driving process.
struct DrivingPoint
{
    double s{};
    Position x{};
    double u{};
    double r{};
};

//! Unit-exponential mark attached to a point of gamma_0.
struct InitialLifetime
{
    PointId id{};
    double s{};
};

// Candidates ordered by time; count ~ Poisson(b_max T vol)
std::vector<DrivingPoint> sample_driving_process(Window const& window,
                                                 double horizon,
                                                 double b_max,
                                                 std::uint64_t seed);

//---------------------------------------------------------------------------//
enum class EventKind
{
    birth,
    death,
};

struct Event
{
    double time{};
    EventKind kind{};
    Point point;
};

//! Presence interval [start, end) of one id; end == horizon if it survives.
struct Presence
{
    double start{0};
    double end{0};
    bool initial{false};
    bool died{false};
};

enum class Side
{
    right,
    left,
};

//---------------------------------------------------------------------------//
/*!
 * A realized birth-and-death path on [0, T].
 *
 * Retains its driving process so that domination and thinning can be
 * replayed exactly.
 */
class Trajectory
{
  public:
    //! Candidate index for births not tied to a driving point
    static constexpr std::size_t unknown_candidate
        = std::numeric_limits<std::size_t>::max();

    Trajectory(Configuration gamma0,
               BirthRateKernel kernel,
               double death_rate,
               double horizon,
               std::uint64_t seed);

    Configuration const& gamma0() const { return gamma0_; }
    BirthRateKernel const& kernel() const { return kernel_; }
    Window const& window() const { return gamma0_.window(); }
    double horizon() const { return horizon_; }
    double death_rate() const { return death_rate_; }
    std::uint64_t seed() const { return seed_; }

    std::vector<Event> const& events() const { return events_; }
    std::vector<DrivingPoint> const& driving() const { return driving_; }
    std::vector<InitialLifetime> const& initial_lifetimes() const
    {
        return lifetimes_;
    }
    //! Index into driving() of the candidate that produced each born id
    std::map<PointId, std::size_t> const& birth_candidates() const
    {
        return birth_candidate_;
    }

    //! gamma^T: union of all configurations on [0, T]
    Configuration const& phantom() const { return phantom_; }
    std::map<PointId, Presence> const& presence() const { return presence_; }

    //! Whether id is present at t (gamma_t for right, gamma_{t-} for left)
    bool present(PointId id, double t, Side side = Side::right) const;

    //! gamma_t (right) or gamma_{t-} (left)
    Configuration config_at(double t, Side side = Side::right) const;

    //! Path restricted to [0, T1], with phantom gamma^{T1}
    Trajectory restricted(double new_horizon) const;

    std::size_t birth_count() const;
    std::size_t death_count() const;

    // Mutators used by the simulator and the log reader
    void set_driving(std::vector<DrivingPoint> d) { driving_ = std::move(d); }
    void set_initial_lifetimes(std::vector<InitialLifetime> l)
    {
        lifetimes_ = std::move(l);
    }
    void record_birth(double t, Point const& p, std::size_t candidate);
    void record_death(double t, PointId id);

  private:
    Configuration gamma0_;
    BirthRateKernel kernel_;
    double death_rate_;
    double horizon_;
    std::uint64_t seed_;
    std::vector<Event> events_;
    std::vector<DrivingPoint> driving_;
    std::vector<InitialLifetime> lifetimes_;
    std::map<PointId, std::size_t> birth_candidate_;
    Configuration phantom_;
    std::map<PointId, Presence> presence_;
};

//---------------------------------------------------------------------------//
// Exact event-driven simulation by thinning the driving process
Trajectory simulate(Configuration const& gamma0,
                    BirthRateKernel const& kernel,
                    double death_rate,
                    double horizon,
                    std::uint64_t seed);

// Number of events with point in box and time in [t0, t1]
std::size_t event_count_in(Trajectory const& traj,
                           Box const& box,
                           double t0,
                           double t1);

//---------------------------------------------------------------------------//
struct DominationViolation
{
    double t{};
    Box box;
    std::size_t phantom_count{};
    std::size_t bound{};
};

struct DominationReport
{
    std::size_t checks{0};
    std::vector<DominationViolation> violations;
    //! Born ids whose (s, x) does not match their driving candidate
    std::vector<PointId> unmatched_births;

    bool passed() const
    {
        return violations.empty() && unmatched_births.empty();
    }
};

// Pathwise phantom(t, box) <= N([0,t] x box x [0,b]) + gamma_0(box)
DominationReport verify_domination(Trajectory const& traj,
                                   int time_steps = 16,
                                   int random_boxes = 32,
                                   std::uint64_t seed = 0);

//---------------------------------------------------------------------------//
/*!
 * Sampled check of |b(x, g + y) - b(x, g)| <= z B G(x - y) for Glauber
 * kernels with phi <= B G.
 */
struct GlauberLipschitzReport
{
    std::size_t samples{0};
    std::size_t violations{0};
    double max_ratio{0};
};

GlauberLipschitzReport check_glauber_lipschitz(BirthRateKernel const& kernel,
                                               Window const& window,
                                               double bound_b,
                                               double epsilon,
                                               std::size_t samples,
                                               std::uint64_t seed);

//---------------------------------------------------------------------------//
// Event log (JSON Lines) and descriptors
//---------------------------------------------------------------------------//

nlohmann::json to_json(RadialKernel const& k);
RadialKernel radial_kernel_from_json(nlohmann::json const& j, int dim);
nlohmann::json to_json(BirthRateKernel const& k);
BirthRateKernel birth_kernel_from_json(nlohmann::json const& j, int dim);

// Header line followed by one line per event
void write_event_log(std::ostream& os, Trajectory const& traj);
// One line per driving candidate
void write_driving_log(std::ostream& os, Trajectory const& traj);
// Rebuild a trajectory (without driving process) from an event log
Trajectory read_event_log(std::istream& is);

char const* to_cstring(EventKind k);

//---------------------------------------------------------------------------//
}  // namespace ips
