//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ips/scales.hh
//! Weighted sequence norms and the constants of the Gronwall inequality in
//! the scale l^p_alpha.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "geometry.hh"

namespace ips
{
//---------------------------------------------------------------------------//
/*!
 * Indices of the Banach scale and the norm/Ovsjannikov orders.
 *
 * Invariants: alpha_star <= alpha < beta <= alpha_sup, 0 < q < 1, p >= 1.
 */
struct ScaleParams
{
    double alpha_star{0};
    double alpha_sup{1};
    double alpha{0.25};
    double beta{0.75};
    double p{4};
    double q{0.5};

    //! Throws std::invalid_argument naming the violated relation
    void validate() const;
};

//---------------------------------------------------------------------------//
// (sum_x exp(-alpha |x|) |z_x|^p)^{1/p}; norms[i] is |x_i|
double lp_alpha_norm(std::span<double const> norms,
                     std::span<double const> values,
                     double alpha,
                     double p);

// p-th power of the norm above (no root)
double lp_alpha_norm_pow(std::span<double const> norms,
                         std::span<double const> values,
                         double alpha,
                         double p);

//---------------------------------------------------------------------------//
/*!
 * Result of evaluating the Ovsjannikov bound L on a configuration.
 */
struct OvsjannikovBound
{
    double L{0};
    double R{0};
    std::size_t n0R{0};  //!< points within closed distance R of the anchor
    //! Largest norm |x| among points violating n_x <= |x|^{q/2k}
    std::optional<double> max_offender;
};

// L = C e^{a* rho} [ (rho^q + n_{0,R}) (a* - a_*)^q + (q/e)^q ]
// R: smallest radius such that n_x <= |x|^{q/2k} for all |x| > R, unless
// supplied (then it is verified).
OvsjannikovBound ovsjannikov_constant_L(Configuration const& config,
                                        double C,
                                        double k,
                                        double q,
                                        double rho,
                                        double alpha_star,
                                        double alpha_sup,
                                        std::optional<double> R = std::nullopt);

//---------------------------------------------------------------------------//
/*!
 * Sparse matrix Q_{x,y} over a configuration, zero beyond radius rho.
 */
struct OvsjannikovMatrix
{
    std::vector<double> norms;  //!< |x| per row/column
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;

    std::vector<double> apply(std::span<double const> z) const;
};

// Q_{x,y} = B n_x^k for |x-y| <= rho, 0 otherwise
OvsjannikovMatrix
gronwall_matrix(Configuration const& config, double B, double k, double rho);

//---------------------------------------------------------------------------//
/*!
 * Partial sum of K_T = sum_n (L T)^n n^{qn} / ((beta-alpha)^{qn} n!).
 *
 * Terms are evaluated in log space. Summation stops once a term is below
 * tol * max(1, partial sum) and the term ratio is below 1/2; the remaining
 * tail is bounded by the geometric series of that ratio.
 */
struct GronwallConstant
{
    double value{1};      //!< partial sum (may be +inf if it overflows)
    double log_value{0};  //!< log of the partial sum
    double tail_bound{0};  //!< upper bound of the truncated tail
    std::size_t terms{1};
};

GronwallConstant gronwall_constant_K(double alpha,
                                     double beta,
                                     double q,
                                     double L,
                                     double T,
                                     double tol = 1e-12);

//---------------------------------------------------------------------------//
/*!
 * Check of the generalized Gronwall inequality on one configuration.
 *
 * The extremal solution of
 *   rho_x(t) = B n_x^k sum_{|y-x| <= rho} int_0^t rho_y(s) ds + b_x
 * is built by Picard iteration with trapezoid quadrature and compared with
 *   sum_x e^{-beta|x|} sup_t rho_x(t) <= K_T sum_x e^{-alpha|x|} b_x.
 */
struct GronwallCheckOptions
{
    double picard_tol{1e-10};
    std::size_t min_grid{256};
    double grid_agreement{1e-6};
    std::size_t max_grid{1 << 16};
    std::size_t max_iterations{10000};
    double series_tol{1e-12};
};

struct GronwallReport
{
    double lhs{0};
    double log_lhs{0};
    double rhs{0};
    double log_rhs{0};
    double log_slack{0};  //!< log(rhs) - log(lhs)
    double L{0};
    GronwallConstant K;
    std::size_t grid_points{0};
    std::size_t picard_iterations{0};
    //! rho_x on the final grid, rows by point (ordered by id)
    std::vector<std::vector<double>> solution;
    std::vector<double> grid;
    bool holds{false};

    nlohmann::json to_json() const;
};

GronwallReport check_gronwall_lemma(Configuration const& config,
                                    double B,
                                    double k,
                                    std::span<double const> b,
                                    double T,
                                    ScaleParams const& scale,
                                    double rho,
                                    GronwallCheckOptions const& options = {});

//---------------------------------------------------------------------------//
/*!
 * Moment growth estimate against sampled mark paths.
 */
struct MomentSample
{
    std::vector<double> times;
    //! E ||Xi_t||^p_{l^p_beta(gamma_t)} per time
    std::vector<double> lhs;
    //! E ||Xi_0||^p_{l^p_alpha(gamma^T)}
    double initial_moment{0};
};

struct MomentReport
{
    double sup_lhs{0};
    double rhs{0};
    double log_rhs{0};
    double K_log{0};
    double L{0};
    double C1{0};
    double C2{0};
    //! (sum_x e^{-alpha|x|} (C2 n_x^2)^p)^{1/p} over gamma^T
    double c2_norm{0};
    //! Smallest C1 (entering both the prefactor and L) making the bound hold
    double empirical_min_C1{0};
    bool holds{false};

    nlohmann::json to_json() const;
};

struct MomentBoundInputs
{
    Configuration const* phantom{nullptr};
    ScaleParams scale;
    double rho{1};
    double T{1};
    double C1{1};
    double C2{1};
};

MomentReport check_moment_growth(MomentSample const& sample,
                                 MomentBoundInputs const& inputs);

//---------------------------------------------------------------------------//
nlohmann::json to_json(ScaleParams const& s);
ScaleParams scale_params_from_json(nlohmann::json const& j);

//---------------------------------------------------------------------------//
}  // namespace ips
