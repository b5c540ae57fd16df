//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file scales.cc
//---------------------------------------------------------------------------//
#include "ips/scales.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ips
{
namespace
{
double log_add_exp(double a, double b)
{
    if (a == -INFINITY)
        return b;
    if (b == -INFINITY)
        return a;
    double const hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

std::vector<double> point_norms(Configuration const& config)
{
    std::vector<double> norms;
    norms.reserve(config.size());
    for (auto const& [id, x] : config.by_id())
        norms.push_back(config.window().norm(x));
    return norms;
}

std::vector<double> local_counts(Configuration const& config, double rho)
{
    std::vector<double> counts;
    counts.reserve(config.size());
    for (auto const& [id, x] : config.by_id())
        counts.push_back(static_cast<double>(neighbor_count(config, x, rho)));
    return counts;
}

// Trapezoid Picard solve of rho = b + Q int_0^t rho on n intervals.
// Returns false if the iteration did not converge.
bool picard_solve(OvsjannikovMatrix const& Q,
                  std::span<double const> b,
                  double T,
                  std::size_t n,
                  GronwallCheckOptions const& opts,
                  std::vector<std::vector<double>>& rho,
                  std::size_t& iterations)
{
    std::size_t const np = b.size();
    double const h = T / static_cast<double>(n);
    rho.assign(np, std::vector<double>(n + 1));
    for (std::size_t x = 0; x < np; ++x)
        std::fill(rho[x].begin(), rho[x].end(), b[x]);

    std::vector<std::vector<double>> integral(np, std::vector<double>(n + 1));
    for (iterations = 1; iterations <= opts.max_iterations; ++iterations)
    {
        for (std::size_t y = 0; y < np; ++y)
        {
            integral[y][0] = 0;
            for (std::size_t i = 1; i <= n; ++i)
                integral[y][i] = integral[y][i - 1]
                                 + 0.5 * h * (rho[y][i - 1] + rho[y][i]);
        }
        double diff = 0;
        double scale = 1;
        for (std::size_t x = 0; x < np; ++x)
        {
            for (std::size_t i = 0; i <= n; ++i)
            {
                double v = b[x];
                for (auto const& [y, q] : Q.rows[x])
                    v += q * integral[y][i];
                diff = std::max(diff, std::fabs(v - rho[x][i]));
                scale = std::max(scale, std::fabs(v));
                rho[x][i] = v;
            }
        }
        if (!std::isfinite(diff))
            return false;
        if (diff <= opts.picard_tol * scale)
            return true;
    }
    return false;
}
}  // namespace

//---------------------------------------------------------------------------//
void ScaleParams::validate() const
{
    if (!(beta > alpha))
        throw std::invalid_argument("scale order violated: need beta > alpha");
    if (!(alpha >= alpha_star) || !(beta <= alpha_sup))
        throw std::invalid_argument(
            "scale order violated: need alpha_star <= alpha < beta <= alpha_sup");
    if (!(alpha_star >= 0))
        throw std::invalid_argument("alpha_star must be >= 0");
    if (!(q > 0 && q < 1))
        throw std::invalid_argument("q must lie in (0, 1)");
    if (!(p >= 1))
        throw std::invalid_argument("p must be >= 1");
}

double lp_alpha_norm_pow(std::span<double const> norms,
                         std::span<double const> values,
                         double alpha,
                         double p)
{
    if (norms.size() != values.size())
        throw std::invalid_argument("norm and value spans differ in length");
    if (!(p >= 1) || !(alpha >= 0))
        throw std::invalid_argument("lp norm needs p >= 1 and alpha >= 0");
    double sum = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        if (values[i] == 0)
            continue;
        sum += std::exp(-alpha * norms[i]) * std::pow(std::fabs(values[i]), p);
    }
    return sum;
}

double lp_alpha_norm(std::span<double const> norms,
                     std::span<double const> values,
                     double alpha,
                     double p)
{
    return std::pow(lp_alpha_norm_pow(norms, values, alpha, p), 1.0 / p);
}

//---------------------------------------------------------------------------//
OvsjannikovBound ovsjannikov_constant_L(Configuration const& config,
                                        double C,
                                        double k,
                                        double q,
                                        double rho,
                                        double alpha_star,
                                        double alpha_sup,
                                        std::optional<double> R)
{
    if (!(C >= 0) || !(k >= 1) || !(q > 0 && q < 1) || !(rho > 0))
        throw std::invalid_argument(
            "Ovsjannikov bound needs C >= 0, k >= 1, 0 < q < 1, rho > 0");
    if (!(alpha_star >= 0) || !(alpha_sup >= alpha_star))
        throw std::invalid_argument("scale order violated: alpha_star > alpha_sup");

    auto const norms = point_norms(config);
    auto const counts = local_counts(config, rho);
    double const exponent = q / (2 * k);

    OvsjannikovBound result;
    for (std::size_t i = 0; i < norms.size(); ++i)
    {
        if (counts[i] > std::pow(norms[i], exponent))
        {
            if (!result.max_offender || norms[i] > *result.max_offender)
                result.max_offender = norms[i];
        }
    }
    if (R)
    {
        for (std::size_t i = 0; i < norms.size(); ++i)
        {
            if (norms[i] > *R && counts[i] > std::pow(norms[i], exponent))
            {
                throw std::invalid_argument(
                    "R-condition unsatisfiable on window: point at |x| = "
                    + std::to_string(norms[i]) + " has n_x = "
                    + std::to_string(counts[i]));
            }
        }
        result.R = *R;
    }
    else
    {
        result.R = result.max_offender.value_or(0.0);
    }
    result.n0R = static_cast<std::size_t>(
        std::count_if(norms.begin(), norms.end(),
                      [&](double r) { return r <= result.R; }));

    double const width = alpha_sup - alpha_star;
    result.L = C * std::exp(alpha_sup * rho)
               * ((std::pow(rho, q) + static_cast<double>(result.n0R))
                      * std::pow(width, q)
                  + std::pow(q / std::numbers::e, q));
    return result;
}

//---------------------------------------------------------------------------//
std::vector<double> OvsjannikovMatrix::apply(std::span<double const> z) const
{
    if (z.size() != rows.size())
        throw std::invalid_argument("vector length does not match matrix");
    std::vector<double> out(rows.size(), 0.0);
    for (std::size_t x = 0; x < rows.size(); ++x)
    {
        for (auto const& [y, q] : rows[x])
            out[x] += q * z[y];
    }
    return out;
}

OvsjannikovMatrix
gronwall_matrix(Configuration const& config, double B, double k, double rho)
{
    OvsjannikovMatrix Q;
    Q.norms = point_norms(config);
    auto const pts = config.points();
    std::map<PointId, std::size_t> index;
    for (std::size_t i = 0; i < pts.size(); ++i)
        index[pts[i].id] = i;
    Q.rows.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
    {
        double const n
            = static_cast<double>(neighbor_count(config, pts[i].position, rho));
        double const entry = B * std::pow(n, k);
        config.for_each_within(pts[i].position, rho, [&](Point const& y) {
            Q.rows[i].emplace_back(index.at(y.id), entry);
        });
        std::sort(Q.rows[i].begin(), Q.rows[i].end());
    }
    return Q;
}

//---------------------------------------------------------------------------//
GronwallConstant gronwall_constant_K(
    double alpha, double beta, double q, double L, double T, double tol)
{
    if (!(beta > alpha))
        throw std::invalid_argument("scale order violated: need beta > alpha");
    if (!(q > 0 && q < 1) || !(L >= 0) || !(T >= 0) || !(tol > 0))
        throw std::invalid_argument(
            "Gronwall constant needs 0 < q < 1, L >= 0, T >= 0, tol > 0");

    GronwallConstant K;
    if (L == 0 || T == 0)
        return K;

    double const log_x = std::log(L) + std::log(T) - q * std::log(beta - alpha);
    auto log_term = [&](double n) {
        return n * log_x + q * n * std::log(n) - std::lgamma(n + 1);
    };
    // ratio bound x e^q (n+1)^{q-1}, decreasing in n
    auto log_ratio_bound = [&](double n) {
        return log_x + q + (q - 1) * std::log(n + 1);
    };
    constexpr std::size_t max_terms = 200'000'000;
    double const log_half = std::log(0.5);
    double const log_tol = std::log(tol);

    double log_sum = 0;  // n = 0 term is 1
    for (std::size_t n = 1; n < max_terms; ++n)
    {
        double const dn = static_cast<double>(n);
        double const lt = log_term(dn);
        log_sum = log_add_exp(log_sum, lt);
        K.terms = n + 1;
        bool const small = lt < log_tol + std::max(0.0, log_sum);
        bool const ratio_ok = log_term(dn + 1) - lt < log_half
                              && log_ratio_bound(dn) < 0;
        if (small && ratio_ok)
        {
            double const rb = std::exp(log_ratio_bound(dn));
            K.tail_bound = std::exp(lt) * rb / (1 - rb);
            K.log_value = log_sum;
            K.value = std::exp(log_sum);
            return K;
        }
    }
    throw std::runtime_error("Gronwall series did not converge within "
                             + std::to_string(max_terms) + " terms");
}

//---------------------------------------------------------------------------//
GronwallReport check_gronwall_lemma(Configuration const& config,
                                    double B,
                                    double k,
                                    std::span<double const> b,
                                    double T,
                                    ScaleParams const& scale,
                                    double rho,
                                    GronwallCheckOptions const& options)
{
    scale.validate();
    if (b.size() != config.size())
        throw std::invalid_argument("b must have one entry per point");
    for (double v : b)
    {
        if (!(v >= 0) || !std::isfinite(v))
            throw std::invalid_argument("b_x must be finite and >= 0");
    }
    if (!(B >= 0) || !(k >= 1) || !(T >= 0))
        throw std::invalid_argument("Gronwall check needs B >= 0, k >= 1, T >= 0");

    GronwallReport report;
    auto const Q = gronwall_matrix(config, B, k, rho);

    // Refine until two successive grids agree on their shared points.
    std::size_t n = options.min_grid;
    std::vector<std::vector<double>> coarse, fine;
    std::size_t iters = 0;
    bool have_coarse = false;
    while (true)
    {
        if (n > options.max_grid)
            throw std::runtime_error(
                "Picard iteration did not settle on the finest grid");
        if (!picard_solve(Q, b, T, n, options, fine, iters))
        {
            have_coarse = false;
            n *= 2;
            continue;
        }
        if (have_coarse)
        {
            double diff = 0;
            double mag = 1;
            for (std::size_t x = 0; x < b.size(); ++x)
            {
                for (std::size_t i = 0; i < coarse[x].size(); ++i)
                {
                    diff = std::max(diff,
                                    std::fabs(coarse[x][i] - fine[x][2 * i]));
                    mag = std::max(mag, std::fabs(fine[x][2 * i]));
                }
            }
            if (diff <= options.grid_agreement * mag)
                break;
        }
        coarse = std::move(fine);
        fine.clear();
        have_coarse = true;
        n *= 2;
    }
    report.grid_points = n + 1;
    report.picard_iterations = iters;
    report.grid.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        report.grid[i] = T * static_cast<double>(i) / static_cast<double>(n);

    double lhs = 0;
    double weighted_b = 0;
    for (std::size_t x = 0; x < b.size(); ++x)
    {
        double const sup = *std::max_element(fine[x].begin(), fine[x].end());
        lhs += std::exp(-scale.beta * Q.norms[x]) * sup;
        weighted_b += std::exp(-scale.alpha * Q.norms[x]) * b[x];
    }
    report.solution = std::move(fine);

    report.L = ovsjannikov_constant_L(config, B, k, scale.q, rho,
                                      scale.alpha_star, scale.alpha_sup)
                   .L;
    report.K = gronwall_constant_K(scale.alpha, scale.beta, scale.q, report.L,
                                   T, options.series_tol);
    report.lhs = lhs;
    report.log_lhs = std::log(lhs);
    report.log_rhs = report.K.log_value + std::log(weighted_b);
    report.rhs = std::exp(report.log_rhs);
    report.log_slack = report.log_rhs - report.log_lhs;
    report.holds = (lhs == 0) || report.log_lhs <= report.log_rhs;
    return report;
}

nlohmann::json GronwallReport::to_json() const
{
    return {{"bound_value", rhs},
            {"log_bound_value", log_rhs},
            {"measured_value", lhs},
            {"slack", rhs - lhs},
            {"log_slack", log_slack},
            {"constants_used",
             {{"L", L},
              {"K_T", K.value},
              {"log_K_T", K.log_value},
              {"K_T_tail_bound", K.tail_bound},
              {"K_T_terms", K.terms}}},
            {"grid_info",
             {{"points", grid_points}, {"picard_iterations", picard_iterations}}},
            {"holds", holds}};
}

//---------------------------------------------------------------------------//
MomentReport check_moment_growth(MomentSample const& sample,
                                 MomentBoundInputs const& in)
{
    if (!in.phantom)
        throw std::invalid_argument("moment check needs the phantom configuration");
    in.scale.validate();
    Configuration const& phantom = *in.phantom;
    auto const norms = point_norms(phantom);
    auto const counts = local_counts(phantom, in.rho);

    MomentReport report;
    report.C1 = in.C1;
    report.C2 = in.C2;
    for (double v : sample.lhs)
        report.sup_lhs = std::max(report.sup_lhs, v);

    std::vector<double> c2(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        c2[i] = in.C2 * counts[i] * counts[i];
    report.c2_norm = phantom.empty()
                         ? 0.0
                         : lp_alpha_norm(norms, c2, in.scale.alpha, in.scale.p);
    double const base = sample.initial_moment + report.c2_norm;

    // L is linear in C, so evaluate once at C = 1 and rescale.
    double const L_unit
        = ovsjannikov_constant_L(phantom, 1.0, 2.0, in.scale.q, in.rho,
                                 in.scale.alpha_star, in.scale.alpha_sup)
              .L;
    auto log_rhs_for = [&](double c1) {
        auto const K = gronwall_constant_K(in.scale.alpha, in.scale.beta,
                                           in.scale.q, c1 * L_unit, in.T);
        return std::log(c1) + K.log_value + std::log(base);
    };

    report.L = in.C1 * L_unit;
    auto const K = gronwall_constant_K(in.scale.alpha, in.scale.beta,
                                       in.scale.q, report.L, in.T);
    report.K_log = K.log_value;
    report.log_rhs = std::log(in.C1) + K.log_value + std::log(base);
    report.rhs = std::exp(report.log_rhs);
    report.holds = report.sup_lhs == 0
                   || std::log(report.sup_lhs) <= report.log_rhs;

    if (report.sup_lhs == 0)
    {
        report.empirical_min_C1 = 0;
        return report;
    }
    double const target = std::log(report.sup_lhs);
    double lo = std::log(1e-300);
    double hi = 0;
    try
    {
        int doublings = 0;
        while (log_rhs_for(std::exp(hi)) < target)
        {
            lo = hi;
            hi += std::log(2.0);
            if (++doublings > 200)
                throw std::runtime_error("no bracketing C1");
        }
        for (int it = 0; it < 200; ++it)
        {
            double const mid = 0.5 * (lo + hi);
            if (log_rhs_for(std::exp(mid)) < target)
                lo = mid;
            else
                hi = mid;
        }
        report.empirical_min_C1 = std::exp(hi);
    }
    catch (std::runtime_error const&)
    {
        report.empirical_min_C1 = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

nlohmann::json MomentReport::to_json() const
{
    return {{"bound_value", rhs},
            {"log_bound_value", log_rhs},
            {"measured_value", sup_lhs},
            {"slack", rhs - sup_lhs},
            {"constants_used",
             {{"C1", C1},
              {"C2", C2},
              {"L", L},
              {"log_K_T", K_log},
              {"C2_norm", c2_norm}}},
            {"empirical_min_C1", empirical_min_C1},
            {"holds", holds}};
}

//---------------------------------------------------------------------------//
nlohmann::json to_json(ScaleParams const& s)
{
    return {{"alpha_star", s.alpha_star},
            {"alpha_sup", s.alpha_sup},
            {"alpha", s.alpha},
            {"beta", s.beta},
            {"p", s.p},
            {"q", s.q}};
}

ScaleParams scale_params_from_json(nlohmann::json const& j)
{
    ScaleParams s;
    s.alpha_star = j.value("alpha_star", s.alpha_star);
    s.alpha_sup = j.value("alpha_sup", s.alpha_sup);
    s.alpha = j.value("alpha", s.alpha);
    s.beta = j.value("beta", s.beta);
    s.p = j.value("p", s.p);
    s.q = j.value("q", s.q);
    s.validate();
    return s;
}

//---------------------------------------------------------------------------//
}  // namespace ips
