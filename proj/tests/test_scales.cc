//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file test_scales.cc
//---------------------------------------------------------------------------//
#include "ips/scales.hh"

#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <nlohmann/json.hpp>

#include "doctest.h"
#include "ips/rng.hh"

using namespace ips;
using big = boost::multiprecision::cpp_bin_float_50;

namespace
{
big reference_K(double alpha, double beta, double q, double L, double T)
{
    big sum = 1;
    big const x = big(L) * big(T) / pow(big(beta - alpha), big(q));
    for (int n = 1; n < 500; ++n)
    {
        big const bn = n;
        sum += pow(x, bn) * pow(bn, big(q) * bn) / boost::multiprecision::tgamma(bn + 1);
    }
    return sum;
}

Configuration random_config(int n, double side, std::uint64_t key)
{
    Window w(2, side, BoundaryMode::open);
    StreamRng rng(key);
    Configuration c(w);
    for (int i = 0; i < n; ++i)
        c.insert({i, {rng.uniform(0, side), rng.uniform(0, side), 0}});
    return c;
}
}  // namespace

TEST_CASE("weighted norms")
{
    std::vector<double> norms{0}, values{2};
    CHECK(lp_alpha_norm(norms, values, 0.7, 2) == 2);
    std::vector<double> zero{0};
    CHECK(lp_alpha_norm(norms, zero, 0.7, 2) == 0);

    std::vector<double> n3{0, 1, 2}, v3{1, -2, 3};
    double const direct = std::pow(
        1 + std::exp(-0.5) * 8 + std::exp(-1.0) * 27, 1.0 / 3);
    CHECK(lp_alpha_norm(n3, v3, 0.5, 3) == doctest::Approx(direct));
    CHECK(lp_alpha_norm(n3, v3, 0.9, 3) <= lp_alpha_norm(n3, v3, 0.5, 3));
    CHECK_THROWS(lp_alpha_norm(n3, v3, 0.5, 0.5));
}

TEST_CASE("scale params validation")
{
    ScaleParams s;
    CHECK_NOTHROW(s.validate());
    s.beta = s.alpha;
    CHECK_THROWS_WITH(s.validate(), doctest::Contains("scale order violated"));
    s = {};
    s.q = 1;
    CHECK_THROWS(s.validate());
}

TEST_CASE("ovsjannikov constant")
{
    Configuration empty(Window(2, 4, BoundaryMode::open));
    auto const r = ovsjannikov_constant_L(empty, 1, 1, 0.5, 1, 0, 1, 1.0);
    double const expect
        = std::exp(1.0) * (1 + std::sqrt(std::exp(-1.0) * 0.5));
    CHECK(r.L == doctest::Approx(expect));
    CHECK(ovsjannikov_constant_L(empty, 0, 1, 0.5, 1, 0, 1, 1.0).L == 0);

    // Two close points far from the origin: n_x = 2 > |x|^{1/4} fails for
    // |x| < 16, so R is the larger norm
    Configuration c(Window(2, 20, BoundaryMode::open));
    c.insert({0, {3, 4, 0}});
    c.insert({1, {3, 4.5, 0}});
    auto const computed = ovsjannikov_constant_L(c, 1, 1, 0.5, 1, 0, 1);
    CHECK(computed.R == doctest::Approx(std::hypot(3.0, 4.5)));
    CHECK(computed.n0R == 2);
    CHECK_THROWS_WITH(ovsjannikov_constant_L(c, 1, 1, 0.5, 1, 0, 1, 5.2),
                      doctest::Contains("R-condition unsatisfiable"));
}

TEST_CASE("gronwall constant")
{
    CHECK(gronwall_constant_K(0, 1, 0.5, 0, 1).value == 1);
    CHECK(gronwall_constant_K(0, 1, 0.5, 1, 0).value == 1);
    CHECK_THROWS(gronwall_constant_K(1, 1, 0.5, 1, 1));

    auto const K = gronwall_constant_K(0, 1, 0.5, 1, 1, 1e-12);
    double const ref = static_cast<double>(reference_K(0, 1, 0.5, 1, 1));
    CHECK(std::abs(K.value - ref) <= 10 * 1e-12 * ref);
    CHECK(K.tail_bound >= 0);
    CHECK(K.tail_bound < 1e-11 * ref);
}

TEST_CASE("gronwall lemma single point closed form")
{
    Configuration c(Window(2, 4, BoundaryMode::open));
    c.insert({0, {1, 1, 0}});
    std::vector<double> b{1.5};
    ScaleParams s;
    auto const r = check_gronwall_lemma(c, 0.8, 1, b, 1.0, s, 1.0);
    REQUIRE(r.solution.size() == 1);
    double worst = 0;
    for (std::size_t i = 0; i < r.grid.size(); ++i)
    {
        double const exact = 1.5 * std::exp(0.8 * r.grid[i]);
        worst = std::max(worst, std::abs(r.solution[0][i] - exact));
    }
    CHECK(worst < 1e-6);
    CHECK(r.holds);
}

TEST_CASE("gronwall lemma with B = 0 reduces to monotonicity")
{
    auto const c = random_config(30, 5, 3);
    std::vector<double> b(30, 1.0);
    auto const r = check_gronwall_lemma(c, 0, 1, b, 1.0, ScaleParams{}, 1.0);
    CHECK(r.holds);
    CHECK(r.K.value == 1);
    for (auto const& row : r.solution)
        CHECK(row.back() == 1.0);
}

TEST_CASE("gronwall lemma on a random instance")
{
    auto const c = random_config(50, 10, 21);
    StreamRng rng(4);
    std::vector<double> b;
    for (int i = 0; i < 50; ++i)
        b.push_back(rng.uniform());
    auto const r = check_gronwall_lemma(c, 0.2, 1, b, 1.0, ScaleParams{}, 1.0);
    CHECK(r.holds);
    CHECK(r.log_slack >= 0);
    auto const j = r.to_json();
    CHECK(j.at("measured_value").get<double>() == r.lhs);
}

TEST_CASE("moment growth report")
{
    Configuration c(Window(1, 4, BoundaryMode::open));
    c.insert({0, {0, 0, 0}});
    MomentSample zero{{0, 1}, {0, 0}, 0};
    MomentBoundInputs in;
    in.phantom = &c;
    in.scale.p = 2;
    auto const r0 = check_moment_growth(zero, in);
    CHECK(r0.holds);
    CHECK(r0.empirical_min_C1 == 0);

    // The reported C1 is the threshold of the bound
    MomentSample sample{{0, 1}, {3, 7}, 1};
    auto const r1 = check_moment_growth(sample, in);
    REQUIRE(r1.empirical_min_C1 > 0);
    in.C1 = r1.empirical_min_C1 * 1.001;
    CHECK(check_moment_growth(sample, in).holds);
    in.C1 = r1.empirical_min_C1 * 0.999;
    CHECK_FALSE(check_moment_growth(sample, in).holds);
}

TEST_CASE("scale params json")
{
    ScaleParams s;
    s.alpha = 0.1;
    s.p = 3;
    auto const back = scale_params_from_json(to_json(s));
    CHECK(back.alpha == 0.1);
    CHECK(back.p == 3);
}
