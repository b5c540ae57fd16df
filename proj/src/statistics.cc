//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file statistics.cc
//---------------------------------------------------------------------------//
#include "ips/statistics.hh"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ips
{
//---------------------------------------------------------------------------//
double mean(std::span<double const> x)
{
    if (x.empty())
        return 0;
    return std::accumulate(x.begin(), x.end(), 0.0)
           / static_cast<double>(x.size());
}

double sample_variance(std::span<double const> x)
{
    if (x.size() < 2)
        return 0;
    double const m = mean(x);
    double ss = 0;
    for (double v : x)
        ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double standard_error(std::span<double const> x)
{
    if (x.empty())
        return 0;
    return std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
}

std::vector<double> average_ranks(std::span<double const> x)
{
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size())
    {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]])
            ++j;
        double const r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<double const> x, std::span<double const> y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("spearman: size mismatch");
    auto const rx = average_ranks(x);
    auto const ry = average_ranks(y);
    double const mx = mean(rx);
    double const my = mean(ry);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i)
    {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0)
        return 0;
    return sxy / std::sqrt(sxx * syy);
}

double spearman_trend(std::span<double const> y)
{
    std::vector<double> idx(y.size());
    std::iota(idx.begin(), idx.end(), 0.0);
    return spearman(idx, y);
}

//---------------------------------------------------------------------------//
}  // namespace ips
