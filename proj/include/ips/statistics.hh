//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ips/statistics.hh
//! Small descriptive statistics used by the studies and checks.
//---------------------------------------------------------------------------//
#pragma once

#include <span>
#include <vector>

namespace ips
{
//---------------------------------------------------------------------------//
double mean(std::span<double const> x);

// Unbiased sample variance (0 for fewer than two values)
double sample_variance(std::span<double const> x);

// Standard error of the mean
double standard_error(std::span<double const> x);

// Ranks starting at 1, ties get the average rank
std::vector<double> average_ranks(std::span<double const> x);

// Spearman rank correlation; 0 if either input has zero rank variance
double spearman(std::span<double const> x, std::span<double const> y);

// Spearman correlation of the values against their index 0, 1, ...
double spearman_trend(std::span<double const> y);

//---------------------------------------------------------------------------//
}  // namespace ips
