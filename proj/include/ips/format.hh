//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ips/format.hh
//! Locale-independent shortest round-trip formatting of doubles.
//---------------------------------------------------------------------------//
#pragma once

#include <charconv>
#include <string>

namespace ips
{
//---------------------------------------------------------------------------//
inline std::string format_double(double v)
{
    char buf[64];
    auto const res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

//---------------------------------------------------------------------------//
}  // namespace ips
