//---------------------------------*-C++-*-----------------------------------//
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ips/rng.hh
//! Counter-based random streams keyed by (seed, stream identifiers).
//---------------------------------------------------------------------------//
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace ips
{
//---------------------------------------------------------------------------//
/*!
 * SplitMix64 output finalizer.
 *
 * Used to hash seeds and stream tags into Philox keys.
 */
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

//! Derive a child key from a parent key and a tag.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t tag)
{
    return mix64(mix64(parent) ^ (tag * 0xd1b54a32d192ed03ull + 1));
}

//! Well-separated stream tags.
enum class StreamTag : std::uint64_t
{
    driving = 1,
    initial_lifetime = 2,
    brownian = 3,
    initial_config = 4,
    replica = 5,
    sequential_noise = 6,
    sampling = 7,
};

constexpr std::uint64_t derive_key(std::uint64_t parent, StreamTag tag)
{
    return derive_key(parent, static_cast<std::uint64_t>(tag));
}

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 block function (Salmon et al., SC'11).
 */
class Philox4x32
{
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter apply(Counter ctr, Key key)
    {
        for (int round = 0; round < 10; ++round)
        {
            ctr = single_round(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

  private:
    static constexpr Counter single_round(Counter const& ctr, Key const& key)
    {
        std::uint64_t const p0 = std::uint64_t{0xD2511F53u} * ctr[0];
        std::uint64_t const p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
        auto const hi0 = static_cast<std::uint32_t>(p0 >> 32);
        auto const lo0 = static_cast<std::uint32_t>(p0);
        auto const hi1 = static_cast<std::uint32_t>(p1 >> 32);
        auto const lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
};

//---------------------------------------------------------------------------//
//! Map 64 random bits onto [0, 1).
inline double to_unit_closed_open(std::uint64_t bits)
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

//! Map 64 random bits onto (0, 1).
inline double to_unit_open(std::uint64_t bits)
{
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

//! Standard normal from two 64-bit words (Box-Muller, cosine branch).
inline double to_standard_normal(std::uint64_t a, std::uint64_t b)
{
    double const radius = std::sqrt(-2.0 * std::log(to_unit_open(a)));
    return radius * std::cos(2.0 * std::numbers::pi * to_unit_closed_open(b));
}

//---------------------------------------------------------------------------//
/*!
 * Pure function of (key, counter words): two 64-bit outputs.
 */
inline std::array<std::uint64_t, 2>
keyed_block(std::uint64_t key, std::array<std::uint32_t, 4> counter)
{
    Philox4x32::Key k{static_cast<std::uint32_t>(key),
                      static_cast<std::uint32_t>(key >> 32)};
    auto const out = Philox4x32::apply(counter, k);
    return {(std::uint64_t{out[0]} << 32) | out[1],
            (std::uint64_t{out[2]} << 32) | out[3]};
}

//! Standard normal variate as a pure function of key and counter words.
inline double keyed_normal(std::uint64_t key, std::array<std::uint32_t, 4> ctr)
{
    auto const w = keyed_block(key, ctr);
    return to_standard_normal(w[0], w[1]);
}

//---------------------------------------------------------------------------//
/*!
 * Sequential engine over one keyed stream.
 *
 * Satisfies UniformRandomBitGenerator, but the helpers below should be
 * preferred over <random> distributions: their output is identical across
 * standard library implementations.
 */
class StreamRng
{
  public:
    using result_type = std::uint64_t;

    explicit StreamRng(std::uint64_t key) : key_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max()
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()()
    {
        if (buffered_)
        {
            buffered_ = false;
            return buffer_;
        }
        auto const w = keyed_block(
            key_,
            {static_cast<std::uint32_t>(counter_),
             static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u});
        ++counter_;
        buffer_ = w[1];
        buffered_ = true;
        return w[0];
    }

    double uniform() { return to_unit_closed_open((*this)()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double uniform_open() { return to_unit_open((*this)()); }
    double exponential(double rate = 1.0)
    {
        return -std::log(uniform_open()) / rate;
    }
    double normal()
    {
        auto const a = (*this)();
        auto const b = (*this)();
        return to_standard_normal(a, b);
    }
    std::uint64_t key() const { return key_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_{0};
    std::uint64_t buffer_{0};
    bool buffered_{false};
};

//! Poisson variate by counting unit-rate arrivals in [0, mean].
inline std::uint64_t sample_poisson(StreamRng& rng, double mean)
{
    std::uint64_t count = 0;
    double elapsed = rng.exponential();
    while (elapsed <= mean)
    {
        ++count;
        elapsed += rng.exponential();
    }
    return count;
}

//---------------------------------------------------------------------------//
}  // namespace ips
