// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/rng.hpp
//! Counter-based random streams (Philox4x32-10) with splittable keys.
//!
//! A Stream is fully described by a 64-bit key and a block counter, so any
//! stream can be reconstructed from (seed, replica, node path) alone. This is
//! what makes Monte Carlo aggregates independent of thread count and of the
//! order in which replicas or tree nodes are visited.

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace bpve {

//! SplitMix64 finalizer. Used only for key derivation, never as a generator.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

//! Key of the child stream `index` of a parent stream.
[[nodiscard]] constexpr std::uint64_t derive_key(std::uint64_t parent,
                                                 std::uint64_t index) noexcept
{
    return splitmix64(parent ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

//! The Philox4x32 bijection with 10 rounds (Salmon et al., SC'11).
struct Philox4x32
{
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    [[nodiscard]] static constexpr Counter block(Counter ctr, Key key) noexcept
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9U;
                key[1] += 0xBB67AE85U;
            }
            std::uint64_t const p0 = std::uint64_t{0xD2511F53U} * ctr[0];
            std::uint64_t const p1 = std::uint64_t{0xCD9E8D57U} * ctr[2];
            auto const hi0 = static_cast<std::uint32_t>(p0 >> 32);
            auto const lo0 = static_cast<std::uint32_t>(p0);
            auto const hi1 = static_cast<std::uint32_t>(p1 >> 32);
            auto const lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

//! Deterministic random stream keyed by 64 bits.
//!
//! Satisfies UniformRandomBitGenerator. Copying a stream copies its position.
class Stream
{
  public:
    using result_type = std::uint64_t;

    explicit constexpr Stream(std::uint64_t key) noexcept : key_{key} {}

    [[nodiscard]] static constexpr result_type min() noexcept { return 0; }
    [[nodiscard]] static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept { return next_u64(); }

    constexpr std::uint64_t next_u64() noexcept
    {
        if (buffered_ == 0) {
            refill();
        }
        --buffered_;
        return buffer_[buffered_];
    }

    //! Uniform double on the open interval (0, 1), 53-bit resolution.
    constexpr double uniform() noexcept
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    [[nodiscard]] constexpr Stream split(std::uint64_t index) const noexcept
    {
        return Stream{derive_key(key_, index)};
    }

    [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }

    //! Number of 64-bit words consumed so far.
    [[nodiscard]] constexpr std::uint64_t position() const noexcept
    {
        return 2 * block_ - buffered_;
    }

  private:
    constexpr void refill() noexcept
    {
        Philox4x32::Counter const ctr{static_cast<std::uint32_t>(block_),
                                      static_cast<std::uint32_t>(block_ >> 32), 0U, 0U};
        Philox4x32::Key const key{static_cast<std::uint32_t>(key_),
                                  static_cast<std::uint32_t>(key_ >> 32)};
        auto const out = Philox4x32::block(ctr, key);
        // Served in reverse; buffer_[1] goes out first.
        buffer_[1] = (std::uint64_t{out[1]} << 32) | out[0];
        buffer_[0] = (std::uint64_t{out[3]} << 32) | out[2];
        buffered_ = 2;
        ++block_;
    }

    std::uint64_t key_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    unsigned buffered_ = 0;
};

//! Root stream of one Monte Carlo replica.
[[nodiscard]] constexpr Stream replica_stream(std::uint64_t seed,
                                              std::uint64_t replica) noexcept
{
    return Stream{derive_key(splitmix64(seed), replica)};
}

}  // namespace bpve
